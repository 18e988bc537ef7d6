#pragma once

// Kernels and maximum mean discrepancy estimators. Point sets are matrices
// with one point per row.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>

#include "rdpg/model.hpp"
#include "rdpg/random.hpp"

namespace rdpg {

class KernelSpec {
 public:
  struct Gaussian {
    double sigma;
  };
  struct InverseMultiquadric {
    double c;
    double beta;
  };
  /// k_q(x, y) = (|x|^q + |y|^q - |x - y|^q) / 2. Not translation invariant
  /// and not smooth at the origin; experimental.
  struct Energy {
    double q;
  };
  using Params = std::variant<Gaussian, InverseMultiquadric, Energy>;

  /// exp(-|x - y|^2 / (2 sigma^2)).
  static KernelSpec gaussian(double sigma);
  /// (c^2 + |x - y|^2)^(-beta).
  static KernelSpec inverse_multiquadric(double c, double beta);
  static KernelSpec energy(double q);

  const Params& params() const { return params_; }
  bool is_radial() const { return !std::holds_alternative<Energy>(params_); }
  /// e.g. "gaussian(sigma=0.5)"
  std::string describe() const;

  template <typename A, typename B>
  double operator()(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) const {
    if (const auto* g = std::get_if<Gaussian>(&params_)) {
      return std::exp(-(x - y).squaredNorm() / (2.0 * g->sigma * g->sigma));
    }
    if (const auto* m = std::get_if<InverseMultiquadric>(&params_)) {
      return std::pow(m->c * m->c + (x - y).squaredNorm(), -m->beta);
    }
    const double q = std::get<Energy>(params_).q;
    return 0.5 * (std::pow(x.norm(), q) + std::pow(y.norm(), q) -
                  std::pow((x - y).norm(), q));
  }

 private:
  explicit KernelSpec(Params p) : params_(p) {}
  Params params_;
};

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);

/// Entry (i, j) = kernel(a_i, b_j).
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& a,
                     const Eigen::MatrixXd& b);
/// Symmetric gram(spec, a, a), evaluating each unordered pair once.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& a);

/// Unbiased MMD^2 estimate; may be negative. Requires n, m >= 2.
double u_statistic(const KernelSpec& spec, const Eigen::MatrixXd& x,
                   const Eigen::MatrixXd& y);

/// Biased (plug-in) MMD^2 estimate, the squared RKHS distance between the
/// empirical mean embeddings. Requires n, m >= 1.
double v_statistic(const KernelSpec& spec, const Eigen::MatrixXd& x,
                   const Eigen::MatrixXd& y);

struct PopulationEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Population MMD^2 between F and G. Exact when both are point-mass
/// mixtures; otherwise the mean of N independent draws of
/// k(X,X') + k(Y,Y') - k(X,Y') - k(X',Y), with its standard error.
PopulationEstimate mmd_population_oracle(const KernelSpec& spec,
                                         const LatentDistribution& f,
                                         const LatentDistribution& g,
                                         std::size_t samples, Engine& rng);

/// Median pairwise Euclidean distance of the pooled rows of x and y.
double median_pairwise_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Compensated (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace rdpg
