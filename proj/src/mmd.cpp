#include "rdpg/mmd.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

#include "rdpg/errors.hpp"

namespace rdpg {

KernelSpec KernelSpec::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw Error("gaussian kernel: sigma must be positive");
  return KernelSpec(Gaussian{sigma});
}

KernelSpec KernelSpec::inverse_multiquadric(double c, double beta) {
  if (!(c > 0.0) || !(beta > 0.0)) {
    throw Error("inverse multiquadric kernel: c and beta must be positive");
  }
  return KernelSpec(InverseMultiquadric{c, beta});
}

KernelSpec KernelSpec::energy(double q) {
  if (!(q > 0.0 && q < 2.0)) throw Error("energy kernel: q must lie in (0, 2)");
  return KernelSpec(Energy{q});
}

std::string KernelSpec::describe() const {
  std::ostringstream s;
  if (const auto* g = std::get_if<Gaussian>(&params_)) {
    s << "gaussian(sigma=" << g->sigma << ")";
  } else if (const auto* m = std::get_if<InverseMultiquadric>(&params_)) {
    s << "inverse_multiquadric(c=" << m->c << ",beta=" << m->beta << ")";
  } else {
    s << "energy(q=" << std::get<Energy>(params_).q << ")";
  }
  return s.str();
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw DimensionError("kernel_eval: dimension mismatch");
  return spec(x, y);
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& a,
                     const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw DimensionError("gram: dimension mismatch");
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) k(i, j) = spec(a.row(i), b.row(j));
  }
  return k;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = spec(a.row(j), a.row(j));
    for (Eigen::Index i = j + 1; i < n; ++i) {
      k(i, j) = k(j, i) = spec(a.row(i), a.row(j));
    }
  }
  return k;
}

namespace {

struct BlockSums {
  double xx_off = 0.0;   // sum over ordered pairs i != j within x
  double xx_diag = 0.0;
  double xy = 0.0;
  double yy_off = 0.0;
  double yy_diag = 0.0;
};

BlockSums block_sums(const KernelSpec& spec, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& y) {
  if (x.cols() != y.cols()) throw DimensionError("statistic: dimension mismatch");
  BlockSums s;
  auto within = [&](const Eigen::MatrixXd& p, double& off, double& diag) {
    CompensatedSum o, d;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      d.add(spec(p.row(i), p.row(i)));
      for (Eigen::Index j = i + 1; j < p.rows(); ++j) o.add(spec(p.row(i), p.row(j)));
    }
    off = 2.0 * o.value();
    diag = d.value();
  };
  within(x, s.xx_off, s.xx_diag);
  within(y, s.yy_off, s.yy_diag);
  CompensatedSum c;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < y.rows(); ++k) c.add(spec(x.row(i), y.row(k)));
  }
  s.xy = c.value();
  return s;
}

}  // namespace

double u_statistic(const KernelSpec& spec, const Eigen::MatrixXd& x,
                   const Eigen::MatrixXd& y) {
  if (x.rows() < 2 || y.rows() < 2) {
    throw InsufficientSampleError("u_statistic: need at least 2 points per sample");
  }
  const BlockSums s = block_sums(spec, x, y);
  const double n = static_cast<double>(x.rows());
  const double m = static_cast<double>(y.rows());
  return s.xx_off / (n * (n - 1.0)) - 2.0 * s.xy / (n * m) +
         s.yy_off / (m * (m - 1.0));
}

double v_statistic(const KernelSpec& spec, const Eigen::MatrixXd& x,
                   const Eigen::MatrixXd& y) {
  if (x.rows() < 1 || y.rows() < 1) {
    throw InsufficientSampleError("v_statistic: empty sample");
  }
  const BlockSums s = block_sums(spec, x, y);
  const double n = static_cast<double>(x.rows());
  const double m = static_cast<double>(y.rows());
  return (s.xx_off + s.xx_diag) / (n * n) - 2.0 * s.xy / (n * m) +
         (s.yy_off + s.yy_diag) / (m * m);
}

PopulationEstimate mmd_population_oracle(const KernelSpec& spec,
                                         const LatentDistribution& f,
                                         const LatentDistribution& g,
                                         std::size_t samples, Engine& rng) {
  if (dimension(f) != dimension(g)) {
    throw DimensionError("mmd_population_oracle: dimension mismatch");
  }
  const auto* pf = std::get_if<PointMassMixture>(&f);
  const auto* pg = std::get_if<PointMassMixture>(&g);
  if (pf && pg) {
    validate(f);
    validate(g);
    auto expect = [&](const PointMassMixture& a, const PointMassMixture& b) {
      CompensatedSum s;
      for (Eigen::Index i = 0; i < a.atoms.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.atoms.rows(); ++j) {
          s.add(a.weights[i] * b.weights[j] * spec(a.atoms.row(i), b.atoms.row(j)));
        }
      }
      return s.value();
    };
    return {expect(*pf, *pf) - 2.0 * expect(*pf, *pg) + expect(*pg, *pg), 0.0};
  }
  if (samples < 2) throw InsufficientSampleError("mmd_population_oracle: need N >= 2");
  const Eigen::MatrixXd x1 = sample_latent(f, samples, rng).positions;
  const Eigen::MatrixXd x2 = sample_latent(f, samples, rng).positions;
  const Eigen::MatrixXd y1 = sample_latent(g, samples, rng).positions;
  const Eigen::MatrixXd y2 = sample_latent(g, samples, rng).positions;
  CompensatedSum sum, sum_sq;
  for (Eigen::Index i = 0; i < x1.rows(); ++i) {
    const double h = spec(x1.row(i), x2.row(i)) + spec(y1.row(i), y2.row(i)) -
                     spec(x1.row(i), y2.row(i)) - spec(x2.row(i), y1.row(i));
    sum.add(h);
    sum_sq.add(h * h);
  }
  const double count = static_cast<double>(samples);
  const double mean = sum.value() / count;
  const double var = std::max(0.0, (sum_sq.value() - count * mean * mean) / (count - 1.0));
  return {mean, std::sqrt(var / count)};
}

double median_pairwise_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.cols() != y.cols()) throw DimensionError("median heuristic: dimension mismatch");
  Eigen::MatrixXd pooled(x.rows() + y.rows(), x.cols());
  pooled << x, y;
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(pooled.rows() * (pooled.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < pooled.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < pooled.rows(); ++j) {
      d.push_back((pooled.row(i) - pooled.row(j)).norm());
    }
  }
  if (d.empty()) throw InsufficientSampleError("median heuristic: need two points");
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(d.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace rdpg
