#pragma once

// Two-sample tests for RDPGs calibrated by permutation.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdpg/embed.hpp"
#include "rdpg/mmd.hpp"
#include "rdpg/model.hpp"

namespace rdpg {

/// identity:   F = G up to an orthogonal transformation.
/// scaling:    F = G o c for some c > 0 (rows divided by n^{-1/2} ||X||_F).
/// projection: equality after mapping rows onto the unit sphere.
/// sparse:     known sparsity factors, rows divided by sqrt(alpha).
enum class Variant { identity, scaling, projection, sparse };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

struct TestConfig {
  Variant variant = Variant::identity;
  int dimension = 2;
  KernelSpec kernel = KernelSpec::gaussian(0.5);
  int permutations = 200;
  double alpha_level = 0.05;
  std::uint64_t seed = 0;
  std::optional<double> sparsity_a;
  std::optional<double> sparsity_b;
  double projection_floor = 1e-6;

  /// Throws Error when an invariant is violated.
  void validate() const;
};

struct TestReport {
  double statistic = 0.0;          // U_{n,m} on the preprocessed clouds
  double scaled_statistic = 0.0;   // (n + m) * statistic
  std::vector<double> null_statistics;
  double p_value = 1.0;
  bool reject = false;
  int n = 0;
  int m = 0;
  double rho = 0.0;                // m / (n + m)
  Variant variant = Variant::identity;
  std::string kernel;
  int permutations = 0;
  double alpha_level = 0.05;
  std::uint64_t seed = 0;
  std::optional<double> scale_x;   // s_X for scaling, 1/sqrt(alpha) for sparse
  std::optional<double> scale_y;

  /// Flat JSON object; doubles round-trip exactly.
  std::string to_json() const;
};

/// Applies the variant's row normalisation. `factor` is the sparsity factor
/// for the sparse variant and ignored otherwise. When `scale` is non-null it
/// receives s = n^{-1/2} ||X||_F (scaling) or sqrt(alpha) (sparse).
Eigen::MatrixXd preprocess(const Eigen::MatrixXd& rows, Variant variant,
                           std::optional<double> factor = std::nullopt,
                           double projection_floor = 1e-6,
                           double* scale = nullptr);

/// Pooled-sample U statistics where the kernel matrix of the pooled rows is
/// computed once and each split is scored in O(n (n + m)).
class PooledStatistic {
 public:
  PooledStatistic(const KernelSpec& spec, const Eigen::MatrixXd& pooled, int n);

  /// U for the split that takes `first` (n indices, any order) as the
  /// x-sample and everything else as the y-sample.
  double operator()(std::span<const int> first) const;

  /// U for the identity split (rows 0..n-1 versus the rest).
  double observed() const;

 private:
  Eigen::MatrixXd k_;
  Eigen::VectorXd col_sums_;
  double total_ = 0.0;
  double trace_ = 0.0;
  int n_;
  int m_;
};

/// B permutation statistics of the pooled rows (first n rows are the
/// x-sample). Permutation b draws from make_stream(seed, {b}).
std::vector<double> permutation_null(const Eigen::MatrixXd& pooled, int n, int m,
                                     const KernelSpec& spec, int permutations,
                                     std::uint64_t seed);

/// (1 + #{b : null_b >= observed}) / (B + 1).
double p_value(double observed, std::span<const double> null);

/// Test on point clouds that are already embedded (e.g. true latent
/// positions). Applies preprocessing per config.variant.
TestReport two_sample_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                           const TestConfig& config);

/// Full pipeline: embed both graphs into R^d, preprocess, permutation test.
TestReport two_sample_test(const Graph& a, const Graph& b, const TestConfig& config);

}  // namespace rdpg
