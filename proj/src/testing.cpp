#include "rdpg/testing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "rdpg/errors.hpp"
#include "rdpg/random.hpp"

namespace rdpg {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::identity: return "identity";
    case Variant::scaling: return "scaling";
    case Variant::projection: return "projection";
    case Variant::sparse: return "sparse";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::identity, Variant::scaling, Variant::projection,
                    Variant::sparse}) {
    if (to_string(v) == name) return v;
  }
  throw Error("unknown test variant '" + name + "'");
}

void TestConfig::validate() const {
  if (dimension < 1) throw Error("embedding dimension must be >= 1");
  if (permutations < 1) throw Error("permutation count B must be >= 1");
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) {
    throw Error("significance level must lie in (0, 1)");
  }
  if (projection_floor < 0.0) throw Error("projection floor must be >= 0");
  if (variant == Variant::sparse) {
    for (const auto& f : {sparsity_a, sparsity_b}) {
      if (!f || !(*f > 0.0 && *f <= 1.0)) {
        throw Error("sparse variant requires both sparsity factors in (0, 1]");
      }
    }
  }
}

std::string TestReport::to_json() const {
  nlohmann::ordered_json j;
  j["statistic"] = statistic;
  j["scaled_statistic"] = scaled_statistic;
  j["p_value"] = p_value;
  j["reject"] = reject;
  j["alpha"] = alpha_level;
  j["n"] = n;
  j["m"] = m;
  j["rho"] = rho;
  j["variant"] = to_string(variant);
  j["kernel"] = kernel;
  j["B"] = permutations;
  j["seed"] = seed;
  if (scale_x) j["scale_x"] = *scale_x;
  if (scale_y) j["scale_y"] = *scale_y;
  return j.dump(2);
}

Eigen::MatrixXd preprocess(const Eigen::MatrixXd& rows, Variant variant,
                           std::optional<double> factor, double projection_floor,
                           double* scale) {
  switch (variant) {
    case Variant::identity:
      return rows;
    case Variant::scaling: {
      const double s = rows.norm() / std::sqrt(static_cast<double>(rows.rows()));
      if (!(s > 0.0)) throw DegenerateRowError("scaling: embedding is identically zero", {});
      if (scale) *scale = s;
      return rows / s;
    }
    case Variant::projection: {
      std::vector<std::size_t> bad;
      Eigen::VectorXd norms(rows.rows());
      for (Eigen::Index i = 0; i < rows.rows(); ++i) norms(i) = rows.row(i).stableNorm();
      for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        if (!(norms(i) > projection_floor)) bad.push_back(static_cast<std::size_t>(i));
      }
      if (!bad.empty()) {
        std::ostringstream msg;
        msg << "projection: " << bad.size() << " row(s) with norm <= "
            << projection_floor << " (first: vertex " << bad.front() << ")";
        throw DegenerateRowError(msg.str(), std::move(bad));
      }
      return (rows.array().colwise() / norms.array()).matrix();
    }
    case Variant::sparse: {
      if (!factor || !(*factor > 0.0 && *factor <= 1.0)) {
        throw Error("sparse: sparsity factor in (0, 1] required");
      }
      const double s = std::sqrt(*factor);
      if (scale) *scale = s;
      return rows / s;
    }
  }
  return rows;
}

PooledStatistic::PooledStatistic(const KernelSpec& spec, const Eigen::MatrixXd& pooled,
                                 int n)
    : k_(gram(spec, pooled)), n_(n), m_(static_cast<int>(pooled.rows()) - n) {
  if (n_ < 2 || m_ < 2) {
    throw InsufficientSampleError("permutation test: need at least 2 points per sample");
  }
  col_sums_.resize(k_.cols());
  CompensatedSum total, trace;
  for (Eigen::Index j = 0; j < k_.cols(); ++j) {
    CompensatedSum c;
    for (Eigen::Index i = 0; i < k_.rows(); ++i) c.add(k_(i, j));
    col_sums_(j) = c.value();
    total.add(col_sums_(j));
    trace.add(k_(j, j));
  }
  total_ = total.value();
  trace_ = trace.value();
}

double PooledStatistic::operator()(std::span<const int> first) const {
  std::vector<int> idx(first.begin(), first.end());
  std::sort(idx.begin(), idx.end());
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(k_.rows());
  for (int i : idx) mask(i) = 1.0;

  CompensatedSum xx, x_cols, x_diag;
  for (int i : idx) {
    xx.add(k_.col(i).dot(mask));
    x_cols.add(col_sums_(i));
    x_diag.add(k_(i, i));
  }
  const double s_xx = xx.value();
  const double s_xy = x_cols.value() - s_xx;
  const double s_yy = total_ - s_xx - 2.0 * s_xy;
  const double n = n_, m = m_;
  return (s_xx - x_diag.value()) / (n * (n - 1.0)) - 2.0 * s_xy / (n * m) +
         (s_yy - (trace_ - x_diag.value())) / (m * (m - 1.0));
}

double PooledStatistic::observed() const {
  std::vector<int> idx(static_cast<std::size_t>(n_));
  std::iota(idx.begin(), idx.end(), 0);
  return (*this)(idx);
}

namespace {

std::vector<double> null_from(const PooledStatistic& stat, int n, int m,
                              int permutations, std::uint64_t seed) {
  if (permutations < 1) throw Error("permutation count B must be >= 1");
  const int total = n + m;
  std::vector<double> out(static_cast<std::size_t>(permutations));
  std::vector<int> perm(static_cast<std::size_t>(total));
  for (int b = 0; b < permutations; ++b) {
    Engine rng = make_stream(seed, {static_cast<std::uint64_t>(b)});
    std::iota(perm.begin(), perm.end(), 0);
    // Partial Fisher-Yates: the first n slots form a uniform n-subset.
    for (int i = 0; i < n; ++i) {
      std::uniform_int_distribution<int> pick(i, total - 1);
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(pick(rng))]);
    }
    out[static_cast<std::size_t>(b)] =
        stat(std::span<const int>(perm.data(), static_cast<std::size_t>(n)));
  }
  return out;
}

}  // namespace

std::vector<double> permutation_null(const Eigen::MatrixXd& pooled, int n, int m,
                                     const KernelSpec& spec, int permutations,
                                     std::uint64_t seed) {
  if (pooled.rows() != n + m) throw DimensionError("permutation_null: n + m != rows");
  const PooledStatistic stat(spec, pooled, n);
  return null_from(stat, n, m, permutations, seed);
}

double p_value(double observed, std::span<const double> null) {
  if (null.empty()) throw Error("p_value: empty null sample");
  const auto exceed = std::count_if(null.begin(), null.end(),
                                    [&](double u) { return u >= observed; });
  return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(null.size()) + 1.0);
}

TestReport two_sample_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                           const TestConfig& config) {
  config.validate();
  if (x.cols() != y.cols()) throw DimensionError("two_sample_test: dimension mismatch");
  if (x.rows() < 2 || y.rows() < 2) {
    throw InsufficientSampleError("two_sample_test: need at least 2 points per sample");
  }
  TestReport report;
  double sx = 0.0, sy = 0.0;
  const Eigen::MatrixXd px = preprocess(x, config.variant, config.sparsity_a,
                                        config.projection_floor, &sx);
  const Eigen::MatrixXd py = preprocess(y, config.variant, config.sparsity_b,
                                        config.projection_floor, &sy);
  if (config.variant == Variant::scaling || config.variant == Variant::sparse) {
    report.scale_x = sx;
    report.scale_y = sy;
  }
  const int n = static_cast<int>(px.rows());
  const int m = static_cast<int>(py.rows());
  Eigen::MatrixXd pooled(n + m, px.cols());
  pooled << px, py;

  const PooledStatistic stat(config.kernel, pooled, n);
  report.statistic = stat.observed();
  report.null_statistics =
      null_from(stat, n, m, config.permutations, derive_seed(config.seed, {0x6e756c6cULL}));
  report.p_value = p_value(report.statistic, report.null_statistics);
  report.reject = report.p_value <= config.alpha_level;
  report.n = n;
  report.m = m;
  report.rho = static_cast<double>(m) / static_cast<double>(n + m);
  report.scaled_statistic = (n + m) * report.statistic;
  report.variant = config.variant;
  report.kernel = config.kernel.describe();
  report.permutations = config.permutations;
  report.alpha_level = config.alpha_level;
  report.seed = config.seed;
  return report;
}

TestReport two_sample_test(const Graph& a, const Graph& b, const TestConfig& config) {
  config.validate();
  if (a.size() == 0 || b.size() == 0) throw InsufficientSampleError("empty graph");
  if (static_cast<std::size_t>(config.dimension) > std::min(a.size(), b.size())) {
    throw DimensionError("embedding dimension exceeds graph size");
  }
  const Embedding ea = ase(a, config.dimension);
  const Embedding eb = ase(b, config.dimension);
  return two_sample_test(ea.positions, eb.positions, config);
}

}  // namespace rdpg
