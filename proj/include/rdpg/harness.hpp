#pragma once

// Monte Carlo experiments, graph-collection dissimilarities, and k-NN
// classification.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdpg/model.hpp"
#include "rdpg/testing.hpp"

namespace rdpg {

/// Pair of latent distributions indexed by a sweep value.
struct ModelFamily {
  enum class Kind {
    sbm_two_block,    // F = SBM(B_0), G = SBM(B_eps), B_eps = [[w+eps, b], [b, w+eps]]
    uniform_scaling,  // F = U[eps, f_upper]^d, G = U[0, g_upper]^d
    fixed_pair,       // explicit F and G, sweep ignored
  };
  Kind kind = Kind::sbm_two_block;
  double within = 0.5;
  double between = 0.2;
  std::vector<double> block_weights{0.4, 0.6};
  double f_upper = 0.7071067811865476;  // 1/sqrt(2)
  double g_upper = 0.5773502691896258;  // 1/sqrt(3)
  int box_dim = 2;
  std::optional<LatentDistribution> f;
  std::optional<LatentDistribution> g;

  std::pair<LatentDistribution, LatentDistribution> at(double sweep) const;
};

struct ExperimentConfig {
  ModelFamily family;
  std::vector<double> sweep{0.0};
  std::vector<int> n_grid{100};
  double m_ratio = 1.0;           // m = round(m_ratio * n)
  int replicates = 100;
  TestConfig test;
  bool oracle_arm = false;        // also test the true latent positions
  std::uint64_t seed = 0;
  unsigned threads = 0;           // 0 = hardware concurrency

  void validate() const;
};

struct PowerRow {
  int n = 0;
  int m = 0;
  double sweep = 0.0;
  std::string arm;                // "estimated" or "latent"
  int replicates = 0;
  int rejections = 0;
  double power = 0.0;
  double standard_error = 0.0;    // sqrt(p (1 - p) / R)
};

struct PowerTable {
  std::vector<PowerRow> rows;
  std::string config;             // compact JSON echo of the experiment

  void write_csv(std::ostream& out) const;
};

/// Rejection frequency for every (n, sweep) cell. Replicate r of cell
/// (i_n, i_sweep) draws from make_stream(seed, {i_n, i_sweep, r}), so the
/// table does not depend on evaluation order or thread count.
///
/// With `output` set, each finished cell is appended to that CSV; an existing
/// file written for the same configuration is resumed (finished cells are
/// read back instead of recomputed).
PowerTable run_power_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& output = {});

struct WCompareConfig {
  LatentDistribution f;
  LatentDistribution g;
  std::vector<int> n_grid{100};
  double m_ratio = 1.0;
  int replicates = 100;
  int dimension = 2;
  KernelSpec kernel = KernelSpec::gaussian(0.5);
  std::uint64_t seed = 0;
  bool same_graph = false;            // reuse the first graph as the second
  std::size_t surrogate_samples = 1000000;  // for W0 without closed form
  unsigned threads = 0;
};

struct WCompareRow {
  int n = 0;
  int m = 0;
  int replicate = 0;
  double delta_sample = 0.0;      // (n+m)(U(Xhat,Yhat) - U(X, Y W_{n,m}))
  double delta_population = 0.0;  // (n+m)(U(Xhat,Yhat) - U(X, Y W_0))
};

/// W_{n,m} = W2 W1^T from the sample second moments, W_0 = T2 T1^T from the
/// population ones.
std::vector<WCompareRow> w_comparison_experiment(const WCompareConfig& config);
void write_wcompare_csv(std::ostream& out, const std::vector<WCompareRow>& rows);

/// Rotation T from E[X X^T] (closed form, or a surrogate of `samples`
/// draws when unavailable).
Eigen::MatrixXd population_rotation(const LatentDistribution& dist,
                                    std::size_t samples, std::uint64_t seed);

struct DissimilarityMatrix {
  Eigen::MatrixXd statistic;  // raw U between embeddings, zero diagonal
  std::vector<int> labels;

  /// max(U, 0): the nonnegative dissimilarity used for classification.
  Eigen::MatrixXd dissimilarity() const;
};

DissimilarityMatrix pairwise_dissimilarity(const std::vector<Graph>& graphs, int d,
                                           const KernelSpec& spec,
                                           unsigned threads = 0);

struct KnnReport {
  double accuracy = 0.0;
  std::vector<double> fold_accuracy;
  std::vector<int> predictions;
  std::vector<int> fold_of;
};

/// k-NN with stratified `folds`-fold cross validation. Neighbours are the k
/// training items of smallest dissimilarity (lower index on ties); vote ties
/// go to the label with the smallest summed dissimilarity, then the lower
/// label.
KnnReport knn_classify(const Eigen::MatrixXd& dissimilarity,
                       const std::vector<int>& labels, int k, int folds,
                       std::uint64_t seed);

}  // namespace rdpg
