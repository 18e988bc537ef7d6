#pragma once

// Latent position distributions and random dot product graph sampling.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rdpg/random.hpp"

namespace rdpg {

/// Finite mixture of atoms; row k of `atoms` is the k-th support point.
struct PointMassMixture {
  Eigen::MatrixXd atoms;
  std::vector<double> weights;
};

/// Dirichlet distribution on the unit simplex in R^d.
struct Dirichlet {
  std::vector<double> concentration;
};

struct UniformBox {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Mixture of Gaussians pushed coordinatewise through the logistic function
/// and multiplied by `scale` (1/sqrt(d) when unset), which keeps every inner
/// product inside [0, 1].
struct LogitNormalMixture {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;
  std::vector<double> weights;
  double scale = 0.0;
};

/// Degree-corrected blockmodel: X = theta * nu with nu drawn from the
/// direction mixture and theta ~ Uniform(theta_min, theta_max].
struct DegreeCorrected {
  PointMassMixture directions;
  double theta_min = 0.0;
  double theta_max = 1.0;
};

using LatentDistribution = std::variant<PointMassMixture, Dirichlet, UniformBox,
                                        LogitNormalMixture, DegreeCorrected>;

int dimension(const LatentDistribution& dist);
std::string variant_name(const LatentDistribution& dist);

/// Checks weights, shapes, and (for atoms and boxes) that every reachable
/// inner product lies in [0, 1]. Throws InvalidDistributionError.
void validate(const LatentDistribution& dist);

/// Analytic E[X X^T] when available (all variants except the logit-normal
/// mixture, which has no closed form). Returns false when unavailable.
bool second_moment(const LatentDistribution& dist, Eigen::MatrixXd& out);

/// Analytic E[X], same availability as second_moment.
bool first_moment(const LatentDistribution& dist, Eigen::VectorXd& out);

struct LatentSample {
  Eigen::MatrixXd positions;       // n x d, one row per vertex
  std::vector<int> component;      // mixture component per row, -1 if none
  std::string provenance;

  Eigen::Index size() const { return positions.rows(); }
  Eigen::Index dim() const { return positions.cols(); }
};

/// Simple undirected graph without self-loops, stored as a dense bit matrix.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : n_(n), bits_(n * n, 0) {}

  std::size_t size() const { return n_; }
  std::size_t edge_count() const { return edges_; }

  /// Adds {u, v}; repeated insertion is a no-op. Throws ModelError on a
  /// self-loop or out-of-range endpoint.
  void add_edge(std::size_t u, std::size_t v);
  bool has_edge(std::size_t u, std::size_t v) const {
    return bits_[u * n_ + v] != 0;
  }

  /// Edges with u < v in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  Eigen::MatrixXd adjacency() const;

  double sparsity() const { return sparsity_; }
  void set_sparsity(double alpha) { sparsity_ = alpha; }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.bits_ == b.bits_;
  }

 private:
  std::size_t n_ = 0;
  std::size_t edges_ = 0;
  std::vector<std::uint8_t> bits_;
  double sparsity_ = 1.0;
};

struct MomentDiagnostic {
  Eigen::VectorXd eigenvalues;  // of n^{-1} X^T X, descending
  double min_gap = 0.0;
  bool flagged = false;         // min_gap < gap_tol
};

/// Atoms of the point-mass mixture whose Gram matrix reproduces the block
/// probability matrix; atoms live in R^r with r the numerical rank of B.
PointMassMixture sbm_to_latent(const Eigen::MatrixXd& block_probs,
                               const std::vector<double>& weights);

LatentSample sample_latent(const LatentDistribution& dist, std::size_t n,
                           Engine& rng);

/// Throws ModelError unless every pairwise inner product lies in [0, 1]
/// within 1e-12. O(n^2 d).
void validate_latent(const Eigen::MatrixXd& positions);

/// alpha * X X^T, including the diagonal.
Eigen::MatrixXd edge_prob_matrix(const Eigen::MatrixXd& positions,
                                 double alpha = 1.0);

Graph sample_rdpg(const Eigen::MatrixXd& positions, double alpha, Engine& rng);

MomentDiagnostic check_moment_assumption(const Eigen::MatrixXd& positions,
                                         double gap_tol);

}  // namespace rdpg
