#include "rdpg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rdpg/embed.hpp"
#include "rdpg/errors.hpp"

namespace rdpg {
namespace {

constexpr double kWeightTol = 1e-12;
constexpr double kInnerSlack = 1e-12;
constexpr int kRetryCap = 1000;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_weights(const std::vector<double>& w, std::size_t k,
                   const char* what) {
  if (w.size() != k) {
    throw InvalidDistributionError(std::string(what) +
                                   ": weight count does not match components");
  }
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) {
      throw InvalidDistributionError(std::string(what) + ": negative weight");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kWeightTol) {
    throw InvalidDistributionError(std::string(what) +
                                   ": weights must sum to 1");
  }
}

void check_atoms(const PointMassMixture& p, const char* what) {
  if (p.atoms.rows() == 0 || p.atoms.cols() == 0) {
    throw InvalidDistributionError(std::string(what) + ": no atoms");
  }
  check_weights(p.weights, static_cast<std::size_t>(p.atoms.rows()), what);
  const Eigen::MatrixXd gram = p.atoms * p.atoms.transpose();
  if (gram.minCoeff() < -kInnerSlack || gram.maxCoeff() > 1.0 + kInnerSlack) {
    throw InvalidDistributionError(std::string(what) +
                                   ": atom inner products leave [0, 1]");
  }
}

std::size_t draw_component(const std::vector<double>& weights, Engine& rng) {
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return pick(rng);
}

double logit_scale(const LogitNormalMixture& l) {
  const auto d = static_cast<double>(l.means.front().size());
  return l.scale > 0.0 ? l.scale : 1.0 / std::sqrt(d);
}

bool in_nonnegative_unit_ball(const Eigen::VectorXd& x) {
  return x.minCoeff() >= 0.0 && x.squaredNorm() <= 1.0 + kInnerSlack;
}

}  // namespace

int dimension(const LatentDistribution& dist) {
  return std::visit(
      Overloaded{
          [](const PointMassMixture& p) { return static_cast<int>(p.atoms.cols()); },
          [](const Dirichlet& d) { return static_cast<int>(d.concentration.size()); },
          [](const UniformBox& b) { return static_cast<int>(b.lower.size()); },
          [](const LogitNormalMixture& l) {
            return l.means.empty() ? 0 : static_cast<int>(l.means.front().size());
          },
          [](const DegreeCorrected& c) {
            return static_cast<int>(c.directions.atoms.cols());
          },
      },
      dist);
}

std::string variant_name(const LatentDistribution& dist) {
  static const char* names[] = {"point_mass_mixture", "dirichlet", "uniform_box",
                                "logit_normal_mixture", "degree_corrected"};
  return names[dist.index()];
}

void validate(const LatentDistribution& dist) {
  if (dimension(dist) < 1) {
    throw InvalidDistributionError(variant_name(dist) + ": dimension must be >= 1");
  }
  std::visit(
      Overloaded{
          [](const PointMassMixture& p) { check_atoms(p, "point_mass_mixture"); },
          [](const Dirichlet& d) {
            for (double a : d.concentration) {
              if (!(a > 0.0)) {
                throw InvalidDistributionError(
                    "dirichlet: concentrations must be positive");
              }
            }
          },
          [](const UniformBox& b) {
            if (b.upper.size() != b.lower.size()) {
              throw InvalidDistributionError("uniform_box: bound length mismatch");
            }
            // The inner product is bilinear, so its range over box x box is
            // attained coordinatewise at the corners.
            double lo = 0.0, hi = 0.0;
            for (std::size_t k = 0; k < b.lower.size(); ++k) {
              const double l = b.lower[k], u = b.upper[k];
              if (!(l <= u)) {
                throw InvalidDistributionError("uniform_box: lower > upper");
              }
              lo += std::min({l * l, l * u, u * u});
              hi += std::max({l * l, l * u, u * u});
            }
            if (lo < -kInnerSlack || hi > 1.0 + kInnerSlack) {
              throw InvalidDistributionError(
                  "uniform_box: corner inner products leave [0, 1]");
            }
          },
          [](const LogitNormalMixture& l) {
            const std::size_t k = l.means.size();
            if (l.covariances.size() != k) {
              throw InvalidDistributionError(
                  "logit_normal_mixture: covariance count mismatch");
            }
            check_weights(l.weights, k, "logit_normal_mixture");
            const auto d = l.means.front().size();
            for (std::size_t i = 0; i < k; ++i) {
              if (l.means[i].size() != d || l.covariances[i].rows() != d ||
                  l.covariances[i].cols() != d) {
                throw InvalidDistributionError(
                    "logit_normal_mixture: component shape mismatch");
              }
              if (Eigen::LLT<Eigen::MatrixXd>(l.covariances[i]).info() !=
                  Eigen::Success) {
                throw InvalidDistributionError(
                    "logit_normal_mixture: covariance not positive definite");
              }
            }
            if (l.scale < 0.0) {
              throw InvalidDistributionError("logit_normal_mixture: negative scale");
            }
          },
          [](const DegreeCorrected& c) {
            check_atoms(c.directions, "degree_corrected");
            if (!(c.theta_min >= 0.0 && c.theta_min <= c.theta_max &&
                  c.theta_max <= 1.0 && c.theta_max > 0.0)) {
              throw InvalidDistributionError(
                  "degree_corrected: theta range must lie in (0, 1]");
            }
          },
      },
      dist);
}

bool second_moment(const LatentDistribution& dist, Eigen::MatrixXd& out) {
  return std::visit(
      Overloaded{
          [&](const PointMassMixture& p) {
            out = Eigen::MatrixXd::Zero(p.atoms.cols(), p.atoms.cols());
            for (Eigen::Index k = 0; k < p.atoms.rows(); ++k) {
              const Eigen::VectorXd v = p.atoms.row(k).transpose();
              out += p.weights[k] * v * v.transpose();
            }
            return true;
          },
          [&](const Dirichlet& d) {
            const auto k = static_cast<Eigen::Index>(d.concentration.size());
            const double a0 = std::accumulate(d.concentration.begin(),
                                              d.concentration.end(), 0.0);
            out.resize(k, k);
            for (Eigen::Index i = 0; i < k; ++i) {
              for (Eigen::Index j = 0; j < k; ++j) {
                const double ai = d.concentration[i], aj = d.concentration[j];
                out(i, j) = (i == j ? ai * (ai + 1.0) : ai * aj) / (a0 * (a0 + 1.0));
              }
            }
            return true;
          },
          [&](const UniformBox& b) {
            const auto k = static_cast<Eigen::Index>(b.lower.size());
            out.resize(k, k);
            for (Eigen::Index i = 0; i < k; ++i) {
              for (Eigen::Index j = 0; j < k; ++j) {
                const double li = b.lower[i], ui = b.upper[i];
                out(i, j) = i == j ? (li * li + li * ui + ui * ui) / 3.0
                                   : 0.25 * (li + ui) * (b.lower[j] + b.upper[j]);
              }
            }
            return true;
          },
          [&](const LogitNormalMixture&) { return false; },
          [&](const DegreeCorrected& c) {
            second_moment(LatentDistribution{c.directions}, out);
            const double a = c.theta_min, b = c.theta_max;
            out *= (a * a + a * b + b * b) / 3.0;
            return true;
          },
      },
      dist);
}

bool first_moment(const LatentDistribution& dist, Eigen::VectorXd& out) {
  return std::visit(
      Overloaded{
          [&](const PointMassMixture& p) {
            out = Eigen::VectorXd::Zero(p.atoms.cols());
            for (Eigen::Index k = 0; k < p.atoms.rows(); ++k) {
              out += p.weights[k] * p.atoms.row(k).transpose();
            }
            return true;
          },
          [&](const Dirichlet& d) {
            const double a0 = std::accumulate(d.concentration.begin(),
                                              d.concentration.end(), 0.0);
            out = Eigen::Map<const Eigen::VectorXd>(
                      d.concentration.data(),
                      static_cast<Eigen::Index>(d.concentration.size())) /
                  a0;
            return true;
          },
          [&](const UniformBox& b) {
            out.resize(static_cast<Eigen::Index>(b.lower.size()));
            for (std::size_t i = 0; i < b.lower.size(); ++i) {
              out(static_cast<Eigen::Index>(i)) = 0.5 * (b.lower[i] + b.upper[i]);
            }
            return true;
          },
          [&](const LogitNormalMixture&) { return false; },
          [&](const DegreeCorrected& c) {
            first_moment(LatentDistribution{c.directions}, out);
            out *= 0.5 * (c.theta_min + c.theta_max);
            return true;
          },
      },
      dist);
}

void Graph::add_edge(std::size_t u, std::size_t v) {
  if (u >= n_ || v >= n_) throw ModelError("edge endpoint out of range");
  if (u == v) throw ModelError("self-loop not allowed");
  if (bits_[u * n_ + v]) return;
  bits_[u * n_ + v] = 1;
  bits_[v * n_ + u] = 1;
  ++edges_;
}

std::vector<std::pair<std::size_t, std::size_t>> Graph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(edges_);
  for (std::size_t u = 0; u < n_; ++u) {
    for (std::size_t v = u + 1; v < n_; ++v) {
      if (bits_[u * n_ + v]) out.emplace_back(u, v);
    }
  }
  return out;
}

Eigen::MatrixXd Graph::adjacency() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, j) = bits_[static_cast<std::size_t>(i * n + j)];
    }
  }
  return a;
}

PointMassMixture sbm_to_latent(const Eigen::MatrixXd& block_probs,
                               const std::vector<double>& weights) {
  const Eigen::Index k = block_probs.rows();
  if (k == 0 || block_probs.cols() != k) {
    throw DimensionError("block probability matrix must be square");
  }
  if (weights.size() != static_cast<std::size_t>(k)) {
    throw DimensionError("block weights length differs from block count");
  }
  if ((block_probs - block_probs.transpose()).cwiseAbs().maxCoeff() > 0.0) {
    throw InvalidDistributionError("block probability matrix is not symmetric");
  }
  if (block_probs.minCoeff() < 0.0 || block_probs.maxCoeff() > 1.0) {
    throw InvalidDistributionError("block probabilities must lie in [0, 1]");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block_probs);
  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  if (values(0) < -1e-10) {
    std::ostringstream msg;
    msg << "block probability matrix is not positive semidefinite (min eigenvalue "
        << values(0) << ")";
    throw NotPsdError(msg.str());
  }
  const double cutoff = 1e-10 * std::max(values(k - 1), 0.0);
  Eigen::Index rank = 0;
  while (rank < k && values(k - 1 - rank) > cutoff) ++rank;
  if (rank == 0) rank = 1;  // B = 0: a single zero coordinate

  Eigen::MatrixXd vectors(k, rank);
  Eigen::VectorXd root(rank);
  for (Eigen::Index c = 0; c < rank; ++c) {
    vectors.col(c) = eig.eigenvectors().col(k - 1 - c);
    root(c) = std::sqrt(std::max(values(k - 1 - c), 0.0));
  }
  vectors = fix_signs(vectors);
  PointMassMixture out{vectors * root.asDiagonal(), weights};
  check_weights(out.weights, static_cast<std::size_t>(k), "sbm");
  return out;
}

LatentSample sample_latent(const LatentDistribution& dist, std::size_t n,
                           Engine& rng) {
  if (n < 1) throw InsufficientSampleError("sample_latent requires n >= 1");
  validate(dist);
  const int d = dimension(dist);
  LatentSample out;
  out.positions.resize(static_cast<Eigen::Index>(n), d);
  out.component.assign(n, -1);
  out.provenance = variant_name(dist);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::visit(
      Overloaded{
          [&](const PointMassMixture& p) {
            for (std::size_t i = 0; i < n; ++i) {
              const auto k = draw_component(p.weights, rng);
              out.component[i] = static_cast<int>(k);
              out.positions.row(static_cast<Eigen::Index>(i)) =
                  p.atoms.row(static_cast<Eigen::Index>(k));
            }
          },
          [&](const Dirichlet& dir) {
            std::vector<std::gamma_distribution<double>> gammas;
            for (double a : dir.concentration) gammas.emplace_back(a, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
              Eigen::VectorXd g(d);
              for (int k = 0; k < d; ++k) g(k) = gammas[k](rng);
              out.positions.row(static_cast<Eigen::Index>(i)) = g / g.sum();
            }
          },
          [&](const UniformBox& b) {
            for (std::size_t i = 0; i < n; ++i) {
              for (int k = 0; k < d; ++k) {
                out.positions(static_cast<Eigen::Index>(i), k) =
                    b.lower[k] + (b.upper[k] - b.lower[k]) * unit(rng);
              }
            }
          },
          [&](const LogitNormalMixture& l) {
            std::vector<Eigen::MatrixXd> factors;
            for (const auto& cov : l.covariances) {
              factors.push_back(Eigen::LLT<Eigen::MatrixXd>(cov).matrixL());
            }
            const double scale = logit_scale(l);
            std::normal_distribution<double> normal;
            for (std::size_t i = 0; i < n; ++i) {
              const auto k = draw_component(l.weights, rng);
              out.component[i] = static_cast<int>(k);
              int tries = 0;
              for (;;) {
                Eigen::VectorXd z(d);
                for (int c = 0; c < d; ++c) z(c) = normal(rng);
                z = l.means[k] + factors[k] * z;
                const Eigen::VectorXd x =
                    scale * (1.0 + (-z.array()).exp()).inverse().matrix();
                if (in_nonnegative_unit_ball(x)) {
                  out.positions.row(static_cast<Eigen::Index>(i)) = x.transpose();
                  break;
                }
                if (++tries >= kRetryCap) {
                  throw InvalidDistributionError(
                      "logit_normal_mixture: retry cap exceeded; rows leave the "
                      "nonnegative unit ball (scale too large?)");
                }
              }
            }
          },
          [&](const DegreeCorrected& c) {
            for (std::size_t i = 0; i < n; ++i) {
              const auto k = draw_component(c.directions.weights, rng);
              out.component[i] = static_cast<int>(k);
              const double theta =
                  c.theta_max - (c.theta_max - c.theta_min) * unit(rng);
              out.positions.row(static_cast<Eigen::Index>(i)) =
                  theta * c.directions.atoms.row(static_cast<Eigen::Index>(k));
            }
          },
      },
      dist);
  return out;
}

void validate_latent(const Eigen::MatrixXd& positions) {
  const Eigen::MatrixXd gram = positions * positions.transpose();
  if (gram.size() == 0) return;
  if (gram.minCoeff() < -kInnerSlack || gram.maxCoeff() > 1.0 + kInnerSlack) {
    throw ModelError("latent inner products leave [0, 1]");
  }
}

Eigen::MatrixXd edge_prob_matrix(const Eigen::MatrixXd& positions, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ModelError("sparsity factor must lie in (0, 1]");
  }
  Eigen::MatrixXd p = alpha * (positions * positions.transpose());
  if (p.size() > 0 &&
      (p.minCoeff() < -kInnerSlack || p.maxCoeff() > 1.0 + kInnerSlack)) {
    throw ModelError("edge probability outside [0, 1]");
  }
  return p;
}

Graph sample_rdpg(const Eigen::MatrixXd& positions, double alpha, Engine& rng) {
  const auto n = static_cast<std::size_t>(positions.rows());
  const Eigen::MatrixXd p = edge_prob_matrix(positions, alpha);
  Graph g(n);
  g.set_sparsity(alpha);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (unit(rng) < p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) {
        g.add_edge(i, j);
      }
    }
  }
  return g;
}

MomentDiagnostic check_moment_assumption(const Eigen::MatrixXd& positions,
                                         double gap_tol) {
  const double n = static_cast<double>(positions.rows());
  const Eigen::MatrixXd moment = positions.transpose() * positions / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(moment,
                                                     Eigen::EigenvaluesOnly);
  MomentDiagnostic out;
  out.eigenvalues = eig.eigenvalues().reverse();
  const Eigen::Index d = out.eigenvalues.size();
  // With a single eigenvalue the relevant gap is its distance from zero.
  out.min_gap = d == 1 ? std::abs(out.eigenvalues(0))
                       : std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k + 1 < d; ++k) {
    out.min_gap = std::min(out.min_gap, out.eigenvalues(k) - out.eigenvalues(k + 1));
  }
  out.min_gap = std::max(out.min_gap, 0.0);
  out.flagged = out.min_gap < gap_tol;
  return out;
}

}  // namespace rdpg
