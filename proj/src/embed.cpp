#include "rdpg/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "rdpg/errors.hpp"
#include "rdpg/io.hpp"

namespace rdpg {
namespace {

// Solves (T - shift I) x = b in place for the symmetric tridiagonal T with
// the given diagonal and off-diagonal, via LU with partial pivoting. Zero
// pivots are replaced by `tiny`, as inverse iteration requires.
void shifted_tridiagonal_solve(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                               double shift, double tiny, Eigen::VectorXd& b) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd d = diag.array() - shift;
  Eigen::VectorXd dl = off, du = off;
  Eigen::VectorXd du2 = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 2, 0));
  std::vector<bool> swapped(static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0)), false);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (std::abs(d(i)) >= std::abs(dl(i))) {
      if (d(i) == 0.0) d(i) = tiny;
      const double fact = dl(i) / d(i);
      dl(i) = fact;
      d(i + 1) -= fact * du(i);
    } else {
      const double fact = d(i) / dl(i);
      d(i) = dl(i);
      dl(i) = fact;
      const double temp = du(i);
      du(i) = d(i + 1);
      d(i + 1) = temp - fact * d(i + 1);
      if (i + 2 < n) {
        du2(i) = du(i + 1);
        du(i + 1) = -fact * du(i + 1);
      }
      swapped[static_cast<std::size_t>(i)] = true;
    }
  }
  if (n > 0 && d(n - 1) == 0.0) d(n - 1) = tiny;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (!swapped[static_cast<std::size_t>(i)]) {
      b(i + 1) -= dl(i) * b(i);
    } else {
      const double temp = b(i);
      b(i) = b(i + 1);
      b(i + 1) = temp - dl(i) * b(i);
    }
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double v = b(i);
    if (i + 1 < n) v -= du(i) * b(i + 1);
    if (i + 2 < n) v -= du2(i) * b(i + 2);
    b(i) = v / d(i);
  }
}

// Eigenvectors of the tridiagonal matrix for well-separated eigenvalues by
// inverse iteration. Returns false if any vector fails its residual check.
bool tridiagonal_eigenvectors(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                              const std::vector<double>& lambdas, double scale,
                              Eigen::MatrixXd& out) {
  const Eigen::Index n = diag.size();
  out.resize(n, static_cast<Eigen::Index>(lambdas.size()));
  const double tiny = std::numeric_limits<double>::epsilon() * scale;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 0.01 * std::sin(1.0 + i + 7.0 * k);
    for (int iter = 0; iter < 4; ++iter) {
      shifted_tridiagonal_solve(diag, off, lambdas[k], tiny, x);
      const double norm = x.norm();
      if (!std::isfinite(norm) || norm == 0.0) return false;
      x /= norm;
    }
    Eigen::VectorXd residual = (diag.array() - lambdas[k]) * x.array();
    residual.head(n - 1) += off.cwiseProduct(x.tail(n - 1));
    residual.tail(n - 1) += off.cwiseProduct(x.head(n - 1));
    if (residual.norm() > 1e-10 * scale) return false;
    out.col(static_cast<Eigen::Index>(k)) = x;
  }
  return true;
}

}  // namespace

Eigen::MatrixXd fix_signs(Eigen::MatrixXd u, std::vector<bool>* flipped) {
  if (flipped) flipped->assign(static_cast<std::size_t>(u.cols()), false);
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    double sum = 0.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) sum += u(r, c);
    bool flip;
    if (std::abs(sum) > 1e-12) {
      flip = sum < 0.0;
    } else {
      Eigen::Index arg = 0;
      for (Eigen::Index r = 1; r < u.rows(); ++r) {
        if (std::abs(u(r, c)) > std::abs(u(arg, c))) arg = r;
      }
      flip = u.rows() > 0 && u(arg, c) < 0.0;
    }
    if (flip) {
      u.col(c) = -u.col(c);
      if (flipped) (*flipped)[static_cast<std::size_t>(c)] = true;
    }
  }
  return u;
}

Embedding ase(const Eigen::MatrixXd& m, int d) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw DimensionError("ase: matrix must be square");
  if (d < 1 || d > n) throw DimensionError("ase: need 1 <= d <= n");
  if (n > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw DimensionError("ase: matrix is not symmetric");
  }

  // Householder tridiagonalisation, then the spectrum of the tridiagonal
  // matrix. Eigenvectors are computed only for the selected eigenvalues
  // (inverse iteration, then back-transformation); clustered selections use
  // the full dense solver.
  Eigen::Tridiagonalization<Eigen::MatrixXd> tri(m);
  const Eigen::VectorXd diag = tri.diagonal();
  const Eigen::VectorXd off = tri.subDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> spectrum;
  spectrum.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd values = spectrum.eigenvalues();  // ascending

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) order[static_cast<std::size_t>(k)] = k;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(values(a)), mb = std::abs(values(b));
    if (ma != mb) return ma > mb;
    return values(a) > values(b);
  });
  order.resize(static_cast<std::size_t>(d));

  const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300);
  bool separated = true;
  std::vector<double> lambdas;
  for (Eigen::Index idx : order) {
    lambdas.push_back(values(idx));
    const double below = idx > 0 ? values(idx) - values(idx - 1) : scale;
    const double above = idx + 1 < n ? values(idx + 1) - values(idx) : scale;
    if (std::min(below, above) <= 1e-6 * scale) separated = false;
  }

  Eigen::MatrixXd vectors;
  if (!(separated && tridiagonal_eigenvectors(diag, off, lambdas, scale, vectors))) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full;
    full.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    vectors.resize(n, d);
    for (int k = 0; k < d; ++k) {
      vectors.col(k) = full.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    }
  }
  vectors = tri.matrixQ() * vectors;

  Eigen::MatrixXd u(n, d);
  Embedding out;
  out.eigenvalues.resize(d);
  out.signed_eigenvalues.resize(d);
  for (int k = 0; k < d; ++k) {
    u.col(k) = vectors.col(k);
    out.signed_eigenvalues(k) = lambdas[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = std::abs(lambdas[static_cast<std::size_t>(k)]);
  }
  u = fix_signs(std::move(u), &out.flipped);
  out.positions = u * out.eigenvalues.cwiseSqrt().asDiagonal();
  return out;
}

Embedding ase(const Graph& g, int d) { return ase(g.adjacency(), d); }

AlignmentResult procrustes_align(const Eigen::MatrixXd& xhat,
                                 const Eigen::MatrixXd& x) {
  if (xhat.rows() != x.rows() || xhat.cols() != x.cols()) {
    throw DimensionError("procrustes_align: shape mismatch");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(xhat.transpose() * x,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  AlignmentResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  const Eigen::MatrixXd residual = xhat * out.rotation - x;
  out.frobenius_residual = residual.norm();
  out.two_to_infinity_residual = two_to_infinity(residual);
  return out;
}

double two_to_infinity(const Eigen::MatrixXd& m) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) best = std::max(best, m.row(r).norm());
  return best;
}

namespace {

Eigen::MatrixXd descending_eigenvectors(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  return eig.eigenvectors().rowwise().reverse();
}

}  // namespace

Eigen::MatrixXd second_moment_rotation(const Eigen::MatrixXd& x) {
  if (x.rows() < x.cols()) {
    throw InsufficientSampleError("second_moment_rotation: need n >= d");
  }
  Eigen::MatrixXd w = descending_eigenvectors(x.transpose() * x);
  std::vector<bool> flipped;
  fix_signs(x * w, &flipped);
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    if (flipped[static_cast<std::size_t>(c)]) w.col(c) = -w.col(c);
  }
  return w;
}

Eigen::MatrixXd population_rotation(const Eigen::MatrixXd& second_moment,
                                    const Eigen::VectorXd& mean, double tol) {
  Eigen::MatrixXd w = descending_eigenvectors(second_moment);
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    double key = mean.dot(w.col(c));
    if (std::abs(key) <= tol) {
      const double top = w.col(c).cwiseAbs().maxCoeff();
      Eigen::Index r = 0;
      while (std::abs(w(r, c)) < top - tol) ++r;
      key = w(r, c);
    }
    if (key < 0.0) w.col(c) = -w.col(c);
  }
  return w;
}

void write_embedding_csv(std::ostream& out, const Embedding& e) {
  write_matrix_csv(out, e.positions);
}

}  // namespace rdpg
