#pragma once

// Adjacency spectral embedding and alignment diagnostics.

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

#include "rdpg/model.hpp"

namespace rdpg {

struct Embedding {
  Eigen::MatrixXd positions;          // n x d
  Eigen::VectorXd eigenvalues;        // |lambda|, descending
  Eigen::VectorXd signed_eigenvalues; // lambda in the same order
  std::vector<bool> flipped;          // column sign flips applied
};

struct AlignmentResult {
  Eigen::MatrixXd rotation;  // orthogonal d x d
  double frobenius_residual = 0.0;
  double two_to_infinity_residual = 0.0;
};

/// Top-d adjacency spectral embedding of a symmetric matrix.
///
/// Eigenpairs are ranked by |lambda| (descending); equal magnitudes prefer
/// the positive eigenvalue and then the lower index in the ascending
/// spectrum. Columns of U are sign-normalised with fix_signs and scaled by
/// |lambda|^{1/2}. Accepts any symmetric matrix, so the noiseless P = XX^T
/// can be embedded too.
Embedding ase(const Eigen::MatrixXd& m, int d);
Embedding ase(const Graph& g, int d);

/// Flips each column so its entry sum is positive; columns summing to
/// (nearly) zero are flipped so the first entry of largest magnitude is
/// positive. Idempotent.
Eigen::MatrixXd fix_signs(Eigen::MatrixXd u, std::vector<bool>* flipped = nullptr);

/// Orthogonal W minimising ||xhat W - x||_F (reflections allowed).
AlignmentResult procrustes_align(const Eigen::MatrixXd& xhat,
                                 const Eigen::MatrixXd& x);

/// Maximum Euclidean row norm.
double two_to_infinity(const Eigen::MatrixXd& m);

/// Eigenvectors W of X^T X (descending eigenvalues), with column signs chosen
/// so that X W follows the fix_signs convention. Then X W matches ase(XX^T)
/// exactly, and the rotation for a pair of samples is W2 W1^T.
Eigen::MatrixXd second_moment_rotation(const Eigen::MatrixXd& x);

/// Population analogue: eigenvectors of E[X X^T], signs chosen so that
/// E[X]^T w > 0. When |E[X]^T w| <= tol the first entry whose magnitude is
/// within tol of the largest is made positive instead; `tol` should cover
/// the error of moments estimated from a sample.
Eigen::MatrixXd population_rotation(const Eigen::MatrixXd& second_moment,
                                    const Eigen::VectorXd& mean, double tol = 1e-12);

/// One row per vertex, 17 significant digits.
void write_embedding_csv(std::ostream& out, const Embedding& e);

}  // namespace rdpg
