#pragma once

#include <optional>

#include "auxguide/matrix.hpp"

namespace auxguide::linalg {

/// Thin SVD a = u * diag(s) * vt with k = min(rows, cols):
/// u is rows x k, vt is k x cols, both with orthonormal columns / rows.
struct SvdResult {
  Matrix u;
  Vector singular_values;  // non-negative, non-increasing
  Matrix vt;
};

/// One-sided (Hestenes) Jacobi SVD. Throws NonConvergence after 100 sweeps.
SvdResult svd_thin(const Matrix& a);

/// Relative rank tolerance used when none is given: max(rows, cols) * eps.
double default_rank_tolerance(const Matrix& a);

/// Number of singular values strictly above tol * sigma_max.
std::size_t numerical_rank(const SvdResult& svd, double tol);

/// Moore-Penrose pseudo-inverse V D^+ U^T. Singular values <= tol * sigma_max
/// are treated as zero; tol defaults to default_rank_tolerance(a).
Matrix pseudo_inverse(const Matrix& a, std::optional<double> tol = std::nullopt);

/// Orthogonal projectors induced by a framing map f (rows = framing dims,
/// cols = latent dims): parallel projects onto the row space of f (the
/// orthogonal complement of ker f), perpendicular onto ker f.
struct ProjectorPair {
  Matrix parallel;
  Matrix perpendicular;
  std::size_t rank = 0;

  std::size_t dim() const noexcept { return parallel.rows(); }
};

ProjectorPair projector_pair(const Matrix& f, std::optional<double> tol = std::nullopt);

/// Projector pair with parallel = identity (no framing information removed).
ProjectorPair full_projector(std::size_t n);

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // column j is the eigenvector for values[j]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymEigen sym_eigen(const Matrix& a);

/// Principal square root of a symmetric PSD matrix. Eigenvalues in
/// [-1e-8 * max(1, |lambda_max|), 0) are clipped to zero.
Matrix sym_sqrt(const Matrix& a);

/// Orthonormal basis (as columns) of the range of an orthogonal projector.
Matrix projector_basis(const Matrix& projector);

}  // namespace auxguide::linalg
