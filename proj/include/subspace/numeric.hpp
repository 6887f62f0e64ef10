#pragma once

#include <Eigen/Dense>

#include <vector>

namespace subspace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
/// Eigenvectors are the columns of `eigenvectors`, aligned with `eigenvalues`,
/// each sign-fixed so its largest-magnitude entry is positive (ties broken by
/// lowest index). The decomposition satisfies A = E diag(lambda) E^T.
struct SymEigen {
  Vector eigenvalues;
  Matrix eigenvectors;

  Eigen::Index size() const { return eigenvalues.size(); }
};

/// Orthonormal column set W spanning a k-dimensional subspace of R^d.
struct SubspaceBasis {
  Matrix columns;  // d x k, W^T W = I_k

  Eigen::Index ambient() const { return columns.rows(); }
  Eigen::Index dim() const { return columns.cols(); }
};

/// Decompose a symmetric matrix. Input is checked for symmetry (1e-10
/// relative) and finiteness, then symmetrized as (A + A^T)/2 to absorb
/// accumulation error before the solve. Deterministic: descending eigenvalue
/// order (ties keep solver order) and the sign convention above.
SymEigen eigh_desc(const Matrix& a);

/// Sequential Gram-Schmidt in column order, each new column normalized
/// (with one re-orthogonalization pass for stability). Throws if a column is
/// numerically dependent on its predecessors, identifying that column.
SubspaceBasis orthonormalize(const Matrix& m);

/// Like orthonormalize but silently drops dependent columns instead of
/// throwing. Used where only the spanned subspace matters.
SubspaceBasis orthonormalize_dropping(const Matrix& m);

/// || A A^T - B B^T ||_F, the basis-invariant disagreement of two subspaces.
/// 0 iff the subspaces coincide; symmetric in its arguments. Evaluated on the
/// joint span so no d x d projector is ever formed.
double projector_distance(const SubspaceBasis& a, const SubspaceBasis& b);

/// Median of a sequence (mean of the two middle values for even length).
double median(std::vector<double> values);

}  // namespace subspace
