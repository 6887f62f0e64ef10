#pragma once

#include "subspace/dataset.hpp"
#include "subspace/numeric.hpp"

#include <vector>

namespace subspace {

enum class FeatureMode { vector_1d, matrix_2d };
enum class SelectionRule { by_eigenvalue, by_entropy };

/// A fitted linear subspace. `eigenvalues` holds the full retained spectrum
/// (descending); `basis` holds the k selected eigenvectors; `selected` maps
/// basis column j to its index in the spectrum. For by_entropy models,
/// `entropy_terms` is aligned with `eigenvalues` and the selected indices are
/// the k largest terms (ties to the lower index). Greedy fits (L1 family)
/// leave the spectrum empty.
struct LinearModel {
  FeatureMode mode = FeatureMode::vector_1d;
  Matrix mean;             // d x 1 (vector_1d) or r x n' (matrix_2d)
  SubspaceBasis basis;     // selected columns
  Vector eigenvalues;      // full retained spectrum, descending
  SelectionRule selection = SelectionRule::by_eigenvalue;
  Vector entropy_terms;    // aligned with eigenvalues; empty unless by_entropy
  std::vector<int> selected;
  int eigenproblem_dim = 0;  // size of the symmetric eigenproblem solved
};

/// Projections of a sample set: one k-vector (stored k x 1) or one k x n'
/// matrix per sample, labels aligned.
struct FeatureSet {
  FeatureMode mode = FeatureMode::vector_1d;
  std::vector<Matrix> features;
  std::vector<std::string> labels;
};

/// PCA on vectorized samples: mean-center, eigendecompose the covariance
/// C = (1/n) sum (x_i - m)(x_i - m)^T, keep the top-k eigenvectors. When
/// d > n the n x n Gram matrix is decomposed instead and its eigenvectors
/// mapped back, which yields the same subspace at a fraction of the cost.
LinearModel fit_pca(const VectorizedSet& train, int k);

/// 2DPCA on image matrices: eigendecompose the r x r covariance
/// C = (1/n) sum (F_i - M)(F_i - M)^T of the mean-centered matrices.
LinearModel fit_2dpca(const Dataset& train, int k);

/// Per-eigenvector Renyi entropy contributions
/// term_i = (1/n^2) (sqrt(lambda_i) e_i^T ones)^2 with n = ones.size().
/// Eigenvalues are clamped at 0 before the square root; an eigenvalue below
/// -1e-6 rejects the input as not PSD.
Vector entropy_terms(const SymEigen& eig, const Vector& ones);

/// PCA eigendecomposition, but the k eigenvectors with the largest entropy
/// contributions (against the all-ones vector) are selected instead of the
/// top eigenvalues.
LinearModel fit_eca(const VectorizedSet& train, int k);

/// 2DPCA eigendecomposition with entropy-ranked selection (ones vector of
/// length r).
LinearModel fit_2deca(const Dataset& train, int k);

/// Project samples: v = W^T (x - m) for vector models, V = W^T (F - M) for
/// matrix models. Data must match the model's mode and ambient dimension.
FeatureSet project(const LinearModel& model, const VectorizedSet& data);
FeatureSet project(const LinearModel& model, const Dataset& data);

namespace detail {

/// Shared PCA eigendecomposition: mean, full retained spectrum/eigenvectors
/// and the size of the eigenproblem actually solved.
struct PcaEig {
  Vector mean;
  Vector eigenvalues;   // descending, retained
  Matrix eigenvectors;  // d x retained
  int eigenproblem_dim = 0;
};
PcaEig pca_eig(const VectorizedSet& train);

struct Pca2dEig {
  Matrix mean;          // r x n'
  Vector eigenvalues;   // descending, full r spectrum
  Matrix eigenvectors;  // r x r
  int eigenproblem_dim = 0;
};
Pca2dEig pca2d_eig(const Dataset& train);

}  // namespace detail

}  // namespace subspace
