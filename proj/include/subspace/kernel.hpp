#pragma once

#include "subspace/dataset.hpp"
#include "subspace/linear.hpp"
#include "subspace/numeric.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace subspace {

/// Polynomial-kernel eigendecomposition shared by KPCA and KECA: the kernel
/// matrix K_ij = (x_i . x_j)^p, its eigenpairs, the per-eigenvector Renyi
/// entropy contributions and the retained-rank count (eigenvalues above
/// 1e-10 * lambda_max survive; the projection coefficients divide by
/// sqrt(lambda)).
struct KernelEig {
  Matrix train;  // d x n training vectors (retained for projection)
  int degree = 2;
  bool centered = false;
  Matrix kernel;  // n x n
  SymEigen eig;
  Vector entropy_terms;
  double entropy_sp = 0.0;  // sum of the terms, the Parzen estimate of sp
  double entropy = 0.0;     // -log(sp); comparisons use the terms directly
  int retained = 0;
};

/// Fitted kernel subspace: k selected eigenvectors (by eigenvalue for KPCA,
/// by entropy contribution for KECA; ties to the lower index) and their
/// projection coefficients a_j = e_j / sqrt(lambda_j). The shared
/// decomposition is referenced, not copied, so a KPCA and a KECA model fitted
/// from the same KernelEig literally share it.
struct KernelModel {
  std::shared_ptr<const KernelEig> eig;
  SelectionRule selection = SelectionRule::by_eigenvalue;
  std::vector<int> selected;  // size k, in ranking order
  Matrix alphas;              // n x k
};

/// K_ij = (x_i . x_j)^p, computed once per unordered pair so the result is
/// exactly symmetric. Columns of `data` are the samples.
Matrix kernel_matrix(const Matrix& data, int degree);

/// Renyi quadratic entropy estimate of a PSD kernel matrix: the per-
/// eigenvector terms (1/n^2)(sqrt(lambda_i) e_i^T 1)^2 and their sum
/// sp = (1/n^2) 1^T K 1. The entropy itself is -log(sp); selection compares
/// the terms directly. Rejects sp <= 0 (only possible for K = 0).
std::pair<double, Vector> renyi_entropy_estimate(const Matrix& kernel);

/// Decompose the (optionally double-centered) kernel matrix of the training
/// set. This is the expensive step; fit from it as many models as needed.
std::shared_ptr<const KernelEig> kernel_eig(const Matrix& train, int degree,
                                            bool centered = false);

KernelModel fit_kpca(const std::shared_ptr<const KernelEig>& eig, int k);
KernelModel fit_keca(const std::shared_ptr<const KernelEig>& eig, int k);
KernelModel fit_kpca(const Matrix& train, int k, int degree, bool centered = false);
KernelModel fit_keca(const Matrix& train, int k, int degree, bool centered = false);

/// Out-of-sample projection: feature_j = sum_i (a_j)_i (x . x_i)^p. For a
/// training sample this reproduces its training projection
/// sqrt(lambda_j) (e_j)_t.
Vector project_kernel(const KernelModel& model, const Vector& x);
/// Column-wise batch variant; returns k x m features.
Matrix project_kernel(const KernelModel& model, const Matrix& xs);

/// Training-set projections as a k x n matrix (row j is
/// sqrt(lambda_j) e_j^T for the j-th selected eigenvector).
Matrix train_projections(const KernelModel& model);

}  // namespace subspace
