#include "subspace/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace subspace {

namespace {

constexpr double kRetentionFloor = 1e-10;

double powi(double base, int exp) {
  double out = 1.0;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

// Double-center a kernel matrix: K' = H K H with H = I - 11^T/n.
Matrix center_kernel(const Matrix& k) {
  const double n = static_cast<double>(k.rows());
  const Vector row_means = k.rowwise().mean();
  const double total_mean = row_means.mean();
  Matrix out = k;
  out.colwise() -= row_means;
  out.rowwise() -= row_means.transpose();
  out.array() += total_mean;
  return out;
}

std::vector<int> rank_indices(const Vector& scores, int retained, int k) {
  std::vector<int> order(static_cast<std::size_t>(retained));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

KernelModel select(const std::shared_ptr<const KernelEig>& eig, int k, SelectionRule rule) {
  if (!eig) throw std::invalid_argument("kernel fit: null decomposition");
  if (k < 1 || k > eig->retained) {
    std::ostringstream msg;
    msg << "kernel fit: k=" << k << " exceeds the retained rank " << eig->retained
        << " of the kernel matrix";
    throw std::invalid_argument(msg.str());
  }

  KernelModel model;
  model.eig = eig;
  model.selection = rule;
  model.selected =
      rule == SelectionRule::by_eigenvalue
          ? rank_indices(eig->eig.eigenvalues.head(eig->retained), eig->retained, k)
          : rank_indices(eig->entropy_terms.head(eig->retained), eig->retained, k);

  model.alphas.resize(eig->kernel.rows(), k);
  for (int j = 0; j < k; ++j) {
    const int idx = model.selected[static_cast<std::size_t>(j)];
    model.alphas.col(j) =
        eig->eig.eigenvectors.col(idx) / std::sqrt(eig->eig.eigenvalues[idx]);
  }
  return model;
}

}  // namespace

Matrix kernel_matrix(const Matrix& data, int degree) {
  if (degree < 1) throw std::invalid_argument("kernel_matrix: degree must be >= 1");
  if (!data.allFinite()) throw std::invalid_argument("kernel_matrix: non-finite data");
  const Eigen::Index n = data.cols();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = powi(data.col(i).dot(data.col(j)), degree);
      k(i, j) = v;
      k(j, i) = v;
    }
  return k;
}

std::pair<double, Vector> renyi_entropy_estimate(const Matrix& kernel) {
  const SymEigen eig = eigh_desc(kernel);
  const Vector terms = entropy_terms(eig, Vector::Ones(kernel.rows()));
  const double sp = terms.sum();
  if (sp <= 0.0)
    throw std::invalid_argument("renyi_entropy_estimate: entropy estimate is non-positive "
                                "(kernel matrix is zero)");
  return {sp, terms};
}

std::shared_ptr<const KernelEig> kernel_eig(const Matrix& train, int degree, bool centered) {
  auto out = std::make_shared<KernelEig>();
  out->train = train;
  out->degree = degree;
  out->centered = centered;
  out->kernel = kernel_matrix(train, degree);
  if (centered) out->kernel = center_kernel(out->kernel);
  out->eig = eigh_desc(out->kernel);
  out->entropy_terms = entropy_terms(out->eig, Vector::Ones(out->kernel.rows()));
  out->entropy_sp = out->entropy_terms.sum();

  const double floor = kRetentionFloor * std::max(out->eig.eigenvalues[0], 0.0);
  int retained = 0;
  while (retained < out->eig.eigenvalues.size() && out->eig.eigenvalues[retained] > floor &&
         out->eig.eigenvalues[retained] > 0.0)
    ++retained;
  out->retained = retained;
  return out;
}

KernelModel fit_kpca(const std::shared_ptr<const KernelEig>& eig, int k) {
  return select(eig, k, SelectionRule::by_eigenvalue);
}

KernelModel fit_keca(const std::shared_ptr<const KernelEig>& eig, int k) {
  return select(eig, k, SelectionRule::by_entropy);
}

KernelModel fit_kpca(const Matrix& train, int k, int degree, bool centered) {
  return fit_kpca(kernel_eig(train, degree, centered), k);
}

KernelModel fit_keca(const Matrix& train, int k, int degree, bool centered) {
  return fit_keca(kernel_eig(train, degree, centered), k);
}

Matrix project_kernel(const KernelModel& model, const Matrix& xs) {
  const KernelEig& eig = *model.eig;
  if (xs.rows() != eig.train.rows()) {
    std::ostringstream msg;
    msg << "project_kernel: sample dimension " << xs.rows() << " does not match training "
        << eig.train.rows();
    throw std::invalid_argument(msg.str());
  }
  const Eigen::Index n = eig.train.cols();
  Matrix kx(n, xs.cols());  // kernel evaluations against the training set
  for (Eigen::Index j = 0; j < xs.cols(); ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      kx(i, j) = powi(eig.train.col(i).dot(xs.col(j)), eig.degree);

  if (eig.centered) {
    // Center the test kernel columns consistently with the training kernel:
    // k' = k - K1/n - (1^T k/n) 1 + (1^T K 1 / n^2) 1, using the raw K.
    const Matrix raw = kernel_matrix(eig.train, eig.degree);
    const Vector train_row_mean = raw.rowwise().mean();
    const double total_mean = train_row_mean.mean();
    const Eigen::RowVectorXd col_means = kx.colwise().mean();
    kx.colwise() -= train_row_mean;
    kx.rowwise() -= col_means;
    kx.array() += total_mean;
  }
  return model.alphas.transpose() * kx;
}

Vector project_kernel(const KernelModel& model, const Vector& x) {
  return project_kernel(model, Matrix(x)).col(0);
}

Matrix train_projections(const KernelModel& model) {
  const KernelEig& eig = *model.eig;
  const int k = static_cast<int>(model.selected.size());
  Matrix out(k, eig.kernel.rows());
  for (int j = 0; j < k; ++j) {
    const int idx = model.selected[static_cast<std::size_t>(j)];
    out.row(j) = std::sqrt(eig.eig.eigenvalues[idx]) * eig.eig.eigenvectors.col(idx).transpose();
  }
  return out;
}

}  // namespace subspace
