#include "subspace/linear.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace subspace {

namespace {

constexpr double kRetentionFloor = 1e-10;  // drop lambda_i < floor * lambda_1

void check_k(int k, Eigen::Index limit, const char* who) {
  if (k < 1 || k > limit) {
    std::ostringstream msg;
    msg << who << ": k=" << k << " out of range [1, " << limit << "]";
    throw std::invalid_argument(msg.str());
  }
}

void check_zero_covariance(double total_variance, double data_scale, const char* who) {
  if (total_variance <= 1e-20 * std::max(1.0, data_scale))
    throw std::invalid_argument(std::string(who) + ": zero covariance (all samples identical)");
}

// Indices of the k largest entropy terms, ties broken by lower index; the
// returned order is by descending term.
std::vector<int> top_entropy_indices(const Vector& terms, int k) {
  std::vector<int> order(static_cast<std::size_t>(terms.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return terms[a] > terms[b]; });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

LinearModel select_columns(LinearModel model, const Matrix& all_vectors,
                           const std::vector<int>& selected) {
  model.basis.columns.resize(all_vectors.rows(), static_cast<Eigen::Index>(selected.size()));
  for (std::size_t j = 0; j < selected.size(); ++j)
    model.basis.columns.col(static_cast<Eigen::Index>(j)) = all_vectors.col(selected[j]);
  model.selected = selected;
  return model;
}

}  // namespace

namespace detail {

PcaEig pca_eig(const VectorizedSet& train) {
  const Eigen::Index d = train.data.rows();
  const Eigen::Index n = train.data.cols();
  if (n < 2) throw std::invalid_argument("fit_pca: need at least 2 samples");
  if (!train.data.allFinite()) throw std::invalid_argument("fit_pca: non-finite sample values");

  PcaEig out;
  out.mean = train.data.rowwise().mean();
  Matrix centered = train.data.colwise() - out.mean;

  if (d <= n) {
    const Matrix cov = centered * centered.transpose() / static_cast<double>(n);
    check_zero_covariance(cov.trace(), train.data.squaredNorm() / static_cast<double>(n),
                          "fit_pca");
    SymEigen eig = eigh_desc(cov);
    out.eigenvalues = std::move(eig.eigenvalues);
    out.eigenvectors = std::move(eig.eigenvectors);
    out.eigenproblem_dim = static_cast<int>(d);
    return out;
  }

  // Gram trick: decompose (1/n) X_c^T X_c and map eigenvectors back through
  // X_c. Nonzero eigenvalues agree with the covariance's; near-zero ones are
  // dropped because the back-mapping divides by sqrt(n * lambda).
  const Matrix gram = centered.transpose() * centered / static_cast<double>(n);
  check_zero_covariance(gram.trace(), train.data.squaredNorm() / static_cast<double>(n),
                        "fit_pca");
  const SymEigen eig = eigh_desc(gram);
  const double floor = kRetentionFloor * std::max(eig.eigenvalues[0], 0.0);
  Eigen::Index retained = 0;
  while (retained < eig.eigenvalues.size() && eig.eigenvalues[retained] > floor &&
         eig.eigenvalues[retained] > 0.0)
    ++retained;

  out.eigenvalues = eig.eigenvalues.head(retained);
  out.eigenvectors.resize(d, retained);
  for (Eigen::Index i = 0; i < retained; ++i)
    out.eigenvectors.col(i) =
        centered * eig.eigenvectors.col(i) /
        std::sqrt(static_cast<double>(n) * eig.eigenvalues[i]);
  // Re-apply the sign convention in d-space so both code paths agree.
  for (Eigen::Index j = 0; j < retained; ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < d; ++i)
      if (std::abs(out.eigenvectors(i, j)) > std::abs(out.eigenvectors(best, j))) best = i;
    if (out.eigenvectors(best, j) < 0.0) out.eigenvectors.col(j) *= -1.0;
  }
  out.eigenproblem_dim = static_cast<int>(n);
  return out;
}

Pca2dEig pca2d_eig(const Dataset& train) {
  if (train.size() < 2) throw std::invalid_argument("fit_2dpca: need at least 2 samples");
  const Eigen::Index r = train.rows();
  const double n = static_cast<double>(train.size());

  Pca2dEig out;
  out.mean = Matrix::Zero(r, train.cols());
  for (const ImageSample& s : train.samples) out.mean += s.pixels;
  out.mean /= n;

  Matrix cov = Matrix::Zero(r, r);
  double data_scale = 0.0;
  for (const ImageSample& s : train.samples) {
    const Matrix centered = s.pixels - out.mean;
    cov += centered * centered.transpose();
    data_scale += s.pixels.squaredNorm();
  }
  cov /= n;
  check_zero_covariance(cov.trace(), data_scale / n, "fit_2dpca");

  SymEigen eig = eigh_desc(cov);
  out.eigenvalues = std::move(eig.eigenvalues);
  out.eigenvectors = std::move(eig.eigenvectors);
  out.eigenproblem_dim = static_cast<int>(r);
  return out;
}

}  // namespace detail

LinearModel fit_pca(const VectorizedSet& train, int k) {
  const Eigen::Index d = train.data.rows();
  const Eigen::Index n = train.data.cols();
  check_k(k, std::min(d, n - 1), "fit_pca");
  detail::PcaEig eig = detail::pca_eig(train);
  if (k > eig.eigenvalues.size()) {
    std::ostringstream msg;
    msg << "fit_pca: k=" << k << " exceeds the numerical rank " << eig.eigenvalues.size()
        << " of the training data";
    throw std::invalid_argument(msg.str());
  }

  LinearModel model;
  model.mode = FeatureMode::vector_1d;
  model.mean = eig.mean;
  model.eigenvalues = eig.eigenvalues;
  model.selection = SelectionRule::by_eigenvalue;
  model.eigenproblem_dim = eig.eigenproblem_dim;
  std::vector<int> selected(static_cast<std::size_t>(k));
  std::iota(selected.begin(), selected.end(), 0);
  return select_columns(std::move(model), eig.eigenvectors, selected);
}

LinearModel fit_2dpca(const Dataset& train, int k) {
  check_k(k, train.rows(), "fit_2dpca");
  detail::Pca2dEig eig = detail::pca2d_eig(train);

  LinearModel model;
  model.mode = FeatureMode::matrix_2d;
  model.mean = eig.mean;
  model.eigenvalues = eig.eigenvalues;
  model.selection = SelectionRule::by_eigenvalue;
  model.eigenproblem_dim = eig.eigenproblem_dim;
  std::vector<int> selected(static_cast<std::size_t>(k));
  std::iota(selected.begin(), selected.end(), 0);
  return select_columns(std::move(model), eig.eigenvectors, selected);
}

Vector entropy_terms(const SymEigen& eig, const Vector& ones) {
  if (ones.size() != eig.eigenvectors.rows())
    throw std::invalid_argument("entropy_terms: ones vector length does not match eigenvectors");
  const double n = static_cast<double>(ones.size());
  Vector terms(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double lambda = eig.eigenvalues[i];
    if (lambda < -1e-6) {
      std::ostringstream msg;
      msg << "entropy_terms: eigenvalue " << lambda << " is negative; input is not PSD";
      throw std::invalid_argument(msg.str());
    }
    const double proj = eig.eigenvectors.col(i).dot(ones);
    terms[i] = std::sqrt(std::max(lambda, 0.0)) * proj;
    terms[i] = terms[i] * terms[i] / (n * n);
  }
  return terms;
}

LinearModel fit_eca(const VectorizedSet& train, int k) {
  const Eigen::Index d = train.data.rows();
  const Eigen::Index n = train.data.cols();
  check_k(k, std::min(d, n - 1), "fit_eca");
  detail::PcaEig eig = detail::pca_eig(train);
  if (k > eig.eigenvalues.size())
    throw std::invalid_argument("fit_eca: k exceeds the numerical rank " +
                                std::to_string(eig.eigenvalues.size()));

  SymEigen sym{eig.eigenvalues, eig.eigenvectors};
  const Vector terms = entropy_terms(sym, Vector::Ones(d));

  LinearModel model;
  model.mode = FeatureMode::vector_1d;
  model.mean = eig.mean;
  model.eigenvalues = eig.eigenvalues;
  model.selection = SelectionRule::by_entropy;
  model.entropy_terms = terms;
  model.eigenproblem_dim = eig.eigenproblem_dim;
  return select_columns(std::move(model), eig.eigenvectors, top_entropy_indices(terms, k));
}

LinearModel fit_2deca(const Dataset& train, int k) {
  check_k(k, train.rows(), "fit_2deca");
  detail::Pca2dEig eig = detail::pca2d_eig(train);

  SymEigen sym{eig.eigenvalues, eig.eigenvectors};
  const Vector terms = entropy_terms(sym, Vector::Ones(train.rows()));

  LinearModel model;
  model.mode = FeatureMode::matrix_2d;
  model.mean = eig.mean;
  model.eigenvalues = eig.eigenvalues;
  model.selection = SelectionRule::by_entropy;
  model.entropy_terms = terms;
  model.eigenproblem_dim = eig.eigenproblem_dim;
  return select_columns(std::move(model), eig.eigenvectors, top_entropy_indices(terms, k));
}

FeatureSet project(const LinearModel& model, const VectorizedSet& data) {
  if (model.mode != FeatureMode::vector_1d)
    throw std::invalid_argument("project: model is matrix_2d but data is vectorized");
  if (data.data.rows() != model.basis.ambient()) {
    std::ostringstream msg;
    msg << "project: data dimension " << data.data.rows() << " does not match model ambient "
        << model.basis.ambient();
    throw std::invalid_argument(msg.str());
  }
  const Matrix centered = data.data.colwise() - Vector(model.mean.col(0));
  const Matrix projected = model.basis.columns.transpose() * centered;
  FeatureSet out;
  out.mode = FeatureMode::vector_1d;
  out.labels = data.labels;
  out.features.reserve(static_cast<std::size_t>(projected.cols()));
  for (Eigen::Index j = 0; j < projected.cols(); ++j) out.features.push_back(projected.col(j));
  return out;
}

FeatureSet project(const LinearModel& model, const Dataset& data) {
  if (model.mode != FeatureMode::matrix_2d)
    throw std::invalid_argument("project: model is vector_1d but data is a matrix dataset");
  if (data.rows() != model.basis.ambient()) {
    std::ostringstream msg;
    msg << "project: data rows " << data.rows() << " do not match model ambient "
        << model.basis.ambient();
    throw std::invalid_argument(msg.str());
  }
  if (data.cols() != model.mean.cols())
    throw std::invalid_argument("project: data columns do not match model mean");
  FeatureSet out;
  out.mode = FeatureMode::matrix_2d;
  for (const ImageSample& s : data.samples) {
    out.features.push_back(model.basis.columns.transpose() * (s.pixels - model.mean));
    out.labels.push_back(s.label);
  }
  return out;
}

}  // namespace subspace
