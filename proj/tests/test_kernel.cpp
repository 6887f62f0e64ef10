#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "subspace/kernel.hpp"
#include "support/test_support.hpp"

#include <algorithm>
#include <cmath>

using namespace subspace;

namespace {

VectorizedSet as_set(const Matrix& data) {
  VectorizedSet out;
  out.data = data;
  for (Eigen::Index i = 0; i < data.cols(); ++i) out.labels.push_back(std::to_string(i));
  return out;
}

// Explicit degree-2 feature map in 2D: (x1^2, sqrt(2) x1 x2, x2^2) satisfies
// phi(x).phi(y) = (x.y)^2.
Vector phi2(const Vector& x) {
  return Vector{{x[0] * x[0], std::sqrt(2.0) * x[0] * x[1], x[1] * x[1]}};
}

}  // namespace

TEST_CASE("kernel_matrix on orthonormal vectors is the identity") {
  Matrix data(2, 2);
  data << 1, 0, 0, 1;
  CHECK(kernel_matrix(data, 2).isApprox(Matrix::Identity(2, 2), 1e-15));
}

TEST_CASE("kernel_matrix with degree 1 is the Gram matrix") {
  Rng rng(5);
  const Matrix data = rng.normal_matrix(3, 6);
  CHECK(kernel_matrix(data, 1).isApprox(data.transpose() * data, 1e-12));
}

TEST_CASE("kernel_matrix is bitwise symmetric and PSD for integer degrees") {
  Rng rng(6);
  const Matrix data = rng.normal_matrix(4, 5);
  const Matrix k = kernel_matrix(data, 3);
  CHECK(k == Matrix(k.transpose()));  // exact
  const SymEigen eig = eigh_desc(k);
  CHECK(eig.eigenvalues.minCoeff() > -1e-8 * eig.eigenvalues.maxCoeff());
}

TEST_CASE("kernel_matrix rejects bad degree") {
  CHECK_THROWS_AS(kernel_matrix(Matrix::Identity(2, 2), 0), std::invalid_argument);
}

TEST_CASE("renyi_entropy_estimate hand cases") {
  const auto [sp_ones, terms_ones] = renyi_entropy_estimate(Matrix::Ones(3, 3));
  CHECK(sp_ones == doctest::Approx(1.0));
  CHECK(terms_ones[0] == doctest::Approx(1.0));
  CHECK(terms_ones[1] == doctest::Approx(0.0));
  CHECK(terms_ones[2] == doctest::Approx(0.0));

  const auto [sp_id, terms_id] = renyi_entropy_estimate(Matrix::Identity(2, 2));
  CHECK(sp_id == doctest::Approx(0.5));
  CHECK(terms_id[0] == doctest::Approx(0.25));
  CHECK(terms_id[1] == doctest::Approx(0.25));
}

TEST_CASE("renyi_entropy_estimate satisfies the quadratic-form identity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix k = testsup::random_psd(6, seed);
    const auto [sp, terms] = renyi_entropy_estimate(k);
    const Vector ones = Vector::Ones(6);
    CHECK(sp == doctest::Approx(ones.dot(k * ones) / 36.0).epsilon(1e-10));
    CHECK(terms.sum() == doctest::Approx(sp));
  }
}

TEST_CASE("renyi_entropy_estimate rejects the zero kernel") {
  CHECK_THROWS_AS(renyi_entropy_estimate(Matrix::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("linear-kernel KPCA on centered data matches PCA up to per-component sign") {
  Rng rng(21);
  Matrix data = rng.normal_matrix(4, 9);
  const Vector mean = data.rowwise().mean();
  data.colwise() -= mean;  // pre-centered

  const KernelModel kpca = fit_kpca(data, 3, 1);
  const Matrix kernel_feats = train_projections(kpca);

  const LinearModel pca = fit_pca(as_set(data), 3);
  const FeatureSet pca_feats = project(pca, as_set(data));

  for (Eigen::Index i = 0; i < 9; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(kernel_feats(j, i)) ==
            doctest::Approx(std::abs(pca_feats.features[static_cast<std::size_t>(i)](j, 0)))
                .epsilon(1e-6));
}

TEST_CASE("identical points leave a rank-1 kernel") {
  Matrix data(3, 2);
  data.col(0) = Vector{{1.0, 2.0, 3.0}};
  data.col(1) = data.col(0);
  const auto eig = kernel_eig(data, 2);
  CHECK(eig->retained == 1);
  CHECK_NOTHROW(fit_kpca(eig, 1));
  CHECK_THROWS_WITH_AS(fit_kpca(eig, 2), doctest::Contains("retained rank 1"),
                       std::invalid_argument);
}

TEST_CASE("KPCA and KECA share the decomposition and differ only in selection") {
  // Constructed so the top-eigenvalue eigenvector has e^T 1 = 0 (antipodal
  // heavy pair) while the next one does not (aligned light pair).
  Matrix data(2, 4);
  data.col(0) = Vector{{3.0, 0.0}};
  data.col(1) = Vector{{-3.0, 0.0}};
  data.col(2) = Vector{{0.0, 1.0}};
  data.col(3) = Vector{{0.0, 0.5}};

  const auto eig = kernel_eig(data, 1);
  const KernelModel kpca = fit_kpca(eig, 1);
  const KernelModel keca = fit_keca(eig, 1);
  CHECK(kpca.eig.get() == keca.eig.get());  // literally the same object
  CHECK(kpca.selected != keca.selected);

  // Oracle: evaluate the entropy terms directly.
  const Vector ones = Vector::Ones(4);
  int best_term = 0;
  double best_value = -1.0;
  for (int i = 0; i < eig->retained; ++i) {
    const double proj = eig->eig.eigenvectors.col(i).dot(ones);
    const double value = eig->eig.eigenvalues[i] * proj * proj / 16.0;
    if (value > best_value) {
      best_value = value;
      best_term = i;
    }
  }
  CHECK(keca.selected[0] == best_term);
  CHECK(kpca.selected[0] == 0);
}

TEST_CASE("KECA with full k selects the same set as KPCA") {
  Rng rng(23);
  const Matrix data = rng.normal_matrix(3, 7);
  const auto eig = kernel_eig(data, 2);
  const int k = eig->retained;
  KernelModel kpca = fit_kpca(eig, k);
  KernelModel keca = fit_keca(eig, k);
  std::sort(kpca.selected.begin(), kpca.selected.end());
  std::sort(keca.selected.begin(), keca.selected.end());
  CHECK(kpca.selected == keca.selected);
}

TEST_CASE("KECA selection maximizes the entropy sum over all size-k subsets") {
  Rng rng(24);
  const Matrix data = rng.normal_matrix(3, 8);
  const auto eig = kernel_eig(data, 2);
  const int k = std::min(3, eig->retained);
  const KernelModel keca = fit_keca(eig, k);

  double selected_sum = 0.0;
  for (int idx : keca.selected) selected_sum += eig->entropy_terms[idx];

  // Brute force over all subsets of the retained indices.
  double best = -1.0;
  const int r = eig->retained;
  for (unsigned mask = 0; mask < (1u << r); ++mask) {
    if (static_cast<int>(__builtin_popcount(mask)) != k) continue;
    double sum = 0.0;
    for (int i = 0; i < r; ++i)
      if (mask & (1u << i)) sum += eig->entropy_terms[i];
    best = std::max(best, sum);
  }
  CHECK(selected_sum == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("project_kernel reproduces training projections") {
  Rng rng(25);
  const Matrix data = rng.normal_matrix(3, 6);
  const KernelModel model = fit_kpca(data, 3, 2);
  const Matrix train_feats = train_projections(model);
  for (Eigen::Index t = 0; t < 6; ++t) {
    const Vector out = project_kernel(model, Vector(data.col(t)));
    CHECK((out - train_feats.col(t)).norm() <= 1e-8 * train_feats.col(t).norm());
  }
}

TEST_CASE("project_kernel maps zero to zero and validates dimensions") {
  Rng rng(26);
  const Matrix data = rng.normal_matrix(3, 5);
  const KernelModel model = fit_kpca(data, 2, 2);
  CHECK(project_kernel(model, Vector(Vector::Zero(3))).norm() == 0.0);
  CHECK_THROWS_AS(project_kernel(model, Vector(Vector::Zero(4))), std::invalid_argument);
}

TEST_CASE("degree-2 projections agree with the explicit monomial feature map") {
  Rng rng(27);
  const Matrix data = rng.normal_matrix(2, 4);
  const KernelModel model = fit_kpca(data, 2, 2);

  // Oracle: uncentered PCA-style directions in the explicit feature space
  // u_j = Phi e_j / sqrt(lambda_j), projections phi(x)^T u_j.
  Matrix phi(3, 4);
  for (Eigen::Index i = 0; i < 4; ++i) phi.col(i) = phi2(data.col(i));
  for (std::uint64_t probe = 0; probe < 5; ++probe) {
    Rng prng(100 + probe);
    const Vector x = prng.normal_vector(2);
    const Vector got = project_kernel(model, x);
    for (int j = 0; j < 2; ++j) {
      const int idx = model.selected[static_cast<std::size_t>(j)];
      const Vector u =
          phi * model.eig->eig.eigenvectors.col(idx) / std::sqrt(model.eig->eig.eigenvalues[idx]);
      CHECK(got[j] == doctest::Approx(phi2(x).dot(u)).epsilon(1e-8));
    }
  }
}

TEST_CASE("centered kernel mode keeps the projection consistency identity") {
  Rng rng(28);
  const Matrix data = rng.normal_matrix(3, 6);
  const KernelModel model = fit_kpca(data, 2, 2, /*centered=*/true);
  const Matrix train_feats = train_projections(model);
  for (Eigen::Index t = 0; t < 6; ++t) {
    const Vector out = project_kernel(model, Vector(data.col(t)));
    CHECK((out - train_feats.col(t)).norm() <= 1e-8 * (train_feats.col(t).norm() + 1.0));
  }
}

TEST_CASE("selected indices are ordered by the ranking rule") {
  Rng rng(29);
  const Matrix data = rng.normal_matrix(3, 8);
  const auto eig = kernel_eig(data, 2);
  const KernelModel kpca = fit_kpca(eig, 3);
  for (std::size_t j = 1; j < kpca.selected.size(); ++j)
    CHECK(eig->eig.eigenvalues[kpca.selected[j - 1]] >= eig->eig.eigenvalues[kpca.selected[j]]);
  const KernelModel keca = fit_keca(eig, 3);
  for (std::size_t j = 1; j < keca.selected.size(); ++j)
    CHECK(eig->entropy_terms[keca.selected[j - 1]] >= eig->entropy_terms[keca.selected[j]]);
}
