#include "subspace/numeric.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace subspace {

namespace {

// Flip each column so that its largest-magnitude entry is positive; among
// entries of equal magnitude the lowest index decides.
void fix_signs(Matrix& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = std::abs(vectors(0, j));
    for (Eigen::Index i = 1; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (vectors(best, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }
}

// Gram-Schmidt core. Returns the orthonormal columns; if `kept` is non-null,
// dependent columns are dropped and their indices skipped, otherwise a
// dependent column throws.
Matrix gram_schmidt(const Matrix& m, std::vector<Eigen::Index>* kept) {
  if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument("orthonormalize: empty matrix");
  if (!m.allFinite()) throw std::invalid_argument("orthonormalize: non-finite entries");

  double max_norm = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) max_norm = std::max(max_norm, m.col(j).norm());
  const double drop_tol = 1e-12 * max_norm;

  Matrix q(m.rows(), m.cols());
  Eigen::Index nq = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Vector v = m.col(j);
    // Two projection passes keep orthogonality near machine precision even
    // for poorly conditioned inputs.
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < nq; ++i) v -= q.col(i).dot(v) * q.col(i);
    const double n = v.norm();
    if (n <= drop_tol) {
      if (kept) continue;
      std::ostringstream msg;
      msg << "orthonormalize: column " << j
          << " is numerically dependent on the preceding columns (residual norm " << n << ")";
      throw std::invalid_argument(msg.str());
    }
    q.col(nq) = v / n;
    if (kept) kept->push_back(j);
    ++nq;
  }
  return q.leftCols(nq);
}

}  // namespace

SymEigen eigh_desc(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigh_desc: matrix is not square");
  if (!a.allFinite()) throw std::invalid_argument("eigh_desc: non-finite entries");

  const double scale = a.cwiseAbs().maxCoeff();
  double max_asym = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      max_asym = std::max(max_asym, std::abs(a(i, j) - a(j, i)));
  if (scale > 0.0 && max_asym > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "eigh_desc: matrix is not symmetric (max asymmetry " << max_asym << ", relative "
        << max_asym / scale << ")";
    throw std::invalid_argument(msg.str());
  }

  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigh_desc: eigensolver failed");

  const Vector& lam = solver.eigenvalues();  // ascending
  std::vector<Eigen::Index> order(static_cast<std::size_t>(lam.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return lam[i] > lam[j]; });

  SymEigen out;
  out.eigenvalues.resize(lam.size());
  out.eigenvectors.resize(a.rows(), a.cols());
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    out.eigenvalues[k] = lam[order[static_cast<std::size_t>(k)]];
    out.eigenvectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }
  fix_signs(out.eigenvectors);
  return out;
}

SubspaceBasis orthonormalize(const Matrix& m) { return SubspaceBasis{gram_schmidt(m, nullptr)}; }

SubspaceBasis orthonormalize_dropping(const Matrix& m) {
  std::vector<Eigen::Index> kept;
  return SubspaceBasis{gram_schmidt(m, &kept)};
}

double projector_distance(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient() != b.ambient()) {
    std::ostringstream msg;
    msg << "projector_distance: ambient dimensions differ (" << a.ambient() << " vs "
        << b.ambient() << ")";
    throw std::invalid_argument(msg.str());
  }
  // Restrict both projectors to the joint span: with Q an orthonormal basis
  // of span[A B], ||AA^T - BB^T||_F = ||(Q^T A)(Q^T A)^T - (Q^T B)(Q^T B)^T||_F.
  Matrix joint(a.ambient(), a.dim() + b.dim());
  joint << a.columns, b.columns;
  const SubspaceBasis q = orthonormalize_dropping(joint);
  const Matrix ga = q.columns.transpose() * a.columns;
  const Matrix gb = q.columns.transpose() * b.columns;
  return (ga * ga.transpose() - gb * gb.transpose()).norm();
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty sequence");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace subspace
