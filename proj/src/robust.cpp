#include "subspace/robust.hpp"

#include "subspace/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace subspace {

namespace {

double offdiag_ratio(const Matrix& lambda) {
  const double total = lambda.norm();
  if (total == 0.0) return 0.0;
  const Matrix off = lambda - Matrix(lambda.diagonal().asDiagonal());
  return off.norm() / total;
}

// Weight for residue s given the fixed Cauchy scale c. The degenerate c=0
// case is handled by the caller (all weights pinned to 1).
double robust_weight(double s, double c, RobustWeight kind) {
  if (kind == RobustWeight::cauchy) return 1.0 / (1.0 + (s * s) / (c * c));
  // L1-style weight 1/s, floored at the scale c to avoid the zero-residue
  // blow-up.
  return 1.0 / std::max(s, c);
}

// Sort basis columns by the diagonal of W^T C_r W, descending; returns the
// sorted diagonal as the model's eigenvalue sequence.
void order_by_induced_spectrum(Matrix& w, const Matrix& lambda, Vector& eigenvalues) {
  const Eigen::Index k = w.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return lambda(a, a) > lambda(b, b); });
  Matrix sorted(w.rows(), k);
  eigenvalues.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    sorted.col(i) = w.col(order[static_cast<std::size_t>(i)]);
    eigenvalues[i] = lambda(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
  }
  w = std::move(sorted);
}

}  // namespace

std::pair<LinearModel, ConvergenceTrace> fit_r1pca(const VectorizedSet& train, int k,
                                                   const RobustOptions& opts) {
  if (opts.max_iter < 1) throw std::invalid_argument("fit_r1pca: max_iter must be >= 1");
  if (opts.tol < 0.0) throw std::invalid_argument("fit_r1pca: tol must be >= 0");

  // Initial guess from standard PCA (also validates k against d, n-1 and the
  // numerical rank).
  const LinearModel pca = fit_pca(train, k);
  const Eigen::Index n = train.data.cols();

  Matrix x = train.data;
  Vector mean = Vector::Zero(x.rows());
  if (opts.center) {
    mean = pca.mean.col(0);
    x.colwise() -= mean;
  }
  Matrix w = pca.basis.columns;
  // Direct residue ||x - W(W^T x)||; the Pythagoras shortcut loses the
  // near-zero residues that the degenerate-c rule depends on.
  const auto residues = [&](const Matrix& basis) {
    const Matrix residual = x - basis * (basis.transpose() * x);
    return Vector(residual.colwise().norm().transpose());
  };

  Vector s = residues(w);
  const double c = median(std::vector<double>(s.data(), s.data() + s.size()));

  ConvergenceTrace trace;
  trace.degenerate_weights = c < 1e-12;
  Vector weights = Vector::Ones(n);

  if (trace.degenerate_weights) {
    // All residues are ~0: the data already lies inside the PCA subspace, so
    // with unit weights that subspace is the exact fixed point of Eq-style
    // iteration. Return it directly rather than iterating on a possibly
    // rank-deficient C_r W.
    const Matrix xtw0 = x.transpose() * w;
    Matrix lambda0 = xtw0.transpose() * xtw0;
    trace.records.push_back({1, 0.0, offdiag_ratio(lambda0), std::nullopt});
    trace.converged_at = 1;

    LinearModel model;
    model.mode = FeatureMode::vector_1d;
    model.mean = opts.center ? Matrix(mean) : Matrix(Vector::Zero(train.data.rows()));
    model.selection = SelectionRule::by_eigenvalue;
    model.eigenproblem_dim = pca.eigenproblem_dim;
    Matrix basis = w;
    order_by_induced_spectrum(basis, lambda0, model.eigenvalues);
    model.basis = SubspaceBasis{std::move(basis)};
    model.selected.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) model.selected[static_cast<std::size_t>(i)] = i;
    return {std::move(model), std::move(trace)};
  }

  Matrix lambda;  // W^T C_r W of the last completed iteration
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i)
      weights[i] = robust_weight(s[i], c, opts.weight);

    // C_r W = X diag(weights) (X^T W), never forming the d x d matrix.
    const Matrix xtw = x.transpose() * w;           // n x k
    const Matrix cr_w = x * (weights.asDiagonal() * xtw);
    const SubspaceBasis next = orthonormalize(cr_w);

    const double change = projector_distance(SubspaceBasis{w}, next);
    const Matrix xtw_next = x.transpose() * next.columns;
    lambda = xtw_next.transpose() * (weights.asDiagonal() * xtw_next);
    trace.records.push_back(
        {iter, change, offdiag_ratio(lambda), std::nullopt});

    w = next.columns;
    s = residues(w);
    if (change < opts.tol) {
      trace.converged_at = iter;
      break;
    }
  }

  // Final induced spectrum with the final iterate's weights.
  for (Eigen::Index i = 0; i < n; ++i) weights[i] = robust_weight(s[i], c, opts.weight);
  const Matrix xtw = x.transpose() * w;
  lambda = xtw.transpose() * (weights.asDiagonal() * xtw);

  LinearModel model;
  model.mode = FeatureMode::vector_1d;
  model.mean = opts.center ? Matrix(mean) : Matrix(Vector::Zero(train.data.rows()));
  model.selection = SelectionRule::by_eigenvalue;
  model.eigenproblem_dim = pca.eigenproblem_dim;
  Matrix basis = w;
  order_by_induced_spectrum(basis, lambda, model.eigenvalues);
  model.basis = SubspaceBasis{std::move(basis)};
  model.selected.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) model.selected[static_cast<std::size_t>(i)] = i;
  return {std::move(model), std::move(trace)};
}

std::pair<LinearModel, ConvergenceTrace> fit_2dr1pca(const Dataset& train, int k,
                                                     const RobustOptions& opts) {
  if (opts.max_iter < 1) throw std::invalid_argument("fit_2dr1pca: max_iter must be >= 1");
  if (opts.tol < 0.0) throw std::invalid_argument("fit_2dr1pca: tol must be >= 0");

  const LinearModel pca2d = fit_2dpca(train, k);
  const Eigen::Index n = static_cast<Eigen::Index>(train.size());
  const Eigen::Index ncols = train.cols();

  // Work on the stacked sample columns; every column of sample i carries the
  // same weight, so C_r = cols diag(w repeated) cols^T.
  Matrix cols = columns_of(train);
  if (opts.center) {
    for (Eigen::Index i = 0; i < n; ++i)
      cols.middleCols(i * ncols, ncols) -= pca2d.mean;
  }
  Matrix w = pca2d.basis.columns;
  const auto residues = [&](const Matrix& basis) {
    const Matrix residual = cols - basis * (basis.transpose() * cols);
    const Vector col_sq = residual.colwise().squaredNorm().transpose();
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i)
      out[i] = std::sqrt(col_sq.segment(i * ncols, ncols).sum());
    return out;
  };

  Vector s = residues(w);
  const double c = median(std::vector<double>(s.data(), s.data() + s.size()));

  ConvergenceTrace trace;
  trace.degenerate_weights = c < 1e-12;

  Vector col_weights = Vector::Ones(cols.cols());
  Matrix cr;
  const auto rebuild_cr = [&](const Vector& sample_res) {
    if (!trace.degenerate_weights)
      for (Eigen::Index i = 0; i < n; ++i)
        col_weights.segment(i * ncols, ncols)
            .setConstant(robust_weight(sample_res[i], c, opts.weight));
    cr = cols * col_weights.asDiagonal() * cols.transpose();
  };

  if (trace.degenerate_weights) {
    // Same degenerate shortcut as the 1D fit: unit weights make the 2DPCA
    // subspace the exact fixed point.
    rebuild_cr(s);
    Matrix lambda0 = w.transpose() * cr * w;
    trace.records.push_back({1, 0.0, offdiag_ratio(lambda0), std::nullopt});
    trace.converged_at = 1;

    LinearModel model;
    model.mode = FeatureMode::matrix_2d;
    model.mean = opts.center ? pca2d.mean : Matrix(Matrix::Zero(train.rows(), ncols));
    model.selection = SelectionRule::by_eigenvalue;
    model.eigenproblem_dim = pca2d.eigenproblem_dim;
    Matrix basis = w;
    order_by_induced_spectrum(basis, lambda0, model.eigenvalues);
    model.basis = SubspaceBasis{std::move(basis)};
    model.selected.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) model.selected[static_cast<std::size_t>(i)] = i;
    return {std::move(model), std::move(trace)};
  }

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    rebuild_cr(s);
    const SubspaceBasis next = orthonormalize(cr * w);
    const double change = projector_distance(SubspaceBasis{w}, next);
    const Matrix lambda = next.columns.transpose() * cr * next.columns;
    trace.records.push_back({iter, change, offdiag_ratio(lambda), std::nullopt});

    w = next.columns;
    s = residues(w);
    if (change < opts.tol) {
      trace.converged_at = iter;
      break;
    }
  }

  rebuild_cr(s);
  const Matrix lambda = w.transpose() * cr * w;

  LinearModel model;
  model.mode = FeatureMode::matrix_2d;
  model.mean = opts.center ? pca2d.mean : Matrix(Matrix::Zero(train.rows(), ncols));
  model.selection = SelectionRule::by_eigenvalue;
  model.eigenproblem_dim = pca2d.eigenproblem_dim;
  Matrix basis = w;
  order_by_induced_spectrum(basis, lambda, model.eigenvalues);
  model.basis = SubspaceBasis{std::move(basis)};
  model.selected.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) model.selected[static_cast<std::size_t>(i)] = i;
  return {std::move(model), std::move(trace)};
}

std::pair<Vector, L1History> l1_component(const Matrix& data, std::uint64_t seed, L1Init init) {
  const Eigen::Index d = data.rows();
  const Eigen::Index m = data.cols();
  if (m == 0) throw std::invalid_argument("l1_component: no data");

  const Vector col_norms = data.colwise().norm().transpose();
  const double max_norm = col_norms.maxCoeff();
  if (max_norm <= 0.0) throw std::invalid_argument("l1_component: all data vectors are zero");
  const double mean_norm = col_norms.mean();

  Rng rng = Rng::keyed(seed, "l1");
  Vector w(d);
  if (init == L1Init::max_norm_sample) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < m; ++i)
      if (col_norms[i] > col_norms[best]) best = i;
    w = data.col(best) / col_norms[best];
  } else {
    do {
      w = rng.normal_vector(d);
    } while (w.norm() == 0.0);
    w.normalize();
  }

  const auto objective_of = [&](const Vector& dots) { return dots.cwiseAbs().sum(); };

  L1History history;
  Vector dots = data.transpose() * w;
  history.objectives.push_back(objective_of(dots));

  Vector best_w = w;
  double best_objective = history.objectives.back();

  std::vector<int> polarity(static_cast<std::size_t>(m));
  std::vector<int> prev_polarity;
  for (int iter = 1; iter <= kL1IterationCap; ++iter) {
    for (Eigen::Index i = 0; i < m; ++i)
      polarity[static_cast<std::size_t>(i)] = dots[i] < 0.0 ? -1 : 1;  // sign(0) = +1

    if (polarity == prev_polarity) {
      // Fixed point: the flip step would reproduce w exactly. If some sample
      // is orthogonal to w the maximum may not be attained; nudge and retry.
      // Near-zero samples (deflation residue) cannot flip anything and are
      // excluded from the check.
      bool any_zero = false;
      for (Eigen::Index i = 0; i < m; ++i)
        if (col_norms[i] > 1e-12 * max_norm && std::abs(dots[i]) <= 1e-12 * col_norms[i]) {
          any_zero = true;
          break;
        }
      if (!any_zero) {
        history.converged_at = iter - 1;  // last completed flip step
        break;
      }
      Vector delta = rng.normal_vector(d);
      if (delta.norm() == 0.0) delta.setOnes();
      delta *= 1e-6 * mean_norm / delta.norm();
      w = (w + delta).normalized();
      dots = data.transpose() * w;
      ++history.perturbations;
      prev_polarity.clear();  // polarity of the nudged vector is fresh
      continue;
    }

    Vector sum = Vector::Zero(d);
    for (Eigen::Index i = 0; i < m; ++i)
      sum += static_cast<double>(polarity[static_cast<std::size_t>(i)]) * data.col(i);
    if (sum.norm() == 0.0) {
      // Polarity-weighted sum vanished (exactly balanced data); nudge.
      Vector delta = rng.normal_vector(d);
      if (delta.norm() == 0.0) delta.setOnes();
      delta *= 1e-6 * mean_norm / delta.norm();
      w = (w + delta).normalized();
      dots = data.transpose() * w;
      ++history.perturbations;
      prev_polarity.clear();
      continue;
    }

    const Vector next = sum / sum.norm();
    history.subspace_changes.push_back(
        projector_distance(SubspaceBasis{w}, SubspaceBasis{next}));
    w = next;
    dots = data.transpose() * w;
    history.objectives.push_back(objective_of(dots));
    if (history.objectives.back() > best_objective) {
      best_objective = history.objectives.back();
      best_w = w;
    }
    prev_polarity = polarity;
  }
  if (!history.converged_at) history.hit_iteration_cap = true;

  return {best_w, std::move(history)};
}

SubspaceBasis l1_greedy(const Matrix& data, int k, std::uint64_t seed, L1Init init,
                        std::vector<L1History>* histories) {
  if (k < 1) throw std::invalid_argument("l1_greedy: k must be positive");
  const double scale = data.colwise().norm().maxCoeff();

  Matrix deflated = data;
  Matrix basis(data.rows(), k);
  for (int j = 0; j < k; ++j) {
    if (deflated.colwise().norm().maxCoeff() <= 1e-12 * std::max(scale, 1e-300)) {
      std::ostringstream msg;
      msg << "l1_greedy: data rank exhausted after " << j << " of " << k << " components";
      throw std::invalid_argument(msg.str());
    }
    auto [w, history] = l1_component(deflated, seed + static_cast<std::uint64_t>(j), init);
    basis.col(j) = w;
    if (histories) histories->push_back(std::move(history));
    deflated -= w * (w.transpose() * deflated);
  }
  return SubspaceBasis{std::move(basis)};
}

namespace {

ConvergenceTrace trace_from_history(const L1History& h) {
  ConvergenceTrace trace;
  for (std::size_t t = 0; t < h.subspace_changes.size(); ++t)
    trace.records.push_back({static_cast<int>(t) + 1, h.subspace_changes[t], std::nullopt,
                             h.objectives[t + 1]});
  trace.converged_at = h.converged_at;
  return trace;
}

}  // namespace

LinearModel fit_l1pca(const VectorizedSet& train, int k, std::uint64_t seed,
                      const L1Options& opts, ConvergenceTrace* trace) {
  if (train.data.cols() < 1) throw std::invalid_argument("fit_l1pca: empty training set");
  Matrix x = train.data;
  Vector mean = Vector::Zero(x.rows());
  if (opts.center) {
    mean = x.rowwise().mean();
    x.colwise() -= mean;
  }

  std::vector<L1History> histories;
  SubspaceBasis basis = l1_greedy(x, k, seed, opts.init, &histories);
  if (trace) *trace = trace_from_history(histories.front());

  LinearModel model;
  model.mode = FeatureMode::vector_1d;
  model.mean = mean;
  model.basis = std::move(basis);
  model.selection = SelectionRule::by_eigenvalue;  // greedy order
  model.eigenproblem_dim = 0;                      // no eigenproblem is solved
  model.selected.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) model.selected[static_cast<std::size_t>(i)] = i;
  return model;
}

LinearModel fit_2dl1pca(const Dataset& train, int k, std::uint64_t seed, const L1Options& opts,
                        ConvergenceTrace* trace) {
  if (train.size() < 1) throw std::invalid_argument("fit_2dl1pca: empty training set");
  if (k > train.rows())
    throw std::invalid_argument("fit_2dl1pca: k exceeds the image row count");

  Matrix mean = Matrix::Zero(train.rows(), train.cols());
  if (opts.center) {
    for (const ImageSample& s : train.samples) mean += s.pixels;
    mean /= static_cast<double>(train.size());
  }

  Matrix cols = columns_of(train);
  if (opts.center)
    for (std::size_t i = 0; i < train.size(); ++i)
      cols.middleCols(static_cast<Eigen::Index>(i) * train.cols(), train.cols()) -= mean;

  std::vector<L1History> histories;
  SubspaceBasis basis = l1_greedy(cols, k, seed, opts.init, &histories);
  if (trace) *trace = trace_from_history(histories.front());

  LinearModel model;
  model.mode = FeatureMode::matrix_2d;
  model.mean = std::move(mean);
  model.basis = std::move(basis);
  model.selection = SelectionRule::by_eigenvalue;
  model.eigenproblem_dim = 0;
  model.selected.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) model.selected[static_cast<std::size_t>(i)] = i;
  return model;
}

}  // namespace subspace
