#pragma once

#include "subspace/dataset.hpp"
#include "subspace/linear.hpp"
#include "subspace/numeric.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace subspace {

/// One diagnostic record of an iterative fit. `off_diagonality` is filled by
/// the subspace-iteration (R1) family, `objective` by the L1 family.
struct TraceRecord {
  int iteration = 0;  // 1-based
  double subspace_change = 0.0;
  std::optional<double> off_diagonality;
  std::optional<double> objective;
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
  std::optional<int> converged_at;
  /// Set when the initial residues were all ~0 (data already inside a k-dim
  /// subspace): every weight is pinned to 1 and the fit reduces to PCA.
  bool degenerate_weights = false;
};

enum class RobustWeight { cauchy, l1 };

struct RobustOptions {
  int max_iter = 120;
  double tol = 1e-4;   // stop when the subspace change drops below this
  bool center = true;  // subtract the mean before fitting (flag restores the
                       // literal uncentered form)
  RobustWeight weight = RobustWeight::cauchy;
};

/// R1-PCA: subspace iteration on the weighted covariance
/// C_r = sum_i w_i x_i x_i^T with Cauchy weights
/// w_i = (1 + s_i^2/c^2)^-1, s_i = ||x_i - W W^T x_i||, c = median initial
/// residue. Starts from the PCA basis and iterates
/// W <- orthonormalize(C_r(W) W), recomputing weights every iteration.
/// C_r is never formed when d is large; only its action on W is.
std::pair<LinearModel, ConvergenceTrace> fit_r1pca(const VectorizedSet& train, int k,
                                                   const RobustOptions& opts = {});

/// 2D variant on image matrices: C_r = sum_i w_i F_i F_i^T (r x r) with
/// Frobenius residues s_i = ||F_i - W W^T F_i||_F, starting from the 2DPCA
/// basis.
std::pair<LinearModel, ConvergenceTrace> fit_2dr1pca(const Dataset& train, int k,
                                                     const RobustOptions& opts = {});

enum class L1Init { max_norm_sample, seeded_random };

/// History of one L1 component extraction. `objectives[t]` is
/// sum_i |w(t)^T x_i| at the t-th iterate (index 0 is the initial vector);
/// flip steps never decrease it. Perturbation restarts (taken when the fixed
/// point has a zero projection) are counted but their intermediate vectors
/// are not measured.
struct L1History {
  std::vector<double> objectives;
  std::vector<double> subspace_changes;  // between consecutive iterates
  std::optional<int> converged_at;       // iteration with a stable polarity
  int perturbations = 0;
  bool hit_iteration_cap = false;
};

inline constexpr int kL1IterationCap = 1000;

/// Single best L1 direction by polarity flipping: p_i = sign(w^T x_i) with
/// sign(0) = +1, then w <- normalize(sum_i p_i x_i) until the polarities are
/// stable. A converged w with some w^T x_i = 0 is nudged by a small seeded
/// random vector (1e-6 times the mean sample norm) and iteration continues.
/// Data columns are the samples. Returns the best iterate.
std::pair<Vector, L1History> l1_component(const Matrix& data, std::uint64_t seed,
                                          L1Init init = L1Init::max_norm_sample);

/// k L1 directions by greedy deflation: after extracting w, every sample is
/// replaced by x - w (w^T x) and the next direction is sought in the
/// deflated set. Columns come out orthonormal. Per-component histories can
/// be collected through `histories`.
SubspaceBasis l1_greedy(const Matrix& data, int k, std::uint64_t seed,
                        L1Init init = L1Init::max_norm_sample,
                        std::vector<L1History>* histories = nullptr);

struct L1Options {
  bool center = true;
  L1Init init = L1Init::max_norm_sample;
};

/// L1-PCA on vectorized samples: mean-center, then greedy L1 directions.
/// Component j of the model is the j-th extracted direction. An optional
/// trace receives the first component's iteration history.
LinearModel fit_l1pca(const VectorizedSet& train, int k, std::uint64_t seed,
                      const L1Options& opts = {}, ConvergenceTrace* trace = nullptr);

/// 2DL1-PCA: L1-PCA on the columns of the mean-centered image matrices
/// (column j of F_i centered by column j of M).
LinearModel fit_2dl1pca(const Dataset& train, int k, std::uint64_t seed,
                        const L1Options& opts = {}, ConvergenceTrace* trace = nullptr);

}  // namespace subspace
