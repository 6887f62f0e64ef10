#pragma once

#include "subspace/dataset.hpp"
#include "subspace/kernel.hpp"
#include "subspace/recognition.hpp"
#include "subspace/robust.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace subspace {

enum class Algorithm {
  pca,
  pca2d,
  eca,
  eca2d,
  r1pca,
  r1pca2d,
  l1pca,
  l1pca2d,
  kpca,
  keca,
};

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);
bool algorithm_is_2d(Algorithm a);
bool algorithm_is_iterative(Algorithm a);

/// One benchmark run. Optional knobs apply only to the algorithms that use
/// them (max_iter/tol to the R1 family, degree to the kernel family, init to
/// the L1 family, centering flags to their families); setting one for any
/// other algorithm is rejected before any work happens. An empty components
/// list means the default sweep: 10,20,...,60 for 1D algorithms and
/// 2,4,...,12 for 2D ones.
struct ExperimentConfig {
  Algorithm algorithm = Algorithm::pca;
  std::filesystem::path data_dir;
  std::string layout = "orl_style";
  int train_per_subject = 5;
  std::vector<int> components;
  SplitPolicy split_policy = SplitPolicy::first_k;
  std::uint64_t seed = 0;

  std::optional<int> max_iter;        // r1pca, 2dr1pca
  std::optional<double> tol;          // r1pca, 2dr1pca
  std::optional<int> degree;          // kpca, keca
  std::optional<L1Init> init;         // l1pca, 2dl1pca
  std::optional<Metric> metric;       // any algorithm (classification step)
  std::optional<bool> robust_center;  // r1pca, 2dr1pca, l1pca, 2dl1pca
  std::optional<bool> kernel_center;  // kpca, keca

  std::optional<std::filesystem::path> out;    // report JSON
  std::optional<std::filesystem::path> trace;  // convergence CSV
};

/// Throws on any invalid field or knob/algorithm mismatch.
void validate(const ExperimentConfig& cfg);

std::vector<int> default_sweep(Algorithm a);

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::pair<int, double>> per_k;  // component count -> accuracy
  int best_k = 0;
  double best_accuracy = 0.0;
  double fit_seconds = 0.0;
  double classify_seconds = 0.0;
  int eigenproblem_dim = 0;  // 0 when no eigenproblem is solved (L1 family)
  std::optional<int> converged_at;
  std::optional<std::string> trace_path;
  ConvergenceTrace trace;  // best-k fit, iterative algorithms only
  std::optional<std::string> error;  // set instead of results in suite rows
};

/// Run one experiment: load, split, fit per component count, project,
/// classify, time the fit and the projection+classification separately.
/// Deterministic given the config (timings aside). Writes the report JSON
/// and/or the trace CSV when the config asks for them.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Run a batch, optionally on parallel worker threads. Reports come back in
/// input order; a failing experiment yields a report with `error` set and
/// does not abort the rest.
std::vector<ExperimentReport> run_suite(const std::vector<ExperimentConfig>& cfgs,
                                        bool parallel = false);

/// CSV with header iteration,subspace_change,off_diagonality,objective and
/// one row per record; absent fields are left empty.
void export_trace(const ConvergenceTrace& trace, const std::filesystem::path& path);

std::string report_to_json(const ExperimentReport& report);
void write_report(const ExperimentReport& report, const std::filesystem::path& path);

/// Combined per-algorithm results table (accuracy and timing columns), one
/// row per report in order.
std::string suite_table_csv(const std::vector<ExperimentReport>& reports);
std::string suite_table_json(const std::vector<ExperimentReport>& reports);

/// Parse a config (or a suite of them, under key "experiments") from JSON
/// text. Unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);
std::pair<std::vector<ExperimentConfig>, bool> suite_from_json(const std::string& text);

}  // namespace subspace
