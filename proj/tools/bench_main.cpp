// bench: run the face-recognition subspace benchmarks from the command line.
//
//   bench run   --config cfg.json [--algorithm pca --data DIR ...]
//   bench suite --config suite.json --out table.csv [--json table.json]
//
// Flags override config-file values. Exit code 0 on success, 1 with a
// one-line diagnostic on stderr otherwise.

#include "subspace/bench.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace subspace;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Flags {
  std::string config;
  std::string algorithm;
  std::string data;
  int train_per_subject = -1;
  int components = -1;
  std::string sweep;
  std::string split_policy;
  std::int64_t seed = -1;
  int max_iter = -1;
  double tol = -1.0;
  int degree = -1;
  std::string init;
  std::string metric;
  int robust_center = -1;  // tri-state: unset/-1, 0, 1
  int kernel_center = -1;
  std::string out;
  std::string trace;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--algorithm", f.algorithm,
                  "pca|2dpca|eca|2deca|r1pca|2dr1pca|l1pca|2dl1pca|kpca|keca");
  cmd->add_option("--data", f.data, "corpus root (root/<subject>/<image>.pgm)");
  cmd->add_option("--train-per-subject", f.train_per_subject, "training samples per subject");
  cmd->add_option("--components", f.components, "single component count");
  cmd->add_option("--sweep", f.sweep, "comma-separated component counts");
  cmd->add_option("--split-policy", f.split_policy, "first_k|seeded_random");
  cmd->add_option("--seed", f.seed, "seed for every randomized step");
  cmd->add_option("--max-iter", f.max_iter, "iteration cap (r1pca/2dr1pca)");
  cmd->add_option("--tol", f.tol, "subspace-change stop tolerance (r1pca/2dr1pca)");
  cmd->add_option("--degree", f.degree, "polynomial kernel degree (kpca/keca)");
  cmd->add_option("--init", f.init, "max_norm_sample|seeded_random (l1pca/2dl1pca)");
  cmd->add_option("--metric", f.metric, "frobenius|colsum");
  cmd->add_option("--robust-center", f.robust_center,
                  "1: center before robust fits (default), 0: literal uncentered form");
  cmd->add_option("--kernel-center", f.kernel_center,
                  "1: double-center the kernel matrix, 0: raw kernel (default)");
  cmd->add_option("--out", f.out, "write the report JSON here");
  cmd->add_option("--trace", f.trace, "write the convergence CSV here (iterative fits)");
}

void apply_flags(ExperimentConfig& cfg, const Flags& f) {
  if (!f.algorithm.empty()) cfg.algorithm = algorithm_from_name(f.algorithm);
  if (!f.data.empty()) cfg.data_dir = f.data;
  if (f.train_per_subject >= 0) cfg.train_per_subject = f.train_per_subject;
  if (f.components >= 0 && !f.sweep.empty())
    throw std::invalid_argument("--components and --sweep are mutually exclusive");
  if (f.components >= 0) cfg.components = {f.components};
  if (!f.sweep.empty()) {
    cfg.components.clear();
    std::stringstream ss(f.sweep);
    for (std::string tok; std::getline(ss, tok, ',');) cfg.components.push_back(std::stoi(tok));
  }
  if (!f.split_policy.empty()) {
    if (f.split_policy == "first_k")
      cfg.split_policy = SplitPolicy::first_k;
    else if (f.split_policy == "seeded_random")
      cfg.split_policy = SplitPolicy::seeded_random;
    else
      throw std::invalid_argument("unknown --split-policy '" + f.split_policy + "'");
  }
  if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
  if (f.max_iter >= 0) cfg.max_iter = f.max_iter;
  if (f.tol >= 0.0) cfg.tol = f.tol;
  if (f.degree >= 0) cfg.degree = f.degree;
  if (!f.init.empty()) {
    if (f.init == "max_norm_sample")
      cfg.init = L1Init::max_norm_sample;
    else if (f.init == "seeded_random")
      cfg.init = L1Init::seeded_random;
    else
      throw std::invalid_argument("unknown --init '" + f.init + "'");
  }
  if (!f.metric.empty()) {
    if (f.metric == "frobenius")
      cfg.metric = Metric::frobenius;
    else if (f.metric == "colsum")
      cfg.metric = Metric::colsum;
    else
      throw std::invalid_argument("unknown --metric '" + f.metric + "'");
  }
  if (f.robust_center >= 0) cfg.robust_center = f.robust_center != 0;
  if (f.kernel_center >= 0) cfg.kernel_center = f.kernel_center != 0;
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.trace.empty()) cfg.trace = f.trace;
}

int cmd_run(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) cfg = config_from_json(read_file(f.config));
  apply_flags(cfg, f);

  const ExperimentReport report = run_experiment(cfg);
  std::cout << report_to_json(report) << "\n";
  return 0;
}

int cmd_suite(const Flags& f, const std::string& json_out, bool parallel_flag) {
  if (f.config.empty()) throw std::invalid_argument("suite: --config is required");
  auto [cfgs, parallel] = suite_from_json(read_file(f.config));

  const std::vector<ExperimentReport> reports = run_suite(cfgs, parallel || parallel_flag);
  const std::string table = suite_table_csv(reports);
  if (!f.out.empty()) {
    std::ofstream out(f.out);
    if (!out) throw std::runtime_error("cannot write " + f.out);
    out << table;
  } else {
    std::cout << table;
  }
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    if (!out) throw std::runtime_error("cannot write " + json_out);
    out << suite_table_json(reports) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subspace face-recognition benchmark"};
  app.require_subcommand(1);

  Flags run_flags;
  CLI::App* run = app.add_subcommand("run", "run one experiment");
  add_run_flags(run, run_flags);

  Flags suite_flags;
  std::string suite_json_out;
  bool suite_parallel = false;
  CLI::App* suite = app.add_subcommand("suite", "run a batch of experiments");
  suite->add_option("--config", suite_flags.config, "suite JSON config")->required();
  suite->add_option("--out", suite_flags.out, "combined CSV table path");
  suite->add_option("--json", suite_json_out, "combined JSON table path");
  suite->add_flag("--parallel", suite_parallel, "run experiments on worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (suite->parsed()) return cmd_suite(suite_flags, suite_json_out, suite_parallel);
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
