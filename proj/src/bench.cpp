#include "subspace/bench.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

namespace subspace {

using nlohmann::json;

namespace {

struct AlgorithmInfo {
  Algorithm algorithm;
  const char* name;
  bool is_2d;
  bool iterative;
};

constexpr AlgorithmInfo kAlgorithms[] = {
    {Algorithm::pca, "pca", false, false},       {Algorithm::pca2d, "2dpca", true, false},
    {Algorithm::eca, "eca", false, false},       {Algorithm::eca2d, "2deca", true, false},
    {Algorithm::r1pca, "r1pca", false, true},    {Algorithm::r1pca2d, "2dr1pca", true, true},
    {Algorithm::l1pca, "l1pca", false, true},    {Algorithm::l1pca2d, "2dl1pca", true, true},
    {Algorithm::kpca, "kpca", false, false},     {Algorithm::keca, "keca", false, false},
};

const AlgorithmInfo& info(Algorithm a) {
  for (const AlgorithmInfo& i : kAlgorithms)
    if (i.algorithm == a) return i;
  throw std::logic_error("unknown algorithm enum");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool in_family(Algorithm a, std::initializer_list<Algorithm> family) {
  for (Algorithm f : family)
    if (f == a) return true;
  return false;
}

void reject_knob(const char* knob, Algorithm a) {
  throw std::invalid_argument(std::string("config: knob '") + knob +
                              "' does not apply to algorithm '" + algorithm_name(a) + "'");
}

std::string csv_field(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream out;
  out.precision(17);
  out << *v;
  return out.str();
}

}  // namespace

const char* algorithm_name(Algorithm a) { return info(a).name; }

Algorithm algorithm_from_name(const std::string& name) {
  for (const AlgorithmInfo& i : kAlgorithms)
    if (name == i.name) return i.algorithm;
  throw std::invalid_argument("config: unknown algorithm '" + name + "'");
}

bool algorithm_is_2d(Algorithm a) { return info(a).is_2d; }
bool algorithm_is_iterative(Algorithm a) { return info(a).iterative; }

std::vector<int> default_sweep(Algorithm a) {
  return algorithm_is_2d(a) ? std::vector<int>{2, 4, 6, 8, 10, 12}
                            : std::vector<int>{10, 20, 30, 40, 50, 60};
}

void validate(const ExperimentConfig& cfg) {
  const Algorithm a = cfg.algorithm;
  if (cfg.layout != "orl_style")
    throw std::invalid_argument("config: unknown layout '" + cfg.layout + "'");
  if (cfg.data_dir.empty()) throw std::invalid_argument("config: data directory not set");
  if (cfg.train_per_subject < 1)
    throw std::invalid_argument("config: train_per_subject must be positive");
  for (int k : cfg.components)
    if (k < 1) throw std::invalid_argument("config: component counts must be positive");

  if (cfg.max_iter && !in_family(a, {Algorithm::r1pca, Algorithm::r1pca2d}))
    reject_knob("max_iter", a);
  if (cfg.tol && !in_family(a, {Algorithm::r1pca, Algorithm::r1pca2d})) reject_knob("tol", a);
  if (cfg.degree && !in_family(a, {Algorithm::kpca, Algorithm::keca})) reject_knob("degree", a);
  if (cfg.init && !in_family(a, {Algorithm::l1pca, Algorithm::l1pca2d})) reject_knob("init", a);
  if (cfg.robust_center &&
      !in_family(a, {Algorithm::r1pca, Algorithm::r1pca2d, Algorithm::l1pca, Algorithm::l1pca2d}))
    reject_knob("robust_center", a);
  if (cfg.kernel_center && !in_family(a, {Algorithm::kpca, Algorithm::keca}))
    reject_knob("kernel_center", a);
  if (cfg.trace && !algorithm_is_iterative(a)) reject_knob("trace", a);

  if (cfg.max_iter && *cfg.max_iter < 1)
    throw std::invalid_argument("config: max_iter must be >= 1");
  if (cfg.tol && *cfg.tol < 0.0) throw std::invalid_argument("config: tol must be >= 0");
  if (cfg.degree && *cfg.degree < 1) throw std::invalid_argument("config: degree must be >= 1");
}

namespace {

// Fit + project for one component count. Returns the gallery/probe features
// and fills the iterative trace when there is one.
struct FitResult {
  FeatureSet gallery;
  FeatureSet probe;
  int eigenproblem_dim = 0;
  std::optional<int> converged_at;
  ConvergenceTrace trace;
};

FitResult fit_and_project(const ExperimentConfig& cfg, int k, const Split& sp,
                          const VectorizedSet& train_vec, const VectorizedSet& test_vec) {
  FitResult out;
  const Algorithm a = cfg.algorithm;

  RobustOptions robust;
  if (cfg.max_iter) robust.max_iter = *cfg.max_iter;
  if (cfg.tol) robust.tol = *cfg.tol;
  if (cfg.robust_center) robust.center = *cfg.robust_center;

  L1Options l1;
  if (cfg.init) l1.init = *cfg.init;
  if (cfg.robust_center) l1.center = *cfg.robust_center;

  switch (a) {
    case Algorithm::pca:
    case Algorithm::eca: {
      const LinearModel model =
          a == Algorithm::pca ? fit_pca(train_vec, k) : fit_eca(train_vec, k);
      out.gallery = project(model, train_vec);
      out.probe = project(model, test_vec);
      out.eigenproblem_dim = model.eigenproblem_dim;
      break;
    }
    case Algorithm::pca2d:
    case Algorithm::eca2d: {
      const LinearModel model =
          a == Algorithm::pca2d ? fit_2dpca(sp.train, k) : fit_2deca(sp.train, k);
      out.gallery = project(model, sp.train);
      out.probe = project(model, sp.test);
      out.eigenproblem_dim = model.eigenproblem_dim;
      break;
    }
    case Algorithm::r1pca: {
      auto [model, trace] = fit_r1pca(train_vec, k, robust);
      out.gallery = project(model, train_vec);
      out.probe = project(model, test_vec);
      out.eigenproblem_dim = model.eigenproblem_dim;
      out.converged_at = trace.converged_at;
      out.trace = std::move(trace);
      break;
    }
    case Algorithm::r1pca2d: {
      auto [model, trace] = fit_2dr1pca(sp.train, k, robust);
      out.gallery = project(model, sp.train);
      out.probe = project(model, sp.test);
      out.eigenproblem_dim = model.eigenproblem_dim;
      out.converged_at = trace.converged_at;
      out.trace = std::move(trace);
      break;
    }
    case Algorithm::l1pca: {
      ConvergenceTrace trace;
      const LinearModel model = fit_l1pca(train_vec, k, cfg.seed, l1, &trace);
      out.gallery = project(model, train_vec);
      out.probe = project(model, test_vec);
      out.converged_at = trace.converged_at;
      out.trace = std::move(trace);
      break;
    }
    case Algorithm::l1pca2d: {
      ConvergenceTrace trace;
      const LinearModel model = fit_2dl1pca(sp.train, k, cfg.seed, l1, &trace);
      out.gallery = project(model, sp.train);
      out.probe = project(model, sp.test);
      out.converged_at = trace.converged_at;
      out.trace = std::move(trace);
      break;
    }
    case Algorithm::kpca:
    case Algorithm::keca: {
      const int degree = cfg.degree.value_or(2);
      const bool centered = cfg.kernel_center.value_or(false);
      const auto eig = kernel_eig(train_vec.data, degree, centered);
      const KernelModel model =
          a == Algorithm::kpca ? fit_kpca(eig, k) : fit_keca(eig, k);

      const Matrix gal = train_projections(model);
      const Matrix prb = project_kernel(model, test_vec.data);
      out.gallery.mode = FeatureMode::vector_1d;
      out.gallery.labels = train_vec.labels;
      for (Eigen::Index j = 0; j < gal.cols(); ++j) out.gallery.features.push_back(gal.col(j));
      out.probe.mode = FeatureMode::vector_1d;
      out.probe.labels = test_vec.labels;
      for (Eigen::Index j = 0; j < prb.cols(); ++j) out.probe.features.push_back(prb.col(j));
      out.eigenproblem_dim = static_cast<int>(model.eig->kernel.rows());
      break;
    }
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);

  ExperimentReport report;
  report.config = cfg;

  const Dataset corpus = load_corpus(cfg.data_dir);
  const Split sp = split(corpus, cfg.train_per_subject, cfg.split_policy, cfg.seed);
  const VectorizedSet train_vec = vectorize(sp.train);
  const VectorizedSet test_vec = vectorize(sp.test);

  const std::vector<int> sweep =
      cfg.components.empty() ? default_sweep(cfg.algorithm) : cfg.components;
  const Metric metric = cfg.metric.value_or(Metric::frobenius);

  std::vector<std::string> truth;
  for (const ImageSample& s : sp.test.samples) truth.push_back(s.label);

  bool have_best = false;
  for (int k : sweep) {
    const auto fit_start = std::chrono::steady_clock::now();
    FitResult fit = fit_and_project(cfg, k, sp, train_vec, test_vec);
    report.fit_seconds += seconds_since(fit_start);

    const auto classify_start = std::chrono::steady_clock::now();
    const std::vector<Prediction> preds = classify(fit.gallery, fit.probe, metric);
    const double acc = accuracy(preds, truth);
    report.classify_seconds += seconds_since(classify_start);

    report.per_k.emplace_back(k, acc);
    report.eigenproblem_dim = fit.eigenproblem_dim;
    if (!have_best || acc > report.best_accuracy) {
      have_best = true;
      report.best_accuracy = acc;
      report.best_k = k;
      report.converged_at = fit.converged_at;
      report.trace = std::move(fit.trace);
    }
  }

  if (cfg.trace) {
    export_trace(report.trace, *cfg.trace);
    report.trace_path = cfg.trace->string();
  }
  if (cfg.out) write_report(report, *cfg.out);
  return report;
}

std::vector<ExperimentReport> run_suite(const std::vector<ExperimentConfig>& cfgs,
                                        bool parallel) {
  std::vector<ExperimentReport> reports(cfgs.size());
  const auto run_one = [&](std::size_t i) {
    try {
      reports[i] = run_experiment(cfgs[i]);
    } catch (const std::exception& e) {
      reports[i] = ExperimentReport{};
      reports[i].config = cfgs[i];
      reports[i].error = e.what();
    }
  };

  if (parallel) {
    std::vector<std::future<void>> futures;
    futures.reserve(cfgs.size());
    for (std::size_t i = 0; i < cfgs.size(); ++i)
      futures.push_back(std::async(std::launch::async, run_one, i));
    for (auto& f : futures) f.get();
  } else {
    for (std::size_t i = 0; i < cfgs.size(); ++i) run_one(i);
  }
  return reports;
}

void export_trace(const ConvergenceTrace& trace, const std::filesystem::path& path) {
  if (trace.records.empty()) throw std::invalid_argument("export_trace: empty trace");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_trace: cannot write " + path.string());
  out << "iteration,subspace_change,off_diagonality,objective\n";
  out.precision(17);
  for (const TraceRecord& r : trace.records) {
    out << r.iteration << "," << r.subspace_change << "," << csv_field(r.off_diagonality) << ","
        << csv_field(r.objective) << "\n";
  }
  if (!out) throw std::runtime_error("export_trace: write failed for " + path.string());
}

namespace {

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["algorithm"] = algorithm_name(cfg.algorithm);
  j["data"] = cfg.data_dir.string();
  j["layout"] = cfg.layout;
  j["train_per_subject"] = cfg.train_per_subject;
  j["components"] = cfg.components.empty() ? default_sweep(cfg.algorithm) : cfg.components;
  j["split_policy"] = cfg.split_policy == SplitPolicy::first_k ? "first_k" : "seeded_random";
  j["seed"] = cfg.seed;
  if (cfg.max_iter) j["max_iter"] = *cfg.max_iter;
  if (cfg.tol) j["tol"] = *cfg.tol;
  if (cfg.degree) j["degree"] = *cfg.degree;
  if (cfg.init)
    j["init"] = *cfg.init == L1Init::max_norm_sample ? "max_norm_sample" : "seeded_random";
  if (cfg.metric) j["metric"] = *cfg.metric == Metric::frobenius ? "frobenius" : "colsum";
  if (cfg.robust_center) j["robust_center"] = *cfg.robust_center;
  if (cfg.kernel_center) j["kernel_center"] = *cfg.kernel_center;
  if (cfg.out) j["out"] = cfg.out->string();
  if (cfg.trace) j["trace"] = cfg.trace->string();
  return j;
}

json report_json(const ExperimentReport& r) {
  json j;
  j["config"] = config_to_json(r.config);
  if (r.error) {
    j["error"] = *r.error;
    return j;
  }
  json per_k = json::array();
  for (const auto& [k, acc] : r.per_k) per_k.push_back({{"k", k}, {"accuracy", acc}});
  j["per_k"] = per_k;
  j["best_k"] = r.best_k;
  j["best_accuracy"] = r.best_accuracy;
  j["fit_seconds"] = r.fit_seconds;
  j["classify_seconds"] = r.classify_seconds;
  j["eigenproblem_dim"] = r.eigenproblem_dim;
  j["converged_at"] = r.converged_at ? json(*r.converged_at) : json(nullptr);
  j["trace_path"] = r.trace_path ? json(*r.trace_path) : json(nullptr);
  return j;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  return report_json(report).dump(2);
}

void write_report(const ExperimentReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("report: cannot write " + path.string());
  out << report_to_json(report) << "\n";
}

std::string suite_table_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out.precision(17);
  out << "algorithm,best_k,accuracy,fit_seconds,classify_seconds,error\n";
  for (const ExperimentReport& r : reports) {
    out << algorithm_name(r.config.algorithm) << ",";
    if (r.error) {
      std::string msg = *r.error;
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      out << ",,,," << msg << "\n";
    } else {
      out << r.best_k << "," << r.best_accuracy << "," << r.fit_seconds << ","
          << r.classify_seconds << ",\n";
    }
  }
  return out.str();
}

std::string suite_table_json(const std::vector<ExperimentReport>& reports) {
  json rows = json::array();
  for (const ExperimentReport& r : reports) rows.push_back(report_json(r));
  return rows.dump(2);
}

namespace {

void apply_config_json(ExperimentConfig& cfg, const json& j) {
  static const char* known[] = {"algorithm", "data",          "layout",      "train_per_subject",
                                "components", "split_policy", "seed",        "max_iter",
                                "tol",        "degree",       "init",        "metric",
                                "robust_center", "kernel_center", "out",     "trace"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  if (j.contains("algorithm")) cfg.algorithm = algorithm_from_name(j["algorithm"]);
  if (j.contains("data")) cfg.data_dir = j["data"].get<std::string>();
  if (j.contains("layout")) cfg.layout = j["layout"].get<std::string>();
  if (j.contains("train_per_subject")) cfg.train_per_subject = j["train_per_subject"];
  if (j.contains("components")) {
    cfg.components.clear();
    if (j["components"].is_array())
      for (const auto& v : j["components"]) cfg.components.push_back(v.get<int>());
    else
      cfg.components.push_back(j["components"].get<int>());
  }
  if (j.contains("split_policy")) {
    const std::string p = j["split_policy"];
    if (p == "first_k")
      cfg.split_policy = SplitPolicy::first_k;
    else if (p == "seeded_random")
      cfg.split_policy = SplitPolicy::seeded_random;
    else
      throw std::invalid_argument("config: unknown split_policy '" + p + "'");
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("max_iter")) cfg.max_iter = j["max_iter"].get<int>();
  if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
  if (j.contains("degree")) cfg.degree = j["degree"].get<int>();
  if (j.contains("init")) {
    const std::string p = j["init"];
    if (p == "max_norm_sample")
      cfg.init = L1Init::max_norm_sample;
    else if (p == "seeded_random")
      cfg.init = L1Init::seeded_random;
    else
      throw std::invalid_argument("config: unknown init '" + p + "'");
  }
  if (j.contains("metric")) {
    const std::string p = j["metric"];
    if (p == "frobenius")
      cfg.metric = Metric::frobenius;
    else if (p == "colsum")
      cfg.metric = Metric::colsum;
    else
      throw std::invalid_argument("config: unknown metric '" + p + "'");
  }
  if (j.contains("robust_center")) cfg.robust_center = j["robust_center"].get<bool>();
  if (j.contains("kernel_center")) cfg.kernel_center = j["kernel_center"].get<bool>();
  if (j.contains("out")) cfg.out = std::filesystem::path(j["out"].get<std::string>());
  if (j.contains("trace")) cfg.trace = std::filesystem::path(j["trace"].get<std::string>());
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg;
  apply_config_json(cfg, j);
  return cfg;
}

std::pair<std::vector<ExperimentConfig>, bool> suite_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (!j.contains("experiments") || !j["experiments"].is_array())
    throw std::invalid_argument("suite config: missing 'experiments' array");

  // Top-level keys other than experiments/parallel act as defaults for every
  // experiment (e.g. a shared data directory).
  json defaults = j;
  defaults.erase("experiments");
  const bool parallel = defaults.contains("parallel") && defaults["parallel"].get<bool>();
  defaults.erase("parallel");

  std::vector<ExperimentConfig> cfgs;
  for (const auto& entry : j["experiments"]) {
    ExperimentConfig cfg;
    apply_config_json(cfg, defaults);
    apply_config_json(cfg, entry);
    cfgs.push_back(std::move(cfg));
  }
  return {std::move(cfgs), parallel};
}

}  // namespace subspace
