#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dynpath/bootstrap.hpp"
#include "dynpath/collider.hpp"
#include "dynpath/data.hpp"
#include "dynpath/dpa.hpp"
#include "dynpath/errors.hpp"
#include "dynpath/simgen.hpp"
#include "dynpath/study.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit-code contract: 0 ok, 2 usage/validation, 3 data insufficiency,
// 4 numerical failure.
constexpr int kExitUsage = 2;
constexpr int kExitNoData = 3;
constexpr int kExitNumerical = 4;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_json(const nlohmann::json& j) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

int default_threads() {
  if (const char* env = std::getenv("DYNPATH_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

struct ManifestWriter {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  nlohmann::json counters = nlohmann::json::object();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const std::string& path) const {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    nlohmann::json m{{"command", command},       {"config_hash", hash_json(config)},
                     {"config", config},        {"seed", seed},
                     {"inputs", inputs},        {"outputs", outputs},
                     {"wall_time_s", wall},     {"counters", counters},
                     {"tool_version", kVersion}};
    std::ofstream out(path);
    if (!out) throw dynpath::ValidationError("manifest: cannot write " + path);
    out << m.dump(2) << '\n';
  }
};

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& manifest_path, int threads) {
  ManifestWriter mf;
  mf.command = "simulate";
  const dynpath::SimConfig cfg = dynpath::SimConfig::load(config_path);
  mf.config = cfg.to_json();
  mf.seed = cfg.seed;
  mf.inputs = {config_path};

  const dynpath::TrialResult trial = dynpath::generate_trial(cfg, threads);
  dynpath::write_csv(trial.dataset, out_path);
  mf.outputs = {out_path};
  mf.counters["n_subjects"] = trial.dataset.subjects.size();
  mf.counters["n_events"] = trial.n_events;
  mf.counters["n_censored_uniform"] = trial.n_censored_uniform;
  mf.counters["censoring_fraction"] =
      static_cast<double>(trial.n_censored_uniform) /
      static_cast<double>(trial.dataset.subjects.size());
  mf.counters["clamped_steps"] = trial.clamped_steps;
  mf.write(manifest_path.empty() ? out_path + ".manifest.json" : manifest_path);
  return 0;
}

int cmd_fit(const std::string& data_path, const std::string& treatment,
            const std::string& mediator, const std::vector<std::string>& adjust,
            const std::string& out_path, const std::string& manifest_path,
            int bootstrap_b, double level, std::uint64_t seed, int threads) {
  ManifestWriter mf;
  mf.command = "fit";
  mf.config = {{"treatment", treatment}, {"mediator", mediator},
               {"adjust", adjust},       {"bootstrap", bootstrap_b},
               {"level", level},         {"seed", seed}};
  mf.seed = seed;
  mf.inputs = {data_path};

  const dynpath::Dataset ds = dynpath::read_csv(data_path);
  if (treatment != "treatment") {
    throw dynpath::ValidationError("fit: unknown treatment label '" + treatment +
                                   "' (dataset column is 'treatment')");
  }
  if (mediator != "mediator") {
    throw dynpath::ValidationError("fit: unknown mediator label '" + mediator +
                                   "' (dataset mediator process is 'mediator')");
  }
  for (const auto& z : adjust) {
    if (std::find(ds.covariate_names.begin(), ds.covariate_names.end(), z) ==
        ds.covariate_names.end()) {
      throw dynpath::ValidationError("fit: unknown covariate label '" + z + "'");
    }
  }

  const dynpath::DpaResult fit = dynpath::fit_dpa(ds, adjust);
  dynpath::write_dpa_csv(fit, out_path);
  mf.outputs = {out_path};
  mf.counters["n_event_times"] = fit.times.size();
  mf.counters["n_skipped"] = fit.n_skipped;
  mf.counters["dropped_no_mediator"] = fit.dropped_no_mediator;

  if (bootstrap_b > 0) {
    const dynpath::BootstrapResult bands =
        dynpath::bootstrap_bands(ds, adjust, bootstrap_b, level, seed, threads);
    const std::string bands_path = out_path + ".bands.csv";
    dynpath::write_bands_csv(bands, bands_path);
    mf.outputs.push_back(bands_path);
    mf.counters["bootstrap_discarded"] = bands.discarded;
  }
  mf.write(manifest_path.empty() ? out_path + ".manifest.json" : manifest_path);
  return 0;
}

int cmd_study(const std::string& config_path, const std::string& out_dir,
              int reps_override, const std::string& manifest_path, int threads) {
  ManifestWriter mf;
  mf.command = "study";
  dynpath::StudyConfig cfg = dynpath::StudyConfig::load(config_path);
  if (reps_override > 0) cfg.reps = static_cast<std::size_t>(reps_override);
  mf.config = {{"sim", cfg.sim.to_json()}, {"reps", cfg.reps}};
  mf.seed = cfg.sim.seed;
  mf.inputs = {config_path};

  const dynpath::StudyResult res = dynpath::run_study(cfg, threads);
  for (const auto& sc : res.scenarios) {
    const std::string mean_path = out_dir + "/" + sc.name + "_mean.csv";
    const std::string reps_path = out_dir + "/" + sc.name + "_reps.csv";
    dynpath::write_scenario_csv(sc, mean_path, reps_path);
    mf.outputs.push_back(mean_path);
    mf.outputs.push_back(reps_path);
  }
  const std::string truth_path = out_dir + "/truth.csv";
  dynpath::write_truth_csv(res.truth, truth_path);
  mf.outputs.push_back(truth_path);
  mf.write(manifest_path.empty() ? out_dir + "/manifest.json" : manifest_path);
  return 0;
}

int cmd_verify(const std::string& suite, const std::string& config_path,
               std::uint64_t seed_override, bool has_seed,
               const std::string& out_path, int threads) {
  ManifestWriter mf;
  mf.command = "verify";
  dynpath::ColliderConfig cfg;
  if (!config_path.empty()) cfg = dynpath::ColliderConfig::load(config_path);
  if (has_seed) cfg.seed = seed_override;
  cfg.threads = threads;
  mf.config = {{"suite", suite},
               {"m_survivors", cfg.m_survivors},
               {"reps", cfg.reps},
               {"n_per_rep", cfg.n_per_rep},
               {"permutations", cfg.permutations}};
  mf.seed = cfg.seed;
  if (!config_path.empty()) mf.inputs = {config_path};

  std::vector<dynpath::VerifyReport> reports;
  if (suite == "independence" || suite == "all") {
    reports.push_back(dynpath::verify_independence(cfg));
  }
  if (suite == "stability" || suite == "all") {
    reports.push_back(dynpath::verify_coefficient_stability(cfg));
  }
  if (suite == "collapsibility" || suite == "all") {
    reports.push_back(dynpath::verify_collapsibility(cfg));
  }
  if (reports.empty()) {
    throw dynpath::ValidationError("verify: unknown suite '" + suite + "'");
  }

  nlohmann::json out = nlohmann::json::array();
  bool all_pass = true;
  for (const auto& r : reports) {
    out.push_back(r.to_json());
    all_pass = all_pass && r.all_pass();
  }
  {
    std::ofstream f(out_path);
    if (!f) throw dynpath::ValidationError("verify: cannot write " + out_path);
    f << out.dump(2) << '\n';
  }
  mf.outputs = {out_path};
  mf.counters["all_pass"] = all_pass;
  mf.write(out_path + ".manifest.json");
  std::cout << (all_pass ? "PASS" : "FAIL") << " (" << out_path << ")\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic path analysis for survival outcomes"};
  app.set_version_flag("--version", kVersion);
  int threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (default: DYNPATH_THREADS or hardware)");

  auto* sim = app.add_subcommand("simulate", "Generate a discrete-time trial");
  std::string sim_config, sim_out, sim_manifest;
  sim->add_option("config", sim_config, "Simulator config (JSON)")->required();
  sim->add_option("out", sim_out, "Output dataset CSV")->required();
  sim->add_option("--manifest", sim_manifest, "Manifest path");

  auto* fit = app.add_subcommand("fit", "Fit dynamic path analysis to a dataset");
  std::string fit_data, fit_out, fit_manifest;
  std::string fit_treatment = "treatment", fit_mediator = "mediator";
  std::vector<std::string> fit_adjust;
  int fit_bootstrap = 0;
  double fit_level = 0.95;
  std::uint64_t fit_seed = 1;
  fit->add_option("data", fit_data, "Dataset CSV")->required();
  fit->add_option("out", fit_out, "Output curves CSV")->required();
  fit->add_option("--treatment", fit_treatment, "Treatment label");
  fit->add_option("--mediator", fit_mediator, "Mediator label");
  fit->add_option("--adjust", fit_adjust, "Baseline adjustment covariates");
  fit->add_option("--bootstrap", fit_bootstrap, "Bootstrap replicates (0 = off)");
  fit->add_option("--level", fit_level, "Confidence band level");
  fit->add_option("--seed", fit_seed, "Bootstrap seed");
  fit->add_option("--manifest", fit_manifest, "Manifest path");

  auto* study = app.add_subcommand("study", "Replicated simulation study");
  std::string study_config, study_out, study_manifest;
  int study_reps = 0;
  study->add_option("config", study_config, "Study config (JSON)")->required();
  study->add_option("out", study_out, "Output directory (must exist)")->required();
  study->add_option("--reps", study_reps, "Override replication count");
  study->add_option("--manifest", study_manifest, "Manifest path");

  auto* verify = app.add_subcommand("verify", "Monte-Carlo survival-selection checks");
  std::string verify_suite = "all", verify_config, verify_out = "verify_report.json";
  std::uint64_t verify_seed = 0;
  verify->add_option("--suite", verify_suite,
                     "independence|stability|collapsibility|all");
  verify->add_option("--config", verify_config, "Suite config (JSON)");
  auto* seed_opt = verify->add_option("--seed", verify_seed, "Master seed");
  verify->add_option("--out", verify_out, "Report path (JSON)");

  app.require_subcommand(1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out, sim_manifest, threads);
    if (fit->parsed()) {
      return cmd_fit(fit_data, fit_treatment, fit_mediator, fit_adjust, fit_out,
                     fit_manifest, fit_bootstrap, fit_level, fit_seed, threads);
    }
    if (study->parsed()) {
      return cmd_study(study_config, study_out, study_reps, study_manifest, threads);
    }
    if (verify->parsed()) {
      return cmd_verify(verify_suite, verify_config, verify_seed,
                        seed_opt->count() > 0, verify_out, threads);
    }
  } catch (const dynpath::NoUsableEventTimes& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoData;
  } catch (const dynpath::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const dynpath::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return 0;
}
