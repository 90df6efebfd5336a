#include "qfilter/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qfilter/experiments.hpp"
#include "qfilter/integrate.hpp"
#include "qfilter/io.hpp"
#include "qfilter/rng.hpp"

namespace qfilter {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Strict JSON helpers: unknown keys are rejected so typos cannot silently
// fall back to defaults.
// ---------------------------------------------------------------------------

void ensure_known_keys(const json& object, const std::vector<std::string>& known,
                       const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
  }
}

double get_number(const json& object, const char* key, double fallback) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_number()) {
    throw ConfigError(std::string("key \"") + key + "\" must be a number");
  }
  return object[key].get<double>();
}

int get_int(const json& object, const char* key, int fallback) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_number_integer()) {
    throw ConfigError(std::string("key \"") + key + "\" must be an integer");
  }
  return object[key].get<int>();
}

std::uint64_t get_u64(const json& object, const char* key,
                      std::uint64_t fallback) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_number_unsigned() && !object[key].is_number_integer()) {
    throw ConfigError(std::string("key \"") + key +
                      "\" must be a non-negative integer");
  }
  return object[key].get<std::uint64_t>();
}

std::string get_string(const json& object, const char* key,
                       const std::string& fallback) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_string()) {
    throw ConfigError(std::string("key \"") + key + "\" must be a string");
  }
  return object[key].get<std::string>();
}

std::vector<int> get_int_array(const json& object, const char* key,
                               std::vector<int> fallback) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_array()) {
    throw ConfigError(std::string("key \"") + key +
                      "\" must be an array of integers");
  }
  std::vector<int> values;
  for (const auto& entry : object[key]) {
    if (!entry.is_number_integer()) {
      throw ConfigError(std::string("key \"") + key +
                        "\" must be an array of integers");
    }
    values.push_back(entry.get<int>());
  }
  return values;
}

std::vector<double> get_number_array(const json& object, const char* key,
                                     std::vector<double> fallback) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_array()) {
    throw ConfigError(std::string("key \"") + key +
                      "\" must be an array of numbers");
  }
  std::vector<double> values;
  for (const auto& entry : object[key]) {
    if (!entry.is_number()) {
      throw ConfigError(std::string("key \"") + key +
                        "\" must be an array of numbers");
    }
    values.push_back(entry.get<double>());
  }
  return values;
}

json load_config_file(const std::string& path) {
  if (!fs::exists(path)) {
    throw ConfigError("config file '" + path + "' does not exist");
  }
  json parsed;
  try {
    parsed = json::parse(read_text_file(path));
  } catch (const std::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " +
                      e.what());
  }
  if (!parsed.is_object()) {
    throw ConfigError("config file '" + path + "' must hold a JSON object");
  }
  return parsed;
}

FourierField field_from_config(const json& value, const char* key) {
  try {
    return field_from_json(value);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid field under \"") + key +
                      "\": " + e.what());
  }
}

FourierField field_from_sample_file(const std::string& path, double period,
                                    int max_harmonic) {
  const std::string content = read_text_file(path);
  std::vector<double> times;
  std::vector<Eigen::Vector3d> values;
  std::istringstream lines(content);
  std::string line;
  bool first = true;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    if (first) {  // header row: t,x,y,z
      first = false;
      continue;
    }
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != 4) {
      throw ConfigError("sample file '" + path + "' needs rows t,x,y,z");
    }
    times.push_back(row[0]);
    values.emplace_back(row[1], row[2], row[3]);
  }
  if (times.size() < 2) {
    throw ConfigError("sample file '" + path + "' holds fewer than two rows");
  }
  try {
    return field_from_samples(times, values, period, max_harmonic);
  } catch (const std::exception& e) {
    throw ConfigError("sample file '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Common settings: defaults < QFILTER_SEED < config file < explicit flags.
// ---------------------------------------------------------------------------

struct CommonSettings {
  std::uint64_t seed = 0;
  int steps = 0;
  int jobs = 1;
  std::string out = "runs";
  std::string format = "csv";
};

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  int steps = 0;
  int trials = 0;
  int jobs = 1;
  std::string out;
  std::string format;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* format_opt = nullptr;
};

void add_common_flags(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config_path, "JSON config file");
  flags.seed_opt = sub->add_option("--seed", flags.seed, "base seed");
  flags.steps_opt =
      sub->add_option("--steps", flags.steps, "integrator steps (0 = auto)");
  flags.trials_opt =
      sub->add_option("--trials", flags.trials, "per-experiment trial count");
  flags.jobs_opt =
      sub->add_option("--jobs", flags.jobs, "worker threads (0 = auto)");
  flags.out_opt = sub->add_option("--out", flags.out, "output directory");
  flags.format_opt = sub->add_option("--format", flags.format,
                                     "data file format: csv or json");
}

void apply_env_seed(CommonSettings& settings) {
  const char* env = std::getenv("QFILTER_SEED");
  if (env == nullptr || *env == '\0') return;
  std::uint64_t value = 0;
  const char* end = env + std::string_view(env).size();
  const auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("QFILTER_SEED is not a non-negative integer");
  }
  settings.seed = value;
}

void apply_common_config(const json& config, const char* experiment,
                         CommonSettings& settings) {
  ensure_known_keys(config,
                    {"experiment", "seed", "steps", "jobs", "out", "format",
                     "spec"},
                    "config");
  const std::string named = get_string(config, "experiment", experiment);
  if (named != experiment) {
    throw ConfigError("config is for experiment \"" + named +
                      "\" but subcommand is \"" + experiment + "\"");
  }
  settings.seed = get_u64(config, "seed", settings.seed);
  settings.steps = get_int(config, "steps", settings.steps);
  settings.jobs = get_int(config, "jobs", settings.jobs);
  settings.out = get_string(config, "out", settings.out);
  settings.format = get_string(config, "format", settings.format);
}

void apply_common_flags(const CommonFlags& flags, CommonSettings& settings) {
  if (flags.seed_opt->count() > 0) settings.seed = flags.seed;
  if (flags.steps_opt->count() > 0) settings.steps = flags.steps;
  if (flags.jobs_opt->count() > 0) settings.jobs = flags.jobs;
  if (flags.out_opt->count() > 0) settings.out = flags.out;
  if (flags.format_opt->count() > 0) settings.format = flags.format;
  if (settings.format != "csv" && settings.format != "json") {
    throw ConfigError("format must be \"csv\" or \"json\"");
  }
  if (settings.steps < 0) throw ConfigError("steps must be >= 0");
  if (settings.jobs < 0) throw ConfigError("jobs must be >= 0");
}

const json* spec_block(const json& config) {
  if (!config.contains("spec")) return nullptr;
  if (!config["spec"].is_object()) {
    throw ConfigError("config \"spec\" must be an object");
  }
  return &config["spec"];
}

// ---------------------------------------------------------------------------
// Run output: <out>/<experiment>-<seed>/{data.csv|data.json, manifest.json}
// ---------------------------------------------------------------------------

int finish_run(const std::string& experiment, const CommonSettings& settings,
               const ordered_json& effective_config, int resolved_steps,
               const CsvTable& table, const ordered_json& summary,
               double wall_seconds, bool pass, const std::string& summary_line) {
  const fs::path dir = fs::path(settings.out) /
                       (experiment + "-" + std::to_string(settings.seed));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory '" + dir.string() +
                      "': " + ec.message());
  }

  try {
    if (settings.format == "csv") {
      write_text_file((dir / "data.csv").string(), table.to_csv());
    } else {
      write_text_file((dir / "data.json").string(),
                      table.to_json_rows().dump(2) + "\n");
    }
    ordered_json manifest;
    manifest["artifact_version"] = kVersion;
    manifest["experiment"] = experiment;
    manifest["config"] = effective_config;
    manifest["integrator"] = {{"requested_steps", settings.steps},
                              {"resolved_steps", resolved_steps}};
    manifest["base_seed"] = settings.seed;
    manifest["jobs"] = settings.jobs;
    manifest["summary"] = summary;
    manifest["wall_time_seconds"] = wall_seconds;
    write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    throw ConfigError("output path is not writable: " + std::string(e.what()));
  }

  std::cout << summary_line << "\n";
  return pass ? 0 : 1;
}

ordered_json common_config_json(const std::string& experiment,
                                const CommonSettings& settings) {
  ordered_json config;
  config["experiment"] = experiment;
  config["seed"] = settings.seed;
  config["steps"] = settings.steps;
  config["jobs"] = settings.jobs;
  config["out"] = settings.out;
  config["format"] = settings.format;
  return config;
}

std::string pass_tag(bool pass) { return pass ? "[ok]" : "[FAIL]"; }

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int run_sweep(const CommonFlags& flags) {
  CommonSettings settings;
  apply_env_seed(settings);
  SweepSpec spec;
  if (!flags.config_path.empty()) {
    const json config = load_config_file(flags.config_path);
    apply_common_config(config, "sweep", settings);
    if (const json* block = spec_block(config)) {
      ensure_known_keys(*block,
                        {"period", "signal", "background_support",
                         "background_epsilon", "control_harmonics",
                         "realizations"},
                        "sweep spec");
      spec.period = get_number(*block, "period", spec.period);
      if (block->contains("signal")) {
        spec.signal = field_from_config((*block)["signal"], "signal");
      }
      spec.background_support = get_int_array(*block, "background_support",
                                              spec.background_support);
      spec.background_epsilon =
          get_number(*block, "background_epsilon", spec.background_epsilon);
      spec.control_harmonics =
          get_int_array(*block, "control_harmonics", spec.control_harmonics);
      spec.realizations = get_int(*block, "realizations", spec.realizations);
    }
  }
  apply_common_flags(flags, settings);
  if (flags.trials_opt->count() > 0) spec.realizations = flags.trials;
  if (spec.signal.period() != spec.period) {
    throw ConfigError("sweep signal period must equal the spec period");
  }
  spec.base_seed = settings.seed;
  spec.steps = settings.steps;
  spec.jobs = settings.jobs;

  const auto start = std::chrono::steady_clock::now();
  std::vector<TrialFailure> failures;
  const std::vector<SweepPoint> points = frequency_sweep(spec, &failures);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  for (const TrialFailure& failure : failures) {
    std::cerr << "warning: sweep trial " << failure.trial
              << " failed: " << failure.message << "\n";
  }

  CsvTable table({"omega0", "realization", "seed", "response", "response_sum"});
  for (const SweepPoint& p : points) {
    table.add_row(std::vector<std::string>{
        format_double(p.omega0), std::to_string(p.realization),
        std::to_string(p.seed), format_double(p.response),
        format_double(p.response_sum)});
  }

  // On-target medians must sit within 25% of the first-order model; every
  // off-target median must stay below 1e-5.
  const auto medians = sweep_medians(points);
  bool pass = true;
  double off_target_max = 0.0;
  double on_target_worst_rel = 0.0;
  ordered_json median_json = ordered_json::array();
  for (const auto& [harmonic, median] : medians) {
    const double model =
        first_order_response(spec.signal, harmonic_omega(harmonic, spec.period),
                             spec.period)
            .averaged;
    median_json.push_back(
        {{"control_harmonic", harmonic}, {"median", median}, {"model", model}});
    if (model > 0.0) {
      const double rel = std::abs(median / model - 1.0);
      on_target_worst_rel = std::max(on_target_worst_rel, rel);
      if (rel > 0.25) pass = false;
    } else {
      off_target_max = std::max(off_target_max, median);
      if (median > 1e-5) pass = false;
    }
  }

  ordered_json effective = common_config_json("sweep", settings);
  effective["spec"] = {
      {"period", spec.period},
      {"signal", field_to_json(spec.signal)},
      {"background_support", spec.background_support},
      {"background_epsilon", spec.background_epsilon},
      {"control_harmonics", spec.control_harmonics},
      {"realizations", spec.realizations}};

  int max_harmonic = spec.signal.max_harmonic();
  for (int k : spec.background_support) max_harmonic = std::max(max_harmonic, k);
  for (int k : spec.control_harmonics) max_harmonic = std::max(max_harmonic, k);
  const int resolved =
      settings.steps > 0 ? settings.steps : default_step_count(max_harmonic);

  ordered_json summary = {{"medians", median_json},
                          {"on_target_worst_rel_dev", on_target_worst_rel},
                          {"off_target_max_median", off_target_max},
                          {"failed_trials", failures.size()}};
  const std::string line =
      "sweep: on-target median rel. dev. " + format_double(on_target_worst_rel) +
      " (<= 0.25), off-target max median " + format_double(off_target_max) +
      " (<= 1e-05) " + pass_tag(pass);
  return finish_run("sweep", settings, effective, resolved, table, summary,
                    wall, pass, line);
}

// ---------------------------------------------------------------------------
// scaling
// ---------------------------------------------------------------------------

int run_scaling(const CommonFlags& flags) {
  CommonSettings settings;
  apply_env_seed(settings);
  ScalingSpec spec;
  if (!flags.config_path.empty()) {
    const json config = load_config_file(flags.config_path);
    apply_common_config(config, "scaling", settings);
    if (const json* block = spec_block(config)) {
      ensure_known_keys(*block,
                        {"period", "epsilon_grid", "signal_support",
                         "background_support", "control_harmonic", "axes",
                         "trials"},
                        "scaling spec");
      spec.period = get_number(*block, "period", spec.period);
      spec.epsilon_grid =
          get_number_array(*block, "epsilon_grid", spec.epsilon_grid);
      spec.signal_support =
          get_int_array(*block, "signal_support", spec.signal_support);
      spec.background_support = get_int_array(*block, "background_support",
                                              spec.background_support);
      spec.control_harmonic =
          get_int(*block, "control_harmonic", spec.control_harmonic);
      if (block->contains("axes")) {
        if (!(*block)["axes"].is_array()) {
          throw ConfigError("scaling \"axes\" must be an array of axis names");
        }
        spec.axes.clear();
        for (const auto& entry : (*block)["axes"]) {
          if (!entry.is_string()) {
            throw ConfigError("scaling \"axes\" entries must be strings");
          }
          spec.axes.push_back(axis_from_name(entry.get<std::string>()));
        }
      }
      spec.trials_per_epsilon = get_int(*block, "trials", spec.trials_per_epsilon);
    }
  }
  apply_common_flags(flags, settings);
  if (flags.trials_opt->count() > 0) spec.trials_per_epsilon = flags.trials;
  spec.base_seed = settings.seed;
  spec.steps = settings.steps;
  spec.jobs = settings.jobs;

  const auto start = std::chrono::steady_clock::now();
  const ScalingResult result = error_scaling(spec);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  for (const TrialFailure& failure : result.failures) {
    std::cerr << "warning: scaling trial " << failure.trial
              << " failed: " << failure.message << "\n";
  }
  CsvTable table({"epsilon", "trial", "abs_r", "bound", "I_s", "I_b", "seed",
                  "p", "pbar"});
  for (const TrialRecord& r : result.trials) {
    table.add_row(std::vector<std::string>{
        format_double(r.epsilon_signal), std::to_string(r.trial),
        format_double(r.abs_residual), format_double(r.probability_bound),
        format_double(r.integrated_signal),
        format_double(r.integrated_background), std::to_string(r.seed),
        format_double(r.exact_probability), format_double(r.model_probability)});
  }

  std::vector<std::pair<double, double>> mean_points;
  for (const ScalingSummary& s : result.per_epsilon) {
    mean_points.emplace_back(s.epsilon, s.mean_abs_residual);
  }
  const PolyFit fit = fit_cubic_quartic(mean_points);

  bool contained = true;
  for (const TrialRecord& r : result.trials) {
    if (r.integrated_signal + r.integrated_background <= 1.0 &&
        r.abs_residual > r.probability_bound) {
      contained = false;
    }
  }
  const bool pass = fit.r_squared >= 0.99 && contained;

  const std::vector<double>& grid =
      spec.epsilon_grid.empty() ? default_epsilon_grid() : spec.epsilon_grid;
  ordered_json effective = common_config_json("scaling", settings);
  ordered_json axes_json = ordered_json::array();
  for (ControlAxis axis : spec.axes) axes_json.push_back(axis_name(axis));
  effective["spec"] = {{"period", spec.period},
                       {"epsilon_grid", grid},
                       {"signal_support", spec.signal_support},
                       {"background_support", spec.background_support},
                       {"control_harmonic", spec.control_harmonic},
                       {"axes", axes_json},
                       {"trials", spec.trials_per_epsilon}};

  int max_harmonic = spec.control_harmonic;
  for (int k : spec.signal_support) max_harmonic = std::max(max_harmonic, k);
  for (int k : spec.background_support) max_harmonic = std::max(max_harmonic, k);
  const int resolved =
      settings.steps > 0 ? settings.steps : default_step_count(max_harmonic);

  ordered_json summary = {{"fit_cubic", fit.cubic},
                          {"fit_quartic", fit.quartic},
                          {"r_squared", fit.r_squared},
                          {"bound_contained", contained},
                          {"failed_trials", result.failures.size()}};
  const std::string line = "scaling: fit " + format_double(fit.cubic) +
                           "*eps^3 + " + format_double(fit.quartic) +
                           "*eps^4, R^2 " + format_double(fit.r_squared) +
                           " (>= 0.99), bound containment " +
                           (contained ? "yes" : "NO") + " " + pass_tag(pass);
  return finish_run("scaling", settings, effective, resolved, table, summary,
                    wall, pass, line);
}

// ---------------------------------------------------------------------------
// heisenberg
// ---------------------------------------------------------------------------

int run_heisenberg(const CommonFlags& flags) {
  CommonSettings settings;
  apply_env_seed(settings);
  HeisenbergSpec spec;
  if (!flags.config_path.empty()) {
    const json config = load_config_file(flags.config_path);
    apply_common_config(config, "heisenberg", settings);
    if (const json* block = spec_block(config)) {
      ensure_known_keys(*block,
                        {"period", "n_list", "signal", "control_harmonic",
                         "background_checks", "background_epsilon"},
                        "heisenberg spec");
      spec.period = get_number(*block, "period", spec.period);
      spec.n_list = get_int_array(*block, "n_list", spec.n_list);
      if (block->contains("signal")) {
        spec.signal = field_from_config((*block)["signal"], "signal");
      }
      spec.control_harmonic =
          get_int(*block, "control_harmonic", spec.control_harmonic);
      spec.background_checks =
          get_int(*block, "background_checks", spec.background_checks);
      spec.background_epsilon =
          get_number(*block, "background_epsilon", spec.background_epsilon);
    }
  }
  apply_common_flags(flags, settings);
  if (flags.trials_opt->count() > 0) spec.background_checks = flags.trials;
  spec.base_seed = settings.seed;
  spec.steps = settings.steps;
  spec.jobs = settings.jobs;

  const auto start = std::chrono::steady_clock::now();
  const HeisenbergResult result = heisenberg_study(spec);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  CsvTable table({"n", "p_detect", "cfi", "cfi_defined", "min_fidelity"});
  double min_fidelity = 1.0;
  for (const HeisenbergPoint& p : result.points) {
    min_fidelity = std::min(min_fidelity, p.min_zero_signal_fidelity);
    table.add_row(std::vector<std::string>{
        std::to_string(p.n_qubits), format_double(p.detection),
        format_double(p.cfi), p.cfi_defined ? "1" : "0",
        format_double(p.min_zero_signal_fidelity)});
  }

  const bool slope_p_ok = result.detection_slope.has_value() &&
                          std::abs(*result.detection_slope - 2.0) <= 0.15;
  const bool slope_cfi_ok =
      result.cfi_slope.has_value() && std::abs(*result.cfi_slope - 2.0) <= 0.2;
  const bool fidelity_ok = min_fidelity >= 1.0 - 1e-9;
  const bool pass = slope_p_ok && slope_cfi_ok && fidelity_ok;

  ordered_json effective = common_config_json("heisenberg", settings);
  effective["spec"] = {{"period", spec.period},
                       {"n_list", spec.n_list},
                       {"signal", field_to_json(spec.signal)},
                       {"control_harmonic", spec.control_harmonic},
                       {"background_checks", spec.background_checks},
                       {"background_epsilon", spec.background_epsilon}};

  const int max_harmonic = std::max(
      {spec.control_harmonic, spec.signal.max_harmonic(), 10});
  const int resolved =
      settings.steps > 0 ? settings.steps : default_step_count(max_harmonic);

  ordered_json summary = {
      {"detection_slope",
       result.detection_slope ? json(*result.detection_slope) : json()},
      {"cfi_slope", result.cfi_slope ? json(*result.cfi_slope) : json()},
      {"min_zero_signal_fidelity", min_fidelity}};
  const std::string line =
      "heisenberg: p(M) slope " +
      (result.detection_slope ? format_double(*result.detection_slope)
                              : std::string("undefined")) +
      " (2.0+-0.15), CFI slope " +
      (result.cfi_slope ? format_double(*result.cfi_slope)
                        : std::string("undefined")) +
      " (2.0+-0.2), min fidelity " + format_double(min_fidelity) + " " +
      pass_tag(pass);
  return finish_run("heisenberg", settings, effective, resolved, table, summary,
                    wall, pass, line);
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

double algebra_invariant_defect(std::uint64_t seed) {
  double worst = 0.0;
  // Collective operator algebra.
  for (int n : {1, 2, 4, 8}) {
    const CollectiveSpinOps ops = collective_ops(n);
    const std::complex<double> imag(0.0, 1.0);
    const MatrixXcd comm_xy = ops.sx * ops.sy - ops.sy * ops.sx - imag * ops.sz;
    const MatrixXcd comm_yz = ops.sy * ops.sz - ops.sz * ops.sy - imag * ops.sx;
    const MatrixXcd comm_zx = ops.sz * ops.sx - ops.sx * ops.sz - imag * ops.sy;
    const double spin = ops.total_spin();
    const MatrixXcd casimir = ops.sx * ops.sx + ops.sy * ops.sy +
                              ops.sz * ops.sz -
                              spin * (spin + 1.0) *
                                  MatrixXcd::Identity(ops.dim(), ops.dim());
    worst = std::max({worst, comm_xy.cwiseAbs().maxCoeff(),
                      comm_yz.cwiseAbs().maxCoeff(),
                      comm_zx.cwiseAbs().maxCoeff(),
                      casimir.cwiseAbs().maxCoeff()});
  }
  // Projector completeness on random states.
  SplitMix64 rng(seed);
  for (int n : {1, 4, 8}) {
    const int d = n + 1;
    Eigen::VectorXcd amps(static_cast<Eigen::Index>(d) * d);
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
      amps[i] = std::complex<double>(rng.next_gaussian(), rng.next_gaussian());
    }
    amps.normalize();
    const TwoRegisterState state(n, amps);
    for (ControlAxis axis : all_control_axes()) {
      const auto probs = outcome_projectors(axis, n).probabilities(state);
      double total = 0.0;
      for (double p : probs) total += p;
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  // Unitarity of a random-background propagation.
  const FourierField background =
      FourierField::random(rng.next_u64(), harmonic_range(1, 10), 1.0, 1.0);
  SensorConfig config;
  config.control_harmonic = 5;
  const auto pair =
      hamiltonian_pair(FourierField(1.0), background, config.omega0(),
                       ControlAxis::plus_x);
  const Matrix2cd u = propagate_timeordered(pair.second, 1.0, 1024);
  worst = std::max(worst, max_unitarity_defect(u));
  // Closed-form first-order propagator against midpoint quadrature.
  for (int trial = 0; trial < 5; ++trial) {
    const FourierField s =
        FourierField::random(rng.next_u64(), harmonic_range(1, 7), 0.3, 1.0);
    const Eigen::Vector3d axis = axis_vector(ControlAxis::plus_y);
    const double omega0 = harmonic_omega(3, 1.0);
    const Matrix2cd closed = first_order_propagator(s, omega0, axis, 1.0);
    const Matrix2cd quad =
        std::complex<double>(0.0, -1.0) *
        midpoint_integral(
            [&](double t) {
              return Matrix2cd(rotating_frame_signal(s, omega0, axis, t));
            },
            1.0, 2048);
    worst = std::max(worst, (closed - quad).cwiseAbs().maxCoeff());
  }
  return worst;
}

int run_check(const CommonFlags& flags) {
  CommonSettings settings;
  apply_env_seed(settings);
  ZeroSignalSpec spec;
  if (!flags.config_path.empty()) {
    const json config = load_config_file(flags.config_path);
    apply_common_config(config, "check", settings);
    if (const json* block = spec_block(config)) {
      ensure_known_keys(*block,
                        {"period", "background_support", "background_epsilon",
                         "control_harmonic", "trials"},
                        "check spec");
      spec.period = get_number(*block, "period", spec.period);
      spec.background_support = get_int_array(*block, "background_support",
                                              spec.background_support);
      spec.background_epsilon =
          get_number(*block, "background_epsilon", spec.background_epsilon);
      spec.control_harmonic =
          get_int(*block, "control_harmonic", spec.control_harmonic);
      spec.trials = get_int(*block, "trials", spec.trials);
    }
  }
  apply_common_flags(flags, settings);
  if (flags.trials_opt->count() > 0) spec.trials = flags.trials;
  spec.base_seed = settings.seed;
  spec.steps = settings.steps;
  spec.jobs = settings.jobs;

  const auto start = std::chrono::steady_clock::now();
  const ZeroSignalResult result = zero_signal_suite(spec);
  const double algebra = algebra_invariant_defect(settings.seed);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  CsvTable table({"trial", "seed", "max_even_probability"});
  for (const ZeroSignalTrial& trial : result.trials) {
    table.add_row(std::vector<std::string>{
        std::to_string(trial.trial), std::to_string(trial.seed),
        format_double(trial.max_even_probability)});
  }

  const bool pass = result.max_even_probability <= 1e-10 && algebra <= 1e-10;

  ordered_json effective = common_config_json("check", settings);
  effective["spec"] = {{"period", spec.period},
                       {"background_support", spec.background_support},
                       {"background_epsilon", spec.background_epsilon},
                       {"control_harmonic", spec.control_harmonic},
                       {"trials", spec.trials}};

  int max_harmonic = spec.control_harmonic;
  for (int k : spec.background_support) max_harmonic = std::max(max_harmonic, k);
  const int resolved =
      settings.steps > 0 ? settings.steps : default_step_count(max_harmonic);

  ordered_json summary = {{"max_even_probability", result.max_even_probability},
                          {"algebra_defect", algebra}};
  const std::string line =
      "check: max even-parity prob " + format_double(result.max_even_probability) +
      " (<= 1e-10), algebra defect " + format_double(algebra) +
      " (<= 1e-10) " + pass_tag(pass);
  return finish_run("check", settings, effective, resolved, table, summary,
                    wall, pass, line);
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

int run_detect(const CommonFlags& flags) {
  CommonSettings settings;
  apply_env_seed(settings);
  if (flags.config_path.empty()) {
    throw ConfigError("detect requires --config with the fields to analyze");
  }
  const json config = load_config_file(flags.config_path);
  apply_common_config(config, "detect", settings);

  double period = 1.0;
  int control_harmonic = 5;
  int max_harmonic = 32;
  std::optional<FourierField> signal;
  std::optional<FourierField> background;
  if (const json* block = spec_block(config)) {
    ensure_known_keys(*block,
                      {"period", "control_harmonic", "signal", "signal_samples",
                       "background", "background_samples", "max_harmonic"},
                      "detect spec");
    period = get_number(*block, "period", period);
    control_harmonic = get_int(*block, "control_harmonic", control_harmonic);
    max_harmonic = get_int(*block, "max_harmonic", max_harmonic);
    if (block->contains("signal") && block->contains("signal_samples")) {
      throw ConfigError("give either \"signal\" or \"signal_samples\"");
    }
    if (block->contains("signal")) {
      signal = field_from_config((*block)["signal"], "signal");
    } else if (block->contains("signal_samples")) {
      signal = field_from_sample_file(
          get_string(*block, "signal_samples", ""), period, max_harmonic);
    }
    if (block->contains("background") && block->contains("background_samples")) {
      throw ConfigError("give either \"background\" or \"background_samples\"");
    }
    if (block->contains("background")) {
      background = field_from_config((*block)["background"], "background");
    } else if (block->contains("background_samples")) {
      background = field_from_sample_file(
          get_string(*block, "background_samples", ""), period, max_harmonic);
    }
  }
  if (!signal.has_value()) {
    throw ConfigError("detect needs a \"signal\" field or \"signal_samples\"");
  }
  if (!background.has_value()) background = FourierField(period);
  apply_common_flags(flags, settings);

  SensorConfig sensor;
  sensor.control_harmonic = control_harmonic;
  sensor.period = period;
  sensor.steps = settings.steps;

  const auto start = std::chrono::steady_clock::now();
  const ResponseResult result = exact_response(*signal, *background, sensor);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  const bool detected = result.response > result.probability_bound;

  CsvTable table({"response", "threshold", "detected"});
  table.add_row(std::vector<std::string>{format_double(result.response),
                                         format_double(result.probability_bound),
                                         detected ? "1" : "0"});

  ordered_json effective = common_config_json("detect", settings);
  effective["spec"] = {{"period", period},
                       {"control_harmonic", control_harmonic},
                       {"signal", field_to_json(*signal)},
                       {"background", field_to_json(*background)},
                       {"max_harmonic", max_harmonic}};

  const int resolved =
      settings.steps > 0
          ? settings.steps
          : default_step_count(std::max({control_harmonic,
                                         signal->max_harmonic(),
                                         background->max_harmonic()}));

  ordered_json summary = {{"response", result.response},
                          {"threshold", result.probability_bound},
                          {"detected", detected}};
  const std::string line = std::string(detected ? "DETECTED" : "NOT-DETECTED") +
                           ": response " + format_double(result.response) +
                           ", threshold " + format_double(result.probability_bound);
  return finish_run("detect", settings, effective, resolved, table, summary,
                    wall, true, line);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"qfilter: frequency-selective, background-canceling quantum "
               "sensor simulation"};
  app.require_subcommand(1);

  CommonFlags sweep_flags, scaling_flags, heisenberg_flags, detect_flags,
      check_flags;
  CLI::App* sweep =
      app.add_subcommand("sweep", "response vs control frequency over "
                                  "randomized backgrounds");
  add_common_flags(sweep, sweep_flags);
  CLI::App* scaling = app.add_subcommand(
      "scaling", "residual |p - pbar| vs field strength with cubic/quartic fit");
  add_common_flags(scaling, scaling_flags);
  CLI::App* heisenberg = app.add_subcommand(
      "heisenberg", "collective detection probability and CFI vs register size");
  add_common_flags(heisenberg, heisenberg_flags);
  CLI::App* detect = app.add_subcommand(
      "detect", "threshold detection report for configured fields");
  add_common_flags(detect, detect_flags);
  CLI::App* check = app.add_subcommand(
      "check", "zero-signal invariance plus operator algebra invariants");
  add_common_flags(check, check_flags);

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sweep->parsed()) return run_sweep(sweep_flags);
    if (scaling->parsed()) return run_scaling(scaling_flags);
    if (heisenberg->parsed()) return run_heisenberg(heisenberg_flags);
    if (detect->parsed()) return run_detect(detect_flags);
    if (check->parsed()) return run_check(check_flags);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace qfilter
