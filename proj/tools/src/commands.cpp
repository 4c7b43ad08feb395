#include <liekf_tools/commands.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include <liekf_tools/tables.hpp>

#ifndef LIEKF_VERSION
#define LIEKF_VERSION "unknown"
#endif

namespace liekf::tools {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string extension(OutputFormat f) { return f == OutputFormat::csv ? ".csv" : ".json"; }

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << body;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Returns nullopt (after reporting) when the config is unusable.
std::optional<ExperimentConfig> load_or_report(const fs::path& path, std::ostream& err) {
  try {
    return load_config(path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return std::nullopt;
  }
}

bool prepare_output_dir(const fs::path& dir, std::ostream& err) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    err << "config error: output directory '" << dir.string() << "' is not writable: " << ec.message() << "\n";
    return false;
  }
  return true;
}

json summary_json(const McSummary& s) {
  json variants = json::array();
  for (const VariantSummary& v : s.variants) {
    json cells = json::array();
    for (const AdaptiveCell& c : v.adaptive) {
      json lt = nullptr;
      if (!c.runs.empty() && c.runs.front().ok) lt = c.runs.front().loglik_true;
      cells.push_back({{"window_length", c.window_length},
                       {"median_rmse", std::isfinite(c.median_rmse) ? json(c.median_rmse) : json(nullptr)},
                       {"run0_G_over_n_true_params", lt}});
    }
    variants.push_back({{"theta0", v.theta0.label()},
                        {"q_scale", v.theta0.alpha_Q},
                        {"r_scale", v.theta0.alpha_R},
                        {"adaptive", cells}});
  }
  return {{"variants", variants},
          {"frob_Q_true", s.frob_Q_true},
          {"frob_R_true", s.frob_R_true}};
}

}  // namespace

int run_command(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  auto loaded = load_or_report(opts.config_path, err);
  if (!loaded) return kExitConfigError;
  ExperimentConfig cfg = std::move(*loaded);
  if (opts.output_dir) cfg.output_dir = *opts.output_dir;
  if (opts.format) cfg.format = *opts.format;
  if (opts.threads && *opts.threads == 0) {
    err << "config error: --threads must be >= 1\n";
    return kExitConfigError;
  }
  if (opts.validate_only) {
    out << "config OK: " << opts.config_path.string() << "\n";
    return kExitOk;
  }
  if (!prepare_output_dir(cfg.output_dir, err)) return kExitConfigError;

  const unsigned threads = opts.threads.value_or(std::max(1u, std::thread::hardware_concurrency()));
  const McSummary summary = run_monte_carlo(cfg.scenario, threads);

  bool failed = summary.partial();
  json failures = json::array();
  for (const RunFailure& f : summary.failures) {
    failures.push_back({{"run", f.run}, {"configuration", f.configuration}, {"message", f.message}});
  }

  const std::string ext = extension(cfg.format);
  json files = json::array();
  const std::pair<std::string, Table> tables[] = {
      {"loglik_trace", loglik_table(summary)},
      {"qr_estimates", qr_table(summary)},
      {"rmse_table", rmse_table(summary)},
  };
  for (const auto& [name, table] : tables) {
    try {
      const std::string body = render(table, cfg.format);
      write_file(cfg.output_dir / (name + ext), body);
      files.push_back(name + ext);
    } catch (const NonFiniteOutput& e) {
      failed = true;
      failures.push_back({{"file", name + ext}, {"message", e.what()}});
      err << "numerical failure: " << name << ext << " not written (" << e.what() << ")\n";
    }
  }

  const json manifest = {
      {"status", failed ? "FAILED" : "OK"},
      {"software", {{"name", "liekf"}, {"version", LIEKF_VERSION}}},
      {"generated_at_utc", utc_timestamp()},
      {"config", to_json(cfg)},
      {"seeds", {{"base", cfg.scenario.noise.seed}, {"per_run", summary.seeds}}},
      {"threads", threads},
      {"files", files},
      {"summary", summary_json(summary)},
      {"failures", failures},
  };
  write_file(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");

  out << "wrote " << files.size() << " tables and manifest.json to " << cfg.output_dir.string() << "\n";
  if (failed) {
    err << "numerical failure: " << summary.failures.size() << " run/configuration failures; see manifest.json\n";
    return kExitNumericalFailure;
  }
  return kExitOk;
}

int single_run_command(const SingleRunOptions& opts, std::ostream& out, std::ostream& err) {
  auto loaded = load_or_report(opts.config_path, err);
  if (!loaded) return kExitConfigError;
  ExperimentConfig cfg = std::move(*loaded);
  if (opts.output_dir) cfg.output_dir = *opts.output_dir;
  if (opts.format) cfg.format = *opts.format;

  const auto& mc = cfg.scenario.mc;
  if (opts.run_index >= static_cast<std::size_t>(mc.runs)) {
    err << "config error: --run-index " << opts.run_index << " is outside [0, " << mc.runs << ")\n";
    return kExitConfigError;
  }
  if (opts.theta0_index >= mc.theta0.size()) {
    err << "config error: --theta0-index " << opts.theta0_index << " is outside [0, " << mc.theta0.size() << ")\n";
    return kExitConfigError;
  }
  if (opts.window_length != 0 && (opts.window_length < 2 || opts.window_length > cfg.scenario.trajectory.steps())) {
    err << "config error: --window-length must be in [2, " << cfg.scenario.trajectory.steps() << "]\n";
    return kExitConfigError;
  }
  if (!prepare_output_dir(cfg.output_dir, err)) return kExitConfigError;

  SingleRunTrace trace;
  try {
    trace = run_single(cfg.scenario, opts.run_index, opts.filter, opts.theta0_index, opts.window_length);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  }

  const fs::path path = cfg.output_dir / ("single_run_" + std::to_string(opts.run_index) + extension(cfg.format));
  try {
    write_file(path, render(single_run_table(trace), cfg.format));
  } catch (const NonFiniteOutput& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  }
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

}  // namespace liekf::tools
