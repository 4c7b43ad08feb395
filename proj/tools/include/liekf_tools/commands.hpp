#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>

#include <liekf/monte_carlo.hpp>
#include <liekf_tools/config.hpp>

namespace liekf::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitNumericalFailure = 2;

struct RunOptions {
  std::filesystem::path config_path;
  bool validate_only = false;
  std::optional<unsigned> threads;  // default: hardware concurrency
  std::optional<std::filesystem::path> output_dir;
  std::optional<OutputFormat> format;
};

/// `run <config>`: Monte Carlo study, then loglik_trace, qr_estimates, rmse_table
/// and manifest.json under the output directory. Returns an exit code.
int run_command(const RunOptions& opts, std::ostream& out, std::ostream& err);

struct SingleRunOptions {
  std::filesystem::path config_path;
  std::size_t run_index = 0;
  FilterChoice filter = FilterChoice::adaptive;
  std::size_t theta0_index = 0;
  std::size_t window_length = 0;  // 0 = largest configured
  std::optional<std::filesystem::path> output_dir;
  std::optional<OutputFormat> format;
};

/// `single-run <config> --run-index k`: per-step trace file single_run_<k>.{csv,json}.
int single_run_command(const SingleRunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace liekf::tools
