#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include <liekf/monte_carlo.hpp>

namespace liekf::tools {

enum class OutputFormat { csv, json };

/// Everything a `run` invocation needs. Defaults reproduce the reference study:
/// Σ_η = diag(0.75, 1.5, 1)×10⁻¹, Σ_ν = diag(1, 2, 3, 3, 3.5, 6)×10⁻⁵, dt = 0.01 s,
/// 100 runs, window lengths 20..100, Θ⁰ ∈ {400Q/200R, 400Q/0.2R}.
struct ExperimentConfig {
  Scenario scenario;
  std::filesystem::path output_dir = "results";
  OutputFormat format = OutputFormat::csv;
};

/// Bad config: carries the offending field path and, when it can be located,
/// the 1-based line in the source text (0 if unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, int line, std::string field, const std::string& message);

  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  int line_;
  std::string field_;
};

/// Parses a JSON config (comments allowed). Missing keys take defaults; unknown
/// keys and invalid values raise ConfigError.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved config; parse_config(to_json(c).dump()) reproduces c.
nlohmann::json to_json(const ExperimentConfig& cfg);

std::string to_string(OutputFormat f);

}  // namespace liekf::tools
