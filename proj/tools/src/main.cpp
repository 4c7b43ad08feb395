#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include <liekf_tools/commands.hpp>

using namespace liekf::tools;

int main(int argc, char** argv) {
  CLI::App app{"Left-invariant EKF attitude experiments with EM noise-covariance estimation"};
  app.require_subcommand(1);

  const std::map<std::string, OutputFormat> formats{{"csv", OutputFormat::csv}, {"json", OutputFormat::json}};
  const std::map<std::string, liekf::FilterChoice> filters{{"adaptive", liekf::FilterChoice::adaptive},
                                                           {"true", liekf::FilterChoice::truth},
                                                           {"theta0", liekf::FilterChoice::theta0_fixed}};

  RunOptions run;
  std::string run_dir;
  OutputFormat run_format = OutputFormat::csv;
  unsigned threads = 0;
  auto* run_cmd = app.add_subcommand("run", "Run the Monte Carlo study described by a config file");
  run_cmd->add_option("config", run.config_path, "Experiment config (JSON)")->required();
  run_cmd->add_flag("--validate-only", run.validate_only, "Check the config and exit");
  auto* threads_opt = run_cmd->add_option("--threads", threads, "Worker threads (default: all cores)");
  auto* run_dir_opt = run_cmd->add_option("--output-dir", run_dir, "Override output.directory");
  auto* run_fmt_opt = run_cmd->add_option("--format", run_format, "csv or json")
                          ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  SingleRunOptions single;
  std::string single_dir;
  OutputFormat single_format = OutputFormat::csv;
  auto* single_cmd = app.add_subcommand("single-run", "Write the per-step attitude trace of one run");
  single_cmd->add_option("config", single.config_path, "Experiment config (JSON)")->required();
  single_cmd->add_option("--run-index", single.run_index, "Zero-based run index")->required();
  single_cmd->add_option("--filter", single.filter, "adaptive, true or theta0")
      ->transform(CLI::CheckedTransformer(filters, CLI::ignore_case));
  single_cmd->add_option("--theta0-index", single.theta0_index, "Which theta0 multiplier pair to use");
  single_cmd->add_option("--window-length", single.window_length, "Adaptive window (default: largest configured)");
  auto* single_dir_opt = single_cmd->add_option("--output-dir", single_dir, "Override output.directory");
  auto* single_fmt_opt = single_cmd->add_option("--format", single_format, "csv or json")
                             ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  if (*run_cmd) {
    if (*threads_opt) run.threads = threads;
    if (*run_dir_opt) run.output_dir = run_dir;
    if (*run_fmt_opt) run.format = run_format;
    return run_command(run, std::cout, std::cerr);
  }
  if (*single_dir_opt) single.output_dir = single_dir;
  if (*single_fmt_opt) single.format = single_format;
  return single_run_command(single, std::cout, std::cerr);
}
