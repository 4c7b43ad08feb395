#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <liekf/em.hpp>
#include <liekf/simulation.hpp>

namespace liekf {

/// Initial guess Θ⁰ = {alpha_Q Q_true, alpha_R R_true}.
struct Theta0Multiplier {
  double alpha_Q = 400.0;
  double alpha_R = 200.0;

  std::string label() const;  // e.g. "400Q_200R"
};

enum class AdaptationMode {
  single_window,  // EM on the first window, then filter everything with the estimate
  per_window      // re-run EM on every full window, carrying Θ forward
};

struct McConfig {
  int runs = 100;
  std::vector<std::size_t> window_lengths{20, 40, 60, 80, 100};
  std::vector<Theta0Multiplier> theta0{{400.0, 200.0}, {400.0, 0.2}};
  bool include_baselines = true;
  AdaptationMode adaptation = AdaptationMode::single_window;
  /// Initial estimate = truth ⊗ exp_map(δ/2), δ ~ N(0, σ² I); P0 = σ_P² I.
  double initial_attitude_sigma = 0.05;     // rad
  double initial_covariance_sigma = 0.05;   // rad
  ErrorMetric metric = ErrorMetric::rotation_vector;

  void validate(std::size_t trajectory_steps) const;
};

/// Everything needed to reproduce a Monte Carlo study.
struct Scenario {
  TrajectoryConfig trajectory;
  NoiseConfig noise;  // noise.seed is the base seed; run r uses seed + r
  ReferenceFields refs;
  McConfig mc;
  EmConfig em;  // window_length is taken from mc.window_lengths

  void validate() const;
  /// Θ_true with the EM eigenvalue floors applied, as handed to a filter.
  FilterParams filter_true_params() const;
  FilterParams theta0_params(const Theta0Multiplier& m) const;
};

/// One synthesized dataset plus the filter's initial condition.
struct RunData {
  std::uint64_t seed = 0;
  std::vector<ImuSample> samples;
  FilterState init;
};

RunData prepare_run(const Scenario& scenario, const Trajectory& traj, std::size_t run_index);

struct AdaptiveOutcome {
  FilterTrace trace;
  EmResult em;  // last EM invocation
  std::vector<double> first_window_loglik;
};

/// Adaptive filter over the whole sample stream (see AdaptationMode).
AdaptiveOutcome run_adaptive(const FilterState& init, std::span<const ImuSample> samples, const ReferenceFields& refs,
                             const FilterParams& theta0, EmConfig em, AdaptationMode mode);

struct AdaptiveRun {
  bool ok = false;
  double rmse = 0.0;
  Mat3 Q_est = Mat3::Zero();
  Mat6 R_est = Mat6::Zero();
  std::vector<double> loglik;  // G/n per EM iteration, first window
  double loglik_true = 0.0;    // G/n with Θ_true on the same window
  int em_iterations = 0;
  bool em_converged = false;
};

struct FixedRun {
  bool ok = false;
  double rmse = 0.0;
};

struct AdaptiveCell {
  std::size_t window_length = 0;
  std::vector<AdaptiveRun> runs;  // indexed by run
  double median_rmse = 0.0;
};

struct VariantSummary {
  Theta0Multiplier theta0;
  std::vector<AdaptiveCell> adaptive;  // one per window length
  std::vector<FixedRun> fixed;         // non-adaptive with Θ⁰ (empty without baselines)
  double fixed_median = 0.0;
};

struct RunFailure {
  std::size_t run = 0;
  std::string configuration;
  std::string message;
};

struct McSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<VariantSummary> variants;
  std::vector<FixedRun> truth;  // non-adaptive with Θ_true (empty without baselines)
  double truth_median = 0.0;
  double frob_Q_true = 0.0;
  double frob_R_true = 0.0;
  std::vector<RunFailure> failures;

  bool partial() const { return !failures.empty(); }
};

/// Median of the successful entries; NaN when there are none.
double median(std::vector<double> values);

/// Runs every configuration on `mc.runs` independent datasets. Runs execute on up
/// to `threads` workers; the result does not depend on the thread count.
McSummary run_monte_carlo(const Scenario& scenario, unsigned threads = 1);

enum class FilterChoice { truth, theta0_fixed, adaptive };

struct SingleRunTrace {
  std::vector<double> time;
  std::vector<UnitQuaternion> truth;
  std::vector<UnitQuaternion> estimate;
  std::vector<Vec3> error;
  std::vector<double> trace_P;
};

/// Per-step trace of one filter on run `run_index`. `variant` selects Θ⁰ and
/// `window_length` the adaptive window (0 = largest configured).
SingleRunTrace run_single(const Scenario& scenario, std::size_t run_index, FilterChoice choice,
                          std::size_t variant = 0, std::size_t window_length = 0);

}  // namespace liekf
