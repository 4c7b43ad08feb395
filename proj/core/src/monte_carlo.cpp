#include <liekf/monte_carlo.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace liekf {

namespace {

std::string format_multiplier(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << v;
  return os.str();
}

struct RunOutcome {
  std::vector<std::vector<AdaptiveRun>> adaptive;  // [variant][window]
  std::vector<FixedRun> fixed;                     // [variant]
  FixedRun truth;
  std::vector<RunFailure> failures;
};

}  // namespace

std::string Theta0Multiplier::label() const {
  return format_multiplier(alpha_Q) + "Q_" + format_multiplier(alpha_R) + "R";
}

void McConfig::validate(std::size_t trajectory_steps) const {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (window_lengths.empty()) throw std::invalid_argument("window_lengths must not be empty");
  for (std::size_t wl : window_lengths) {
    if (wl < 2) throw std::invalid_argument("window lengths must be >= 2");
    if (wl > trajectory_steps) throw std::invalid_argument("window length exceeds the trajectory length");
  }
  if (theta0.empty()) throw std::invalid_argument("theta0_multipliers must not be empty");
  for (const Theta0Multiplier& m : theta0) {
    if (!(m.alpha_Q > 0.0) || !(m.alpha_R > 0.0)) throw std::invalid_argument("theta0 multipliers must be > 0");
  }
  if (!(initial_attitude_sigma >= 0.0)) throw std::invalid_argument("initial attitude sigma must be >= 0");
  if (!(initial_covariance_sigma > 0.0)) throw std::invalid_argument("initial covariance sigma must be > 0");
}

void Scenario::validate() const {
  trajectory.validate();
  noise.validate();
  mc.validate(trajectory.steps());
  EmConfig probe = em;
  probe.window_length = 2;
  probe.validate();
}

FilterParams Scenario::filter_true_params() const {
  const FilterParams t = true_params(noise, trajectory.dt);
  return {floor_eigenvalues<3>(t.Q, em.q_floor), floor_eigenvalues<6>(t.R, em.r_floor)};
}

FilterParams Scenario::theta0_params(const Theta0Multiplier& m) const {
  const FilterParams t = true_params(noise, trajectory.dt);
  return {floor_eigenvalues<3>(Mat3(m.alpha_Q * t.Q), em.q_floor), floor_eigenvalues<6>(Mat6(m.alpha_R * t.R), em.r_floor)};
}

RunData prepare_run(const Scenario& scenario, const Trajectory& traj, std::size_t run_index) {
  RunData run;
  run.seed = scenario.noise.seed + run_index;
  NoiseConfig noise = scenario.noise;
  noise.seed = run.seed;
  run.samples = synthesize_measurements(traj, noise, scenario.refs);

  std::mt19937_64 rng(stream_seed(run.seed, NoiseStream::initialization));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 delta;
  for (int a = 0; a < 3; ++a) delta[a] = scenario.mc.initial_attitude_sigma * normal(rng);
  const double sp = scenario.mc.initial_covariance_sigma;
  run.init = FilterState{traj.q_true.front() * exp_map(0.5 * delta), sp * sp * Mat3::Identity()};
  return run;
}

AdaptiveOutcome run_adaptive(const FilterState& init, std::span<const ImuSample> samples, const ReferenceFields& refs,
                             const FilterParams& theta0, EmConfig em, AdaptationMode mode) {
  const std::size_t wl = em.window_length;
  if (samples.size() < wl) throw std::invalid_argument("run_adaptive: fewer samples than one window");

  AdaptiveOutcome out;
  if (mode == AdaptationMode::single_window) {
    out.em = run_em(samples.first(wl), init, theta0, refs, em);
    out.first_window_loglik = out.em.loglik_trace;
    out.trace = filter_trajectory(init, samples, refs, out.em.params());
    return out;
  }

  // Per-window: estimate on each full window from the current state, then filter
  // that window with the new estimate and carry state and Θ forward.
  FilterState state = init;
  FilterParams theta = theta0;
  out.trace.q.reserve(samples.size());
  out.trace.trace_P.reserve(samples.size());
  for (std::size_t start = 0; start < samples.size(); start += wl) {
    const std::size_t len = std::min(wl, samples.size() - start);
    const auto window = samples.subspan(start, len);
    if (len == wl) {
      out.em = run_em(window, state, theta, refs, em);
      if (start == 0) out.first_window_loglik = out.em.loglik_trace;
      theta = out.em.params();
    }
    const WindowRun run = run_window(state, window, refs, theta);
    for (const StepRecord& rec : run.buffer.records) {
      out.trace.q.push_back(rec.q_post);
      out.trace.trace_P.push_back(rec.P_post.trace());
    }
    state = run.final_state;
  }
  return out;
}

double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

namespace {

RunOutcome simulate_run(const Scenario& sc, const Trajectory& traj, std::size_t r) {
  RunOutcome out;
  const std::size_t n_var = sc.mc.theta0.size();
  const std::size_t n_wl = sc.mc.window_lengths.size();
  out.adaptive.assign(n_var, std::vector<AdaptiveRun>(n_wl));
  out.fixed.assign(n_var, FixedRun{});

  RunData data;
  try {
    data = prepare_run(sc, traj, r);
  } catch (const std::exception& e) {
    out.failures.push_back({r, "synthesis", e.what()});
    return out;
  }
  const std::span<const UnitQuaternion> truth(traj.q_true.data() + 1, data.samples.size());
  const FilterParams theta_true = sc.filter_true_params();

  auto rmse_of = [&](const FilterTrace& t) { return attitude_rmse(t.q, truth, sc.mc.metric).norm; };

  // G/n at Θ_true on each first window; shared by all Θ⁰ variants.
  std::vector<double> loglik_true(n_wl, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t w = 0; w < n_wl; ++w) {
    const std::size_t wl = sc.mc.window_lengths[w];
    try {
      loglik_true[w] = window_loglik(AttitudeWindow(data.init, std::span(data.samples).first(wl), sc.refs), theta_true);
    } catch (const std::exception& e) {
      out.failures.push_back({r, "loglik_true_WL" + std::to_string(wl), e.what()});
    }
  }

  for (std::size_t v = 0; v < n_var; ++v) {
    const FilterParams theta0 = sc.theta0_params(sc.mc.theta0[v]);
    for (std::size_t w = 0; w < n_wl; ++w) {
      EmConfig em = sc.em;
      em.window_length = sc.mc.window_lengths[w];
      AdaptiveRun& cell = out.adaptive[v][w];
      try {
        const AdaptiveOutcome a = run_adaptive(data.init, data.samples, sc.refs, theta0, em, sc.mc.adaptation);
        cell.rmse = rmse_of(a.trace);
        cell.Q_est = a.em.Q_est;
        cell.R_est = a.em.R_est;
        cell.loglik = a.first_window_loglik;
        cell.loglik_true = loglik_true[w];
        cell.em_iterations = a.em.iterations;
        cell.em_converged = a.em.converged;
        cell.ok = std::isfinite(cell.rmse) && std::isfinite(cell.loglik_true);
        if (!cell.ok) out.failures.push_back({r, sc.mc.theta0[v].label() + "_WL" + std::to_string(em.window_length), "non-finite result"});
      } catch (const std::exception& e) {
        out.failures.push_back({r, sc.mc.theta0[v].label() + "_WL" + std::to_string(em.window_length), e.what()});
      }
    }
    if (sc.mc.include_baselines) {
      try {
        out.fixed[v].rmse = rmse_of(filter_trajectory(data.init, data.samples, sc.refs, theta0));
        out.fixed[v].ok = std::isfinite(out.fixed[v].rmse);
      } catch (const std::exception& e) {
        out.failures.push_back({r, sc.mc.theta0[v].label() + "_fixed", e.what()});
      }
    }
  }
  if (sc.mc.include_baselines) {
    try {
      out.truth.rmse = rmse_of(filter_trajectory(data.init, data.samples, sc.refs, theta_true));
      out.truth.ok = std::isfinite(out.truth.rmse);
    } catch (const std::exception& e) {
      out.failures.push_back({r, "true_params", e.what()});
    }
  }
  return out;
}

}  // namespace

McSummary run_monte_carlo(const Scenario& scenario, unsigned threads) {
  scenario.validate();
  const Trajectory traj = generate_trajectory(scenario.trajectory);
  const auto runs = static_cast<std::size_t>(scenario.mc.runs);

  std::vector<RunOutcome> outcomes(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < runs; r = next++) {
      outcomes[r] = simulate_run(scenario, traj, r);
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(runs)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }

  // Deterministic reduction in run order.
  McSummary s;
  const FilterParams t = true_params(scenario.noise, scenario.trajectory.dt);
  s.frob_Q_true = t.Q.norm();
  s.frob_R_true = t.R.norm();
  for (std::size_t r = 0; r < runs; ++r) s.seeds.push_back(scenario.noise.seed + r);

  for (std::size_t v = 0; v < scenario.mc.theta0.size(); ++v) {
    VariantSummary vs;
    vs.theta0 = scenario.mc.theta0[v];
    for (std::size_t w = 0; w < scenario.mc.window_lengths.size(); ++w) {
      AdaptiveCell cell;
      cell.window_length = scenario.mc.window_lengths[w];
      std::vector<double> rmse;
      for (const RunOutcome& o : outcomes) {
        cell.runs.push_back(o.adaptive[v][w]);
        if (o.adaptive[v][w].ok) rmse.push_back(o.adaptive[v][w].rmse);
      }
      cell.median_rmse = median(std::move(rmse));
      vs.adaptive.push_back(std::move(cell));
    }
    if (scenario.mc.include_baselines) {
      std::vector<double> rmse;
      for (const RunOutcome& o : outcomes) {
        vs.fixed.push_back(o.fixed[v]);
        if (o.fixed[v].ok) rmse.push_back(o.fixed[v].rmse);
      }
      vs.fixed_median = median(std::move(rmse));
    }
    s.variants.push_back(std::move(vs));
  }
  if (scenario.mc.include_baselines) {
    std::vector<double> rmse;
    for (const RunOutcome& o : outcomes) {
      s.truth.push_back(o.truth);
      if (o.truth.ok) rmse.push_back(o.truth.rmse);
    }
    s.truth_median = median(std::move(rmse));
  }
  for (RunOutcome& o : outcomes) {
    for (RunFailure& f : o.failures) s.failures.push_back(std::move(f));
  }
  return s;
}

SingleRunTrace run_single(const Scenario& scenario, std::size_t run_index, FilterChoice choice, std::size_t variant,
                          std::size_t window_length) {
  scenario.validate();
  if (run_index >= static_cast<std::size_t>(scenario.mc.runs)) {
    throw std::out_of_range("run index " + std::to_string(run_index) + " is outside [0, " +
                            std::to_string(scenario.mc.runs) + ")");
  }
  if (variant >= scenario.mc.theta0.size()) throw std::out_of_range("theta0 variant index out of range");
  if (window_length == 0) {
    window_length = *std::max_element(scenario.mc.window_lengths.begin(), scenario.mc.window_lengths.end());
  }

  const Trajectory traj = generate_trajectory(scenario.trajectory);
  const RunData data = prepare_run(scenario, traj, run_index);

  FilterTrace trace;
  switch (choice) {
    case FilterChoice::truth:
      trace = filter_trajectory(data.init, data.samples, scenario.refs, scenario.filter_true_params());
      break;
    case FilterChoice::theta0_fixed:
      trace = filter_trajectory(data.init, data.samples, scenario.refs, scenario.theta0_params(scenario.mc.theta0[variant]));
      break;
    case FilterChoice::adaptive: {
      EmConfig em = scenario.em;
      em.window_length = window_length;
      trace = run_adaptive(data.init, data.samples, scenario.refs, scenario.theta0_params(scenario.mc.theta0[variant]), em,
                           scenario.mc.adaptation)
                  .trace;
      break;
    }
  }

  SingleRunTrace out;
  for (std::size_t k = 0; k < data.samples.size(); ++k) {
    out.time.push_back(static_cast<double>(k + 1) * scenario.trajectory.dt);
    out.truth.push_back(traj.q_true[k + 1]);
    out.estimate.push_back(trace.q[k]);
    out.error.push_back(attitude_error(trace.q[k], traj.q_true[k + 1], scenario.mc.metric));
    out.trace_P.push_back(trace.trace_P[k]);
  }
  return out;
}

}  // namespace liekf
