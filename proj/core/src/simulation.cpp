#include <liekf/simulation.hpp>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace liekf {

namespace {
constexpr int kSubsteps = 10;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

RateProfile RateProfile::default_profile() {
  RateProfile p;
  p.kind = RateProfileKind::sinusoidal;
  p.amplitude = {0.3, 0.2, 0.25};
  p.angular_frequency = {0.5, 0.3, 0.4};
  p.phase = {0.0, 0.0, M_PI / 2.0};
  p.offset = {0.0, 0.1, 0.0};
  return p;
}

Vec3 RateProfile::evaluate(double t) const {
  switch (kind) {
    case RateProfileKind::constant:
      return rate;
    case RateProfileKind::sinusoidal: {
      Vec3 out;
      for (int a = 0; a < 3; ++a) {
        out[a] = amplitude[a] * std::sin(angular_frequency[a] * t + phase[a]) + offset[a];
      }
      return out;
    }
    case RateProfileKind::piecewise: {
      if (segments.empty()) return Vec3::Zero();
      double start = 0.0;
      for (const RateSegment& s : segments) {
        if (t < start + s.duration) return s.rate;
        start += s.duration;
      }
      return segments.back().rate;
    }
  }
  return Vec3::Zero();
}

std::size_t TrajectoryConfig::steps() const { return static_cast<std::size_t>(std::llround(duration / dt)); }

void TrajectoryConfig::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw std::invalid_argument("duration must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
  if (steps() < 1) throw std::invalid_argument("duration must cover at least one time step");
  if (profile.kind == RateProfileKind::piecewise) {
    for (const RateSegment& s : profile.segments) {
      if (!(s.duration > 0.0)) throw std::invalid_argument("piecewise segment durations must be > 0");
    }
  }
}

Trajectory generate_trajectory(const TrajectoryConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.steps();
  const double h = cfg.dt / kSubsteps;

  Trajectory traj;
  traj.dt = cfg.dt;
  traj.q_true.reserve(n + 1);
  traj.omega_true.reserve(n + 1);

  UnitQuaternion q = cfg.initial_attitude;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    traj.q_true.push_back(q);
    traj.omega_true.push_back(cfg.profile.evaluate(t));
    if (k == n) break;
    for (int j = 0; j < kSubsteps; ++j) {
      const Vec3 w = cfg.profile.evaluate(t + (j + 0.5) * h);
      q = q * exp_map(0.5 * h * w);
    }
  }
  return traj;
}

void NoiseConfig::validate() const {
  if (!sigma_eta_diag.allFinite() || sigma_eta_diag.minCoeff() < 0.0) {
    throw std::invalid_argument("gyro noise variances must be finite and >= 0");
  }
  if (!sigma_nu_diag.allFinite() || sigma_nu_diag.minCoeff() < 0.0) {
    throw std::invalid_argument("measurement noise variances must be finite and >= 0");
  }
}

NoiseSpec NoiseConfig::spec() const {
  NoiseSpec s;
  s.sigma_eta = sigma_eta_diag.asDiagonal();
  s.sigma_a = sigma_nu_diag.head<3>().asDiagonal();
  s.sigma_m = sigma_nu_diag.tail<3>().asDiagonal();
  return s;
}

std::uint64_t stream_seed(std::uint64_t seed, NoiseStream stream) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(stream));
}

std::vector<ImuSample> synthesize_measurements(const Trajectory& traj, const NoiseConfig& noise,
                                               const ReferenceFields& refs) {
  noise.validate();
  std::mt19937_64 gyro_rng(stream_seed(noise.seed, NoiseStream::gyro));
  std::mt19937_64 meas_rng(stream_seed(noise.seed, NoiseStream::measurement));
  std::normal_distribution<double> normal(0.0, 1.0);

  const Vec3 eta_std = noise.sigma_eta_diag.cwiseSqrt();
  const Vec6 nu_std = noise.sigma_nu_diag.cwiseSqrt();

  const std::size_t n = traj.steps();
  std::vector<ImuSample> samples;
  samples.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    Vec3 eta;
    for (int a = 0; a < 3; ++a) eta[a] = eta_std[a] * normal(gyro_rng);
    Vec6 nu;
    for (int a = 0; a < 6; ++a) nu[a] = nu_std[a] * normal(meas_rng);

    const Measurement z = measure_h(traj.q_true[k], refs) + nu;
    ImuSample s;
    s.omega = traj.omega_true[k - 1] + eta;
    s.accel = z.head<3>();
    s.mag = z.tail<3>();
    s.dt = traj.dt;
    samples.push_back(s);
  }
  return samples;
}

FilterParams true_params(const NoiseConfig& noise, double dt) {
  const NoiseSpec s = noise.spec();
  return {process_noise_Q(s.sigma_eta, dt), assemble_R(s.sigma_a, s.sigma_m)};
}

Vec3 attitude_error(const UnitQuaternion& estimate, const UnitQuaternion& truth, ErrorMetric metric) {
  const UnitQuaternion eps = (estimate.conjugate() * truth).canonical();
  return metric == ErrorMetric::rotation_vector ? Vec3(2.0 * log_map(eps)) : Vec3(2.0 * eps.v());
}

Rmse attitude_rmse(std::span<const UnitQuaternion> estimates, std::span<const UnitQuaternion> truth,
                   ErrorMetric metric) {
  if (estimates.size() != truth.size()) {
    throw std::invalid_argument("attitude_rmse: " + std::to_string(estimates.size()) + " estimates vs " +
                                std::to_string(truth.size()) + " truth samples");
  }
  if (estimates.empty()) throw std::invalid_argument("attitude_rmse: empty sequence");
  Vec3 sum_sq = Vec3::Zero();
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    sum_sq += attitude_error(estimates[i], truth[i], metric).cwiseAbs2();
  }
  Rmse out;
  out.per_axis = (sum_sq / static_cast<double>(estimates.size())).cwiseSqrt();
  out.norm = out.per_axis.norm();
  return out;
}

FilterTrace filter_trajectory(const FilterState& init, std::span<const ImuSample> samples,
                              const ReferenceFields& refs, const FilterParams& params) {
  FilterTrace out;
  out.q.reserve(samples.size());
  out.trace_P.reserve(samples.size());
  FilterState state = init;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    try {
      state = step(state, samples[k], refs, params).state;
    } catch (const NumericalError& e) {
      throw StepError(k, e.what());
    }
    out.q.push_back(state.q_hat);
    out.trace_P.push_back(state.P.trace());
  }
  return out;
}

}  // namespace liekf
