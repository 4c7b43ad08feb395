#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <liekf/attitude_model.hpp>
#include <liekf/filter.hpp>

namespace liekf {

enum class RateProfileKind { constant, sinusoidal, piecewise };

struct RateSegment {
  double duration = 1.0;  // s
  Vec3 rate = Vec3::Zero();
};

/// Body angular rate as a function of time.
///   constant:   rate
///   sinusoidal: amplitude ∘ sin(angular_frequency t + phase) + offset, per axis
///   piecewise:  consecutive constant segments, the last one held to the end
struct RateProfile {
  RateProfileKind kind = RateProfileKind::sinusoidal;
  Vec3 rate = Vec3::Zero();
  Vec3 amplitude = Vec3::Zero();
  Vec3 angular_frequency = Vec3::Zero();  // rad/s
  Vec3 phase = Vec3::Zero();
  Vec3 offset = Vec3::Zero();
  std::vector<RateSegment> segments;

  /// (0.3 sin 0.5t, 0.2 sin 0.3t + 0.1, 0.25 cos 0.4t) rad/s.
  static RateProfile default_profile();

  Vec3 evaluate(double t) const;
};

struct TrajectoryConfig {
  double duration = 60.0;  // s
  double dt = 0.01;        // s
  RateProfile profile = RateProfile::default_profile();
  UnitQuaternion initial_attitude;

  std::size_t steps() const;
  void validate() const;
};

/// Truth sampled at t_k = k dt, k = 0..N. omega_true[k] is the profile at t_k;
/// q_true is integrated with 10 exact constant-rate substeps per dt.
struct Trajectory {
  double dt = 0.01;
  std::vector<UnitQuaternion> q_true;
  std::vector<Vec3> omega_true;

  std::size_t steps() const { return q_true.empty() ? 0 : q_true.size() - 1; }
};

Trajectory generate_trajectory(const TrajectoryConfig& cfg);

/// Variances on the diagonals of Σ_η ((rad/s)²) and Σ_ν.
struct NoiseConfig {
  Vec3 sigma_eta_diag{0.075, 0.15, 0.1};
  Vec6 sigma_nu_diag = (Vec6() << 1e-5, 2e-5, 3e-5, 3e-5, 3.5e-5, 6e-5).finished();
  std::uint64_t seed = 1;

  void validate() const;
  NoiseSpec spec() const;
};

/// Independent random streams derived from one seed.
enum class NoiseStream : std::uint64_t { gyro = 1, measurement = 2, initialization = 3 };
std::uint64_t stream_seed(std::uint64_t seed, NoiseStream stream);

/// N samples: sample k−1 carries gyro omega_true[k−1] + η (held over
/// [t_{k−1}, t_k]) and z = measure_h(q_true[k]) + ν. Reproducible from noise.seed.
std::vector<ImuSample> synthesize_measurements(const Trajectory& traj, const NoiseConfig& noise,
                                               const ReferenceFields& refs);

/// Q_true = dt² Σ_η, R_true = Σ_ν.
FilterParams true_params(const NoiseConfig& noise, double dt);

enum class ErrorMetric {
  rotation_vector,   // 2 log(ε), radians
  quaternion_vector  // 2 vec(ε), small-angle equivalent
};

/// Error of estimate against truth with ε = (q̂⁻¹ ⊗ q) sign-canonicalized.
Vec3 attitude_error(const UnitQuaternion& estimate, const UnitQuaternion& truth,
                    ErrorMetric metric = ErrorMetric::rotation_vector);

struct Rmse {
  Vec3 per_axis = Vec3::Zero();
  double norm = 0.0;
};

/// Per-axis RMSE of attitude_error over the sequence and the Euclidean norm of
/// those three values. Throws std::invalid_argument on a length mismatch or
/// empty input.
Rmse attitude_rmse(std::span<const UnitQuaternion> estimates, std::span<const UnitQuaternion> truth,
                   ErrorMetric metric = ErrorMetric::rotation_vector);

/// Posterior attitude and trace(P) for every sample.
struct FilterTrace {
  std::vector<UnitQuaternion> q;
  std::vector<double> trace_P;
};

FilterTrace filter_trajectory(const FilterState& init, std::span<const ImuSample> samples,
                              const ReferenceFields& refs, const FilterParams& params);

}  // namespace liekf
