#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include <liekf/filter.hpp>
#include <liekf/linear_model.hpp>
#include <liekf/simulation.hpp>

#include "test_support.hpp"

namespace liekf {
namespace {

using testing::Rng;

FilterParams default_params() {
  return true_params(NoiseConfig{}, 0.01);
}

TEST(Filter, ScalarKalmanUpdate) {
  // Three decoupled scalar filters: only the accelerometer block sees the state.
  const double p = 2.0, h = 0.5, r = 0.1, y = 0.3;
  Mat6x3 H = Mat6x3::Zero();
  H.topRows<3>() = h * Mat3::Identity();
  Vec6 innov = Vec6::Zero();
  innov.head<3>().setConstant(y);
  const Correction c = kalman_correct(p * Mat3::Identity(), H, r * Mat6::Identity(), innov);

  const double k = p * h / (p * h * h + r);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(c.K(i, i), k, 1e-14);
    EXPECT_NEAR(c.dx[i], k * y, 1e-14);
    EXPECT_NEAR(c.P_post(i, i), (1.0 - k * h) * p, 1e-14);
  }
  EXPECT_LE(c.K.rightCols<3>().norm(), 1e-15);
}

TEST(Filter, LinearFilterMatchesTextbookKalman) {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const testing::LinearSystem sys = testing::make_linear_system(rng, 30);
    const WindowBuffer b = run_linear_filter(sys.P0, sys.steps, {sys.Q, sys.R});
    const testing::KfOutput ref = testing::textbook_kalman(sys, sys.Q, sys.R);
    for (std::size_t k = 0; k < sys.steps.size(); ++k) {
      EXPECT_LE((b.records[k].x_prior - ref.x_prior[k]).norm(), 1e-10);
      EXPECT_LE((b.records[k].x_post - ref.x_post[k]).norm(), 1e-10);
      EXPECT_LE((b.records[k].P_prior - ref.P_prior[k]).norm(), 1e-10);
      EXPECT_LE((b.records[k].P_post - ref.P_post[k]).norm(), 1e-10);
    }
  }
}

TEST(Filter, ZeroInnovationLeavesAttitudeUnchanged) {
  Rng rng(32);
  const ReferenceFields refs;
  for (int n = 0; n < 50; ++n) {
    const UnitQuaternion q = rng.unit_quaternion();
    const UpdateResult r = update(q, 1e-4 * Mat3::Identity(), measure_h(q, refs), refs, default_params());
    EXPECT_LE(r.record.innovation.norm(), 1e-15);
    EXPECT_LE(r.record.x_post.norm(), 1e-15);
    EXPECT_LE((r.state.q_hat.coeffs() - q.coeffs()).norm(), 1e-15);
  }
}

TEST(Filter, UninformativeMeasurementKeepsPrior) {
  Rng rng(33);
  const ReferenceFields refs;
  FilterParams params = default_params();
  params.R *= 1e9;
  const UnitQuaternion q = rng.unit_quaternion();
  const Mat3 P = 1e-3 * Mat3::Identity();
  const Measurement z = measure_h(q * exp_map(Vec3(0.01, -0.02, 0.01)), refs);
  const UpdateResult r = update(q, P, z, refs, params);
  EXPECT_LE((r.record.P_post - P).norm() / P.norm(), 1e-6);
  EXPECT_LE((r.state.q_hat.coeffs() - q.coeffs()).norm(), 1e-6);
}

TEST(Filter, CovarianceStaysSymmetricAndPsd) {
  Rng rng(34);
  const ReferenceFields refs;
  const FilterParams params = default_params();
  FilterState s{rng.unit_quaternion(), 1e-2 * Mat3::Identity()};
  UnitQuaternion truth = s.q_hat;
  double worst_asym = 0.0, worst_eig = 0.0;
  for (int k = 0; k < 100000; ++k) {
    ImuSample sample;
    sample.omega = rng.vec3(0.5);
    truth = propagate_quaternion(truth, sample.omega + rng.vec3(0.3), sample.dt);
    const Measurement z = measure_h(truth, refs) + rng.vec6(5e-3);
    sample.accel = z.head<3>();
    sample.mag = z.tail<3>();
    s = step(s, sample, refs, params).state;
    const double scale = s.P.cwiseAbs().maxCoeff();
    worst_asym = std::max(worst_asym, (s.P - s.P.transpose()).cwiseAbs().maxCoeff() / scale);
    worst_eig = std::min(worst_eig, Eigen::SelfAdjointEigenSolver<Mat3>(s.P).eigenvalues().minCoeff());
  }
  EXPECT_LE(worst_asym, 1e-12);
  EXPECT_GE(worst_eig, -1e-10);
}

TEST(Filter, NoiselessDataTracksTruth) {
  TrajectoryConfig tc;
  tc.duration = 10.0;
  const Trajectory traj = generate_trajectory(tc);
  const ReferenceFields refs;
  std::vector<ImuSample> samples;
  for (std::size_t k = 1; k <= traj.steps(); ++k) {
    ImuSample s;
    s.omega = traj.omega_true[k - 1];
    s.dt = traj.dt;
    const Measurement z = measure_h(traj.q_true[k], refs);
    s.accel = z.head<3>();
    s.mag = z.tail<3>();
    samples.push_back(s);
  }
  const FilterParams params{1e-8 * Mat3::Identity(), 1e-12 * Mat6::Identity()};
  const FilterTrace tr = filter_trajectory({traj.q_true[0], 1e-8 * Mat3::Identity()}, samples, refs, params);
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.q.size(); ++k) {
    worst = std::max(worst, attitude_error(tr.q[k], traj.q_true[k + 1]).norm());
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Filter, StaticCovarianceTraceDoesNotIncrease) {
  const ReferenceFields refs;
  const FilterParams params = default_params();
  FilterState s{UnitQuaternion::identity(), 1e-2 * Mat3::Identity()};
  ImuSample sample;
  const Measurement z = measure_h(s.q_hat, refs);
  sample.accel = z.head<3>();
  sample.mag = z.tail<3>();
  double prev = s.P.trace();
  for (int k = 0; k < 500; ++k) {
    s = step(s, sample, refs, params).state;
    EXPECT_LE(s.P.trace(), prev * (1.0 + 1e-12)) << "step " << k;
    prev = s.P.trace();
  }
}

TEST(Filter, GainIsLeftInvariant) {
  Rng rng(35);
  const ReferenceFields refs;
  const FilterParams params = default_params();
  for (int trial = 0; trial < 10; ++trial) {
    const UnitQuaternion q0 = rng.unit_quaternion();
    const UnitQuaternion gamma = rng.unit_quaternion();
    const ReferenceFields shifted{rotation_matrix(gamma) * refs.g, rotation_matrix(gamma) * refs.m0};
    std::vector<ImuSample> samples(200);
    UnitQuaternion truth = q0;
    for (ImuSample& s : samples) {
      s.omega = rng.vec3(0.5);
      truth = propagate_quaternion(truth, s.omega + rng.vec3(0.2), s.dt);
      const Measurement z = measure_h(truth, refs) + rng.vec6(5e-3);
      s.accel = z.head<3>();
      s.mag = z.tail<3>();
    }
    const Mat3 P0 = 2.5e-3 * Mat3::Identity();
    const WindowRun a = run_window({q0, P0}, samples, refs, params);
    const WindowRun b = run_window({gamma * q0, P0}, samples, shifted, params);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      EXPECT_LE((a.buffer.records[k].innovation - b.buffer.records[k].innovation).norm(), 1e-9);
      EXPECT_LE((a.buffer.records[k].x_post - b.buffer.records[k].x_post).norm(), 1e-9);
      EXPECT_LE((a.buffer.records[k].K - b.buffer.records[k].K).norm(), 1e-9);
    }
    const UnitQuaternion moved = gamma * a.final_state.q_hat;
    EXPECT_LE(attitude_error(b.final_state.q_hat, moved).norm(), 1e-9);
  }
}

TEST(Filter, IllConditionedInnovationIsReported) {
  const ReferenceFields refs;
  const FilterParams params{Mat3::Zero(), 1e-15 * Mat6::Identity()};
  std::vector<ImuSample> samples(3);
  for (ImuSample& s : samples) {
    const Measurement z = measure_h(UnitQuaternion::identity(), refs);
    s.accel = z.head<3>();
    s.mag = z.tail<3>();
  }
  try {
    run_window({UnitQuaternion::identity(), 1e3 * Mat3::Identity()}, samples, refs, params);
    FAIL() << "expected StepError";
  } catch (const StepError& e) {
    EXPECT_EQ(e.step(), 0u);
  }
}

TEST(Filter, ParameterValidation) {
  FilterParams p = default_params();
  EXPECT_NO_THROW(p.validate());
  p.Q(0, 1) = 1e-3;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = default_params();
  p.Q(0, 0) = -1e-3;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = default_params();
  p.R(5, 5) = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_THROW(run_window({}, std::span<const ImuSample>{}, {}, default_params()), std::invalid_argument);
}

}  // namespace
}  // namespace liekf
