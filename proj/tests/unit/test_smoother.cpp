#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include <liekf/linear_model.hpp>
#include <liekf/monte_carlo.hpp>
#include <liekf/smoother.hpp>

#include "test_support.hpp"

namespace liekf {
namespace {

using testing::Rng;

class SmootherVsJointGaussian : public ::testing::TestWithParam<int> {};

TEST_P(SmootherVsJointGaussian, MomentsMatch) {
  Rng rng(40 + static_cast<std::uint64_t>(GetParam()));
  for (int trial = 0; trial < 5; ++trial) {
    const testing::LinearSystem sys = testing::make_linear_system(rng, static_cast<std::size_t>(GetParam()));
    const WindowBuffer b = run_linear_filter(sys.P0, sys.steps, {sys.Q, sys.R});
    const SmoothedWindow sm = smooth_window(b);
    const testing::JointSmoother ref = testing::joint_gaussian_smoother(sys, sys.Q, sys.R);
    ASSERT_EQ(sm.x_smooth.size(), ref.x.size());
    for (std::size_t i = 0; i < ref.x.size(); ++i) {
      EXPECT_LE((sm.x_smooth[i] - ref.x[i]).norm(), 1e-7) << "i=" << i;
      EXPECT_LE((sm.P_smooth[i] - ref.P[i]).norm(), 1e-7) << "i=" << i;
    }
    for (std::size_t i = 0; i < ref.P_lag.size(); ++i) {
      EXPECT_LE((sm.P_lag[i] - ref.P_lag[i]).norm(), 1e-7) << "lag i=" << i + 1;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(WindowLengths, SmootherVsJointGaussian, ::testing::Values(1, 2, 5, 12, 20));

TEST(Smoother, LastStepEqualsFilter) {
  Rng rng(50);
  const testing::LinearSystem sys = testing::make_linear_system(rng, 15);
  const WindowBuffer b = run_linear_filter(sys.P0, sys.steps, {sys.Q, sys.R});
  const SmoothedWindow sm = smooth_window(b);
  EXPECT_EQ(sm.x_smooth.back(), b.records.back().x_post);
  EXPECT_EQ(sm.P_smooth.back(), b.records.back().P_post);
}

TEST(Smoother, SmoothedCovarianceIsNoLargerThanFiltered) {
  Scenario sc;
  sc.trajectory.duration = 2.0;
  const Trajectory traj = generate_trajectory(sc.trajectory);
  const RunData run = prepare_run(sc, traj, 0);
  const WindowRun w = run_window(run.init, run.samples, sc.refs, sc.filter_true_params());
  const SmoothedWindow sm = smooth_window(w.buffer);
  EXPECT_LE(sm.P_smooth[0].trace(), run.init.P.trace() * (1 + 1e-12));
  for (std::size_t i = 1; i <= w.buffer.size(); ++i) {
    const Mat3& Pf = w.buffer.records[i - 1].P_post;
    EXPECT_LE(sm.P_smooth[i].trace(), Pf.trace() * (1 + 1e-12)) << "i=" << i;
    // Loewner order, not just the trace.
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat3>(Pf - sm.P_smooth[i]).eigenvalues().minCoeff(),
              -1e-12 * Pf.norm());
  }
}

TEST(Smoother, NoProcessNoiseGivesConstantState) {
  Rng rng(52);
  testing::LinearSystem sys = testing::make_linear_system(rng, 25);
  for (LinearStep& s : sys.steps) s.F = Mat3::Identity();
  const WindowBuffer b = run_linear_filter(sys.P0, sys.steps, {Mat3::Zero(), sys.R});
  const SmoothedWindow sm = smooth_window(b);
  for (const Vec3& x : sm.x_smooth) EXPECT_LE((x - sm.x_smooth.back()).norm(), 1e-9);
}

TEST(Smoother, LagOneWithZeroFinalGain) {
  Rng rng(53);
  testing::LinearSystem sys = testing::make_linear_system(rng, 6);
  sys.steps.back().H = Mat6x3::Zero();
  const WindowBuffer b = run_linear_filter(sys.P0, sys.steps, {sys.Q, sys.R});
  const SmoothedWindow sm = smooth_window(b);
  EXPECT_LE(b.records.back().K.norm(), 0.0);
  const Mat3 expected = sys.steps.back().F * b.records[b.size() - 2].P_post;
  EXPECT_LE((sm.P_lag.back() - expected).norm(), 1e-15 * (1.0 + expected.norm()));
}

TEST(Smoother, LagCovarianceIsBounded) {
  Rng rng(54);
  for (int trial = 0; trial < 20; ++trial) {
    const testing::LinearSystem sys = testing::make_linear_system(rng, 30);
    const SmoothedWindow sm = smooth_window(run_linear_filter(sys.P0, sys.steps, {sys.Q, sys.R}));
    for (std::size_t i = 1; i < sm.x_smooth.size(); ++i) {
      const Mat3& L = sm.P_lag[i - 1];
      EXPECT_TRUE(L.allFinite());
      EXPECT_LE(L.norm(), std::sqrt(sm.P_smooth[i].trace() * sm.P_smooth[i - 1].trace()) * (1 + 1e-12));
      EXPECT_LE((sm.P_smooth[i] - sm.P_smooth[i].transpose()).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Smoother, SingularPriorIsReported) {
  Rng rng(51);
  const testing::LinearSystem sys = testing::make_linear_system(rng, 4);
  WindowBuffer b = run_linear_filter(sys.P0, sys.steps, {sys.Q, sys.R});
  b.records[2].P_prior = Mat3::Zero();
  try {
    rts_smooth(b);
    FAIL() << "expected StepError";
  } catch (const StepError& e) {
    EXPECT_EQ(e.step(), 3u);
  }
  EXPECT_THROW(rts_smooth(WindowBuffer{}), std::invalid_argument);
}

}  // namespace
}  // namespace liekf
