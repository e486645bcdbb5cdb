#include <gtest/gtest.h>

#include <cmath>

#include "wio/se2.hpp"
#include "wio/simulator.hpp"

using namespace wio;
using namespace wio::sim;

namespace {

constexpr std::array kAllKinds = {ScenarioKind::A, ScenarioKind::B, ScenarioKind::C, ScenarioKind::Random};

TrajectoryLog constant_twist(double v, double w, double seconds, const NoiseModel& noise = NoiseModel::none()) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * kDefaultSampleRate));
  const std::vector<Twist> twists(n, Twist{v, w});
  return simulate_twists(twists, LogMeta{}, RobotParams{}, noise, v);
}

}  // namespace

TEST(Simulator, StraightLineNoiseless) {
  const auto log = constant_twist(0.2, 0.0, 1.0);
  ASSERT_EQ(log.size(), 25u);
  EXPECT_NEAR(log.gt_poses.back().x, 0.2, 1e-12);
  EXPECT_NEAR(log.gt_poses.back().y, 0.0, 1e-12);
  EXPECT_NEAR(log.gt_poses.back().theta, 0.0, 1e-12);
  for (const auto& m : log.measurements) {
    EXPECT_NEAR(m.v_l, 0.2, 1e-12);
    EXPECT_NEAR(m.v_r, 0.2, 1e-12);
  }
}

TEST(Simulator, PureSpinNoiseless) {
  const auto log = constant_twist(0.0, kPi / 2, 2.0);
  EXPECT_NEAR(log.gt_poses.back().x, 0.0, 1e-12);
  EXPECT_NEAR(log.gt_poses.back().y, 0.0, 1e-12);
  EXPECT_NEAR(std::abs(log.gt_poses.back().theta), kPi, 1e-9);
  for (const auto& m : log.measurements) EXPECT_NEAR(m.gyro_z, kPi / 2, 1e-12);
}

TEST(Simulator, LemniscateClosesAfterOnePeriod) {
  const ScenarioScript script{ScenarioKind::B, kLemniscatePeriod, kDefaultSampleRate, 0};
  const auto log = generate(script, RobotParams{}, NoiseModel::none());
  EXPECT_EQ(log.meta.kind, ScenarioKind::B);
  const Pose2D& end = log.gt_poses.back();
  EXPECT_LT(std::hypot(end.x, end.y), 1e-6);
  EXPECT_NEAR(wrap_angle(end.theta), 0.0, 1e-6);
  // Halfway it is far from the start.
  const Pose2D& mid = log.gt_poses[log.size() / 4];
  EXPECT_GT(std::hypot(mid.x, mid.y), 1.0);
}

TEST(Simulator, SampleCountAndStamps) {
  const auto log = generate({ScenarioKind::A, 60.0, kDefaultSampleRate, 1}, RobotParams{}, NoiseModel{});
  ASSERT_EQ(log.size(), 1500u);
  EXPECT_NO_THROW(log.validate());
  EXPECT_DOUBLE_EQ(log.measurements.front().stamp, 0.04);
  EXPECT_NEAR(log.measurements.back().stamp, 60.0, 1e-9);
}

TEST(Simulator, DeterministicForSeed) {
  for (ScenarioKind kind : kAllKinds) {
    const ScenarioScript script{kind, 30.0, kDefaultSampleRate, 42};
    NoiseModel noise;
    noise.seed = 9;
    EXPECT_EQ(generate(script, RobotParams{}, noise), generate(script, RobotParams{}, noise));
    noise.seed = 10;
    EXPECT_NE(generate(script, RobotParams{}, NoiseModel{}), generate(script, RobotParams{}, noise));
  }
}

TEST(Simulator, CommandsRespectVelocityLimits) {
  const RobotParams robot;
  for (ScenarioKind kind : kAllKinds) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (const Twist& t : command_profile({kind, 60.0, kDefaultSampleRate, seed}, robot)) {
        ASSERT_LE(std::abs(t.v), robot.max_v + 1e-12) << to_string(kind) << " seed " << seed;
        ASSERT_LE(std::abs(t.w), robot.max_w + 1e-12) << to_string(kind) << " seed " << seed;
      }
    }
  }
}

TEST(Simulator, ScenariosMove) {
  for (ScenarioKind kind : kAllKinds) {
    const auto log = generate({kind, 60.0, kDefaultSampleRate, 3}, RobotParams{}, NoiseModel::none());
    double path = 0.0;
    for (std::size_t i = 1; i < log.size(); ++i) {
      path += std::hypot(log.gt_poses[i].x - log.gt_poses[i - 1].x, log.gt_poses[i].y - log.gt_poses[i - 1].y);
    }
    EXPECT_GT(path, 5.0) << to_string(kind);
  }
}

TEST(Simulator, RejectsInvalidInputs) {
  EXPECT_THROW(generate({ScenarioKind::A, 0.0, kDefaultSampleRate, 0}, RobotParams{}, NoiseModel{}), Error);
  EXPECT_THROW(generate({ScenarioKind::A, 10.0, -1.0, 0}, RobotParams{}, NoiseModel{}), Error);
  NoiseModel bad;
  bad.encoder_slip_prob = 1.5;
  EXPECT_THROW(generate({ScenarioKind::A, 10.0, kDefaultSampleRate, 0}, RobotParams{}, bad), Error);
  RobotParams robot;
  robot.track_width = 0.0;
  EXPECT_THROW(generate({ScenarioKind::A, 10.0, kDefaultSampleRate, 0}, robot, NoiseModel{}), Error);
}

TEST(Simulator, AmplifiedScalesStochasticTermsOnly) {
  const NoiseModel base;
  const NoiseModel loud = base.amplified(10.0);
  EXPECT_DOUBLE_EQ(loud.encoder_gauss_std, 10.0 * base.encoder_gauss_std);
  EXPECT_DOUBLE_EQ(loud.imu_gyro_std, 10.0 * base.imu_gyro_std);
  EXPECT_DOUBLE_EQ(loud.track_scale, base.track_scale);
  EXPECT_DOUBLE_EQ(loud.gyro_bias, base.gyro_bias);
  EXPECT_LE(loud.encoder_slip_prob, 1.0);
}

TEST(DeadReckoning, NoiselessReproducesGroundTruth) {
  for (ScenarioKind kind : kAllKinds) {
    const auto log = generate({kind, 120.0, kDefaultSampleRate, 5}, RobotParams{}, NoiseModel::none());
    const auto est = dead_reckon(log, RobotParams{});
    const double budget = 1e-9 * static_cast<double>(log.size()) / 1000.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < log.size(); ++i) {
      worst = std::max(worst, std::hypot(est[i].x - log.gt_poses[i].x, est[i].y - log.gt_poses[i].y));
    }
    EXPECT_LE(worst, budget) << to_string(kind);
  }
}

TEST(DeadReckoning, AccumulatedIncrementsReproduceGroundTruth) {
  const RobotParams robot;
  for (ScenarioKind kind : kAllKinds) {
    const auto log = generate({kind, 120.0, kDefaultSampleRate, 6}, robot, NoiseModel::none());
    std::vector<RelativePose> deltas;
    for (const auto& m : log.measurements) {
      deltas.push_back(se2::unicycle_increment(0.5 * (m.v_l + m.v_r), (m.v_r - m.v_l) / robot.track_width,
                                               log.meta.dt()));
    }
    const auto est = se2::accumulate({}, deltas);
    const double budget = 1e-9 * static_cast<double>(log.size()) / 1000.0;
    for (std::size_t i = 0; i < log.size(); ++i) {
      ASSERT_LE(std::hypot(est[i].x - log.gt_poses[i].x, est[i].y - log.gt_poses[i].y), budget);
    }
  }
}

TEST(DeadReckoning, RightWheelUnderReadingDriftsNegative) {
  NoiseModel noise = NoiseModel::none();
  noise.encoder_slip_prob = 0.05;
  noise.slip_duration = 10;
  noise.encoder_slip_gain = 0.5;
  noise.slip_wheel = SlipWheel::right;
  const auto log = constant_twist(0.3, 0.0, 20.0, noise);
  const auto est = dead_reckon(log, RobotParams{});
  EXPECT_NEAR(log.gt_poses.back().theta, 0.0, 1e-12);
  EXPECT_LT(est.back().theta, -0.1);
}

TEST(DeadReckoning, StandstillKeepsPose) {
  const auto log = constant_twist(0.0, 0.0, 5.0);
  for (const auto& p : dead_reckon(log, RobotParams{})) EXPECT_EQ(p, Pose2D{});
}

TEST(Noise, SystematicErrorsBiasDeadReckoning) {
  const auto clean = generate({ScenarioKind::A, 60.0, kDefaultSampleRate, 2}, RobotParams{}, NoiseModel::none());
  const auto noisy = generate({ScenarioKind::A, 60.0, kDefaultSampleRate, 2}, RobotParams{}, NoiseModel{});
  EXPECT_EQ(clean.gt_poses, noisy.gt_poses);
  const auto est = dead_reckon(noisy, RobotParams{});
  const auto& g = noisy.gt_poses.back();
  EXPECT_GT(std::hypot(est.back().x - g.x, est.back().y - g.y), 0.5);
}
