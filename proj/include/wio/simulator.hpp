#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wio/core_types.hpp"

namespace wio::sim {

struct RobotParams {
  double track_width = 0.37;   // [m]
  double wheel_radius = 0.098; // [m]
  double max_v = 0.4;          // [m/s]
  double max_w = 1.0;          // [rad/s]

  void validate() const;
};

enum class SlipWheel { random, left, right };

/// Sensor corruption. Everything defaults to the calibrated "Jackal-like"
/// profile; `none()` gives perfect sensors.
struct NoiseModel {
  double encoder_gauss_std = 0.01;      // [m/s]
  double encoder_slip_prob = 0.02;      // [1/sample]
  double encoder_slip_gain = 1.4;       // reported-speed multiplier during a slip
  int slip_duration = 10;               // [samples]
  SlipWheel slip_wheel = SlipWheel::random;
  double encoder_scale_left = 1.05;     // reported / true wheel speed
  double encoder_scale_right = 1.0;     
  double track_scale = 1.8;             // effective / geometric track width (skid)
  double imu_acc_std = 0.05;            // [m/s^2]
  double imu_gyro_std = 0.02;           // [rad/s]
  double gyro_bias = 0.025;             // initial gyro_z bias [rad/s]
  double gyro_bias_walk_std = 1e-4;     // [rad/s per sqrt(s)]
  std::uint64_t seed = 0;

  static NoiseModel none();
  /// Multiplies every stochastic magnitude (not the systematic scales) by `factor`.
  NoiseModel amplified(double factor) const;
  void validate() const;
};

struct ScenarioScript {
  ScenarioKind kind = ScenarioKind::Random;
  double duration = 60.0;      // [s]
  double sample_rate = kDefaultSampleRate;
  std::uint64_t seed = 0;      // motion randomness; noise uses NoiseModel::seed as well

  void validate() const;
  friend bool operator==(const ScenarioScript&, const ScenarioScript&) = default;
};

/// Commanded body twist held over one sample interval.
struct Twist {
  double v = 0.0;
  double w = 0.0;
};

/// Commanded twists for a script; one entry per sample, limits enforced.
std::vector<Twist> command_profile(const ScenarioScript& script, const RobotParams& robot);

/// Lemniscate period used by type B scripts [s].
inline constexpr double kLemniscatePeriod = 36.0;

/// Integrates `twists` with exact unicycle kinematics and synthesizes sensor
/// readings. `initial_v` is the speed before the first interval (used for acc_x).
TrajectoryLog simulate_twists(std::span<const Twist> twists, const LogMeta& meta,
                              const RobotParams& robot, const NoiseModel& noise,
                              double initial_v = 0.0);

TrajectoryLog generate(const ScenarioScript& script, const RobotParams& robot,
                       const NoiseModel& noise);

/// Encoder-only odometry: v = (v_l + v_r)/2, w = (v_r - v_l)/track_width.
std::vector<Pose2D> dead_reckon(const TrajectoryLog& log, const RobotParams& robot);

}  // namespace wio::sim
