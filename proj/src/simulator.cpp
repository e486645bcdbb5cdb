#include "wio/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "wio/se2.hpp"

namespace wio::sim {

void RobotParams::validate() const {
  if (!(track_width > 0.0) || !(wheel_radius > 0.0) || !(max_v > 0.0) || !(max_w > 0.0)) {
    throw Error(ErrorCode::invalid_value, "robot parameters must all be positive");
  }
}

NoiseModel NoiseModel::none() {
  NoiseModel n;
  n.encoder_gauss_std = 0.0;
  n.encoder_slip_prob = 0.0;
  n.encoder_slip_gain = 1.0;
  n.slip_duration = 0;
  n.encoder_scale_left = 1.0;
  n.encoder_scale_right = 1.0;
  n.track_scale = 1.0;
  n.imu_acc_std = 0.0;
  n.imu_gyro_std = 0.0;
  n.gyro_bias = 0.0;
  n.gyro_bias_walk_std = 0.0;
  return n;
}

NoiseModel NoiseModel::amplified(double factor) const {
  NoiseModel n = *this;
  n.encoder_gauss_std *= factor;
  n.encoder_slip_prob = std::min(1.0, n.encoder_slip_prob * factor);
  n.imu_acc_std *= factor;
  n.imu_gyro_std *= factor;
  n.gyro_bias_walk_std *= factor;
  return n;
}

void NoiseModel::validate() const {
  const bool stds_ok = encoder_gauss_std >= 0.0 && imu_acc_std >= 0.0 && imu_gyro_std >= 0.0 &&
                       gyro_bias_walk_std >= 0.0;
  if (!stds_ok) throw Error(ErrorCode::invalid_value, "noise standard deviations must be >= 0");
  if (!(encoder_slip_prob >= 0.0 && encoder_slip_prob <= 1.0)) {
    throw Error(ErrorCode::invalid_value, "encoder_slip_prob must lie in [0, 1]");
  }
  if (slip_duration < 0) throw Error(ErrorCode::invalid_value, "slip_duration must be >= 0");
  if (!(encoder_scale_left > 0.0) || !(encoder_scale_right > 0.0) || !(track_scale > 0.0)) {
    throw Error(ErrorCode::invalid_value, "encoder and track scales must be positive");
  }
  if (!std::isfinite(encoder_slip_gain) || !std::isfinite(gyro_bias)) {
    throw Error(ErrorCode::invalid_value, "slip gain and gyro bias must be finite");
  }
}

void ScenarioScript::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorCode::invalid_script, "duration must be positive");
  }
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw Error(ErrorCode::invalid_script, "sample rate must be positive");
  }
}

namespace {

// Tracks target twists under acceleration limits, one sample at a time.
class TwistPlanner {
 public:
  TwistPlanner(const RobotParams& robot, double dt, std::size_t samples)
      : robot_(robot), dt_(dt), samples_(samples) {
    out_.reserve(samples);
  }

  bool full() const { return out_.size() >= samples_; }

  void drive(double v_target, double w_target, double seconds, double max_acc, double max_alpha) {
    v_target = std::clamp(v_target, -robot_.max_v, robot_.max_v);
    w_target = std::clamp(w_target, -robot_.max_w, robot_.max_w);
    const auto steps = static_cast<std::size_t>(std::llround(seconds / dt_));
    for (std::size_t i = 0; i < steps && !full(); ++i) {
      current_.v += std::clamp(v_target - current_.v, -max_acc * dt_, max_acc * dt_);
      current_.w += std::clamp(w_target - current_.w, -max_alpha * dt_, max_alpha * dt_);
      out_.push_back(current_);
    }
  }

  const Twist& current() const { return current_; }
  std::vector<Twist> take() {
    out_.resize(samples_, Twist{});
    return std::move(out_);
  }

 private:
  RobotParams robot_;
  double dt_;
  std::size_t samples_;
  Twist current_{};
  std::vector<Twist> out_;
};

std::vector<Twist> loops_profile(const ScenarioScript& script, const RobotParams& robot,
                                 std::size_t samples, std::mt19937_64& rng) {
  const double dt = 1.0 / script.sample_rate;
  TwistPlanner planner(robot, dt, samples);
  std::uniform_real_distribution<double> radius_dist(0.5, 1.5);
  std::uniform_real_distribution<double> speed_dist(0.25, 0.4);
  const double direction = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  while (!planner.full()) {
    const double radius = radius_dist(rng);
    const double v = std::min(speed_dist(rng), robot.max_w * radius);
    const double w = direction * v / radius;
    planner.drive(v, w, 2.0 * kPi * radius / v, 0.5, 1.5);
  }
  return planner.take();
}

struct LemniscatePoint {
  double x;
  double y;
  double heading;
};

// Lemniscate of Bernoulli stretched to a 3 m x 1.5 m footprint.
LemniscatePoint lemniscate(double s) {
  constexpr double a = 1.5;
  constexpr double k = 0.75 / 0.35355339059327373;  // y half-extent / max of sin*cos/(1+sin^2)
  const double sn = std::sin(s);
  const double cs = std::cos(s);
  const double den = 1.0 + sn * sn;
  const double dden = 2.0 * sn * cs;
  const double dx = a * (-sn * den - cs * dden) / (den * den);
  const double dy = k * ((cs * cs - sn * sn) * den - sn * cs * dden) / (den * den);
  return {a * cs / den, k * sn * cs / den, std::atan2(dy, dx)};
}

std::vector<Twist> lemniscate_profile(const ScenarioScript& script, std::size_t samples,
                                      double& initial_v) {
  const double dt = 1.0 / script.sample_rate;
  const double ds = 2.0 * kPi * dt / kLemniscatePeriod;
  const double s0 = 0.5 * kPi;  // centre crossing
  std::vector<Twist> out(samples);
  LemniscatePoint prev = lemniscate(s0);
  double heading = prev.heading;
  for (std::size_t n = 0; n < samples; ++n) {
    const LemniscatePoint next = lemniscate(s0 + static_cast<double>(n + 1) * ds);
    // The arc that starts at the current heading and ends exactly on the next
    // curve point: its chord points along heading + dtheta / 2.
    const double chord = std::hypot(next.x - prev.x, next.y - prev.y);
    const double dtheta = 2.0 * wrap_angle(std::atan2(next.y - prev.y, next.x - prev.x) - heading);
    const double half = 0.5 * dtheta;
    const double v = std::abs(half) < 1e-9 ? chord / dt : chord * half / (dt * std::sin(half));
    out[n] = {v, dtheta / dt};
    heading += dtheta;
    prev = next;
  }
  initial_v = samples > 0 ? out.front().v : 0.0;
  return out;
}

std::vector<Twist> irregular_profile(const ScenarioScript& script, const RobotParams& robot,
                                     std::size_t samples, std::mt19937_64& rng) {
  const double dt = 1.0 / script.sample_rate;
  TwistPlanner planner(robot, dt, samples);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto sign = [&] { return unit(rng) < 0.5 ? -1.0 : 1.0; };
  while (!planner.full()) {
    const double pick = unit(rng);
    if (pick < 0.2) {  // sprint from standstill-ish
      planner.drive(robot.max_v, uniform(-0.1, 0.1), uniform(1.0, 3.0), 2.0, 2.0);
    } else if (pick < 0.4) {  // hard brake and hold
      planner.drive(0.0, 0.0, uniform(0.5, 1.5), 2.5, 4.0);
    } else if (pick < 0.6) {  // tight curve
      planner.drive(uniform(0.15, 0.35), sign() * uniform(0.6, 1.0), uniform(1.5, 4.0), 1.5, 3.0);
    } else if (pick < 0.75) {  // turn on the spot
      planner.drive(0.0, sign() * uniform(0.7, 1.0), uniform(1.0, 3.0), 2.0, 4.0);
    } else {  // cruise with mild steering
      planner.drive(uniform(0.2, 0.4), uniform(-0.3, 0.3), uniform(1.0, 4.0), 1.0, 2.0);
    }
  }
  return planner.take();
}

std::vector<Twist> random_profile(const ScenarioScript& script, const RobotParams& robot,
                                  std::size_t samples, std::mt19937_64& rng) {
  const double dt = 1.0 / script.sample_rate;
  TwistPlanner planner(robot, dt, samples);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  while (!planner.full()) {
    const bool hard = unit(rng) < 0.3;
    const double acc = hard ? uniform(1.5, 2.5) : uniform(0.3, 1.0);
    const double alpha = hard ? uniform(3.0, 4.0) : uniform(0.8, 2.0);
    const double pick = unit(rng);
    double v;
    double w;
    if (pick < 0.1) {
      v = 0.0;
      w = 0.0;
    } else if (pick < 0.25) {
      v = uniform(-0.05, 0.05);
      w = uniform(-1.0, 1.0);
    } else if (pick < 0.55) {  // constant-curvature arcs
      const double radius = uniform(0.4, 2.0);
      v = uniform(0.1, 0.4);
      w = (unit(rng) < 0.5 ? -1.0 : 1.0) * std::min(v / radius, robot.max_w);
    } else {
      v = uniform(-0.1, 0.4);
      w = uniform(-1.0, 1.0) * uniform(0.0, 1.0);
    }
    planner.drive(v, w, uniform(1.0, 6.0), acc, alpha);
  }
  return planner.take();
}

std::size_t sample_count(const ScenarioScript& script) {
  return static_cast<std::size_t>(std::llround(script.duration * script.sample_rate));
}

}  // namespace

std::vector<Twist> command_profile(const ScenarioScript& script, const RobotParams& robot) {
  script.validate();
  robot.validate();
  std::mt19937_64 rng(script.seed);
  const std::size_t samples = sample_count(script);
  double initial_v = 0.0;
  switch (script.kind) {
    case ScenarioKind::A: return loops_profile(script, robot, samples, rng);
    case ScenarioKind::B: return lemniscate_profile(script, samples, initial_v);
    case ScenarioKind::C: return irregular_profile(script, robot, samples, rng);
    case ScenarioKind::Random: return random_profile(script, robot, samples, rng);
  }
  return {};
}

TrajectoryLog simulate_twists(std::span<const Twist> twists, const LogMeta& meta,
                              const RobotParams& robot, const NoiseModel& noise,
                              double initial_v) {
  robot.validate();
  noise.validate();
  const double dt = meta.dt();

  std::seed_seq seq{static_cast<std::uint32_t>(noise.seed), static_cast<std::uint32_t>(noise.seed >> 32),
                    static_cast<std::uint32_t>(meta.seed), static_cast<std::uint32_t>(meta.seed >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto gauss = [&](double std_dev) { return std_dev > 0.0 ? std_dev * normal(rng) : 0.0; };

  TrajectoryLog log;
  log.meta = meta;
  log.measurements.reserve(twists.size());
  log.gt_poses.reserve(twists.size());

  const double half_track = 0.5 * robot.track_width * noise.track_scale;
  Pose2D pose{};
  double prev_v = initial_v;
  double bias = noise.gyro_bias;
  int slip_left = 0;
  bool slip_on_left = false;

  for (std::size_t n = 0; n < twists.size(); ++n) {
    const Twist& cmd = twists[n];
    pose = se2::boxplus(pose, se2::unicycle_increment(cmd.v, cmd.w, dt));

    double v_l = (cmd.v - cmd.w * half_track) * noise.encoder_scale_left;
    double v_r = (cmd.v + cmd.w * half_track) * noise.encoder_scale_right;
    if (slip_left == 0 && noise.encoder_slip_prob > 0.0 && noise.slip_duration > 0 &&
        unit(rng) < noise.encoder_slip_prob) {
      slip_left = noise.slip_duration;
      switch (noise.slip_wheel) {
        case SlipWheel::left: slip_on_left = true; break;
        case SlipWheel::right: slip_on_left = false; break;
        case SlipWheel::random: slip_on_left = unit(rng) < 0.5; break;
      }
    }
    if (slip_left > 0) {
      (slip_on_left ? v_l : v_r) *= noise.encoder_slip_gain;
      --slip_left;
    }

    Measurement m;
    m.stamp = static_cast<double>(n + 1) * dt;
    m.v_l = v_l + gauss(noise.encoder_gauss_std);
    m.v_r = v_r + gauss(noise.encoder_gauss_std);
    m.acc_x = (cmd.v - prev_v) / dt + gauss(noise.imu_acc_std);
    m.acc_y = cmd.v * cmd.w + gauss(noise.imu_acc_std);
    m.acc_z = gauss(noise.imu_acc_std);
    m.gyro_x = gauss(noise.imu_gyro_std);
    m.gyro_y = gauss(noise.imu_gyro_std);
    m.gyro_z = cmd.w + bias + gauss(noise.imu_gyro_std);
    bias += gauss(noise.gyro_bias_walk_std * std::sqrt(dt));
    prev_v = cmd.v;

    log.measurements.push_back(m);
    log.gt_poses.push_back(pose);
  }
  return log;
}

TrajectoryLog generate(const ScenarioScript& script, const RobotParams& robot,
                       const NoiseModel& noise) {
  script.validate();
  const std::vector<Twist> twists = command_profile(script, robot);
  double initial_v = 0.0;
  if (script.kind == ScenarioKind::B && !twists.empty()) initial_v = twists.front().v;
  return simulate_twists(twists, LogMeta{script.kind, script.sample_rate, script.seed}, robot, noise,
                         initial_v);
}

std::vector<Pose2D> dead_reckon(const TrajectoryLog& log, const RobotParams& robot) {
  std::vector<Pose2D> out;
  out.reserve(log.size());
  const double dt = log.meta.dt();
  Pose2D pose{};
  for (const Measurement& m : log.measurements) {
    const double v = 0.5 * (m.v_l + m.v_r);
    const double w = (m.v_r - m.v_l) / robot.track_width;
    pose = se2::boxplus(pose, se2::unicycle_increment(v, w, dt));
    out.push_back(pose);
  }
  return out;
}

}  // namespace wio::sim
