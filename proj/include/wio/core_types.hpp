#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wio/errors.hpp"

namespace wio {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultSampleRate = 25.0;
inline constexpr std::size_t kChannels = 8;
inline constexpr std::size_t kDefaultWindow = 10;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle) noexcept;

/// One sensor sample: wheel speeds, accelerometer and gyroscope.
///
/// The sample at index n describes the motion over the interval that ends at
/// `stamp`; channel order matches `as_array()`.
struct Measurement {
  double v_l = 0.0;
  double v_r = 0.0;
  double acc_x = 0.0;
  double acc_y = 0.0;
  double acc_z = 0.0;
  double gyro_x = 0.0;
  double gyro_y = 0.0;
  double gyro_z = 0.0;
  double stamp = 0.0;

  std::array<double, kChannels> as_array() const noexcept {
    return {v_l, v_r, acc_x, acc_y, acc_z, gyro_x, gyro_y, gyro_z};
  }
  static Measurement from_array(const std::array<double, kChannels>& c, double stamp) noexcept {
    return {c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], stamp};
  }
  bool is_finite() const noexcept;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

inline constexpr std::array<std::string_view, kChannels> kChannelNames = {
    "v_l", "v_r", "acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z"};

/// The last T measurements, oldest first. The model sees u_{n-T+1} .. u_n in
/// that order, so samples.back() is the newest reading.
class MeasurementWindow {
 public:
  MeasurementWindow() = default;
  /// Validates that stamps are strictly increasing.
  explicit MeasurementWindow(std::vector<Measurement> samples);

  std::size_t size() const noexcept { return samples_.size(); }
  const Measurement& operator[](std::size_t i) const { return samples_[i]; }
  const Measurement& newest() const { return samples_.back(); }
  std::span<const Measurement> samples() const noexcept { return samples_; }

  friend bool operator==(const MeasurementWindow&, const MeasurementWindow&) = default;

 private:
  std::vector<Measurement> samples_;
};

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  bool is_finite() const noexcept;
  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Pose increment expressed in the frame of the previous pose.
struct RelativePose {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;

  bool is_finite() const noexcept;
  /// True when the increment is reachable within one step of `dt` seconds
  /// under the velocity limits, with a safety margin.
  bool within_limits(double dt, double max_v = 0.4, double max_w = 1.0,
                     double margin = 2.0) const noexcept;
  friend bool operator==(const RelativePose&, const RelativePose&) = default;
};

enum class ScenarioKind { A, B, C, Random };

std::string_view to_string(ScenarioKind kind) noexcept;
/// Accepts "A", "B", "C", "train"/"random" (case-insensitive for the latter).
ScenarioKind parse_scenario_kind(std::string_view text);

struct LogMeta {
  ScenarioKind kind = ScenarioKind::Random;
  double sample_rate = kDefaultSampleRate;
  std::uint64_t seed = 0;

  double dt() const noexcept { return 1.0 / sample_rate; }
  friend bool operator==(const LogMeta&, const LogMeta&) = default;
};

/// Time-aligned measurements and ground truth: gt_poses[n] is the pose at
/// measurements[n].stamp. The pose before the first sample is the origin.
struct TrajectoryLog {
  std::vector<Measurement> measurements;
  std::vector<Pose2D> gt_poses;
  LogMeta meta;

  std::size_t size() const noexcept { return measurements.size(); }
  double duration() const noexcept { return static_cast<double>(size()) * meta.dt(); }

  /// Throws on length mismatch, non-finite values, or stamps whose spacing
  /// departs from 1/sample_rate by more than 10%.
  void validate() const;

  friend bool operator==(const TrajectoryLog&, const TrajectoryLog&) = default;
};

/// Latest `length` samples of `buffer`, oldest first.
MeasurementWindow window_from_stream(std::span<const Measurement> buffer, std::size_t length);

}  // namespace wio
