#include "wio/core_types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace wio {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::insufficient_samples: return "insufficient-samples";
    case ErrorCode::irregular_stamps: return "irregular-stamps";
    case ErrorCode::invalid_value: return "invalid-value";
    case ErrorCode::invalid_script: return "invalid-script";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::disconnected_graph: return "disconnected-graph";
    case ErrorCode::invalid_spec: return "invalid-spec";
    case ErrorCode::empty_batch: return "empty-batch";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::log_too_short: return "log-too-short";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::trajectory_too_short: return "trajectory-too-short";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::io_failure: return "io-failure";
    case ErrorCode::parse_failure: return "parse-failure";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::spec_mismatch: return "spec-mismatch";
  }
  return "unknown";
}

double wrap_angle(double angle) noexcept {
  if (angle > -kPi && angle <= kPi) return angle;
  double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

bool Measurement::is_finite() const noexcept {
  const auto c = as_array();
  return std::isfinite(stamp) &&
         std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); });
}

bool Pose2D::is_finite() const noexcept {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta);
}

bool RelativePose::is_finite() const noexcept {
  return std::isfinite(dx) && std::isfinite(dy) && std::isfinite(dtheta);
}

bool RelativePose::within_limits(double dt, double max_v, double max_w,
                                 double margin) const noexcept {
  const double lin = max_v * dt * margin;
  const double ang = max_w * dt * margin;
  return is_finite() && std::abs(dx) <= lin && std::abs(dy) <= lin && std::abs(dtheta) <= ang;
}

MeasurementWindow::MeasurementWindow(std::vector<Measurement> samples)
    : samples_(std::move(samples)) {
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].stamp > samples_[i - 1].stamp)) {
      throw Error(ErrorCode::irregular_stamps, "window stamps must be strictly increasing");
    }
  }
}

std::string_view to_string(ScenarioKind kind) noexcept {
  switch (kind) {
    case ScenarioKind::A: return "A";
    case ScenarioKind::B: return "B";
    case ScenarioKind::C: return "C";
    case ScenarioKind::Random: return "train";
  }
  return "train";
}

ScenarioKind parse_scenario_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "a") return ScenarioKind::A;
  if (lower == "b") return ScenarioKind::B;
  if (lower == "c") return ScenarioKind::C;
  if (lower == "train" || lower == "random") return ScenarioKind::Random;
  throw Error(ErrorCode::invalid_value, "unknown scenario kind '" + std::string(text) + "'");
}

void TrajectoryLog::validate() const {
  if (measurements.size() != gt_poses.size()) {
    throw Error(ErrorCode::length_mismatch, "measurements and ground truth differ in length");
  }
  if (!(meta.sample_rate > 0.0) || !std::isfinite(meta.sample_rate)) {
    throw Error(ErrorCode::invalid_value, "sample rate must be positive");
  }
  const double dt = meta.dt();
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    if (!measurements[i].is_finite() || !gt_poses[i].is_finite()) {
      throw Error(ErrorCode::invalid_value, "non-finite value at row " + std::to_string(i));
    }
    if (i > 0) {
      const double step = measurements[i].stamp - measurements[i - 1].stamp;
      if (std::abs(step - dt) > 0.1 * dt) {
        throw Error(ErrorCode::irregular_stamps,
                    "stamp spacing at row " + std::to_string(i) + " departs from 1/rate by >10%");
      }
    }
  }
}

MeasurementWindow window_from_stream(std::span<const Measurement> buffer, std::size_t length) {
  if (buffer.size() < length) {
    throw Error(ErrorCode::insufficient_samples,
                "need " + std::to_string(length) + " samples, have " + std::to_string(buffer.size()));
  }
  return MeasurementWindow(std::vector<Measurement>(buffer.end() - static_cast<std::ptrdiff_t>(length),
                                                    buffer.end()));
}

}  // namespace wio
