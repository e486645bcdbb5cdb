#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wio/core_types.hpp"

namespace wio::metrics {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

struct PoseErrorStats {
  MeanStd position;  // [m]
  MeanStd heading;   // [rad]
};

struct ErrorSeries {
  std::vector<double> position;
  std::vector<double> heading;
};

struct Histogram {
  std::vector<double> edges;  // bin_count + 1 edges spanning [0, max]
  std::vector<std::size_t> counts;
};

/// Per-sample Euclidean position error and absolute wrapped heading error.
ErrorSeries error_series(std::span<const Pose2D> est, std::span<const Pose2D> gt);

/// Mean absolute trajectory error.
PoseErrorStats m_ate(std::span<const Pose2D> est, std::span<const Pose2D> gt);

struct SegmentErrors {
  std::vector<double> position;
  std::vector<double> heading;
};

/// End-pose errors of every segment: for each start index (every `stride`
/// samples) the segment ends at the first sample whose ground-truth arc length
/// from the start exceeds `segment_length`. The estimate is re-anchored to the
/// ground truth at the start before comparing end poses.
SegmentErrors segment_errors(std::span<const Pose2D> est, std::span<const Pose2D> gt,
                             double segment_length, std::size_t stride);

PoseErrorStats segment_error(std::span<const Pose2D> est, std::span<const Pose2D> gt,
                             double segment_length, std::size_t stride);

/// Equal-width bins over [0, max(values)].
Histogram histogram(std::span<const double> values, std::size_t bin_count);

struct MetricConfig {
  double segment_length = 1.0;  // [m]
  std::size_t segment_stride = 1;
  std::size_t histogram_bins = 20;
};

struct MetricReport {
  MeanStd m_ate_xy;
  MeanStd m_ate_theta;
  MeanStd se_xy;
  MeanStd se_theta;
  ErrorSeries series;
  SegmentErrors segments;
  Histogram se_xy_hist;
  Histogram se_theta_hist;
};

/// Full report for one trajectory.
MetricReport evaluate(std::span<const Pose2D> est, std::span<const Pose2D> gt,
                      const MetricConfig& cfg);

/// Pools the per-sample and per-segment errors of several reports (used for
/// the per-scenario and overall rows) and recomputes the summary statistics.
MetricReport pool(std::span<const MetricReport> reports, const MetricConfig& cfg);

}  // namespace wio::metrics
