#include "wio/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wio/se2.hpp"

namespace wio::metrics {

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

namespace {

void require_same_length(std::span<const Pose2D> est, std::span<const Pose2D> gt) {
  if (est.size() != gt.size()) {
    throw Error(ErrorCode::length_mismatch, "estimate has " + std::to_string(est.size()) +
                                                " poses, ground truth " + std::to_string(gt.size()));
  }
}

}  // namespace

ErrorSeries error_series(std::span<const Pose2D> est, std::span<const Pose2D> gt) {
  require_same_length(est, gt);
  ErrorSeries s;
  s.position.reserve(est.size());
  s.heading.reserve(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    s.position.push_back(std::hypot(est[i].x - gt[i].x, est[i].y - gt[i].y));
    s.heading.push_back(std::abs(wrap_angle(est[i].theta - gt[i].theta)));
  }
  return s;
}

PoseErrorStats m_ate(std::span<const Pose2D> est, std::span<const Pose2D> gt) {
  require_same_length(est, gt);
  if (est.empty()) throw Error(ErrorCode::empty_input, "m-ATE needs at least one pose");
  const ErrorSeries s = error_series(est, gt);
  return {mean_std(s.position), mean_std(s.heading)};
}

SegmentErrors segment_errors(std::span<const Pose2D> est, std::span<const Pose2D> gt,
                             double segment_length, std::size_t stride) {
  require_same_length(est, gt);
  if (stride == 0) throw Error(ErrorCode::invalid_value, "segment stride must be >= 1");
  if (!(segment_length > 0.0)) throw Error(ErrorCode::invalid_value, "segment length must be > 0");

  // Cumulative ground-truth arc length.
  std::vector<double> arc(gt.size(), 0.0);
  for (std::size_t i = 1; i < gt.size(); ++i) {
    arc[i] = arc[i - 1] + std::hypot(gt[i].x - gt[i - 1].x, gt[i].y - gt[i - 1].y);
  }

  SegmentErrors out;
  std::size_t end = 0;
  for (std::size_t start = 0; start < gt.size(); start += stride) {
    end = std::max(end, start);
    while (end < gt.size() && !(arc[end] - arc[start] > segment_length)) ++end;
    if (end >= gt.size()) break;  // every later start is shorter still
    const Pose2D anchored = se2::boxplus(gt[start], se2::relative_between(est[start], est[end]));
    out.position.push_back(std::hypot(anchored.x - gt[end].x, anchored.y - gt[end].y));
    out.heading.push_back(std::abs(wrap_angle(anchored.theta - gt[end].theta)));
  }
  if (out.position.empty()) {
    throw Error(ErrorCode::trajectory_too_short,
                "ground-truth arc length is below the segment length " + std::to_string(segment_length));
  }
  return out;
}

PoseErrorStats segment_error(std::span<const Pose2D> est, std::span<const Pose2D> gt,
                             double segment_length, std::size_t stride) {
  const SegmentErrors s = segment_errors(est, gt, segment_length, stride);
  return {mean_std(s.position), mean_std(s.heading)};
}

Histogram histogram(std::span<const double> values, std::size_t bin_count) {
  if (values.empty()) throw Error(ErrorCode::empty_input, "histogram of no values");
  if (bin_count == 0) throw Error(ErrorCode::invalid_value, "bin count must be >= 1");
  const double max = *std::max_element(values.begin(), values.end());
  Histogram h;
  h.counts.assign(bin_count, 0);
  h.edges.resize(bin_count + 1);
  const double width = max / static_cast<double>(bin_count);
  for (std::size_t i = 0; i <= bin_count; ++i) h.edges[i] = width * static_cast<double>(i);
  h.edges.back() = max;
  for (double v : values) {
    std::size_t bin = 0;
    if (width > 0.0) {
      bin = std::min(bin_count - 1, static_cast<std::size_t>(std::max(0.0, v) / width));
    }
    ++h.counts[bin];
  }
  return h;
}

namespace {

void summarize(MetricReport& r, const MetricConfig& cfg) {
  r.m_ate_xy = mean_std(r.series.position);
  r.m_ate_theta = mean_std(r.series.heading);
  r.se_xy = mean_std(r.segments.position);
  r.se_theta = mean_std(r.segments.heading);
  if (!r.segments.position.empty()) {
    r.se_xy_hist = histogram(r.segments.position, cfg.histogram_bins);
    r.se_theta_hist = histogram(r.segments.heading, cfg.histogram_bins);
  }
}

}  // namespace

MetricReport evaluate(std::span<const Pose2D> est, std::span<const Pose2D> gt,
                      const MetricConfig& cfg) {
  MetricReport r;
  r.series = error_series(est, gt);
  if (r.series.position.empty()) throw Error(ErrorCode::empty_input, "empty trajectory");
  r.segments = segment_errors(est, gt, cfg.segment_length, cfg.segment_stride);
  summarize(r, cfg);
  return r;
}

MetricReport pool(std::span<const MetricReport> reports, const MetricConfig& cfg) {
  MetricReport r;
  for (const MetricReport& part : reports) {
    auto append = [](std::vector<double>& dst, const std::vector<double>& src) {
      dst.insert(dst.end(), src.begin(), src.end());
    };
    append(r.series.position, part.series.position);
    append(r.series.heading, part.series.heading);
    append(r.segments.position, part.segments.position);
    append(r.segments.heading, part.segments.heading);
  }
  summarize(r, cfg);
  return r;
}

}  // namespace wio::metrics
