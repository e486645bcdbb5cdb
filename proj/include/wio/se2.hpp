#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "wio/core_types.hpp"

namespace wio::se2 {

/// Planar rigid transform mapping robot-frame coordinates into the global
/// frame. Rotation is kept as an angle so the rotation block stays orthonormal.
class Transform2D {
 public:
  Transform2D() = default;
  Transform2D(double angle, double tx, double ty) : angle_(angle), tx_(tx), ty_(ty) {}

  static Transform2D identity() { return {}; }

  double angle() const noexcept { return angle_; }
  double tx() const noexcept { return tx_; }
  double ty() const noexcept { return ty_; }

  Transform2D operator*(const Transform2D& rhs) const noexcept;
  Transform2D inverse() const noexcept;
  Eigen::Vector2d apply(const Eigen::Vector2d& p) const noexcept;
  /// Homogeneous 3x3 form; first two columns are the robot axes.
  Eigen::Matrix3d matrix() const noexcept;

 private:
  double angle_ = 0.0;
  double tx_ = 0.0;
  double ty_ = 0.0;
};

Transform2D from_pose(const Pose2D& p) noexcept;
Pose2D to_pose(const Transform2D& t) noexcept;
Transform2D from_relative(const RelativePose& d) noexcept;

/// State update: applies `delta` (expressed in `prev`'s frame) to `prev`.
Pose2D boxplus(const Pose2D& prev, const RelativePose& delta) noexcept;

/// Increment that takes `a` to `b`; boxplus(a, relative_between(a, b)) == b.
RelativePose relative_between(const Pose2D& a, const Pose2D& b) noexcept;

/// output[k] = boxplus(output[k-1], deltas[k]) with output[-1] = start.
std::vector<Pose2D> accumulate(const Pose2D& start, std::span<const RelativePose> deltas);

/// Exact increment of a unicycle holding (v, w) for `dt` seconds.
RelativePose unicycle_increment(double v, double w, double dt) noexcept;

}  // namespace wio::se2
