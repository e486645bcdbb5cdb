#include "wio/se2.hpp"

#include <cmath>

namespace wio::se2 {

Transform2D Transform2D::operator*(const Transform2D& rhs) const noexcept {
  const double c = std::cos(angle_);
  const double s = std::sin(angle_);
  return {wrap_angle(angle_ + rhs.angle_), tx_ + c * rhs.tx_ - s * rhs.ty_,
          ty_ + s * rhs.tx_ + c * rhs.ty_};
}

Transform2D Transform2D::inverse() const noexcept {
  const double c = std::cos(angle_);
  const double s = std::sin(angle_);
  return {wrap_angle(-angle_), -(c * tx_ + s * ty_), s * tx_ - c * ty_};
}

Eigen::Vector2d Transform2D::apply(const Eigen::Vector2d& p) const noexcept {
  const double c = std::cos(angle_);
  const double s = std::sin(angle_);
  return {tx_ + c * p.x() - s * p.y(), ty_ + s * p.x() + c * p.y()};
}

Eigen::Matrix3d Transform2D::matrix() const noexcept {
  const double c = std::cos(angle_);
  const double s = std::sin(angle_);
  Eigen::Matrix3d m;
  m << c, -s, tx_, s, c, ty_, 0.0, 0.0, 1.0;
  return m;
}

Transform2D from_pose(const Pose2D& p) noexcept { return {p.theta, p.x, p.y}; }

Pose2D to_pose(const Transform2D& t) noexcept { return {t.tx(), t.ty(), wrap_angle(t.angle())}; }

Transform2D from_relative(const RelativePose& d) noexcept { return {d.dtheta, d.dx, d.dy}; }

Pose2D boxplus(const Pose2D& prev, const RelativePose& delta) noexcept {
  const double c = std::cos(prev.theta);
  const double s = std::sin(prev.theta);
  return {prev.x + c * delta.dx - s * delta.dy, prev.y + s * delta.dx + c * delta.dy,
          wrap_angle(prev.theta + delta.dtheta)};
}

RelativePose relative_between(const Pose2D& a, const Pose2D& b) noexcept {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  const double ex = b.x - a.x;
  const double ey = b.y - a.y;
  return {c * ex + s * ey, -s * ex + c * ey, wrap_angle(b.theta - a.theta)};
}

std::vector<Pose2D> accumulate(const Pose2D& start, std::span<const RelativePose> deltas) {
  std::vector<Pose2D> out;
  out.reserve(deltas.size());
  Pose2D current = start;
  for (const auto& d : deltas) {
    current = boxplus(current, d);
    out.push_back(current);
  }
  return out;
}

RelativePose unicycle_increment(double v, double w, double dt) noexcept {
  const double phi = w * dt;
  // sin(phi)/w and (1-cos(phi))/w lose precision near w = 0; use the series there.
  double a;
  double b;
  if (std::abs(phi) < 1e-4) {
    const double phi2 = phi * phi;
    a = dt * (1.0 - phi2 / 6.0);
    b = dt * phi * (0.5 - phi2 / 24.0);
  } else {
    a = std::sin(phi) / w;
    b = (1.0 - std::cos(phi)) / w;
  }
  return {v * a, v * b, phi};
}

}  // namespace wio::se2
