#include "wio/ekf.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace wio::ekf {

EkfState EkfState::initial(const Pose2D& start, const Tuning& tuning) {
  EkfState s;
  s.mean << start.x, start.y, start.theta, 0.0, 0.0;
  s.covariance.diagonal() << 0.0, 0.0, 0.0, tuning.initial_velocity_var, tuning.initial_velocity_var;
  return s;
}

EkfState predict(const EkfState& state, double dt, const Tuning& tuning) {
  const double theta = state.mean(2);
  const double v = state.mean(3);
  const double w = state.mean(4);
  const double phi = w * dt;

  // Exact arc: body-frame displacement (a*v, b*v) with a, b functions of w.
  double a, b, da, db;
  if (std::abs(phi) < 1e-4) {
    const double phi2 = phi * phi;
    a = dt * (1.0 - phi2 / 6.0);
    b = dt * phi * (0.5 - phi2 / 24.0);
    da = -w * dt * dt * dt / 3.0;
    db = dt * dt * (0.5 - phi2 / 8.0);
  } else {
    a = std::sin(phi) / w;
    b = (1.0 - std::cos(phi)) / w;
    da = (dt * std::cos(phi) * w - std::sin(phi)) / (w * w);
    db = (dt * std::sin(phi) * w - (1.0 - std::cos(phi))) / (w * w);
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta);

  EkfState out = state;
  out.mean(0) += v * (c * a - s * b);
  out.mean(1) += v * (s * a + c * b);
  out.mean(2) = wrap_angle(theta + phi);

  Matrix5 F = Matrix5::Identity();
  F(0, 2) = -v * (s * a + c * b);
  F(1, 2) = v * (c * a - s * b);
  F(0, 3) = c * a - s * b;
  F(1, 3) = s * a + c * b;
  F(0, 4) = v * (c * da - s * db);
  F(1, 4) = v * (s * da + c * db);
  F(2, 4) = dt;

  out.covariance = F * state.covariance * F.transpose();
  out.covariance.diagonal() += tuning.process_noise * dt;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

EkfState update(const EkfState& state, const Measurement& meas, const sim::RobotParams& robot,
                const Tuning& tuning) {
  Vector3 z;
  z << 0.5 * (meas.v_l + meas.v_r), (meas.v_r - meas.v_l) / robot.track_width, meas.gyro_z;

  Eigen::Matrix<double, 3, 5> H = Eigen::Matrix<double, 3, 5>::Zero();
  H(0, 3) = 1.0;
  H(1, 4) = 1.0;
  H(2, 4) = 1.0;

  const Vector3 innovation = z - H * state.mean;
  const Eigen::Matrix3d S = H * state.covariance * H.transpose() +
                            Eigen::Matrix3d(tuning.measurement_noise.asDiagonal());
  const Eigen::Matrix<double, 5, 3> K = state.covariance * H.transpose() * S.inverse();

  EkfState out;
  out.mean = state.mean + K * innovation;
  out.mean(2) = wrap_angle(out.mean(2));
  // Joseph form keeps the covariance positive semi-definite.
  const Matrix5 I_KH = Matrix5::Identity() - K * H;
  out.covariance = I_KH * state.covariance * I_KH.transpose() +
                   K * tuning.measurement_noise.asDiagonal() * K.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

std::vector<Pose2D> run(const TrajectoryLog& log, const sim::RobotParams& robot,
                        const Tuning& tuning) {
  std::vector<Pose2D> out;
  out.reserve(log.size());
  const double dt = log.meta.dt();
  EkfState state = EkfState::initial(Pose2D{}, tuning);
  for (const Measurement& m : log.measurements) {
    state = update(state, m, robot, tuning);
    state = predict(state, dt, tuning);
    out.push_back(state.pose());
  }
  return out;
}

}  // namespace wio::ekf
