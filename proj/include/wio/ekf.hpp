#pragma once

#include <vector>

#include <Eigen/Core>

#include "wio/core_types.hpp"
#include "wio/simulator.hpp"

namespace wio::ekf {

using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix5 = Eigen::Matrix<double, 5, 5>;
using Vector3 = Eigen::Vector3d;

/// Noise densities. Process noise is per second (scaled by dt in predict);
/// measurement noise is the variance of each observation row.
struct Tuning {
  Vector5 process_noise = (Vector5() << 1e-6, 1e-6, 1e-6, 1.0, 1e-2).finished();
  Vector3 measurement_noise = (Vector3() << 1e-2, 1e-1, 1e-2).finished();  // v_enc, w_enc, gyro_z
  double initial_velocity_var = 1e-2;
};

/// Mean (x, y, theta, v, w) and its covariance.
struct EkfState {
  Vector5 mean = Vector5::Zero();
  Matrix5 covariance = Matrix5::Zero();

  Pose2D pose() const { return {mean(0), mean(1), mean(2)}; }
  static EkfState initial(const Pose2D& start, const Tuning& tuning);
};

/// Unicycle propagation of the pose with the current (v, w) over dt.
EkfState predict(const EkfState& state, double dt, const Tuning& tuning);

/// Fuses z = [(v_l+v_r)/2, (v_r-v_l)/track_width, gyro_z].
EkfState update(const EkfState& state, const Measurement& meas, const sim::RobotParams& robot,
                const Tuning& tuning);

/// Update with each sample's readings, then propagate over the sample interval.
std::vector<Pose2D> run(const TrajectoryLog& log, const sim::RobotParams& robot,
                        const Tuning& tuning);

}  // namespace wio::ekf
