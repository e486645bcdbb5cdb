#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wio/core_types.hpp"
#include "wio/ekf.hpp"
#include "wio/metrics.hpp"
#include "wio/network.hpp"
#include "wio/normalizer.hpp"
#include "wio/simulator.hpp"
#include "wio/training.hpp"

namespace wio::pipeline {

std::vector<TrajectoryLog> simulate_all(std::span<const sim::ScenarioScript> scripts, const sim::RobotParams& robot,
                                        const sim::NoiseModel& noise);

/// Labelled samples of every log, concatenated in log order.
std::vector<train::Sample> make_samples(std::span<const TrajectoryLog> logs, std::size_t window);

/// Network odometry for one log: starts at gt[T-1] and accumulates one
/// predicted increment per sample n >= T. Returns N - T + 1 poses aligned with
/// gt[T-1..N).
template <typename S>
std::vector<Pose2D> network_trajectory(const net::ModelState<S>& model, const TrajectoryLog& log,
                                       const Normalizer& norm);

/// An odometry method producing poses aligned with gt[start..N) of a log.
struct Estimator {
  std::string name;
  std::function<std::vector<Pose2D>(const TrajectoryLog&, std::size_t start)> run;
};

/// EKF and encoder dead-reckoning, restricted to indices >= start.
Estimator ekf_estimator(const sim::RobotParams& robot, const ekf::Tuning& tuning);
Estimator dead_reckoning_estimator(const sim::RobotParams& robot);
Estimator network_estimator(std::string name, const net::Model& model, const Normalizer& norm);

struct TrajectoryResult {
  std::size_t log_index = 0;
  std::vector<Pose2D> estimate;
  metrics::MetricReport report;
};

struct MethodResult {
  std::string name;
  std::vector<TrajectoryResult> trajectories;
};

struct Row {
  std::string method;
  std::string group;  // "A", "B", "C" or "Overall"
  metrics::MetricReport report;
};

struct Evaluation {
  std::size_t start = 0;
  std::vector<MethodResult> methods;
  std::vector<Row> rows;  // method-major, groups in A, B, C, Overall order

  const Row& row(std::string_view method, std::string_view group) const;
};

/// Runs every estimator on every log from index `start` and pools the reports
/// per scenario kind and overall. Groups without logs are omitted.
Evaluation evaluate(std::span<const TrajectoryLog> logs, std::span<const Estimator> methods, std::size_t start,
                    const metrics::MetricConfig& cfg);

}  // namespace wio::pipeline
