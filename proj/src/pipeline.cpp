#include "wio/pipeline.hpp"

#include <array>

#include "wio/ekf.hpp"
#include "wio/se2.hpp"

namespace wio::pipeline {

std::vector<TrajectoryLog> simulate_all(std::span<const sim::ScenarioScript> scripts, const sim::RobotParams& robot,
                                        const sim::NoiseModel& noise) {
  std::vector<TrajectoryLog> logs;
  logs.reserve(scripts.size());
  for (const auto& script : scripts) logs.push_back(sim::generate(script, robot, noise));
  return logs;
}

std::vector<train::Sample> make_samples(std::span<const TrajectoryLog> logs, std::size_t window) {
  std::vector<train::Sample> out;
  for (const auto& log : logs) {
    auto samples = train::make_labels(log, window);
    out.insert(out.end(), std::make_move_iterator(samples.begin()), std::make_move_iterator(samples.end()));
  }
  return out;
}

template <typename S>
std::vector<Pose2D> network_trajectory(const net::ModelState<S>& model, const TrajectoryLog& log,
                                       const Normalizer& norm) {
  const std::size_t T = model.spec.window;
  if (log.size() < T) {
    throw Error(ErrorCode::log_too_short, "log shorter than the network window");
  }
  std::vector<MeasurementWindow> windows;
  windows.reserve(log.size() - T);
  const std::span<const Measurement> all(log.measurements);
  for (std::size_t n = T; n < log.size(); ++n) windows.push_back(window_from_stream(all.first(n + 1), T));
  std::vector<const MeasurementWindow*> ptrs;
  ptrs.reserve(windows.size());
  for (const auto& w : windows) ptrs.push_back(&w);

  const auto deltas = net::predict(model, ptrs, norm);
  std::vector<Pose2D> out;
  out.reserve(deltas.size() + 1);
  out.push_back(log.gt_poses[T - 1]);
  const auto accumulated = se2::accumulate(out.front(), deltas);
  out.insert(out.end(), accumulated.begin(), accumulated.end());
  return out;
}

template std::vector<Pose2D> network_trajectory<float>(const net::ModelState<float>&, const TrajectoryLog&,
                                                       const Normalizer&);
template std::vector<Pose2D> network_trajectory<double>(const net::ModelState<double>&, const TrajectoryLog&,
                                                        const Normalizer&);

namespace {

std::vector<Pose2D> tail(std::vector<Pose2D> poses, std::size_t start) {
  if (start > poses.size()) throw Error(ErrorCode::trajectory_too_short, "start index beyond the trajectory");
  poses.erase(poses.begin(), poses.begin() + static_cast<std::ptrdiff_t>(start));
  return poses;
}

}  // namespace

Estimator ekf_estimator(const sim::RobotParams& robot, const ekf::Tuning& tuning) {
  return {"EKF", [robot, tuning](const TrajectoryLog& log, std::size_t start) {
            return tail(ekf::run(log, robot, tuning), start);
          }};
}

Estimator dead_reckoning_estimator(const sim::RobotParams& robot) {
  return {"Dead reckoning", [robot](const TrajectoryLog& log, std::size_t start) {
            return tail(sim::dead_reckon(log, robot), start);
          }};
}

Estimator network_estimator(std::string name, const net::Model& model, const Normalizer& norm) {
  return {std::move(name), [&model, norm](const TrajectoryLog& log, std::size_t start) {
            const std::size_t first = model.spec.window - 1;
            if (start < first) {
              throw Error(ErrorCode::trajectory_too_short, "network odometry starts at index T-1");
            }
            return tail(network_trajectory(model, log, norm), start - first);
          }};
}

const Row& Evaluation::row(std::string_view method, std::string_view group) const {
  for (const auto& r : rows) {
    if (r.method == method && r.group == group) return r;
  }
  throw Error(ErrorCode::invalid_value, "no evaluation row for " + std::string(method) + "/" + std::string(group));
}

Evaluation evaluate(std::span<const TrajectoryLog> logs, std::span<const Estimator> methods, std::size_t start,
                    const metrics::MetricConfig& cfg) {
  if (logs.empty()) throw Error(ErrorCode::empty_input, "no logs to evaluate");
  Evaluation ev;
  ev.start = start;
  for (const auto& method : methods) {
    MethodResult result{method.name, {}};
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const auto& log = logs[i];
      if (log.size() <= start) throw Error(ErrorCode::trajectory_too_short, "log shorter than the start index");
      std::vector<Pose2D> est = method.run(log, start);
      const std::span<const Pose2D> gt = std::span<const Pose2D>(log.gt_poses).subspan(start);
      auto report = metrics::evaluate(est, gt, cfg);
      result.trajectories.push_back({i, std::move(est), std::move(report)});
    }

    constexpr std::array<ScenarioKind, 3> kGroups{ScenarioKind::A, ScenarioKind::B, ScenarioKind::C};
    std::vector<metrics::MetricReport> all;
    for (ScenarioKind kind : kGroups) {
      std::vector<metrics::MetricReport> group;
      for (const auto& t : result.trajectories) {
        if (logs[t.log_index].meta.kind == kind) group.push_back(t.report);
      }
      if (group.empty()) continue;
      all.insert(all.end(), group.begin(), group.end());
      ev.rows.push_back({method.name, std::string(to_string(kind)), metrics::pool(group, cfg)});
    }
    for (const auto& t : result.trajectories) {
      if (logs[t.log_index].meta.kind == ScenarioKind::Random) all.push_back(t.report);
    }
    ev.rows.push_back({method.name, "Overall", metrics::pool(all, cfg)});
    ev.methods.push_back(std::move(result));
  }
  return ev;
}

}  // namespace wio::pipeline
