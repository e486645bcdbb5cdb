#include "wio/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "wio/log_io.hpp"
#include "wio/se2.hpp"

namespace wio::io {

LogSummary summarize(const TrajectoryLog& log, fs::path path) {
  LogSummary s{std::move(path), log.meta.kind, log.duration(), log.size(), 0.0};
  Pose2D prev{};
  for (const Pose2D& p : log.gt_poses) {
    s.path_length += std::hypot(p.x - prev.x, p.y - prev.y);
    prev = p;
  }
  return s;
}

std::vector<fs::path> list_logs(const fs::path& dir, std::string_view prefix) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with(prefix) && name.ends_with(".csv")) out.push_back(entry.path());
  }
  if (ec) throw Error(ErrorCode::io_failure, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LogSummary> cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const fs::path dir = fs::path(cfg.output_dir) / "logs";
  const sim::NoiseModel noise = cfg.seeded_noise();
  std::vector<LogSummary> summaries;

  auto emit = [&](const sim::ScenarioScript& script, const std::string& name) {
    const TrajectoryLog log = sim::generate(script, cfg.robot, noise);
    const fs::path path = dir / name;
    write_log(path, log);
    summaries.push_back(summarize(log, path));
    const auto& s = summaries.back();
    fmt::print(out, "{}: scenario {} duration {:.1f} s, {} samples, gt path {:.2f} m\n", path.string(),
               to_string(s.kind), s.duration, s.samples, s.path_length);
  };

  const auto train = cfg.train_scripts();
  for (std::size_t i = 0; i < train.size(); ++i) emit(train[i], fmt::format("train_{:03}.csv", i));
  const auto test = cfg.test_scripts();
  std::array<std::size_t, 4> per_kind{};
  for (const auto& script : test) {
    const auto k = static_cast<std::size_t>(script.kind);
    emit(script, fmt::format("test_{}_{:03}.csv", to_string(script.kind), per_kind[k]++));
  }
  return summaries;
}

std::string_view to_string(TrainMode mode) noexcept { return mode == TrainMode::batch ? "batch" : "online"; }

TrainMode parse_train_mode(std::string_view text) {
  if (text == "online") return TrainMode::online;
  if (text == "batch") return TrainMode::batch;
  throw Error(ErrorCode::invalid_value, "mode must be online or batch, got '" + std::string(text) + "'");
}

namespace {

std::vector<fs::path> resolve_logs(std::span<const fs::path> logs, const RunConfig& cfg, std::string_view prefix) {
  std::vector<fs::path> out(logs.begin(), logs.end());
  if (out.empty()) out = list_logs(fs::path(cfg.output_dir) / "logs", prefix);
  if (out.empty()) {
    throw Error(ErrorCode::empty_input, "no logs given and none found under " + cfg.output_dir + "/logs");
  }
  return out;
}

fs::path sibling(const fs::path& path, std::string_view suffix) {
  return path.parent_path() / (path.stem().string() + std::string(suffix));
}

}  // namespace

TrainSummary cmd_train(const RunConfig& cfg, TrainMode mode, net::Variant variant, std::span<const fs::path> logs,
                       const fs::path& checkpoint, std::ostream& out) {
  cfg.validate();
  const auto paths = resolve_logs(logs, cfg, "train_");
  const net::ModelSpec& spec = cfg.spec_for(variant);
  const train::TrainConfig tc = cfg.seeded_train();
  net::Model model = net::build<float>(spec, cfg.seed);

  TrainSummary summary;
  summary.checkpoint = checkpoint;
  summary.loss_trace = sibling(checkpoint, "_loss.csv");
  std::string trace = "step,loss\n";
  Normalizer norm;

  if (mode == TrainMode::online) {
    train::OnlineTrainer<float> trainer(model, tc);
    for (const auto& path : paths) {
      const TrajectoryLog log = read_log(path);
      for (const auto& sample : train::make_labels(log, spec.window)) trainer.push(sample);
    }
    const auto& losses = trainer.losses();
    for (std::size_t i = 0; i < losses.size(); ++i) trace += fmt::format("{},{:.9g}\n", i + 1, losses[i]);
    summary.updates = trainer.updates();
    if (!losses.empty()) {
      summary.initial_loss = losses.front();
      summary.final_loss = losses.back();
    }
    norm = trainer.normalizer();
    fmt::print(out, "online: {} logs, {} updates, {} samples left in the last partial batch\n", paths.size(),
               summary.updates, trainer.pending());
  } else {
    std::vector<TrajectoryLog> loaded;
    for (const auto& path : paths) loaded.push_back(read_log(path));
    const auto samples = pipeline::make_samples(loaded, spec.window);
    const auto result = train::train_batch(model, std::span<const train::Sample>(samples), tc);
    for (std::size_t i = 0; i < result.step_losses.size(); ++i) {
      trace += fmt::format("{},{:.9g}\n", i + 1, result.step_losses[i]);
    }
    std::string epochs = "epoch,train_mae,validation_mae\n";
    for (const auto& e : result.curve) epochs += fmt::format("{},{:.9g},{:.9g}\n", e.epoch, e.train_mae, e.validation_mae);
    write_file(sibling(checkpoint, "_epochs.csv"), epochs);
    summary.updates = result.updates;
    summary.initial_loss = result.initial_validation_mae;
    summary.final_loss = result.best_epoch > 0 && result.best_epoch <= result.curve.size()
                             ? result.curve[result.best_epoch - 1].validation_mae
                             : result.initial_validation_mae;
    norm = result.normalizer;
    fmt::print(out, "batch: {} samples, {} epochs run, best epoch {}, {} updates\n", samples.size(),
               result.curve.size(), result.best_epoch, result.updates);
  }
  write_file(summary.loss_trace, trace);
  save_checkpoint(checkpoint, model, norm);
  fmt::print(out, "{} {}: loss {:.6g} -> {:.6g}; checkpoint {}\n", to_string(mode), net::to_string(variant),
             summary.initial_loss, summary.final_loss, checkpoint.string());
  return summary;
}

namespace {

std::string mean_std(const metrics::MeanStd& m) { return fmt::format("{:.3f} ± {:.3f}", m.mean, m.std); }

void write_plot_csvs(const pipeline::Evaluation& ev, std::span<const TrajectoryLog> logs,
                     std::span<const fs::path> paths, const fs::path& out_dir) {
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& log = logs[i];
    const std::string stem = paths[i].stem().string();
    std::string traj = "index,stamp,gt_x,gt_y,gt_theta";
    std::string err = "index,stamp";
    for (const auto& m : ev.methods) {
      traj += fmt::format(",{0}_x,{0}_y,{0}_theta", m.name);
      err += fmt::format(",{0}_position,{0}_heading", m.name);
    }
    traj += "\n";
    err += "\n";
    for (std::size_t n = ev.start; n < log.size(); ++n) {
      const std::size_t k = n - ev.start;
      const Pose2D& g = log.gt_poses[n];
      const double stamp = log.measurements[n].stamp;
      traj += fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g}", n, stamp, g.x, g.y, g.theta);
      err += fmt::format("{},{:.9g}", n, stamp);
      for (const auto& m : ev.methods) {
        const auto& t = m.trajectories[i];
        const Pose2D& e = t.estimate[k];
        traj += fmt::format(",{:.9g},{:.9g},{:.9g}", e.x, e.y, e.theta);
        err += fmt::format(",{:.9g},{:.9g}", t.report.series.position[k], t.report.series.heading[k]);
      }
      traj += "\n";
      err += "\n";
    }
    write_file(out_dir / "trajectories" / (stem + ".csv"), traj);
    write_file(out_dir / "errors" / (stem + ".csv"), err);
  }

  std::string hist = "method,group,quantity,bin_low,bin_high,count\n";
  for (const auto& row : ev.rows) {
    auto emit = [&](const metrics::Histogram& h, const char* quantity) {
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        hist += fmt::format("{},{},{},{:.9g},{:.9g},{}\n", row.method, row.group, quantity, h.edges[b], h.edges[b + 1],
                            h.counts[b]);
      }
    };
    emit(row.report.se_xy_hist, "se_xy");
    emit(row.report.se_theta_hist, "se_theta");
  }
  write_file(out_dir / "histograms.csv", hist);
}

}  // namespace

std::string format_table(const pipeline::Evaluation& ev) {
  std::string out = fmt::format("{:<8} {:<16} {:>17} {:>17} {:>17} {:>17}\n", "Test", "Method", "m-ATE_xy [m]",
                                "m-ATE_theta [rad]", "SE_xy [m]", "SE_theta [rad]");
  std::string last_group;
  std::vector<std::string> groups;
  for (const auto& r : ev.rows) {
    if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) groups.push_back(r.group);
  }
  for (const auto& group : groups) {
    for (const auto& r : ev.rows) {
      if (r.group != group) continue;
      out += fmt::format("{:<8} {:<16} {:>17} {:>17} {:>17} {:>17}\n", group, r.method, mean_std(r.report.m_ate_xy),
                         mean_std(r.report.m_ate_theta), mean_std(r.report.se_xy), mean_std(r.report.se_theta));
    }
  }
  return out;
}

std::string results_csv(const pipeline::Evaluation& ev) {
  std::string out =
      "group,method,m_ate_xy_mean,m_ate_xy_std,m_ate_theta_mean,m_ate_theta_std,se_xy_mean,se_xy_std,"
      "se_theta_mean,se_theta_std\n";
  for (const auto& r : ev.rows) {
    const auto& p = r.report;
    out += fmt::format("{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", r.group, r.method,
                       p.m_ate_xy.mean, p.m_ate_xy.std, p.m_ate_theta.mean, p.m_ate_theta.std, p.se_xy.mean,
                       p.se_xy.std, p.se_theta.mean, p.se_theta.std);
  }
  return out;
}

pipeline::Evaluation cmd_evaluate(const RunConfig& cfg, const EvaluateInputs& inputs, const fs::path& out_dir,
                                  std::ostream& out) {
  cfg.validate();
  const auto paths = resolve_logs(inputs.logs, cfg, "test_");
  std::vector<TrajectoryLog> logs;
  for (const auto& p : paths) logs.push_back(read_log(p));

  // Checkpoints are kept alive here; the estimators refer to them.
  std::vector<std::pair<std::string, Checkpoint>> models;
  auto load = [&](const std::optional<fs::path>& path, const char* name, const net::ModelSpec& spec) {
    if (!path) return;
    Checkpoint ckpt = load_checkpoint(*path);
    require_spec(ckpt, spec, name);
    models.emplace_back(name, std::move(ckpt));
  };
  load(inputs.online, "Online", cfg.model);
  load(inputs.batch, "Batch", cfg.model);
  load(inputs.ffnn, "FFNN", cfg.ffnn);

  std::vector<pipeline::Estimator> methods{pipeline::ekf_estimator(cfg.robot, cfg.ekf)};
  for (const auto& [name, ckpt] : models) {
    methods.push_back(pipeline::network_estimator(name, ckpt.model, ckpt.normalizer));
  }
  methods.push_back(pipeline::dead_reckoning_estimator(cfg.robot));

  const std::size_t start = cfg.model.window - 1;
  auto ev = pipeline::evaluate(logs, methods, start, cfg.metrics);

  const std::string table = format_table(ev);
  write_file(out_dir / "results.csv", results_csv(ev));
  write_file(out_dir / "results.txt", table);
  write_plot_csvs(ev, logs, paths, out_dir);
  fmt::print(out, "{} test logs, metrics from sample {}\n{}", logs.size(), start, table);
  return ev;
}

BenchStats bench_model(const net::Model& model, const Normalizer& norm, std::size_t iterations,
                       std::size_t batch_size) {
  if (iterations == 0) throw Error(ErrorCode::invalid_value, "iterations must be >= 1");
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  const std::size_t T = model.spec.window;
  const std::size_t needed = std::max(iterations, batch_size) + T + 1;
  sim::ScenarioScript script{ScenarioKind::C, 0.0, kDefaultSampleRate, 0};
  script.duration = static_cast<double>(needed) / script.sample_rate;
  const TrajectoryLog log = sim::generate(script, sim::RobotParams{}, sim::NoiseModel{});
  const auto samples = train::make_labels(log, T);

  BenchStats stats;
  stats.iterations = iterations;
  stats.batch_size = batch_size;
  stats.first_output = net::forward(model, samples.front().window, norm);

  constexpr std::size_t kWarmup = 5;
  for (std::size_t i = 0; i < kWarmup; ++i) net::forward(model, samples[i].window, norm);
  std::vector<double> times;
  times.reserve(iterations);
  for (std::size_t i = 0; i < iterations; ++i) {
    const auto t0 = clock::now();
    net::forward(model, samples[i % samples.size()].window, norm);
    times.push_back(ms_since(t0));
  }
  double total = 0.0;
  for (double t : times) total += t;
  stats.inference_mean_ms = total / static_cast<double>(times.size());
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  stats.inference_median_ms = n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
  stats.inference_p99_ms = times[std::min(n - 1, static_cast<std::size_t>(std::ceil(0.99 * n)) - 1)];

  net::Model scratch = model;
  auto adam = train::AdamState<float>::for_parameters(scratch.params, 1e-4);
  std::mt19937_64 rng(0);
  std::vector<const train::Sample*> batch;
  for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(&samples[i % samples.size()]);
  scratch.training = true;
  train::train_step(scratch, adam, batch, norm, rng);
  double train_total = 0.0;
  for (std::size_t i = 0; i < iterations; ++i) {
    const auto t0 = clock::now();
    train::train_step(scratch, adam, batch, norm, rng);
    train_total += ms_since(t0);
  }
  stats.train_step_mean_ms = train_total / static_cast<double>(iterations);
  return stats;
}

BenchStats cmd_bench(const fs::path& checkpoint, std::size_t iterations, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const BenchStats s = bench_model(ckpt.model, ckpt.normalizer, iterations);
  fmt::print(out,
             "{} ({} parameters), {} iterations\n"
             "inference (1 window): mean {:.3f} ms, median {:.3f} ms, p99 {:.3f} ms\n"
             "training step (B={}): mean {:.3f} ms\n",
             net::to_string(ckpt.model.spec.variant), ckpt.model.scalar_count(), s.iterations, s.inference_mean_ms,
             s.inference_median_ms, s.inference_p99_ms, s.batch_size, s.train_step_mean_ms);
  return s;
}

}  // namespace wio::io
