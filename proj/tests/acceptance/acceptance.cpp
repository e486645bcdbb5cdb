// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: wio_acceptance [output_dir]

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "support/metric_oracles.hpp"
#include "support/test_support.hpp"
#include "wio/commands.hpp"
#include "wio/log_io.hpp"
#include "wio/metrics.hpp"
#include "wio/se2.hpp"
#include "wio/simulator.hpp"
#include "wio/training.hpp"

using namespace wio;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  fmt::print("{} {:<22} {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
  std::fflush(stdout);
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  constexpr std::size_t kDraws = 100;
  double worst = 0.0, worst_smooth = 0.0;
  std::size_t checked = 0, kinks = 0;
  for (std::uint64_t d = 0; d < kDraws; ++d) {
    const auto draw = testing::gradient_draw(net::ModelSpec{}, d);
    const auto r = testing::network_gradient_check(draw.model, draw.input, draw.target, d, 1e-3, 8, d);
    worst = std::max(worst, r.vector_relative_error);
    worst_smooth = std::max(worst_smooth, r.max_relative_error);
    checked += r.checked;
    kinks += r.kinks;
  }
  const double elapsed = seconds_since(t0);
  return {worst < 1e-2 && worst_smooth < 1e-2 && elapsed < 60.0,
          fmt::format("64-bit default network, eps 1e-3, {} draws x {} entries: worst gradient relative error "
                      "{:.2e} (< 1e-2); per entry {:.2e} on the {} entries whose step flips no ReLU; {:.1f} s "
                      "(< 60 s)",
                      kDraws, (checked + kinks) / kDraws, worst, worst_smooth, checked, elapsed)};
}

Outcome default_shapes() {
  const std::vector<ad::Shape> expected{{10, 8, 64}, {5, 8, 64}, {3, 8, 64}, {1536}, {3}};
  const auto trace = net::shape_trace(net::ModelSpec{});
  const auto model = net::build<float>(net::ModelSpec{}, 0);
  bool rejects_bad_window = false;
  try {
    ad::Tape<float> tape;
    std::mt19937_64 rng(0);
    net::forward_graph(tape, model, tape.constant(ad::Tensor({1, 9, 8, 1})), false, rng);
  } catch (const Error& e) {
    rejects_bad_window = e.code() == ErrorCode::shape_mismatch;
  }
  std::string shown;
  for (const auto& s : trace) shown += (shown.empty() ? "" : " -> ") + ad::shape_to_string(s);
  return {trace == expected && model.param("head/weight").shape() == ad::Shape{1536, 3} &&
              model.scalar_count() == net::kDefaultParameterCount && rejects_bad_window,
          fmt::format("{}; {} parameters; mismatched input rejected: {}; compile-time shape asserts built", shown,
                      model.scalar_count(), rejects_bad_window ? "yes" : "no")};
}

Outcome se2_properties() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> pos(-50.0, 50.0), ang(-kPi, kPi);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Pose2D a{pos(rng), pos(rng), ang(rng)}, b{pos(rng), pos(rng), ang(rng)};
    const Pose2D back = se2::boxplus(a, se2::relative_between(a, b));
    worst = std::max({worst, std::abs(back.x - b.x), std::abs(back.y - b.y), std::abs(wrap_angle(back.theta - b.theta))});
    const RelativePose d{pos(rng) / 50.0, pos(rng) / 50.0, ang(rng)};
    const RelativePose again = se2::relative_between(a, se2::boxplus(a, d));
    worst = std::max({worst, std::abs(again.dx - d.dx), std::abs(again.dy - d.dy),
                      std::abs(wrap_angle(again.dtheta - d.dtheta))});
  }

  const sim::RobotParams robot;
  double drift_per_1000 = 0.0;
  for (ScenarioKind kind : {ScenarioKind::A, ScenarioKind::B, ScenarioKind::C, ScenarioKind::Random}) {
    const auto log = sim::generate({kind, 120.0, kDefaultSampleRate, 3}, robot, sim::NoiseModel::none());
    std::vector<RelativePose> deltas;
    for (const auto& m : log.measurements) {
      deltas.push_back(se2::unicycle_increment(0.5 * (m.v_l + m.v_r), (m.v_r - m.v_l) / robot.track_width,
                                               log.meta.dt()));
    }
    const auto est = se2::accumulate({}, deltas);
    double worst_drift = 0.0;
    for (std::size_t i = 0; i < log.size(); ++i) {
      worst_drift = std::max(worst_drift, std::hypot(est[i].x - log.gt_poses[i].x, est[i].y - log.gt_poses[i].y));
    }
    drift_per_1000 = std::max(drift_per_1000, worst_drift * 1000.0 / static_cast<double>(log.size()));
  }
  return {worst < 1e-12 && drift_per_1000 < 1e-9,
          fmt::format("boxplus/relative_between inverse over 1e4 pairs: {:.1e} (< 1e-12); noiseless drift "
                      "{:.1e} m per 1000 samples (< 1e-9)",
                      worst, drift_per_1000)};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto gt = testing::random_walk(100, rng);
    const auto est = testing::perturb(gt, rng);
    const auto ate = metrics::m_ate(est, gt);
    const auto ao = testing::ate_oracle(est, gt);
    worst = std::max({worst, std::abs(ate.position.mean - testing::mean(ao.pos)),
                      std::abs(ate.position.std - testing::pop_std(ao.pos)),
                      std::abs(ate.heading.mean - testing::mean(ao.head)),
                      std::abs(ate.heading.std - testing::pop_std(ao.head))});
    const auto seg = metrics::segment_errors(est, gt, 1.0, 1);
    const auto so = testing::segment_oracle(est, gt, 1.0, 1);
    if (seg.position.size() != so.pos.size()) return {false, "segment count differs from the oracle"};
    for (std::size_t k = 0; k < so.pos.size(); ++k) {
      worst = std::max({worst, std::abs(seg.position[k] - so.pos[k]), std::abs(seg.heading[k] - so.head[k])});
    }
  }

  // Constant 0.1 m offset: m-ATE 0.1, no segment error.
  const auto gt = testing::random_walk(100, rng);
  auto shifted = gt;
  for (auto& p : shifted) p.x += 0.1;
  const double offset_err = std::max(std::abs(metrics::m_ate(shifted, gt).position.mean - 0.1),
                                     metrics::segment_error(shifted, gt, 1.0, 1).position.mean);

  // Heading bias eps on a straight line: end error 2 d sin(eps / 2) over each segment of length d.
  std::vector<Pose2D> line, biased;
  const double eps = 0.01;
  for (int i = 0; i < 171; ++i) {
    line.push_back({0.06 * i, 0.0, 0.0});
    biased.push_back({0.06 * i, 0.0, eps});
  }
  const auto seg = metrics::segment_errors(biased, line, 1.0, 1);
  double bias_err = 0.0;
  for (std::size_t k = 0; k < seg.position.size(); ++k) {
    const double d = line[k + 17].x - line[k].x;
    bias_err = std::max(bias_err, std::abs(seg.position[k] - 2.0 * d * std::sin(eps / 2.0)));
  }
  return {worst < 1e-9 && offset_err < 1e-6 && bias_err < 1e-6,
          fmt::format("brute-force oracle gap {:.1e} over 100 trajectories (< 1e-9); constant offset {:.1e}, "
                      "heading bias {:.1e} (< 1e-6)",
                      worst, offset_err, bias_err)};
}

std::vector<train::Sample> stream_of(std::size_t n, std::uint64_t seed, const sim::NoiseModel& noise) {
  const double seconds = static_cast<double>(n + kDefaultWindow + 1) / kDefaultSampleRate;
  const auto log = sim::generate({ScenarioKind::Random, seconds, kDefaultSampleRate, seed}, sim::RobotParams{}, noise);
  auto s = train::make_labels(log, kDefaultWindow);
  s.resize(n);
  return s;
}

Outcome online_trainer() {
  const auto stream = stream_of(1000, 3, sim::NoiseModel{});
  std::string counts;
  bool counts_ok = true;
  for (std::size_t n : {0u, 31u, 32u, 33u, 96u, 500u, 1000u}) {
    auto model = net::build<float>(net::ModelSpec{}, 1);
    const auto r = train::train_online(model, std::span(stream).first(n), train::TrainConfig{});
    counts_ok = counts_ok && r.updates == n / 32 && r.batch_losses.size() == n / 32;
    counts += fmt::format("{}{}->{}", counts.empty() ? "" : " ", n, r.updates);
  }

  const auto batch = std::span(stream).first(32);
  std::vector<Measurement> raw;
  for (const auto& s : batch) raw.push_back(s.window.newest());
  const Normalizer norm = Normalizer::fit(raw);
  train::TrainConfig cfg;
  cfg.seed = 11;
  cfg.validation_fraction = 0.0;
  cfg.epochs = 1;
  cfg.shuffle = false;
  cfg.lr_online = cfg.lr_batch;
  auto a = net::build<float>(net::ModelSpec{}, 5);
  auto b = a;
  const auto br = train::train_batch(a, batch, cfg, norm);
  const auto orr = train::train_online(b, batch, cfg, norm);
  const bool identical = a.params == b.params && br.step_losses == orr.batch_losses && br.updates == 1;
  return {counts_ok && identical, fmt::format("updates per stream length: {}; single-batch online vs batch "
                                              "parameters bit-identical: {}",
                                              counts, identical ? "yes" : "no")};
}

Outcome high_noise() {
  const auto stream = stream_of(10000, 77, sim::NoiseModel{}.amplified(10.0));
  auto model = net::build<float>(net::ModelSpec{}, 2);
  const auto r = train::train_online(model, std::span(stream), train::TrainConfig{});
  bool losses_finite = true;
  for (double l : r.batch_losses) losses_finite = losses_finite && std::isfinite(l);
  return {model.all_finite() && losses_finite,
          fmt::format("10x noise, {} samples, {} updates: parameters finite: {}, losses finite: {}", stream.size(),
                      r.updates, model.all_finite() ? "yes" : "no", losses_finite ? "yes" : "no")};
}

struct Benchmark {
  pipeline::Evaluation ev;
  double seconds = 0.0;
  std::size_t test_logs = 0;
  double shortest = 0.0;
  bool kinds_covered = false;
  bool reproducible = false;
  fs::path online;
};

Benchmark run_benchmark(const fs::path& dir) {
  Benchmark b;
  io::RunConfig cfg = io::default_config();
  cfg.output_dir = dir.string();
  fs::remove_all(dir);

  const auto t0 = Clock::now();
  std::ostringstream sink;
  const auto logs = io::cmd_simulate(cfg, sink);
  fmt::print("  simulated {} logs ({:.0f} s)\n", logs.size(), seconds_since(t0));
  std::fflush(stdout);
  b.online = dir / "checkpoints" / "online.ckpt";
  const auto on = io::cmd_train(cfg, io::TrainMode::online, net::Variant::remnet2d, {}, b.online, sink);
  fmt::print("  online: {} updates ({:.0f} s)\n", on.updates, seconds_since(t0));
  std::fflush(stdout);
  const auto ba = io::cmd_train(cfg, io::TrainMode::batch, net::Variant::remnet2d, {}, dir / "checkpoints" / "batch.ckpt",
                                sink);
  fmt::print("  batch: {} updates ({:.0f} s)\n", ba.updates, seconds_since(t0));
  std::fflush(stdout);
  const auto ff = io::cmd_train(cfg, io::TrainMode::batch, net::Variant::ffnn, {}, dir / "checkpoints" / "ffnn.ckpt",
                                sink);
  fmt::print("  ffnn: {} updates ({:.0f} s)\n", ff.updates, seconds_since(t0));
  std::fflush(stdout);
  io::EvaluateInputs in;
  in.online = b.online;
  in.batch = dir / "checkpoints" / "batch.ckpt";
  in.ffnn = dir / "checkpoints" / "ffnn.ckpt";
  std::ostringstream table;
  b.ev = io::cmd_evaluate(cfg, in, dir / "results", table);
  b.seconds = seconds_since(t0);
  std::cout << table.str();

  const auto test_paths = io::list_logs(dir / "logs", "test_");
  b.test_logs = test_paths.size();
  b.shortest = 1e300;
  bool a = false, bb = false, c = false;
  for (const auto& p : test_paths) {
    const auto log = io::read_log(p);
    b.shortest = std::min(b.shortest, static_cast<double>(log.size()) * log.meta.dt());
    a = a || log.meta.kind == ScenarioKind::A;
    bb = bb || log.meta.kind == ScenarioKind::B;
    c = c || log.meta.kind == ScenarioKind::C;
  }
  b.kinds_covered = a && bb && c;
  const auto scripts = cfg.test_scripts();
  b.reproducible = !scripts.empty() && !test_paths.empty() &&
                   io::serialize_log(sim::generate(scripts.front(), cfg.robot, cfg.seeded_noise())) ==
                       io::read_file(test_paths.front());
  return b;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "wio_acceptance";

  report("gradient-check", gradient_check);
  report("default-shapes", default_shapes);
  report("se2", se2_properties);
  report("metrics", metric_oracles);
  report("online-trainer", online_trainer);
  report("high-noise-stability", high_noise);

  fmt::print("running the default benchmark in {}\n", dir.string());
  std::fflush(stdout);
  Benchmark b;
  std::string bench_error;
  try {
    b = run_benchmark(dir);
  } catch (const std::exception& e) {
    bench_error = e.what();
  }

  report("benchmark-vs-ekf", [&]() -> Outcome {
    if (!bench_error.empty()) return {false, "benchmark failed: " + bench_error};
    const auto& ekf = b.ev.row("EKF", "Overall").report;
    const auto& online = b.ev.row("Online", "Overall").report;
    const double pos = 1.0 - online.m_ate_xy.mean / ekf.m_ate_xy.mean;
    const double head = 1.0 - online.m_ate_theta.mean / ekf.m_ate_theta.mean;
    const bool setup = b.test_logs >= 10 && b.kinds_covered && b.shortest >= 60.0 && b.reproducible;
    return {setup && pos >= 0.30 && head >= 0.40 && b.seconds < 900.0,
            fmt::format("{} test logs (A/B/C: {}, shortest {:.0f} s, reproducible: {}); online vs EKF m-ATE: "
                        "position {:.3f} vs {:.3f} m ({:.0f}% lower, need 30%), heading {:.3f} vs {:.3f} rad "
                        "({:.0f}% lower, need 40%); runtime {:.1f} min (< 15)",
                        b.test_logs, b.kinds_covered ? "yes" : "no", b.shortest, b.reproducible ? "yes" : "no",
                        online.m_ate_xy.mean, ekf.m_ate_xy.mean, 100.0 * pos, online.m_ate_theta.mean,
                        ekf.m_ate_theta.mean, 100.0 * head, b.seconds / 60.0)};
  });

  report("method-ordering", [&]() -> Outcome {
    if (!bench_error.empty()) return {false, "benchmark failed: " + bench_error};
    const auto& online = b.ev.row("Online", "Overall").report;
    const auto& batch = b.ev.row("Batch", "Overall").report;
    const auto& ffnn = b.ev.row("FFNN", "Overall").report;
    const bool batch_pos = batch.m_ate_xy.mean <= online.m_ate_xy.mean;
    const bool batch_head = batch.m_ate_theta.mean < ffnn.m_ate_theta.mean;
    const bool online_head = online.m_ate_theta.mean < ffnn.m_ate_theta.mean;
    return {batch_pos && batch_head && online_head,
            fmt::format("position m-ATE batch {:.3f} <= online {:.3f}: {}; heading m-ATE batch {:.3f} / online "
                        "{:.3f} < FFNN {:.3f}: {} / {}",
                        batch.m_ate_xy.mean, online.m_ate_xy.mean, batch_pos ? "yes" : "no", batch.m_ate_theta.mean,
                        online.m_ate_theta.mean, ffnn.m_ate_theta.mean, batch_head ? "yes" : "no",
                        online_head ? "yes" : "no")};
  });

  report("runtime", [&]() -> Outcome {
    if (!bench_error.empty()) return {false, "benchmark failed: " + bench_error};
    std::ostringstream sink;
    const auto s = io::cmd_bench(b.online, 100, sink);
    return {s.iterations == 100 && s.inference_mean_ms < 40.0 && s.train_step_mean_ms < 200.0,
            fmt::format("{} iterations: inference mean {:.2f} ms (< 40; target < 10: {}), median {:.2f}, p99 {:.2f}; "
                        "B=32 training step {:.1f} ms (< 200)",
                        s.iterations, s.inference_mean_ms, s.inference_mean_ms < 10.0 ? "met" : "missed",
                        s.inference_median_ms, s.inference_p99_ms, s.train_step_mean_ms)};
  });

  fmt::print("{}\n", failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures));
  return failures == 0 ? 0 : 1;
}
