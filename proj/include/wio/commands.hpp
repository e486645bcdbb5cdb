#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wio/checkpoint.hpp"
#include "wio/config.hpp"
#include "wio/pipeline.hpp"

namespace wio::io {

namespace fs = std::filesystem;

struct LogSummary {
  fs::path path;
  ScenarioKind kind = ScenarioKind::Random;
  double duration = 0.0;  // [s]
  std::size_t samples = 0;
  double path_length = 0.0;  // ground-truth arc length [m]
};

LogSummary summarize(const TrajectoryLog& log, fs::path path);

/// Writes every training and test log of the config to <output_dir>/logs
/// (train_NNN.csv, test_<kind>_NNN.csv) and prints one summary line per log.
std::vector<LogSummary> cmd_simulate(const RunConfig& cfg, std::ostream& out);

enum class TrainMode { online, batch };

std::string_view to_string(TrainMode mode) noexcept;
TrainMode parse_train_mode(std::string_view text);

struct TrainSummary {
  std::size_t updates = 0;
  double initial_loss = 0.0;  // batch: validation MAE before training; online: first batch loss
  double final_loss = 0.0;    // batch: best validation MAE; online: last batch loss
  fs::path checkpoint;
  fs::path loss_trace;
};

/// Online mode streams the logs in the order given; batch mode pools them and
/// trains with the shuffled 80/20 regime. Writes the checkpoint and a
/// "step,loss" trace next to it (<stem>_loss.csv; batch mode adds
/// <stem>_epochs.csv). With no logs, <output_dir>/logs/train_*.csv are used.
TrainSummary cmd_train(const RunConfig& cfg, TrainMode mode, net::Variant variant, std::span<const fs::path> logs,
                       const fs::path& checkpoint, std::ostream& out);

struct EvaluateInputs {
  std::optional<fs::path> online;
  std::optional<fs::path> batch;
  std::optional<fs::path> ffnn;
  std::vector<fs::path> logs;  // empty: <output_dir>/logs/test_*.csv
};

/// Evaluates EKF, the given checkpoints and dead reckoning on the test logs.
/// Writes results.csv, results.txt, histograms.csv and per-log trajectory and
/// error-vs-time CSVs under `out_dir`, and prints the table.
pipeline::Evaluation cmd_evaluate(const RunConfig& cfg, const EvaluateInputs& inputs, const fs::path& out_dir,
                                  std::ostream& out);

/// Methods x (A, B, C, Overall) table with mean ± std of every metric.
std::string format_table(const pipeline::Evaluation& ev);
std::string results_csv(const pipeline::Evaluation& ev);

struct BenchStats {
  std::size_t iterations = 0;
  double inference_mean_ms = 0.0;
  double inference_median_ms = 0.0;
  double inference_p99_ms = 0.0;
  double train_step_mean_ms = 0.0;
  std::size_t batch_size = 32;
  RelativePose first_output;  // prediction for the first benchmark window
};

/// Times single-window inference and B=32 training steps on windows from a
/// fixed simulated log; each is measured over exactly `iterations` runs after
/// a short warm-up.
BenchStats bench_model(const net::Model& model, const Normalizer& norm, std::size_t iterations,
                       std::size_t batch_size = 32);
BenchStats cmd_bench(const fs::path& checkpoint, std::size_t iterations, std::ostream& out);

/// Sorted list of files in `dir` whose names start with `prefix` and end in .csv.
std::vector<fs::path> list_logs(const fs::path& dir, std::string_view prefix);

}  // namespace wio::io
