// Command-line front end: simulate, train, evaluate, bench, config.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "wio/commands.hpp"
#include "wio/config.hpp"

namespace {

using namespace wio;
namespace fs = std::filesystem;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config, "JSON run configuration (defaults are used when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", opt.seed, "Overrides the config seed");
  cmd->add_option("--out", opt.out, "Overrides the config output directory");
}

io::RunConfig resolve(const CommonOptions& opt) {
  io::RunConfig cfg = opt.config.empty() ? io::default_config() : io::load_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  cfg.validate();
  return cfg;
}

std::vector<fs::path> to_paths(const std::vector<std::string>& items) { return {items.begin(), items.end()}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online-learned wheel-inertial odometry: simulation, training, evaluation"};
  app.require_subcommand(1);

  CommonOptions sim_opt;
  auto* simulate = app.add_subcommand("simulate", "Write the training and test logs of the config");
  add_common(simulate, sim_opt);

  CommonOptions train_opt;
  std::string mode = "online";
  std::string variant = "remnet2d";
  std::string train_ckpt;
  std::vector<std::string> train_logs;
  auto* train = app.add_subcommand("train", "Train a model on logs and write a checkpoint");
  add_common(train, train_opt);
  train->add_option("--mode", mode, "online or batch")->check(CLI::IsMember({"online", "batch"}));
  train->add_option("--model", variant, "remnet2d or ffnn")->check(CLI::IsMember({"remnet2d", "ffnn"}));
  train->add_option("--checkpoint", train_ckpt, "Output path (default <out>/checkpoints/<name>.ckpt)");
  train->add_option("logs", train_logs, "Logs in stream order (default <out>/logs/train_*.csv)")
      ->check(CLI::ExistingFile);

  CommonOptions eval_opt;
  std::string online_ckpt, batch_ckpt, ffnn_ckpt;
  std::vector<std::string> eval_logs;
  auto* evaluate = app.add_subcommand("evaluate", "Compare EKF, trained models and dead reckoning on test logs");
  add_common(evaluate, eval_opt);
  evaluate->add_option("--online", online_ckpt, "Online-trained checkpoint")->check(CLI::ExistingFile);
  evaluate->add_option("--batch", batch_ckpt, "Batch-trained checkpoint")->check(CLI::ExistingFile);
  evaluate->add_option("--ffnn", ffnn_ckpt, "FFNN checkpoint")->check(CLI::ExistingFile);
  evaluate->add_option("logs", eval_logs, "Test logs (default <out>/logs/test_*.csv)")->check(CLI::ExistingFile);

  std::string bench_ckpt;
  std::size_t iterations = 100;
  auto* bench = app.add_subcommand("bench", "Time inference and training steps of a checkpoint");
  bench->add_option("--checkpoint", bench_ckpt, "Checkpoint to time")->required()->check(CLI::ExistingFile);
  bench->add_option("--iterations", iterations, "Timed runs per measurement")->check(CLI::PositiveNumber);

  CommonOptions cfg_opt;
  auto* config = app.add_subcommand("config", "Print the effective configuration as JSON");
  add_common(config, cfg_opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      io::cmd_simulate(resolve(sim_opt), std::cout);
    } else if (*train) {
      const io::RunConfig cfg = resolve(train_opt);
      const auto m = io::parse_train_mode(mode);
      const auto v = net::parse_variant(variant);
      fs::path ckpt = train_ckpt;
      if (ckpt.empty()) {
        const std::string name = v == net::Variant::ffnn ? "ffnn" : std::string(io::to_string(m));
        ckpt = fs::path(cfg.output_dir) / "checkpoints" / (name + ".ckpt");
      }
      const auto logs = to_paths(train_logs);
      io::cmd_train(cfg, m, v, logs, ckpt, std::cout);
    } else if (*evaluate) {
      const io::RunConfig cfg = resolve(eval_opt);
      io::EvaluateInputs inputs;
      if (!online_ckpt.empty()) inputs.online = online_ckpt;
      if (!batch_ckpt.empty()) inputs.batch = batch_ckpt;
      if (!ffnn_ckpt.empty()) inputs.ffnn = ffnn_ckpt;
      inputs.logs = to_paths(eval_logs);
      io::cmd_evaluate(cfg, inputs, fs::path(cfg.output_dir) / "results", std::cout);
    } else if (*bench) {
      io::cmd_bench(bench_ckpt, iterations, std::cout);
    } else if (*config) {
      std::cout << io::dump_config(resolve(cfg_opt)) << '\n';
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
