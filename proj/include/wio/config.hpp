#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wio/ekf.hpp"
#include "wio/metrics.hpp"
#include "wio/network.hpp"
#include "wio/simulator.hpp"
#include "wio/training.hpp"

namespace wio::io {

/// `count` consecutive scripts of one kind with seeds seed, seed+1, ...
struct ScenarioGroup {
  ScenarioKind kind = ScenarioKind::Random;
  double duration = 60.0;  // [s]
  std::size_t count = 1;
  std::uint64_t seed = 0;

  friend bool operator==(const ScenarioGroup&, const ScenarioGroup&) = default;
};

struct RunConfig {
  std::uint64_t seed = 0;  // model init, dropout/shuffle order and sensor noise
  std::string output_dir = "out";
  double sample_rate = kDefaultSampleRate;
  sim::RobotParams robot;
  sim::NoiseModel noise;
  ekf::Tuning ekf;
  net::ModelSpec model;
  net::ModelSpec ffnn;
  train::TrainConfig train;
  metrics::MetricConfig metrics;
  std::vector<ScenarioGroup> train_set;
  std::vector<ScenarioGroup> test_set;

  /// Cross-field checks; throws invalid_config naming the offending field.
  void validate() const;

  std::vector<sim::ScenarioScript> train_scripts() const;
  std::vector<sim::ScenarioScript> test_scripts() const;
  /// Noise model with the run seed applied.
  sim::NoiseModel seeded_noise() const;
  /// Training settings with the run seed applied.
  train::TrainConfig seeded_train() const;
  /// Spec for the requested variant (`model` or `ffnn`).
  const net::ModelSpec& spec_for(net::Variant variant) const;
};

/// Shipped defaults: the simulated benchmark used by the acceptance suite.
RunConfig default_config();

/// Parses a JSON document; absent keys keep their defaults, unknown keys and
/// wrong types are rejected with the JSON path in the message.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string dump_config(const RunConfig& cfg);

/// ModelSpec as a standalone JSON object (embedded in checkpoints).
std::string dump_spec(const net::ModelSpec& spec);
net::ModelSpec parse_spec(std::string_view json_text);

}  // namespace wio::io
