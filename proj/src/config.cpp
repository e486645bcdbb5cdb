#include "wio/config.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wio/log_io.hpp"

namespace wio::io {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::invalid_config, field + ": " + msg);
}

// Reads the members of one JSON object, remembering which keys were consumed so
// that leftovers (typos) can be reported.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* find(std::string_view key) {
    const auto it = j_.find(std::string(key));
    if (it == j_.end()) return nullptr;
    seen_.insert(std::string(key));
    return &*it;
  }

  void number(std::string_view key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) config_error(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
  void count(std::string_view key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
        config_error(field(key), "expected a non-negative integer");
      }
      out = static_cast<Int>(v->get<std::uint64_t>());
    }
  }

  void boolean(std::string_view key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) config_error(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(std::string_view key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) config_error(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  template <typename Vec>
  void numbers(std::string_view key, Vec& out, std::size_t expected) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != expected) {
        config_error(field(key), "expected an array of " + std::to_string(expected) + " numbers");
      }
      for (std::size_t i = 0; i < expected; ++i) {
        if (!(*v)[i].is_number()) config_error(field(key), "expected an array of numbers");
        out(static_cast<Eigen::Index>(i)) = (*v)[i].get<double>();
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) config_error(field(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_object(ObjectReader& parent, std::string_view key, Fn&& fn) {
  if (const json* v = parent.find(key)) {
    ObjectReader child(*v, parent.field(key));
    fn(child);
    child.finish();
  }
}

void read_spec(ObjectReader& r, net::ModelSpec& spec) {
  std::string variant(net::to_string(spec.variant));
  r.string("variant", variant);
  try {
    spec.variant = net::parse_variant(variant);
  } catch (const Error& e) {
    config_error(r.field("variant"), e.what());
  }
  r.count("window", spec.window);
  r.count("channels", spec.channels);
  r.count("filters", spec.filters);
  r.count("rrm_blocks", spec.rrm_blocks);
  r.count("se_ratio", spec.se_ratio);
  r.count("kernel", spec.kernel);
  r.number("dropout_rate", spec.dropout_rate);
  r.count("output_dim", spec.output_dim);
  r.number("output_scale", spec.output_scale);
  if (const json* v = r.find("ffnn_hidden")) {
    if (!v->is_array()) config_error(r.field("ffnn_hidden"), "expected an array of layer sizes");
    spec.ffnn_hidden.clear();
    for (const auto& h : *v) {
      if (!h.is_number_integer() || h.get<std::int64_t>() <= 0) {
        config_error(r.field("ffnn_hidden"), "layer sizes must be positive integers");
      }
      spec.ffnn_hidden.push_back(h.get<std::size_t>());
    }
  }
}

std::vector<ScenarioGroup> read_groups(const json& j, const std::string& path) {
  if (!j.is_array()) config_error(path, "expected an array of scenario groups");
  std::vector<ScenarioGroup> groups;
  for (std::size_t i = 0; i < j.size(); ++i) {
    ObjectReader r(j[i], path + "[" + std::to_string(i) + "]");
    ScenarioGroup g;
    std::string kind(to_string(g.kind));
    r.string("kind", kind);
    try {
      g.kind = parse_scenario_kind(kind);
    } catch (const Error& e) {
      config_error(r.field("kind"), e.what());
    }
    r.number("duration_s", g.duration);
    r.count("count", g.count);
    r.count("seed", g.seed);
    r.finish();
    groups.push_back(g);
  }
  return groups;
}

json spec_json(const net::ModelSpec& s) {
  return {{"variant", std::string(net::to_string(s.variant))},
          {"window", s.window},
          {"channels", s.channels},
          {"filters", s.filters},
          {"rrm_blocks", s.rrm_blocks},
          {"se_ratio", s.se_ratio},
          {"kernel", s.kernel},
          {"dropout_rate", s.dropout_rate},
          {"output_dim", s.output_dim},
          {"ffnn_hidden", s.ffnn_hidden},
          {"output_scale", s.output_scale}};
}

json groups_json(const std::vector<ScenarioGroup>& groups) {
  json out = json::array();
  for (const auto& g : groups) {
    out.push_back({{"kind", std::string(to_string(g.kind))},
                   {"duration_s", g.duration},
                   {"count", g.count},
                   {"seed", g.seed}});
  }
  return out;
}

std::string_view slip_wheel_name(sim::SlipWheel w) {
  switch (w) {
    case sim::SlipWheel::left: return "left";
    case sim::SlipWheel::right: return "right";
    case sim::SlipWheel::random: break;
  }
  return "random";
}

std::vector<sim::ScenarioScript> expand(const std::vector<ScenarioGroup>& groups, double rate) {
  std::vector<sim::ScenarioScript> out;
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.count; ++i) out.push_back({g.kind, g.duration, rate, g.seed + i});
  }
  return out;
}

template <typename Fn>
void rethrow_as_config(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_config) throw;
    config_error(field, e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) config_error("sample_rate_hz", "must be positive");
  if (output_dir.empty()) config_error("output_dir", "must not be empty");
  rethrow_as_config("robot", [&] { robot.validate(); });
  rethrow_as_config("noise", [&] { noise.validate(); });
  rethrow_as_config("model", [&] { model.validate(); });
  rethrow_as_config("ffnn", [&] { ffnn.validate(); });
  if (model.variant != net::Variant::remnet2d) config_error("model.variant", "must be remnet2d");
  if (ffnn.variant != net::Variant::ffnn) config_error("ffnn.variant", "must be ffnn");
  if (ffnn.window != model.window) {
    config_error("ffnn.window", "(" + std::to_string(ffnn.window) + ") must equal model.window (" +
                                    std::to_string(model.window) + ")");
  }
  rethrow_as_config("train", [&] { train.validate(); });
  if (!(metrics.segment_length > 0.0) || !std::isfinite(metrics.segment_length)) {
    config_error("metrics.segment_length", "must be positive");
  }
  if (metrics.segment_stride == 0) config_error("metrics.segment_stride", "must be >= 1");
  if (metrics.histogram_bins == 0) config_error("metrics.histogram_bins", "must be >= 1");
  for (int i = 0; i < 5; ++i) {
    if (!(ekf.process_noise(i) >= 0.0) || !std::isfinite(ekf.process_noise(i))) {
      config_error("ekf.process_noise", "entries must be finite and >= 0");
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (!(ekf.measurement_noise(i) > 0.0) || !std::isfinite(ekf.measurement_noise(i))) {
      config_error("ekf.measurement_noise", "entries must be finite and > 0");
    }
  }
  if (!(ekf.initial_velocity_var >= 0.0)) config_error("ekf.initial_velocity_var", "must be >= 0");

  auto check_groups = [&](const std::vector<ScenarioGroup>& groups, const std::string& name) {
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const std::string field = "datasets." + name + "[" + std::to_string(i) + "]";
      const auto& g = groups[i];
      if (!(g.duration > 0.0) || !std::isfinite(g.duration)) config_error(field + ".duration_s", "must be positive");
      if (g.count == 0) config_error(field + ".count", "must be >= 1");
      const auto samples = static_cast<std::size_t>(std::llround(g.duration * sample_rate));
      if (samples <= model.window) {
        config_error(field + ".duration_s", fmt::format("{} samples at {:g} Hz; logs need more than model.window ({}) samples", samples,
                                                        sample_rate, model.window));
      }
    }
  };
  check_groups(train_set, "train");
  check_groups(test_set, "test");
}

std::vector<sim::ScenarioScript> RunConfig::train_scripts() const { return expand(train_set, sample_rate); }
std::vector<sim::ScenarioScript> RunConfig::test_scripts() const { return expand(test_set, sample_rate); }

sim::NoiseModel RunConfig::seeded_noise() const {
  sim::NoiseModel n = noise;
  n.seed = seed;
  return n;
}

train::TrainConfig RunConfig::seeded_train() const {
  train::TrainConfig t = train;
  t.seed = seed;
  return t;
}

const net::ModelSpec& RunConfig::spec_for(net::Variant variant) const {
  return variant == net::Variant::ffnn ? ffnn : model;
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.ffnn.variant = net::Variant::ffnn;
  cfg.train.epochs = 6;
  cfg.train_set = {{ScenarioKind::Random, 60.0, 120, 1000}};
  cfg.test_set = {{ScenarioKind::A, 60.0, 4, 5000}, {ScenarioKind::B, 60.0, 4, 6000}, {ScenarioKind::C, 60.0, 4, 7000}};
  return cfg;
}

RunConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg = default_config();
  ObjectReader r(root, "");
  r.count("seed", cfg.seed);
  r.string("output_dir", cfg.output_dir);
  r.number("sample_rate_hz", cfg.sample_rate);
  with_object(r, "robot", [&](ObjectReader& o) {
    o.number("track_width", cfg.robot.track_width);
    o.number("wheel_radius", cfg.robot.wheel_radius);
    o.number("max_v", cfg.robot.max_v);
    o.number("max_w", cfg.robot.max_w);
  });
  with_object(r, "noise", [&](ObjectReader& o) {
    auto& n = cfg.noise;
    o.number("encoder_gauss_std", n.encoder_gauss_std);
    o.number("encoder_slip_prob", n.encoder_slip_prob);
    o.number("encoder_slip_gain", n.encoder_slip_gain);
    o.count("slip_duration", n.slip_duration);
    std::string wheel(slip_wheel_name(n.slip_wheel));
    o.string("slip_wheel", wheel);
    if (wheel == "random") {
      n.slip_wheel = sim::SlipWheel::random;
    } else if (wheel == "left") {
      n.slip_wheel = sim::SlipWheel::left;
    } else if (wheel == "right") {
      n.slip_wheel = sim::SlipWheel::right;
    } else {
      config_error(o.field("slip_wheel"), "expected random, left or right");
    }
    o.number("encoder_scale_left", n.encoder_scale_left);
    o.number("encoder_scale_right", n.encoder_scale_right);
    o.number("track_scale", n.track_scale);
    o.number("imu_acc_std", n.imu_acc_std);
    o.number("imu_gyro_std", n.imu_gyro_std);
    o.number("gyro_bias", n.gyro_bias);
    o.number("gyro_bias_walk_std", n.gyro_bias_walk_std);
  });
  with_object(r, "ekf", [&](ObjectReader& o) {
    o.numbers("process_noise", cfg.ekf.process_noise, 5);
    o.numbers("measurement_noise", cfg.ekf.measurement_noise, 3);
    o.number("initial_velocity_var", cfg.ekf.initial_velocity_var);
  });
  with_object(r, "model", [&](ObjectReader& o) { read_spec(o, cfg.model); });
  with_object(r, "ffnn", [&](ObjectReader& o) { read_spec(o, cfg.ffnn); });
  with_object(r, "train", [&](ObjectReader& o) {
    o.count("batch_size", cfg.train.batch_size);
    o.number("lr_batch", cfg.train.lr_batch);
    o.number("lr_online", cfg.train.lr_online);
    o.count("epochs", cfg.train.epochs);
    o.count("patience", cfg.train.patience);
    o.boolean("shuffle", cfg.train.shuffle);
    o.number("validation_fraction", cfg.train.validation_fraction);
  });
  with_object(r, "metrics", [&](ObjectReader& o) {
    o.number("segment_length", cfg.metrics.segment_length);
    o.count("segment_stride", cfg.metrics.segment_stride);
    o.count("histogram_bins", cfg.metrics.histogram_bins);
  });
  with_object(r, "datasets", [&](ObjectReader& o) {
    if (const json* v = o.find("train")) cfg.train_set = read_groups(*v, o.field("train"));
    if (const json* v = o.find("test")) cfg.test_set = read_groups(*v, o.field("test"));
  });
  r.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string dump_config(const RunConfig& cfg) {
  const auto& n = cfg.noise;
  json j = {
      {"seed", cfg.seed},
      {"output_dir", cfg.output_dir},
      {"sample_rate_hz", cfg.sample_rate},
      {"robot",
       {{"track_width", cfg.robot.track_width},
        {"wheel_radius", cfg.robot.wheel_radius},
        {"max_v", cfg.robot.max_v},
        {"max_w", cfg.robot.max_w}}},
      {"noise",
       {{"encoder_gauss_std", n.encoder_gauss_std},
        {"encoder_slip_prob", n.encoder_slip_prob},
        {"encoder_slip_gain", n.encoder_slip_gain},
        {"slip_duration", n.slip_duration},
        {"slip_wheel", std::string(slip_wheel_name(n.slip_wheel))},
        {"encoder_scale_left", n.encoder_scale_left},
        {"encoder_scale_right", n.encoder_scale_right},
        {"track_scale", n.track_scale},
        {"imu_acc_std", n.imu_acc_std},
        {"imu_gyro_std", n.imu_gyro_std},
        {"gyro_bias", n.gyro_bias},
        {"gyro_bias_walk_std", n.gyro_bias_walk_std}}},
      {"ekf",
       {{"process_noise", std::vector<double>(cfg.ekf.process_noise.data(), cfg.ekf.process_noise.data() + 5)},
        {"measurement_noise",
         std::vector<double>(cfg.ekf.measurement_noise.data(), cfg.ekf.measurement_noise.data() + 3)},
        {"initial_velocity_var", cfg.ekf.initial_velocity_var}}},
      {"model", spec_json(cfg.model)},
      {"ffnn", spec_json(cfg.ffnn)},
      {"train",
       {{"batch_size", cfg.train.batch_size},
        {"lr_batch", cfg.train.lr_batch},
        {"lr_online", cfg.train.lr_online},
        {"epochs", cfg.train.epochs},
        {"patience", cfg.train.patience},
        {"shuffle", cfg.train.shuffle},
        {"validation_fraction", cfg.train.validation_fraction}}},
      {"metrics",
       {{"segment_length", cfg.metrics.segment_length},
        {"segment_stride", cfg.metrics.segment_stride},
        {"histogram_bins", cfg.metrics.histogram_bins}}},
      {"datasets", {{"train", groups_json(cfg.train_set)}, {"test", groups_json(cfg.test_set)}}},
  };
  return j.dump(2) + "\n";
}

std::string dump_spec(const net::ModelSpec& spec) { return spec_json(spec).dump(); }

net::ModelSpec parse_spec(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_failure, std::string("model spec is not valid JSON: ") + e.what());
  }
  net::ModelSpec spec;
  try {
    ObjectReader r(root, "spec");
    read_spec(r, spec);
    r.finish();
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_failure, e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace wio::io
