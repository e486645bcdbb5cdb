#include "wio/log_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace wio::io {

namespace {

constexpr std::size_t kColumnCount = 12;

[[noreturn]] void parse_error(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::parse_failure, "line " + std::to_string(line) + ": " + msg);
}

double parse_double(std::string_view field, std::size_t line) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) parse_error(line, "bad number '" + std::string(field) + "'");
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string serialize_log(const TrajectoryLog& log) {
  if (log.gt_poses.size() != log.measurements.size()) {
    throw Error(ErrorCode::length_mismatch, "log measurements and ground truth differ in length");
  }
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "# version: {}\n# sample_rate_hz: {:.9g}\n# scenario: {}\n# seed: {}\n",
                 kLogVersion, log.meta.sample_rate, to_string(log.meta.kind), log.meta.seed);
  fmt::format_to(std::back_inserter(out), "{}\n", kLogColumns);
  for (std::size_t n = 0; n < log.size(); ++n) {
    const Measurement& m = log.measurements[n];
    const Pose2D& p = log.gt_poses[n];
    fmt::format_to(std::back_inserter(out),
                   "{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", m.stamp,
                   m.v_l, m.v_r, m.acc_x, m.acc_y, m.acc_z, m.gyro_x, m.gyro_y, m.gyro_z, p.x, p.y, p.theta);
  }
  return fmt::to_string(out);
}

TrajectoryLog parse_log(std::string_view text) {
  TrajectoryLog log;
  bool have_version = false, have_rate = false, have_kind = false, have_seed = false, have_columns = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    if (line.front() == '#') {
      line.remove_prefix(1);
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) parse_error(line_no, "header line without ':'");
      const std::string_view key = trim(line.substr(0, colon));
      const std::string_view value = trim(line.substr(colon + 1));
      if (key == "version") {
        if (parse_double(value, line_no) != kLogVersion) parse_error(line_no, "unsupported log version");
        have_version = true;
      } else if (key == "sample_rate_hz") {
        log.meta.sample_rate = parse_double(value, line_no);
        if (!(log.meta.sample_rate > 0.0)) parse_error(line_no, "sample rate must be positive");
        have_rate = true;
      } else if (key == "scenario") {
        try {
          log.meta.kind = parse_scenario_kind(value);
        } catch (const Error& e) {
          parse_error(line_no, e.what());
        }
        have_kind = true;
      } else if (key == "seed") {
        std::uint64_t seed = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
        if (ec != std::errc() || ptr != value.data() + value.size()) parse_error(line_no, "bad seed");
        log.meta.seed = seed;
        have_seed = true;
      }
      continue;
    }

    if (!have_columns) {
      if (line != kLogColumns) parse_error(line_no, "expected column line '" + std::string(kLogColumns) + "'");
      have_columns = true;
      continue;
    }

    std::array<double, kColumnCount> v{};
    std::size_t col = 0;
    while (true) {
      const auto comma = line.find(',');
      if (col >= kColumnCount) parse_error(line_no, "too many columns");
      v[col++] = parse_double(trim(line.substr(0, comma)), line_no);
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (col != kColumnCount) parse_error(line_no, "expected 12 columns, got " + std::to_string(col));
    log.measurements.push_back({v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[0]});
    log.gt_poses.push_back({v[9], v[10], v[11]});
  }
  if (!have_version || !have_rate || !have_kind || !have_seed) {
    throw Error(ErrorCode::parse_failure, "log header needs version, sample_rate_hz, scenario and seed");
  }
  if (!have_columns) throw Error(ErrorCode::parse_failure, "log has no column line");
  log.validate();
  return log;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::io_failure, "read failed: " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::io_failure, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::io_failure, "write failed: " + path.string());
}

void write_log(const std::filesystem::path& path, const TrajectoryLog& log) { write_file(path, serialize_log(log)); }

TrajectoryLog read_log(const std::filesystem::path& path) { return parse_log(read_file(path)); }

}  // namespace wio::io
