#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "wio/core_types.hpp"

namespace wio::io {

inline constexpr int kLogVersion = 1;

/// Column order of the log body.
inline constexpr std::string_view kLogColumns =
    "stamp,v_l,v_r,acc_x,acc_y,acc_z,gyro_x,gyro_y,gyro_z,gt_x,gt_y,gt_theta";

/// Plain-text log: '#'-prefixed header lines (version, sample_rate_hz,
/// scenario, seed), the column line, then one row per sample. Numbers carry 9
/// significant digits.
std::string serialize_log(const TrajectoryLog& log);

/// Parses serialize_log output. Throws parse_failure on malformed text and
/// irregular_stamps when stamps deviate from the header sample rate.
TrajectoryLog parse_log(std::string_view text);

void write_log(const std::filesystem::path& path, const TrajectoryLog& log);
TrajectoryLog read_log(const std::filesystem::path& path);

/// Whole-file helpers shared by the IO code; throw io_failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace wio::io
