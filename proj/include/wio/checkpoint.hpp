#pragma once

#include <filesystem>
#include <iosfwd>

#include "wio/network.hpp"
#include "wio/normalizer.hpp"

namespace wio::io {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// A trained model together with the input statistics it was trained with.
struct Checkpoint {
  net::Model model;
  Normalizer normalizer;
};

/// Layout: "WIOCKPT\0", u32 version, u32 spec length, ModelSpec as JSON, 8 f64
/// means, 8 f64 stds, then the parameter block. Integers and floats are
/// little-endian.
void write_checkpoint(std::ostream& out, const net::Model& model, const Normalizer& norm);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const net::Model& model, const Normalizer& norm);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Throws spec_mismatch unless the checkpoint was built from `expected`.
void require_spec(const Checkpoint& ckpt, const net::ModelSpec& expected, std::string_view what);

}  // namespace wio::io
