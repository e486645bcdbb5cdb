#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "wio/core_types.hpp"

namespace wio {

/// Per-channel standardization of the 8 measurement channels.
///
/// In running mode `observe()` folds a sample into Welford statistics; in
/// frozen mode the map is a fixed affine transform and `observe()` is a no-op.
class Normalizer {
 public:
  enum class Mode { frozen, running };
  using Channels = std::array<double, kChannels>;

  static constexpr double kStdFloor = 1e-6;

  /// Identity map (mean 0, std 1), frozen.
  Normalizer() { std_.fill(1.0); }

  static Normalizer running();
  static Normalizer frozen(const Channels& mean, const Channels& std);
  /// Frozen statistics of `samples`, accumulated in order.
  static Normalizer fit(std::span<const Measurement> samples);

  Mode mode() const noexcept { return mode_; }
  std::size_t count() const noexcept { return count_; }
  const Channels& mean() const noexcept { return mean_; }
  /// Standard deviation with the floor applied.
  const Channels& std() const noexcept { return std_; }

  void observe(const Measurement& m);
  /// Frozen copy of the current statistics.
  Normalizer snapshot() const;

  Channels normalize(const Measurement& m) const;
  Measurement denormalize(const Channels& z, double stamp) const;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;

 private:
  void refresh_std();

  Mode mode_ = Mode::frozen;
  std::size_t count_ = 0;
  Channels mean_{};
  Channels m2_{};
  Channels std_{};
};

}  // namespace wio
