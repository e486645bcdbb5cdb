#include "wio/normalizer.hpp"

#include <algorithm>
#include <cmath>

namespace wio {

Normalizer Normalizer::running() {
  Normalizer n;
  n.mode_ = Mode::running;
  return n;
}

Normalizer Normalizer::frozen(const Channels& mean, const Channels& std) {
  Normalizer n;
  n.mean_ = mean;
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (!std::isfinite(mean[c]) || !std::isfinite(std[c])) {
      throw Error(ErrorCode::invalid_value, "normalizer statistics must be finite");
    }
    n.std_[c] = std::max(std[c], kStdFloor);
  }
  return n;
}

Normalizer Normalizer::fit(std::span<const Measurement> samples) {
  Normalizer n = running();
  for (const Measurement& m : samples) n.observe(m);
  return n.snapshot();
}

void Normalizer::observe(const Measurement& m) {
  if (mode_ != Mode::running) return;
  ++count_;
  const auto values = m.as_array();
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double delta = values[c] - mean_[c];
    mean_[c] += delta / static_cast<double>(count_);
    m2_[c] += delta * (values[c] - mean_[c]);
  }
  refresh_std();
}

void Normalizer::refresh_std() {
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double var = count_ > 0 ? m2_[c] / static_cast<double>(count_) : 1.0;
    std_[c] = std::max(std::sqrt(var), kStdFloor);
  }
}

Normalizer Normalizer::snapshot() const {
  Normalizer n = *this;
  n.mode_ = Mode::frozen;
  return n;
}

Normalizer::Channels Normalizer::normalize(const Measurement& m) const {
  Channels z = m.as_array();
  for (std::size_t c = 0; c < kChannels; ++c) z[c] = (z[c] - mean_[c]) / std_[c];
  return z;
}

Measurement Normalizer::denormalize(const Channels& z, double stamp) const {
  Channels raw{};
  for (std::size_t c = 0; c < kChannels; ++c) raw[c] = z[c] * std_[c] + mean_[c];
  return Measurement::from_array(raw, stamp);
}

}  // namespace wio
