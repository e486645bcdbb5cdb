#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wio/autodiff.hpp"
#include "wio/core_types.hpp"
#include "wio/normalizer.hpp"

namespace wio::net {

enum class Variant { remnet2d, ffnn };

inline constexpr std::size_t kDefaultFilters = 64;
inline constexpr std::size_t kDefaultRrmBlocks = 2;
inline constexpr std::size_t kDefaultSeRatio = 4;
inline constexpr std::size_t kDefaultKernel = 3;
/// Scalar parameters of the default remnet2d; guards against architecture drift.
inline constexpr std::size_t kDefaultParameterCount = 66851;

std::string_view to_string(Variant v) noexcept;
Variant parse_variant(std::string_view text);

/// Architecture description. Field names follow their role: `window` is the
/// number of time steps T, `channels` the sensor channels C, `filters` F,
/// `rrm_blocks` the number of residual reduction modules, `se_ratio` the
/// squeeze-excitation bottleneck ratio R and `kernel` the temporal kernel K.
struct ModelSpec {
  Variant variant = Variant::remnet2d;
  std::size_t window = kDefaultWindow;
  std::size_t channels = kChannels;
  std::size_t filters = kDefaultFilters;
  std::size_t rrm_blocks = kDefaultRrmBlocks;
  std::size_t se_ratio = kDefaultSeRatio;
  std::size_t kernel = kDefaultKernel;
  double dropout_rate = 0.1;
  std::size_t output_dim = 3;
  std::vector<std::size_t> ffnn_hidden = {128, 128};
  /// The head predicts increments divided by this factor (one sample period),
  /// so the trained outputs live on a velocity scale.
  double output_scale = 0.01;

  void validate() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Shapes of the feature maps (without batch axis) after the stem and after
/// each RRM, then the flattened size and the output size.
std::vector<ad::Shape> shape_trace(const ModelSpec& spec);

/// Number of scalar parameters, computed from the spec alone.
std::size_t parameter_count(const ModelSpec& spec);

template <typename S>
struct ModelState {
  ModelSpec spec;
  ad::ParameterList<S> params;
  bool training = false;
  std::uint64_t seed = 0;

  const ad::BasicTensor<S>& param(std::string_view name) const;
  ad::BasicTensor<S>& param(std::string_view name);
  std::size_t scalar_count() const;
  bool all_finite() const;

  template <typename T>
  ModelState<T> cast() const {
    ModelState<T> out{spec, {}, training, seed};
    for (const auto& p : params) out.params.push_back({p.name, p.value.template cast<T>()});
    return out;
  }
};

using Model = ModelState<float>;

/// Allocates and initializes all parameters (fan-in scaled uniform weights,
/// zero biases).
template <typename S>
ModelState<S> build(const ModelSpec& spec, std::uint64_t seed);

/// Records the network on `tape`. `input` is [B, T, C, 1] for remnet2d and
/// [B, T*C] for ffnn. Returns [B, output_dim]. Dropout draws from `rng` when
/// `training` is true.
template <typename S>
ad::Var forward_graph(ad::Tape<S>& tape, const ModelState<S>& model, ad::Var input, bool training,
                      std::mt19937_64& rng);

struct SeParams {
  ad::Var w1, b1, w2, b2;
};

/// Attention weights in (0, 1): pool over T,C -> dense F/R (ReLU) -> dense F (sigmoid).
template <typename S>
ad::Var se_attention(ad::Tape<S>& tape, ad::Var features, const SeParams& p);

/// Features scaled per filter by their attention weights.
template <typename S>
ad::Var se_block(ad::Tape<S>& tape, ad::Var features, const SeParams& p);

/// Normalized network input for a batch of windows (oldest sample first).
template <typename S>
ad::BasicTensor<S> make_input(const ModelSpec& spec, std::span<const MeasurementWindow* const> windows,
                              const Normalizer& norm);

template <typename S>
RelativePose forward(const ModelState<S>& model, const MeasurementWindow& window, const Normalizer& norm);

/// Batched inference mode prediction.
template <typename S>
std::vector<RelativePose> predict(const ModelState<S>& model, std::span<const MeasurementWindow* const> windows,
                                  const Normalizer& norm, std::size_t batch_size = 256);

}  // namespace wio::net
