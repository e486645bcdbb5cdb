#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wio/tensor.hpp"

namespace wio::ad {

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t index = 0;
  std::uint64_t tape_id = 0;
};

/// Record of primitive operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so inputs always precede their
/// consumers; backward() walks the record in exact reverse. A tape is a
/// single-writer object and must not be shared between threads.
template <typename S>
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t)>;

  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  /// Input that never receives a gradient.
  Var constant(BasicTensor<S> value);
  /// Trainable leaf; backward() reports its gradient under `name`.
  Var parameter(std::string name, BasicTensor<S> value);

  /// Appends an operation node. `backward` reads this node's gradient and
  /// accumulates into the gradients of `inputs`.
  Var record(BasicTensor<S> value, const std::vector<Var>& inputs, Backward backward);

  const BasicTensor<S>& value(Var v) const;
  const Shape& shape(Var v) const { return value(v).shape(); }
  bool requires_grad(Var v) const;
  bool owns(Var v) const noexcept { return v.tape_id == id_ && v.index < nodes_.size(); }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::uint64_t id() const noexcept { return id_; }

  // Used by backward closures.
  const BasicTensor<S>& value_at(std::size_t index) const { return nodes_[index].value; }
  const BasicTensor<S>& grad_at(std::size_t index) const { return nodes_[index].grad; }
  /// Gradient buffer of an input, allocated (zeroed) on first use; null when the
  /// input does not require a gradient.
  BasicTensor<S>* input_grad(std::size_t index);
  std::size_t input_index(std::size_t node, std::size_t slot) const { return nodes_[node].inputs[slot]; }

  template <typename T>
  friend std::map<std::string, BasicTensor<T>> backward(Tape<T>& tape, Var loss);

 private:
  struct Node {
    BasicTensor<S> value;
    BasicTensor<S> grad;
    std::vector<std::size_t> inputs;
    Backward backward;
    bool requires_grad = false;
    std::string parameter_name;
  };

  void check(Var v) const;

  std::uint64_t id_;
  std::vector<Node> nodes_;
};

template <typename S>
using Gradients = std::map<std::string, BasicTensor<S>>;

/// Reverse pass from a scalar loss. Every parameter recorded on the tape gets
/// an entry; parameters the loss does not depend on get zeros.
template <typename S>
Gradients<S> backward(Tape<S>& tape, Var loss);

// --- operations ------------------------------------------------------------
// Feature maps carry a leading batch axis: [B, T, C, F]. Vectors are [B, D].

/// 'same' zero padding on the time axis; output time length ceil(T / stride).
struct ConvGeometry {
  std::size_t out_len = 0;
  std::size_t pad_begin = 0;
};
constexpr ConvGeometry conv_geometry(std::size_t in_len, std::size_t kernel, std::size_t stride) {
  ConvGeometry g;
  g.out_len = (in_len + stride - 1) / stride;
  const std::size_t span = (g.out_len - 1) * stride + kernel;
  g.pad_begin = span > in_len ? (span - in_len) / 2 : 0;
  return g;
}

/// Temporal convolution: kernel [K, 1, F_in, F_out] slides over T only.
template <typename S>
Var conv2d(Tape<S>& tape, Var input, Var kernel, Var bias, std::size_t stride);

/// input [B, D_in] x weights [D_in, D_out] + bias [D_out].
template <typename S>
Var dense(Tape<S>& tape, Var input, Var weights, Var bias);

/// [B, T, C, F] -> [B, F], mean over the T x C positions.
template <typename S>
Var mean_pool_tc(Tape<S>& tape, Var input);

template <typename S>
Var relu(Tape<S>& tape, Var x);

template <typename S>
Var sigmoid(Tape<S>& tape, Var x);

template <typename S>
Var add(Tape<S>& tape, Var a, Var b);

template <typename S>
Var mul(Tape<S>& tape, Var a, Var b);

/// [B, T, C, F] * [B, F], broadcasting the per-filter weights over T and C.
template <typename S>
Var scale_broadcast(Tape<S>& tape, Var features, Var weights);

/// Multiplication by a constant scalar.
template <typename S>
Var scale(Tape<S>& tape, Var x, S factor);

template <typename S>
Var reshape(Tape<S>& tape, Var x, Shape shape);

/// Sum of all entries, shape [1].
template <typename S>
Var sum(Tape<S>& tape, Var x);

/// Inverted dropout; the identity when `training` is false.
template <typename S>
Var dropout(Tape<S>& tape, Var x, double rate, bool training, std::mt19937_64& rng);

/// Mean absolute error against a constant target of the same shape, shape [1].
template <typename S>
Var mae_loss(Tape<S>& tape, Var prediction, const BasicTensor<S>& target);

// --- parameter serialization -------------------------------------------------
// Layout (all integers little-endian):
//   "WIOPARAM"  u32 version  u32 count
//   per tensor: u32 name_len, name bytes, u32 rank, u64 dims[rank], f32 data[]

inline constexpr std::uint32_t kParameterFormatVersion = 1;

template <typename S>
void write_parameters(std::ostream& out, const ParameterList<S>& params);

template <typename S>
ParameterList<S> read_parameters(std::istream& in);

}  // namespace wio::ad
