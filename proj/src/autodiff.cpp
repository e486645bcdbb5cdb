#include "wio/autodiff.hpp"

#include <atomic>
#include <bit>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Core>

namespace wio::ad {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

namespace {

std::atomic<std::uint64_t> next_tape_id{1};

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MatMap = Eigen::Map<RowMat<S>>;
template <typename S>
using ConstMatMap = Eigen::Map<const RowMat<S>>;

template <typename S>
MatMap<S> as_matrix(BasicTensor<S>& t, std::size_t rows, std::size_t cols) {
  return MatMap<S>(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
template <typename S>
ConstMatMap<S> as_matrix(const BasicTensor<S>& t, std::size_t rows, std::size_t cols) {
  return ConstMatMap<S>(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

[[noreturn]] void shape_error(const std::string& op, const std::string& detail) {
  throw Error(ErrorCode::shape_mismatch, op + ": " + detail);
}

}  // namespace

// --- Tape ------------------------------------------------------------------

template <typename S>
Tape<S>::Tape() : id_(next_tape_id.fetch_add(1)) {}

template <typename S>
void Tape<S>::check(Var v) const {
  if (!owns(v)) throw Error(ErrorCode::disconnected_graph, "variable is not recorded on this tape");
}

template <typename S>
Var Tape<S>::constant(BasicTensor<S> value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, false, {}});
  return {nodes_.size() - 1, id_};
}

template <typename S>
Var Tape<S>::parameter(std::string name, BasicTensor<S> value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, true, std::move(name)});
  return {nodes_.size() - 1, id_};
}

template <typename S>
Var Tape<S>::record(BasicTensor<S> value, const std::vector<Var>& inputs, Backward backward) {
  Node node{std::move(value), {}, {}, std::move(backward), false, {}};
  node.inputs.reserve(inputs.size());
  for (Var in : inputs) {
    check(in);
    node.inputs.push_back(in.index);
    node.requires_grad = node.requires_grad || nodes_[in.index].requires_grad;
  }
  nodes_.push_back(std::move(node));
  return {nodes_.size() - 1, id_};
}

template <typename S>
const BasicTensor<S>& Tape<S>::value(Var v) const {
  check(v);
  return nodes_[v.index].value;
}

template <typename S>
bool Tape<S>::requires_grad(Var v) const {
  check(v);
  return nodes_[v.index].requires_grad;
}

template <typename S>
BasicTensor<S>* Tape<S>::input_grad(std::size_t index) {
  Node& n = nodes_[index];
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad = BasicTensor<S>(n.value.shape());
  return &n.grad;
}

template <typename S>
Gradients<S> backward(Tape<S>& tape, Var loss) {
  if (!tape.owns(loss)) {
    throw Error(ErrorCode::disconnected_graph, "loss is not recorded on this tape");
  }
  auto& nodes = tape.nodes_;
  if (nodes[loss.index].value.size() != 1) {
    shape_error("backward", "loss must be a scalar, got " + shape_to_string(nodes[loss.index].value.shape()));
  }
  for (auto& n : nodes) n.grad = BasicTensor<S>();
  nodes[loss.index].grad = BasicTensor<S>(nodes[loss.index].value.shape(), S(1));

  for (std::size_t i = loss.index + 1; i-- > 0;) {
    auto& n = nodes[i];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(tape, i);
  }

  Gradients<S> out;
  for (auto& n : nodes) {
    if (n.parameter_name.empty()) continue;
    BasicTensor<S> g = n.grad.empty() ? BasicTensor<S>(n.value.shape()) : n.grad;
    auto [it, inserted] = out.emplace(n.parameter_name, std::move(g));
    if (!inserted) {
      // Same parameter registered twice: gradients add.
      for (std::size_t k = 0; k < it->second.size(); ++k) {
        it->second[k] += n.grad.empty() ? S(0) : n.grad[k];
      }
    }
  }
  return out;
}

// --- Operations ------------------------------------------------------------

template <typename S>
Var conv2d(Tape<S>& tape, Var input, Var kernel, Var bias, std::size_t stride) {
  const auto& x = tape.value(input);
  const auto& w = tape.value(kernel);
  const auto& b = tape.value(bias);
  if (x.rank() != 4) shape_error("conv2d", "input must be [B,T,C,F], got " + shape_to_string(x.shape()));
  if (w.rank() != 4 || w.dim(1) != 1 || w.dim(2) != x.dim(3)) {
    shape_error("conv2d", "kernel " + shape_to_string(w.shape()) + " incompatible with input " +
                              shape_to_string(x.shape()));
  }
  if (stride != 1 && stride != 2) shape_error("conv2d", "stride must be 1 or 2");
  const std::size_t B = x.dim(0), T = x.dim(1), C = x.dim(2), Fin = x.dim(3);
  const std::size_t K = w.dim(0), Fout = w.dim(3);
  if (K > T) shape_error("conv2d", "kernel time extent exceeds input length");
  if (b.rank() != 1 || b.dim(0) != Fout) shape_error("conv2d", "bias must be [F_out]");

  const ConvGeometry geo = conv_geometry(T, K, stride);
  const std::size_t To = geo.out_len;
  const std::size_t M = B * To * C;
  const std::size_t Kd = K * Fin;

  BasicTensor<S> col({M, Kd});
  for (std::size_t bt = 0; bt < B; ++bt) {
    for (std::size_t t = 0; t < To; ++t) {
      for (std::size_t k = 0; k < K; ++k) {
        const auto ti = static_cast<std::ptrdiff_t>(t * stride + k) - static_cast<std::ptrdiff_t>(geo.pad_begin);
        if (ti < 0 || ti >= static_cast<std::ptrdiff_t>(T)) continue;
        for (std::size_t c = 0; c < C; ++c) {
          const S* src = x.data() + ((bt * T + static_cast<std::size_t>(ti)) * C + c) * Fin;
          S* dst = col.data() + ((bt * To + t) * C + c) * Kd + k * Fin;
          std::copy(src, src + Fin, dst);
        }
      }
    }
  }

  BasicTensor<S> out({B, To, C, Fout});
  auto out_m = as_matrix(out, M, Fout);
  out_m.noalias() = as_matrix(col, M, Kd) * as_matrix(w, Kd, Fout);
  out_m.rowwise() += as_matrix(b, 1, Fout).row(0);

  const std::size_t pad = geo.pad_begin;
  return tape.record(
      std::move(out), {input, kernel, bias},
      [col = std::move(col), B, T, C, Fin, K, Fout, To, M, Kd, stride, pad](Tape<S>& tp, std::size_t self) {
        const auto g = as_matrix(tp.grad_at(self), M, Fout);
        if (auto* gw = tp.input_grad(tp.input_index(self, 1))) {
          as_matrix(*gw, Kd, Fout).noalias() += as_matrix(col, M, Kd).transpose() * g;
        }
        if (auto* gb = tp.input_grad(tp.input_index(self, 2))) {
          as_matrix(*gb, 1, Fout) += g.colwise().sum();
        }
        if (auto* gx = tp.input_grad(tp.input_index(self, 0))) {
          const auto& w_val = tp.value_at(tp.input_index(self, 1));
          RowMat<S> gcol = g * as_matrix(w_val, Kd, Fout).transpose();
          for (std::size_t bt = 0; bt < B; ++bt) {
            for (std::size_t t = 0; t < To; ++t) {
              for (std::size_t k = 0; k < K; ++k) {
                const auto ti = static_cast<std::ptrdiff_t>(t * stride + k) - static_cast<std::ptrdiff_t>(pad);
                if (ti < 0 || ti >= static_cast<std::ptrdiff_t>(T)) continue;
                for (std::size_t c = 0; c < C; ++c) {
                  const S* src = gcol.data() + ((bt * To + t) * C + c) * Kd + k * Fin;
                  S* dst = gx->data() + ((bt * T + static_cast<std::size_t>(ti)) * C + c) * Fin;
                  for (std::size_t f = 0; f < Fin; ++f) dst[f] += src[f];
                }
              }
            }
          }
        }
      });
}

template <typename S>
Var dense(Tape<S>& tape, Var input, Var weights, Var bias) {
  const auto& x = tape.value(input);
  const auto& w = tape.value(weights);
  const auto& b = tape.value(bias);
  if (x.rank() != 2 || w.rank() != 2 || w.dim(0) != x.dim(1)) {
    shape_error("dense", "input " + shape_to_string(x.shape()) + " vs weights " + shape_to_string(w.shape()));
  }
  const std::size_t B = x.dim(0), Din = x.dim(1), Dout = w.dim(1);
  if (b.rank() != 1 || b.dim(0) != Dout) shape_error("dense", "bias must be [D_out]");

  BasicTensor<S> out({B, Dout});
  auto out_m = as_matrix(out, B, Dout);
  out_m.noalias() = as_matrix(x, B, Din) * as_matrix(w, Din, Dout);
  out_m.rowwise() += as_matrix(b, 1, Dout).row(0);

  return tape.record(std::move(out), {input, weights, bias}, [B, Din, Dout](Tape<S>& tp, std::size_t self) {
    const auto g = as_matrix(tp.grad_at(self), B, Dout);
    const auto& x_val = tp.value_at(tp.input_index(self, 0));
    const auto& w_val = tp.value_at(tp.input_index(self, 1));
    if (auto* gw = tp.input_grad(tp.input_index(self, 1))) {
      as_matrix(*gw, Din, Dout).noalias() += as_matrix(x_val, B, Din).transpose() * g;
    }
    if (auto* gb = tp.input_grad(tp.input_index(self, 2))) {
      as_matrix(*gb, 1, Dout) += g.colwise().sum();
    }
    if (auto* gx = tp.input_grad(tp.input_index(self, 0))) {
      as_matrix(*gx, B, Din).noalias() += g * as_matrix(w_val, Din, Dout).transpose();
    }
  });
}

template <typename S>
Var mean_pool_tc(Tape<S>& tape, Var input) {
  const auto& x = tape.value(input);
  if (x.rank() != 4) shape_error("mean_pool_tc", "input must be [B,T,C,F]");
  const std::size_t B = x.dim(0), P = x.dim(1) * x.dim(2), F = x.dim(3);
  BasicTensor<S> out({B, F});
  const S inv = S(1) / static_cast<S>(P);
  for (std::size_t b = 0; b < B; ++b) {
    as_matrix(out, B, F).row(static_cast<Eigen::Index>(b)) =
        ConstMatMap<S>(x.data() + b * P * F, static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(F))
            .colwise()
            .sum() *
        inv;
  }
  return tape.record(std::move(out), {input}, [B, P, F, inv](Tape<S>& tp, std::size_t self) {
    auto* gx = tp.input_grad(tp.input_index(self, 0));
    if (!gx) return;
    const auto& g = tp.grad_at(self);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t p = 0; p < P; ++p) {
        S* dst = gx->data() + (b * P + p) * F;
        const S* src = g.data() + b * F;
        for (std::size_t f = 0; f < F; ++f) dst[f] += src[f] * inv;
      }
    }
  });
}

template <typename S>
Var relu(Tape<S>& tape, Var x) {
  const auto& v = tape.value(x);
  BasicTensor<S> out(v.shape());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > S(0) ? v[i] : S(0);
  return tape.record(std::move(out), {x}, [](Tape<S>& tp, std::size_t self) {
    auto* gx = tp.input_grad(tp.input_index(self, 0));
    if (!gx) return;
    const auto& in = tp.value_at(tp.input_index(self, 0));
    const auto& g = tp.grad_at(self);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (in[i] > S(0)) (*gx)[i] += g[i];
    }
  });
}

template <typename S>
Var sigmoid(Tape<S>& tape, Var x) {
  const auto& v = tape.value(x);
  BasicTensor<S> out(v.shape());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = S(1) / (S(1) + std::exp(-v[i]));
  return tape.record(std::move(out), {x}, [](Tape<S>& tp, std::size_t self) {
    auto* gx = tp.input_grad(tp.input_index(self, 0));
    if (!gx) return;
    const auto& y = tp.value_at(self);
    const auto& g = tp.grad_at(self);
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * y[i] * (S(1) - y[i]);
  });
}

template <typename S>
Var add(Tape<S>& tape, Var a, Var b) {
  const auto& va = tape.value(a);
  const auto& vb = tape.value(b);
  if (va.shape() != vb.shape()) {
    shape_error("add", shape_to_string(va.shape()) + " vs " + shape_to_string(vb.shape()));
  }
  BasicTensor<S> out(va.shape());
  for (std::size_t i = 0; i < va.size(); ++i) out[i] = va[i] + vb[i];
  return tape.record(std::move(out), {a, b}, [](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad_at(self);
    for (std::size_t slot = 0; slot < 2; ++slot) {
      if (auto* gi = tp.input_grad(tp.input_index(self, slot))) {
        for (std::size_t i = 0; i < g.size(); ++i) (*gi)[i] += g[i];
      }
    }
  });
}

template <typename S>
Var mul(Tape<S>& tape, Var a, Var b) {
  const auto& va = tape.value(a);
  const auto& vb = tape.value(b);
  if (va.shape() != vb.shape()) {
    shape_error("mul", shape_to_string(va.shape()) + " vs " + shape_to_string(vb.shape()));
  }
  BasicTensor<S> out(va.shape());
  for (std::size_t i = 0; i < va.size(); ++i) out[i] = va[i] * vb[i];
  return tape.record(std::move(out), {a, b}, [](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad_at(self);
    const auto& xa = tp.value_at(tp.input_index(self, 0));
    const auto& xb = tp.value_at(tp.input_index(self, 1));
    if (auto* ga = tp.input_grad(tp.input_index(self, 0))) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * xb[i];
    }
    if (auto* gb = tp.input_grad(tp.input_index(self, 1))) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * xa[i];
    }
  });
}

template <typename S>
Var scale_broadcast(Tape<S>& tape, Var features, Var weights) {
  const auto& x = tape.value(features);
  const auto& w = tape.value(weights);
  if (x.rank() != 4 || w.rank() != 2 || w.dim(0) != x.dim(0) || w.dim(1) != x.dim(3)) {
    shape_error("scale_broadcast", shape_to_string(x.shape()) + " vs " + shape_to_string(w.shape()));
  }
  const std::size_t B = x.dim(0), P = x.dim(1) * x.dim(2), F = x.dim(3);
  BasicTensor<S> out(x.shape());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t p = 0; p < P; ++p) {
      const std::size_t base = (b * P + p) * F;
      for (std::size_t f = 0; f < F; ++f) out[base + f] = x[base + f] * w[b * F + f];
    }
  }
  return tape.record(std::move(out), {features, weights}, [B, P, F](Tape<S>& tp, std::size_t self) {
    const auto& g = tp.grad_at(self);
    const auto& xv = tp.value_at(tp.input_index(self, 0));
    const auto& wv = tp.value_at(tp.input_index(self, 1));
    auto* gx = tp.input_grad(tp.input_index(self, 0));
    auto* gw = tp.input_grad(tp.input_index(self, 1));
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t p = 0; p < P; ++p) {
        const std::size_t base = (b * P + p) * F;
        for (std::size_t f = 0; f < F; ++f) {
          if (gx) (*gx)[base + f] += g[base + f] * wv[b * F + f];
          if (gw) (*gw)[b * F + f] += g[base + f] * xv[base + f];
        }
      }
    }
  });
}

template <typename S>
Var scale(Tape<S>& tape, Var x, S factor) {
  const auto& v = tape.value(x);
  BasicTensor<S> out(v.shape());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * factor;
  return tape.record(std::move(out), {x}, [factor](Tape<S>& tp, std::size_t self) {
    auto* gx = tp.input_grad(tp.input_index(self, 0));
    if (!gx) return;
    const auto& g = tp.grad_at(self);
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * factor;
  });
}

template <typename S>
Var reshape(Tape<S>& tape, Var x, Shape shape) {
  BasicTensor<S> out = tape.value(x).reshaped(std::move(shape));
  return tape.record(std::move(out), {x}, [](Tape<S>& tp, std::size_t self) {
    auto* gx = tp.input_grad(tp.input_index(self, 0));
    if (!gx) return;
    const auto& g = tp.grad_at(self);
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
  });
}

template <typename S>
Var sum(Tape<S>& tape, Var x) {
  const auto& v = tape.value(x);
  S total = S(0);
  for (S e : v.values()) total += e;
  return tape.record(BasicTensor<S>({1}, std::vector<S>{total}), {x}, [](Tape<S>& tp, std::size_t self) {
    auto* gx = tp.input_grad(tp.input_index(self, 0));
    if (!gx) return;
    const S g = tp.grad_at(self)[0];
    for (auto& e : gx->values()) e += g;
  });
}

template <typename S>
Var dropout(Tape<S>& tape, Var x, double rate, bool training, std::mt19937_64& rng) {
  if (!training || rate <= 0.0) return x;
  if (rate >= 1.0) throw Error(ErrorCode::invalid_value, "dropout rate must be < 1");
  const auto& v = tape.value(x);
  const S keep_scale = static_cast<S>(1.0 / (1.0 - rate));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<S> mask(v.size());
  BasicTensor<S> out(v.shape());
  for (std::size_t i = 0; i < v.size(); ++i) {
    mask[i] = unit(rng) < rate ? S(0) : keep_scale;
    out[i] = v[i] * mask[i];
  }
  return tape.record(std::move(out), {x}, [mask = std::move(mask)](Tape<S>& tp, std::size_t self) {
    auto* gx = tp.input_grad(tp.input_index(self, 0));
    if (!gx) return;
    const auto& g = tp.grad_at(self);
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * mask[i];
  });
}

template <typename S>
Var mae_loss(Tape<S>& tape, Var prediction, const BasicTensor<S>& target) {
  const auto& p = tape.value(prediction);
  if (p.shape() != target.shape()) {
    shape_error("mae_loss", shape_to_string(p.shape()) + " vs target " + shape_to_string(target.shape()));
  }
  if (p.empty()) throw Error(ErrorCode::empty_batch, "mae_loss of an empty batch");
  const S inv = S(1) / static_cast<S>(p.size());
  std::vector<S> sign(p.size());
  S total = S(0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const S diff = p[i] - target[i];
    total += std::abs(diff);
    sign[i] = diff > S(0) ? S(1) : (diff < S(0) ? S(-1) : S(0));
  }
  return tape.record(BasicTensor<S>({1}, std::vector<S>{total * inv}), {prediction},
                     [sign = std::move(sign), inv](Tape<S>& tp, std::size_t self) {
                       auto* gx = tp.input_grad(tp.input_index(self, 0));
                       if (!gx) return;
                       const S g = tp.grad_at(self)[0] * inv;
                       for (std::size_t i = 0; i < sign.size(); ++i) (*gx)[i] += g * sign[i];
                     });
}

// --- Serialization -----------------------------------------------------------

namespace {

constexpr char kParamMagic[8] = {'W', 'I', 'O', 'P', 'A', 'R', 'A', 'M'};

template <typename U>
void put_le(std::ostream& out, U value) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw Error(ErrorCode::parse_failure, "truncated parameter block");
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

template <typename S>
void write_parameters(std::ostream& out, const ParameterList<S>& params) {
  out.write(kParamMagic, sizeof(kParamMagic));
  put_le<std::uint32_t>(out, kParameterFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) put_le<std::uint64_t>(out, d);
    for (S v : p.value.values()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  if (!out) throw Error(ErrorCode::io_failure, "failed writing parameters");
}

template <typename S>
ParameterList<S> read_parameters(std::istream& in) {
  char magic[sizeof(kParamMagic)];
  if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), kParamMagic)) {
    throw Error(ErrorCode::parse_failure, "not a parameter block (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kParameterFormatVersion) {
    throw Error(ErrorCode::parse_failure, "unsupported parameter format version " + std::to_string(version));
  }
  const auto count = get_le<std::uint32_t>(in);
  ParameterList<S> params;
  params.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = get_le<std::uint32_t>(in);
    if (name_len > 4096) throw Error(ErrorCode::parse_failure, "implausible parameter name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw Error(ErrorCode::parse_failure, "truncated parameter name");
    const auto rank = get_le<std::uint32_t>(in);
    if (rank > 8) throw Error(ErrorCode::parse_failure, "implausible tensor rank");
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get_le<std::uint64_t>(in));
    const std::size_t n = shape_size(shape);
    if (n > (std::size_t{1} << 28)) throw Error(ErrorCode::parse_failure, "implausible tensor size");
    std::vector<S> data(n);
    for (auto& v : data) v = static_cast<S>(std::bit_cast<float>(get_le<std::uint32_t>(in)));
    params.push_back({std::move(name), BasicTensor<S>(std::move(shape), std::move(data))});
  }
  return params;
}

// --- Instantiations ----------------------------------------------------------

#define WIO_INSTANTIATE_AD(S)                                                              \
  template class Tape<S>;                                                                  \
  template Gradients<S> backward<S>(Tape<S>&, Var);                                        \
  template Var conv2d<S>(Tape<S>&, Var, Var, Var, std::size_t);                            \
  template Var dense<S>(Tape<S>&, Var, Var, Var);                                          \
  template Var mean_pool_tc<S>(Tape<S>&, Var);                                             \
  template Var relu<S>(Tape<S>&, Var);                                                     \
  template Var sigmoid<S>(Tape<S>&, Var);                                                  \
  template Var add<S>(Tape<S>&, Var, Var);                                                 \
  template Var mul<S>(Tape<S>&, Var, Var);                                                 \
  template Var scale_broadcast<S>(Tape<S>&, Var, Var);                                     \
  template Var scale<S>(Tape<S>&, Var, S);                                                 \
  template Var reshape<S>(Tape<S>&, Var, Shape);                                           \
  template Var sum<S>(Tape<S>&, Var);                                                      \
  template Var dropout<S>(Tape<S>&, Var, double, bool, std::mt19937_64&);                  \
  template Var mae_loss<S>(Tape<S>&, Var, const BasicTensor<S>&);                          \
  template void write_parameters<S>(std::ostream&, const ParameterList<S>&);               \
  template ParameterList<S> read_parameters<S>(std::istream&);

WIO_INSTANTIATE_AD(float)
WIO_INSTANTIATE_AD(double)

#undef WIO_INSTANTIATE_AD

}  // namespace wio::ad
