#include "wio/network.hpp"

#include <algorithm>
#include <cmath>

namespace wio::net {

namespace {

// The default architecture is fixed at compile time: (10,8,64) -> (5,8,64) ->
// (3,8,64) -> 1536 -> 3. Changing a default constant breaks the build here.
constexpr std::size_t kDefaultLen1 = ad::conv_geometry(kDefaultWindow, kDefaultKernel, 2).out_len;
constexpr std::size_t kDefaultLen2 = ad::conv_geometry(kDefaultLen1, kDefaultKernel, 2).out_len;
static_assert(kDefaultWindow == 10 && kChannels == 8 && kDefaultFilters == 64, "stem output must be (10,8,64)");
static_assert(kDefaultRrmBlocks == 2, "default network has two RRMs");
static_assert(kDefaultLen1 == 5, "first RRM output must be (5,8,64)");
static_assert(kDefaultLen2 == 3, "second RRM output must be (3,8,64)");
static_assert(kDefaultLen2 * kChannels * kDefaultFilters == 1536, "flatten size must be 1536");

constexpr std::size_t remnet_parameters(std::size_t F, std::size_t K, std::size_t R, std::size_t blocks,
                                        std::size_t flat, std::size_t out) {
  const std::size_t Fr = F / R;
  const std::size_t rrm = (K * F * F + F)    // residual conv
                          + (F * Fr + Fr)    // SE bottleneck
                          + (Fr * F + F)     // SE expansion
                          + (K * F * F + F)  // reduction, K x 1 branch
                          + (F * F + F);     // reduction, 1 x 1 branch
  return (K * F + F) + blocks * rrm + flat * out + out;
}
static_assert(remnet_parameters(kDefaultFilters, kDefaultKernel, kDefaultSeRatio, kDefaultRrmBlocks, 1536, 3) ==
                  kDefaultParameterCount,
              "default parameter count changed");

}  // namespace

std::string_view to_string(Variant v) noexcept {
  return v == Variant::ffnn ? "ffnn" : "remnet2d";
}

Variant parse_variant(std::string_view text) {
  if (text == "remnet2d") return Variant::remnet2d;
  if (text == "ffnn") return Variant::ffnn;
  throw Error(ErrorCode::invalid_value, "unknown model variant '" + std::string(text) + "'");
}

void ModelSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::invalid_spec, msg); };
  if (window == 0) fail("window must be >= 1");
  if (channels != kChannels) fail("channels must equal the 8 measurement channels");
  if (output_dim != 3) fail("output_dim must be 3");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must lie in [0, 1)");
  if (!(output_scale > 0.0) || !std::isfinite(output_scale)) fail("output_scale must be positive");
  if (variant == Variant::ffnn) {
    if (std::any_of(ffnn_hidden.begin(), ffnn_hidden.end(), [](std::size_t h) { return h == 0; })) {
      fail("ffnn hidden layer sizes must be >= 1");
    }
    return;
  }
  if (filters == 0 || kernel == 0 || se_ratio == 0) fail("filters, kernel and se_ratio must be >= 1");
  if (filters % se_ratio != 0) {
    fail("filters (" + std::to_string(filters) + ") must be divisible by se_ratio (" +
         std::to_string(se_ratio) + ")");
  }
  if (rrm_blocks >= 8 || window < (std::size_t{1} << rrm_blocks)) {
    fail("window must be >= 2^rrm_blocks");
  }
  // Every convolution sees at least `kernel` time steps.
  std::size_t len = window;
  for (std::size_t i = 0; i < rrm_blocks; ++i) {
    if (kernel > len) fail("kernel exceeds the time length at RRM " + std::to_string(i));
    len = (len + 1) / 2;
  }
  if (kernel > window) fail("kernel exceeds window");
}

std::vector<ad::Shape> shape_trace(const ModelSpec& spec) {
  spec.validate();
  std::vector<ad::Shape> trace;
  if (spec.variant == Variant::ffnn) {
    trace.push_back({spec.window * spec.channels});
    for (std::size_t h : spec.ffnn_hidden) trace.push_back({h});
    trace.push_back({spec.output_dim});
    return trace;
  }
  std::size_t len = spec.window;
  trace.push_back({len, spec.channels, spec.filters});
  for (std::size_t i = 0; i < spec.rrm_blocks; ++i) {
    len = ad::conv_geometry(len, spec.kernel, 2).out_len;
    trace.push_back({len, spec.channels, spec.filters});
  }
  trace.push_back({len * spec.channels * spec.filters});
  trace.push_back({spec.output_dim});
  return trace;
}

std::size_t parameter_count(const ModelSpec& spec) {
  const auto trace = shape_trace(spec);
  if (spec.variant == Variant::ffnn) {
    std::size_t total = 0;
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) total += trace[i][0] * trace[i + 1][0] + trace[i + 1][0];
    return total;
  }
  return remnet_parameters(spec.filters, spec.kernel, spec.se_ratio, spec.rrm_blocks, trace[trace.size() - 2][0],
                           spec.output_dim);
}

template <typename S>
const ad::BasicTensor<S>& ModelState<S>::param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return p.value;
  }
  throw Error(ErrorCode::invalid_spec, "no parameter named '" + std::string(name) + "'");
}

template <typename S>
ad::BasicTensor<S>& ModelState<S>::param(std::string_view name) {
  return const_cast<ad::BasicTensor<S>&>(std::as_const(*this).param(name));
}

template <typename S>
std::size_t ModelState<S>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

template <typename S>
bool ModelState<S>::all_finite() const {
  return std::all_of(params.begin(), params.end(), [](const auto& p) { return p.value.all_finite(); });
}

namespace {

template <typename S>
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  // Uniform with variance gain / fan_in: gain 2 ahead of a ReLU, 1 for linear outputs.
  void weight(ad::ParameterList<S>& out, std::string name, ad::Shape shape, std::size_t fan_in, double gain = 2.0) {
    const double limit = std::sqrt(3.0 * gain / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    ad::BasicTensor<S> t(std::move(shape));
    for (auto& v : t.values()) v = static_cast<S>(dist(rng_));
    out.push_back({std::move(name), std::move(t)});
  }
  void bias(ad::ParameterList<S>& out, std::string name, std::size_t n) {
    out.push_back({std::move(name), ad::BasicTensor<S>({n})});
  }

 private:
  std::mt19937_64 rng_;
};

// Small head so the untrained model predicts near-zero increments instead of
// noise several times larger than the labels.
constexpr double kHeadGain = 0.01;

std::string rrm_name(std::size_t i, const char* leaf) { return "rrm" + std::to_string(i) + "/" + leaf; }

}  // namespace

template <typename S>
ModelState<S> build(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ModelState<S> m;
  m.spec = spec;
  m.seed = seed;
  Initializer<S> init(seed);
  auto& p = m.params;
  const auto trace = shape_trace(spec);

  if (spec.variant == Variant::ffnn) {
    for (std::size_t i = 0; i + 2 < trace.size(); ++i) {
      const std::string prefix = "fc" + std::to_string(i);
      init.weight(p, prefix + "/weight", {trace[i][0], trace[i + 1][0]}, trace[i][0]);
      init.bias(p, prefix + "/bias", trace[i + 1][0]);
    }
  } else {
    const std::size_t F = spec.filters, K = spec.kernel, Fr = F / spec.se_ratio;
    init.weight(p, "stem/kernel", {K, 1, 1, F}, K);
    init.bias(p, "stem/bias", F);
    for (std::size_t i = 0; i < spec.rrm_blocks; ++i) {
      init.weight(p, rrm_name(i, "res/kernel"), {K, 1, F, F}, K * F);
      init.bias(p, rrm_name(i, "res/bias"), F);
      init.weight(p, rrm_name(i, "se/w1"), {F, Fr}, F);
      init.bias(p, rrm_name(i, "se/b1"), Fr);
      init.weight(p, rrm_name(i, "se/w2"), {Fr, F}, Fr, 1.0);
      init.bias(p, rrm_name(i, "se/b2"), F);
      // The two reduction branches are summed, so each gets half the variance.
      init.weight(p, rrm_name(i, "red_k/kernel"), {K, 1, F, F}, K * F, 0.5);
      init.bias(p, rrm_name(i, "red_k/bias"), F);
      init.weight(p, rrm_name(i, "red_1/kernel"), {1, 1, F, F}, F, 0.5);
      init.bias(p, rrm_name(i, "red_1/bias"), F);
    }
  }
  const std::size_t flat = trace[trace.size() - 2][0];
  init.weight(p, "head/weight", {flat, spec.output_dim}, flat, kHeadGain);
  init.bias(p, "head/bias", spec.output_dim);
  return m;
}

template <typename S>
ad::Var se_attention(ad::Tape<S>& tape, ad::Var features, const SeParams& p) {
  ad::Var pooled = ad::mean_pool_tc(tape, features);
  ad::Var squeezed = ad::relu(tape, ad::dense(tape, pooled, p.w1, p.b1));
  return ad::sigmoid(tape, ad::dense(tape, squeezed, p.w2, p.b2));
}

template <typename S>
ad::Var se_block(ad::Tape<S>& tape, ad::Var features, const SeParams& p) {
  return ad::scale_broadcast(tape, features, se_attention(tape, features, p));
}

namespace {

void expect_shape(const ad::Shape& actual, std::size_t batch, const ad::Shape& expected, const char* where) {
  ad::Shape full{batch};
  full.insert(full.end(), expected.begin(), expected.end());
  if (actual != full) {
    throw Error(ErrorCode::shape_mismatch, std::string(where) + ": got " + ad::shape_to_string(actual) +
                                               ", expected " + ad::shape_to_string(full));
  }
}

}  // namespace

template <typename S>
ad::Var forward_graph(ad::Tape<S>& tape, const ModelState<S>& model, ad::Var input, bool training,
                      std::mt19937_64& rng) {
  const ModelSpec& spec = model.spec;
  const auto trace = shape_trace(spec);
  auto param = [&](const std::string& name) { return tape.parameter(name, model.param(name)); };
  const std::size_t B = tape.shape(input).empty() ? 0 : tape.shape(input)[0];

  ad::Var x = input;
  if (spec.variant == Variant::ffnn) {
    expect_shape(tape.shape(input), B, trace[0], "ffnn input");
    for (std::size_t i = 0; i + 2 < trace.size(); ++i) {
      const std::string prefix = "fc" + std::to_string(i);
      x = ad::relu(tape, ad::dense(tape, x, param(prefix + "/weight"), param(prefix + "/bias")));
    }
  } else {
    expect_shape(tape.shape(input), B, {spec.window, spec.channels, 1}, "remnet input");
    x = ad::relu(tape, ad::conv2d(tape, x, param("stem/kernel"), param("stem/bias"), 1));
    expect_shape(tape.shape(x), B, trace[0], "stem");
    for (std::size_t i = 0; i < spec.rrm_blocks; ++i) {
      // Res: x + SE(relu(conv(x)))
      ad::Var r = ad::relu(tape, ad::conv2d(tape, x, param(rrm_name(i, "res/kernel")),
                                            param(rrm_name(i, "res/bias")), 1));
      const SeParams se{param(rrm_name(i, "se/w1")), param(rrm_name(i, "se/b1")),
                        param(rrm_name(i, "se/w2")), param(rrm_name(i, "se/b2"))};
      x = ad::add(tape, x, se_block(tape, r, se));
      // Red: two stride-2 branches, summed.
      ad::Var wide = ad::conv2d(tape, x, param(rrm_name(i, "red_k/kernel")), param(rrm_name(i, "red_k/bias")), 2);
      ad::Var narrow = ad::conv2d(tape, x, param(rrm_name(i, "red_1/kernel")), param(rrm_name(i, "red_1/bias")), 2);
      x = ad::add(tape, wide, narrow);
      expect_shape(tape.shape(x), B, trace[i + 1], "rrm");
    }
    x = ad::reshape(tape, x, {B, trace[trace.size() - 2][0]});
  }
  x = ad::dropout(tape, x, spec.dropout_rate, training, rng);
  x = ad::dense(tape, x, param("head/weight"), param("head/bias"));
  expect_shape(tape.shape(x), B, trace.back(), "head");
  return ad::scale(tape, x, static_cast<S>(spec.output_scale));
}

template <typename S>
ad::BasicTensor<S> make_input(const ModelSpec& spec, std::span<const MeasurementWindow* const> windows,
                              const Normalizer& norm) {
  const std::size_t B = windows.size(), T = spec.window, C = spec.channels;
  ad::Shape shape = spec.variant == Variant::ffnn ? ad::Shape{B, T * C} : ad::Shape{B, T, C, 1};
  ad::BasicTensor<S> input(std::move(shape));
  for (std::size_t b = 0; b < B; ++b) {
    const MeasurementWindow& w = *windows[b];
    if (w.size() != T) {
      throw Error(ErrorCode::shape_mismatch,
                  "window has " + std::to_string(w.size()) + " samples, model expects " + std::to_string(T));
    }
    for (std::size_t t = 0; t < T; ++t) {
      const auto z = norm.normalize(w[t]);
      for (std::size_t c = 0; c < C; ++c) input[(b * T + t) * C + c] = static_cast<S>(z[c]);
    }
  }
  return input;
}

template <typename S>
std::vector<RelativePose> predict(const ModelState<S>& model, std::span<const MeasurementWindow* const> windows,
                                  const Normalizer& norm, std::size_t batch_size) {
  std::vector<RelativePose> out;
  out.reserve(windows.size());
  std::mt19937_64 unused_rng(0);
  batch_size = std::max<std::size_t>(batch_size, 1);
  for (std::size_t start = 0; start < windows.size(); start += batch_size) {
    const auto chunk = windows.subspan(start, std::min(batch_size, windows.size() - start));
    ad::Tape<S> tape;
    ad::Var input = tape.constant(make_input<S>(model.spec, chunk, norm));
    const auto& y = tape.value(forward_graph(tape, model, input, false, unused_rng));
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      out.push_back({static_cast<double>(y[b * 3]), static_cast<double>(y[b * 3 + 1]),
                     static_cast<double>(y[b * 3 + 2])});
    }
  }
  return out;
}

template <typename S>
RelativePose forward(const ModelState<S>& model, const MeasurementWindow& window, const Normalizer& norm) {
  const MeasurementWindow* ptr = &window;
  return predict(model, std::span<const MeasurementWindow* const>(&ptr, 1), norm, 1).front();
}

#define WIO_INSTANTIATE_NET(S)                                                                          \
  template struct ModelState<S>;                                                                        \
  template ModelState<S> build<S>(const ModelSpec&, std::uint64_t);                                     \
  template ad::Var forward_graph<S>(ad::Tape<S>&, const ModelState<S>&, ad::Var, bool, std::mt19937_64&); \
  template ad::Var se_attention<S>(ad::Tape<S>&, ad::Var, const SeParams&);                             \
  template ad::Var se_block<S>(ad::Tape<S>&, ad::Var, const SeParams&);                                 \
  template ad::BasicTensor<S> make_input<S>(const ModelSpec&, std::span<const MeasurementWindow* const>, \
                                            const Normalizer&);                                         \
  template RelativePose forward<S>(const ModelState<S>&, const MeasurementWindow&, const Normalizer&);   \
  template std::vector<RelativePose> predict<S>(const ModelState<S>&,                                   \
                                                std::span<const MeasurementWindow* const>,              \
                                                const Normalizer&, std::size_t);

WIO_INSTANTIATE_NET(float)
WIO_INSTANTIATE_NET(double)

#undef WIO_INSTANTIATE_NET

}  // namespace wio::net
