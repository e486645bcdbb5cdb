#include "wio/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wio/se2.hpp"

namespace wio::train {

template <typename S>
AdamState<S> AdamState<S>::for_parameters(const ad::ParameterList<S>& params, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.value.shape());
    s.second_moment.emplace_back(p.value.shape());
  }
  return s;
}

template <typename S>
void adam_step(ad::ParameterList<S>& params, const ad::Gradients<S>& grads, AdamState<S>& state) {
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw Error(ErrorCode::shape_mismatch, "optimizer moments do not mirror the parameter list");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const S b1 = static_cast<S>(state.beta1);
  const S b2 = static_cast<S>(state.beta2);
  const S c1 = static_cast<S>(1.0 / (1.0 - std::pow(state.beta1, t)));
  const S c2 = static_cast<S>(1.0 / (1.0 - std::pow(state.beta2, t)));
  const S lr = static_cast<S>(state.learning_rate);
  const S eps = static_cast<S>(state.epsilon);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto it = grads.find(params[i].name);
    if (it == grads.end()) continue;
    auto& p = params[i].value;
    const auto& g = it->second;
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    if (g.shape() != p.shape() || m.shape() != p.shape() || v.shape() != p.shape()) {
      throw Error(ErrorCode::shape_mismatch, "gradient shape differs for " + params[i].name);
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (S(1) - b1) * g[k];
      v[k] = b2 * v[k] + (S(1) - b2) * g[k] * g[k];
      p[k] -= lr * (m[k] * c1) / (std::sqrt(v[k] * c2) + eps);
    }
  }
}

double mae_loss(std::span<const RelativePose> pred, std::span<const RelativePose> target) {
  if (pred.size() != target.size()) {
    throw Error(ErrorCode::length_mismatch, "prediction and target batches differ in size");
  }
  if (pred.empty()) throw Error(ErrorCode::empty_batch, "mae_loss of an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    total += std::abs(pred[i].dx - target[i].dx) + std::abs(pred[i].dy - target[i].dy) +
             std::abs(pred[i].dtheta - target[i].dtheta);
  }
  return total / (3.0 * static_cast<double>(pred.size()));
}

std::vector<Sample> make_labels(const TrajectoryLog& log, std::size_t window) {
  if (window == 0) throw Error(ErrorCode::invalid_value, "window must be >= 1");
  if (log.size() < window) {
    throw Error(ErrorCode::log_too_short, "log has " + std::to_string(log.size()) + " samples, window needs " +
                                              std::to_string(window));
  }
  if (log.gt_poses.size() != log.size()) throw Error(ErrorCode::length_mismatch, "log is not aligned");
  std::vector<Sample> out;
  out.reserve(log.size() - window);
  const std::span<const Measurement> all(log.measurements);
  for (std::size_t n = window; n < log.size(); ++n) {
    out.push_back({window_from_stream(all.first(n + 1), window),
                   se2::relative_between(log.gt_poses[n - 1], log.gt_poses[n])});
  }
  return out;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw Error(ErrorCode::invalid_config, "batch_size must be >= 1");
  if (!(lr_batch >= 0.0) || !(lr_online >= 0.0)) {
    throw Error(ErrorCode::invalid_config, "learning rates must be non-negative");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_config, "validation_fraction must lie in [0, 1)");
  }
}

template <typename S>
double train_step(net::ModelState<S>& model, AdamState<S>& adam, std::span<const Sample* const> batch,
                  const Normalizer& norm, std::mt19937_64& dropout_rng) {
  if (batch.empty()) throw Error(ErrorCode::empty_batch, "train_step on an empty batch");
  std::vector<const MeasurementWindow*> windows;
  windows.reserve(batch.size());
  ad::BasicTensor<S> target({batch.size(), 3});
  for (std::size_t b = 0; b < batch.size(); ++b) {
    windows.push_back(&batch[b]->window);
    target[b * 3] = static_cast<S>(batch[b]->label.dx);
    target[b * 3 + 1] = static_cast<S>(batch[b]->label.dy);
    target[b * 3 + 2] = static_cast<S>(batch[b]->label.dtheta);
  }
  ad::Tape<S> tape;
  ad::Var input = tape.constant(net::make_input<S>(model.spec, windows, norm));
  ad::Var output = net::forward_graph(tape, model, input, true, dropout_rng);
  ad::Var loss = ad::mae_loss(tape, output, target);
  const double loss_value = static_cast<double>(tape.value(loss)[0]);
  const auto grads = ad::backward(tape, loss);
  adam_step(model.params, grads, adam);
  return loss_value;
}

template <typename S>
double evaluate_mae(const net::ModelState<S>& model, std::span<const Sample> samples, const Normalizer& norm) {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<const MeasurementWindow*> windows;
  std::vector<RelativePose> targets;
  windows.reserve(samples.size());
  targets.reserve(samples.size());
  for (const auto& s : samples) {
    windows.push_back(&s.window);
    targets.push_back(s.label);
  }
  return mae_loss(net::predict(model, windows, norm), targets);
}

namespace {

constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;

}  // namespace

template <typename S>
BatchResult train_batch(net::ModelState<S>& model, std::span<const Sample> dataset, const TrainConfig& cfg,
                        std::optional<Normalizer> normalizer) {
  cfg.validate();
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(dataset.size()) * cfg.validation_fraction));
  const std::size_t n_train = dataset.size() - n_val;
  if (n_train < cfg.batch_size) {
    throw Error(ErrorCode::insufficient_data, "training split has " + std::to_string(n_train) +
                                                  " samples, batch size is " + std::to_string(cfg.batch_size));
  }
  const auto train_set = dataset.first(n_train);
  const auto val_set = dataset.subspan(n_train);

  BatchResult result;
  if (normalizer) {
    result.normalizer = normalizer->snapshot();
  } else {
    Normalizer running = Normalizer::running();
    for (const auto& s : train_set) running.observe(s.window.newest());
    result.normalizer = running.snapshot();
  }
  const Normalizer& norm = result.normalizer;

  result.initial_train_mae = evaluate_mae(model, train_set, norm);
  result.initial_validation_mae = evaluate_mae(model, val_set, norm);

  AdamState<S> adam = AdamState<S>::for_parameters(model.params, cfg.lr_batch);
  std::mt19937_64 dropout_rng(cfg.seed);
  std::mt19937_64 shuffle_rng(cfg.seed ^ kShuffleStream);
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best_val = std::numeric_limits<double>::infinity();
  ad::ParameterList<S> best_params = model.params;
  std::size_t since_best = 0;
  std::vector<const Sample*> batch(cfg.batch_size);

  model.training = true;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t start = 0; start + cfg.batch_size <= n_train; start += cfg.batch_size) {
      for (std::size_t b = 0; b < cfg.batch_size; ++b) batch[b] = &train_set[order[start + b]];
      const double loss = train_step(model, adam, batch, norm, dropout_rng);
      result.step_losses.push_back(loss);
      epoch_loss += loss;
      ++epoch_steps;
      ++result.updates;
    }
    EpochStats stats{epoch, epoch_loss / static_cast<double>(epoch_steps), evaluate_mae(model, val_set, norm)};
    result.curve.push_back(stats);

    if (!val_set.empty()) {
      if (stats.validation_mae < best_val) {
        best_val = stats.validation_mae;
        best_params = model.params;
        result.best_epoch = epoch;
        since_best = 0;
      } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
        break;
      }
    }
  }
  model.training = false;
  if (!val_set.empty() && result.best_epoch > 0) model.params = std::move(best_params);
  if (val_set.empty()) result.best_epoch = result.curve.empty() ? 0 : result.curve.back().epoch;
  return result;
}

template <typename S>
OnlineTrainer<S>::OnlineTrainer(net::ModelState<S>& model, const TrainConfig& cfg, Normalizer normalizer,
                                UpdateCallback<S> on_update)
    : model_(model),
      cfg_(cfg),
      normalizer_(std::move(normalizer)),
      on_update_(std::move(on_update)),
      adam_(AdamState<S>::for_parameters(model.params, cfg.lr_online)),
      dropout_rng_(cfg.seed) {
  cfg_.validate();
  pending_.reserve(cfg_.batch_size);
}

template <typename S>
bool OnlineTrainer<S>::push(const Sample& sample) {
  normalizer_.observe(sample.window.newest());
  pending_.push_back(sample);
  if (pending_.size() < cfg_.batch_size) return false;

  std::vector<const Sample*> batch;
  batch.reserve(pending_.size());
  for (const auto& s : pending_) batch.push_back(&s);
  const Normalizer frozen = normalizer_.snapshot();
  model_.training = true;
  const double loss = train_step(model_, adam_, batch, frozen, dropout_rng_);
  model_.training = false;
  losses_.push_back(loss);
  pending_.clear();
  if (on_update_) on_update_(losses_.size(), loss, model_);
  return true;
}

template <typename S>
OnlineResult train_online(net::ModelState<S>& model, std::span<const Sample> stream, const TrainConfig& cfg,
                          Normalizer normalizer, const UpdateCallback<S>& on_update) {
  OnlineTrainer<S> trainer(model, cfg, std::move(normalizer), on_update);
  for (const Sample& sample : stream) trainer.push(sample);
  return {trainer.normalizer(), trainer.losses(), trainer.updates()};
}

#define WIO_INSTANTIATE_TRAIN(S)                                                                        \
  template struct AdamState<S>;                                                                         \
  template class OnlineTrainer<S>;                                                                      \
  template void adam_step<S>(ad::ParameterList<S>&, const ad::Gradients<S>&, AdamState<S>&);            \
  template double train_step<S>(net::ModelState<S>&, AdamState<S>&, std::span<const Sample* const>,     \
                                const Normalizer&, std::mt19937_64&);                                   \
  template double evaluate_mae<S>(const net::ModelState<S>&, std::span<const Sample>, const Normalizer&); \
  template BatchResult train_batch<S>(net::ModelState<S>&, std::span<const Sample>, const TrainConfig&,  \
                                      std::optional<Normalizer>);                                       \
  template OnlineResult train_online<S>(net::ModelState<S>&, std::span<const Sample>, const TrainConfig&, \
                                        Normalizer, const UpdateCallback<S>&);

WIO_INSTANTIATE_TRAIN(float)
WIO_INSTANTIATE_TRAIN(double)

#undef WIO_INSTANTIATE_TRAIN

}  // namespace wio::train
