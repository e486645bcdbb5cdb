#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "wio/autodiff.hpp"
#include "wio/core_types.hpp"
#include "wio/network.hpp"
#include "wio/normalizer.hpp"

namespace wio::train {

template <typename S>
struct AdamState {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step = 0;
  std::vector<ad::BasicTensor<S>> first_moment;
  std::vector<ad::BasicTensor<S>> second_moment;

  /// Zeroed moments mirroring `params`.
  static AdamState for_parameters(const ad::ParameterList<S>& params, double learning_rate);
};

/// One bias-corrected Adam update of every parameter that has a gradient.
template <typename S>
void adam_step(ad::ParameterList<S>& params, const ad::Gradients<S>& grads, AdamState<S>& state);

/// Mean over the batch and the three components of |pred - target|.
double mae_loss(std::span<const RelativePose> pred, std::span<const RelativePose> target);

struct Sample {
  MeasurementWindow window;
  RelativePose label;
};

/// For every n >= T: the window of samples n-T+1..n paired with the
/// ground-truth increment from gt[n-1] to gt[n].
std::vector<Sample> make_labels(const TrajectoryLog& log, std::size_t window);

struct TrainConfig {
  std::size_t batch_size = 32;
  double lr_batch = 1e-4;
  double lr_online = 7e-5;
  std::size_t epochs = 50;
  std::size_t patience = 5;  // 0 disables early stopping
  bool shuffle = true;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Shared update: builds the graph for `batch`, applies MAE + Adam, returns the
/// batch loss. Both trainers call this, so a batch produces the same update
/// whichever regime drives it.
template <typename S>
double train_step(net::ModelState<S>& model, AdamState<S>& adam, std::span<const Sample* const> batch,
                  const Normalizer& norm, std::mt19937_64& dropout_rng);

struct EpochStats {
  std::size_t epoch = 0;
  double train_mae = 0.0;
  double validation_mae = 0.0;  // NaN when there is no validation split
};

struct BatchResult {
  Normalizer normalizer;
  double initial_train_mae = 0.0;
  double initial_validation_mae = 0.0;
  std::vector<EpochStats> curve;
  std::vector<double> step_losses;
  std::size_t updates = 0;
  std::size_t best_epoch = 0;
};

/// Offline training: contiguous train/validation split (validation is the
/// tail), shuffled mini-batches, early stopping on validation MAE with the best
/// parameters restored. `normalizer` defaults to statistics fitted on the
/// training split.
template <typename S>
BatchResult train_batch(net::ModelState<S>& model, std::span<const Sample> dataset, const TrainConfig& cfg,
                        std::optional<Normalizer> normalizer = std::nullopt);

struct OnlineResult {
  Normalizer normalizer;  // frozen snapshot after the last sample
  std::vector<double> batch_losses;
  std::size_t updates = 0;
};

/// Called after every update with (update index, loss, model).
template <typename S>
using UpdateCallback = std::function<void(std::size_t, double, const net::ModelState<S>&)>;

/// Incremental form of train_online for data that arrives piecewise (for
/// example log by log). Holds the optimizer state, the running normalizer and
/// the partially filled batch between calls.
template <typename S>
class OnlineTrainer {
 public:
  OnlineTrainer(net::ModelState<S>& model, const TrainConfig& cfg, Normalizer normalizer = Normalizer::running(),
                UpdateCallback<S> on_update = {});

  /// Adds one sample; returns true when it completed a batch and triggered an update.
  bool push(const Sample& sample);

  std::size_t updates() const noexcept { return losses_.size(); }
  const std::vector<double>& losses() const noexcept { return losses_; }
  std::size_t pending() const noexcept { return pending_.size(); }
  /// Frozen snapshot of the current statistics.
  Normalizer normalizer() const { return normalizer_.snapshot(); }

 private:
  net::ModelState<S>& model_;
  TrainConfig cfg_;
  Normalizer normalizer_;
  UpdateCallback<S> on_update_;
  AdamState<S> adam_;
  std::mt19937_64 dropout_rng_;
  std::vector<Sample> pending_;
  std::vector<double> losses_;
};

/// Streaming training: samples are consumed in order, every B consecutive
/// samples trigger one update, the incomplete tail is discarded. A running
/// normalizer is updated per sample and frozen for the duration of each batch.
template <typename S>
OnlineResult train_online(net::ModelState<S>& model, std::span<const Sample> stream, const TrainConfig& cfg,
                          Normalizer normalizer = Normalizer::running(),
                          const UpdateCallback<S>& on_update = {});

/// Inference-mode MAE of `model` on `samples`.
template <typename S>
double evaluate_mae(const net::ModelState<S>& model, std::span<const Sample> samples, const Normalizer& norm);

}  // namespace wio::train
