#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/test_support.hpp"
#include "wio/simulator.hpp"
#include "wio/se2.hpp"
#include "wio/training.hpp"

using namespace wio;
using namespace wio::train;

namespace {

net::ModelSpec small_spec() {
  net::ModelSpec spec;
  spec.filters = 8;
  return spec;
}

std::vector<Sample> simulated(std::size_t n, std::uint64_t seed, ScenarioKind kind = ScenarioKind::Random,
                              const sim::NoiseModel& noise = sim::NoiseModel{}) {
  const double seconds = static_cast<double>(n + kDefaultWindow) / kDefaultSampleRate;
  const auto log = sim::generate({kind, seconds, kDefaultSampleRate, seed}, sim::RobotParams{}, noise);
  auto s = make_labels(log, kDefaultWindow);
  s.resize(std::min(s.size(), n));
  return s;
}

}  // namespace

TEST(MaeLoss, Examples) {
  const std::vector<RelativePose> a{{0.1, -0.2, 0.3}};
  EXPECT_EQ(mae_loss(a, a), 0.0);
  const std::vector<RelativePose> ones{{1, 1, 1}}, zeros{{0, 0, 0}};
  EXPECT_DOUBLE_EQ(mae_loss(ones, zeros), 1.0);
  const std::vector<RelativePose> p{{1, 2, 3}, {0, -1, 0.5}};
  const std::vector<RelativePose> t{{0, 0, 0}, {1, 1, 1}};
  EXPECT_DOUBLE_EQ(mae_loss(p, t), ((1 + 2 + 3) / 3.0 + (1 + 2 + 0.5) / 3.0) / 2.0);
  EXPECT_THROW(mae_loss(p, ones), Error);
  EXPECT_THROW(mae_loss({}, {}), Error);
}

TEST(Adam, ZeroGradientLeavesFreshParametersUnchanged) {
  ad::ParameterList<double> params{{"w", ad::BasicTensor<double>({3}, 0.7)}};
  auto state = AdamState<double>::for_parameters(params, 0.01);
  ad::Gradients<double> grads{{"w", ad::BasicTensor<double>({3})}};
  adam_step(params, grads, state);
  EXPECT_EQ(params[0].value, ad::BasicTensor<double>({3}, 0.7));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  const double lr = 1e-3;
  ad::ParameterList<double> params{{"w", ad::BasicTensor<double>({1}, 2.0)}};
  auto state = AdamState<double>::for_parameters(params, lr);
  ad::Gradients<double> grads{{"w", ad::BasicTensor<double>({1}, 1.0)}};
  adam_step(params, grads, state);
  // m_hat = v_hat = 1 after bias correction.
  EXPECT_NEAR(params[0].value[0], 2.0 - lr / (1.0 + state.epsilon), 1e-15);
  // A constant gradient keeps m_hat = v_hat = 1, so every step moves by lr.
  for (int i = 0; i < 9; ++i) adam_step(params, grads, state);
  EXPECT_NEAR(params[0].value[0], 2.0 - 10 * lr / (1.0 + state.epsilon), 1e-12);
}

TEST(Adam, MomentsDecayGeometrically) {
  ad::ParameterList<double> params{{"w", ad::BasicTensor<double>({1}, 0.0)}};
  auto state = AdamState<double>::for_parameters(params, 1e-3);
  adam_step(params, {{"w", ad::BasicTensor<double>({1}, 2.0)}}, state);
  const double m0 = state.first_moment[0][0];
  const double v0 = state.second_moment[0][0];
  EXPECT_DOUBLE_EQ(m0, 0.2);
  EXPECT_NEAR(v0, 0.004, 1e-15);
  for (int k = 1; k <= 50; ++k) {
    adam_step(params, {{"w", ad::BasicTensor<double>({1})}}, state);
    EXPECT_NEAR(state.first_moment[0][0], m0 * std::pow(0.9, k), 1e-15);
    EXPECT_NEAR(state.second_moment[0][0], v0 * std::pow(0.999, k), 1e-15);
  }
}

TEST(Adam, SkipsParametersWithoutGradient) {
  ad::ParameterList<double> params{{"a", ad::BasicTensor<double>({1}, 1.0)}, {"b", ad::BasicTensor<double>({1}, 1.0)}};
  auto state = AdamState<double>::for_parameters(params, 0.1);
  adam_step(params, {{"a", ad::BasicTensor<double>({1}, 1.0)}}, state);
  EXPECT_NE(params[0].value[0], 1.0);
  EXPECT_EQ(params[1].value[0], 1.0);
}

TEST(Labels, Counting) {
  auto log = wio::testing::random_log(10, 1);
  EXPECT_TRUE(make_labels(log, 10).empty());
  log = wio::testing::random_log(11, 1);
  const auto one = make_labels(log, 10);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].window.newest(), log.measurements[10]);
  EXPECT_EQ(one[0].window[0], log.measurements[1]);
  EXPECT_THROW(make_labels(wio::testing::random_log(9, 1), 10), Error);
}

TEST(Labels, LabelIsLastGroundTruthIncrement) {
  const auto log = sim::generate({ScenarioKind::A, 10.0, kDefaultSampleRate, 1}, sim::RobotParams{}, sim::NoiseModel{});
  const auto labels = make_labels(log, 10);
  ASSERT_EQ(labels.size(), log.size() - 10);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t n = i + 10;
    EXPECT_EQ(labels[i].window.newest(), log.measurements[n]);
    const Pose2D rebuilt = se2::boxplus(log.gt_poses[n - 1], labels[i].label);
    EXPECT_NEAR(rebuilt.x, log.gt_poses[n].x, 1e-12);
    EXPECT_NEAR(rebuilt.y, log.gt_poses[n].y, 1e-12);
  }
}

TEST(Labels, StationaryLogGivesZeroLabels) {
  const std::vector<sim::Twist> still(100);
  const auto log = sim::simulate_twists(still, LogMeta{}, sim::RobotParams{}, sim::NoiseModel{});
  for (const auto& s : make_labels(log, 10)) EXPECT_EQ(s.label, (RelativePose{0, 0, 0}));
}

TEST(Normalizer, FrozenRoundTrip) {
  const auto samples = simulated(300, 2);
  std::vector<Measurement> raw;
  for (const auto& s : samples) raw.push_back(s.window.newest());
  const Normalizer norm = Normalizer::fit(raw);
  EXPECT_EQ(norm.mode(), Normalizer::Mode::frozen);
  for (const auto& m : raw) {
    const Measurement back = norm.denormalize(norm.normalize(m), m.stamp);
    const auto a = back.as_array(), b = m.as_array();
    for (std::size_t c = 0; c < kChannels; ++c) EXPECT_NEAR(a[c], b[c], 1e-6);
  }
  // Frozen statistics ignore further samples.
  Normalizer copy = norm;
  copy.observe(raw.front());
  EXPECT_EQ(copy, norm);
}

TEST(Normalizer, MatchesTwoPassStatistics) {
  const auto samples = simulated(500, 3);
  std::vector<Measurement> raw;
  for (const auto& s : samples) raw.push_back(s.window.newest());
  const Normalizer norm = Normalizer::fit(raw);
  for (std::size_t c = 0; c < kChannels; ++c) {
    double mean = 0.0;
    for (const auto& m : raw) mean += m.as_array()[c];
    mean /= static_cast<double>(raw.size());
    double var = 0.0;
    for (const auto& m : raw) var += std::pow(m.as_array()[c] - mean, 2);
    var /= static_cast<double>(raw.size());
    EXPECT_NEAR(norm.mean()[c], mean, 1e-12);
    EXPECT_NEAR(norm.std()[c], std::max(std::sqrt(var), Normalizer::kStdFloor), 1e-12);
  }
}

TEST(Normalizer, ConstantChannelUsesFloor) {
  std::vector<Measurement> raw(5, Measurement{1, 1, 1, 1, 1, 1, 1, 1, 0});
  const auto norm = Normalizer::fit(raw);
  for (double s : norm.std()) EXPECT_EQ(s, Normalizer::kStdFloor);
  for (double z : norm.normalize(raw[0])) EXPECT_EQ(z, 0.0);
  EXPECT_THROW(Normalizer::frozen({}, {std::nan("")}), Error);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.lr_online = -1;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.validation_fraction = 1.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Online, UpdateCountIsFloorOfStreamOverBatch) {
  const auto stream = simulated(200, 4);
  for (std::size_t n : {0u, 31u, 32u, 33u, 96u, 127u, 200u}) {
    auto model = net::build<float>(small_spec(), 1);
    const auto before = model.params;
    const auto r = train_online(model, std::span(stream).first(n), TrainConfig{});
    EXPECT_EQ(r.updates, n / 32) << n;
    EXPECT_EQ(r.batch_losses.size(), n / 32) << n;
    if (n < 32) {
      EXPECT_EQ(model.params, before);
    }
  }
}

TEST(Online, IncrementalMatchesOneShot) {
  const auto stream = simulated(160, 5);
  auto a = net::build<float>(small_spec(), 2);
  auto b = a;
  const auto r = train_online(a, std::span(stream), TrainConfig{});
  OnlineTrainer<float> trainer(b, TrainConfig{});
  std::size_t updates = 0;
  for (const auto& s : stream) updates += trainer.push(s);
  EXPECT_EQ(updates, r.updates);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(trainer.normalizer(), r.normalizer);
  EXPECT_EQ(trainer.pending(), 0u);
}

TEST(Online, CallbackSeesEveryUpdate) {
  const auto stream = simulated(100, 6);
  auto model = net::build<float>(small_spec(), 3);
  std::vector<std::size_t> seen;
  train_online<float>(model, stream, TrainConfig{}, Normalizer::running(),
                      [&](std::size_t u, double loss, const net::Model&) {
                        seen.push_back(u);
                        EXPECT_TRUE(std::isfinite(loss));
                      });
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Regimes, SingleBatchUpdatesAreBitIdentical) {
  const auto data = simulated(32, 7);
  std::vector<Measurement> raw;
  for (const auto& s : data) raw.push_back(s.window.newest());
  const Normalizer norm = Normalizer::fit(raw);

  TrainConfig cfg;
  cfg.seed = 11;
  cfg.lr_batch = cfg.lr_online = 3e-4;
  cfg.validation_fraction = 0.0;
  cfg.epochs = 1;
  cfg.shuffle = false;

  for (std::uint64_t model_seed : {1u, 2u, 3u}) {
    auto batch_model = net::build<float>(net::ModelSpec{}, model_seed);
    auto online_model = batch_model;
    const auto br = train_batch(batch_model, std::span(data), cfg, norm);
    const auto orr = train_online(online_model, std::span(data), cfg, norm);
    EXPECT_EQ(br.updates, 1u);
    EXPECT_EQ(orr.updates, 1u);
    EXPECT_EQ(br.step_losses, orr.batch_losses);
    EXPECT_EQ(batch_model.params, online_model.params);
    EXPECT_NE(batch_model.params, net::build<float>(net::ModelSpec{}, model_seed).params);
  }
}

TEST(Batch, ZeroLearningRateKeepsParameters) {
  const auto data = simulated(200, 8);
  auto model = net::build<float>(small_spec(), 4);
  const auto before = model.params;
  TrainConfig cfg;
  cfg.lr_batch = 0.0;
  cfg.epochs = 3;
  cfg.patience = 0;
  const auto r = train_batch(model, std::span(data), cfg);
  EXPECT_EQ(model.params, before);
  ASSERT_EQ(r.curve.size(), 3u);
  for (const auto& e : r.curve) EXPECT_DOUBLE_EQ(e.validation_mae, r.initial_validation_mae);
}

TEST(Batch, SingleBatchOneEpochIsOneStep) {
  const auto data = simulated(40, 9);
  auto model = net::build<float>(small_spec(), 5);
  TrainConfig cfg;
  cfg.epochs = 1;
  const auto r = train_batch(model, std::span(data), cfg);  // 32 train, 8 validation
  EXPECT_EQ(r.updates, 1u);
  EXPECT_EQ(r.step_losses.size(), 1u);
}

TEST(Batch, RejectsTooLittleData) {
  const auto data = simulated(35, 10);
  auto model = net::build<float>(small_spec(), 6);
  try {
    train_batch(model, std::span(data), TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_data);
  }
}

TEST(Batch, ReducesErrorAndRestoresBest) {
  std::vector<Sample> data;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto part = simulated(1000, 20 + seed);
    data.insert(data.end(), part.begin(), part.end());
  }
  auto model = net::build<float>(net::ModelSpec{}, 7);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.lr_batch = 1e-3;
  const auto r = train_batch(model, std::span(data), cfg);
  ASSERT_FALSE(r.curve.empty());
  EXPECT_LT(r.curve.back().train_mae, r.initial_train_mae);
  double best = r.initial_validation_mae;
  for (const auto& e : r.curve) best = std::min(best, e.validation_mae);
  EXPECT_LT(best, r.initial_validation_mae);
  // Restored parameters reproduce the best validation score.
  const auto val = std::span(data).subspan(data.size() - data.size() / 5);
  EXPECT_NEAR(evaluate_mae(model, val, r.normalizer), r.curve[r.best_epoch - 1].validation_mae, 1e-9);
}

TEST(Online, TrainedModelBeatsUntrained) {
  std::vector<Sample> stream;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto part = simulated(1500, 40 + seed);
    stream.insert(stream.end(), part.begin(), part.end());
  }
  const auto test = simulated(1500, 99, ScenarioKind::A);
  auto model = net::build<float>(net::ModelSpec{}, 8);
  const auto untrained = model;
  TrainConfig cfg;
  cfg.lr_online = 3e-4;
  const auto r = train_online(model, std::span(stream), cfg);
  EXPECT_LT(evaluate_mae(model, test, r.normalizer), evaluate_mae(untrained, test, r.normalizer));
  EXPECT_TRUE(model.all_finite());
}

TEST(Online, HighNoiseStaysFinite) {
  const auto stream = simulated(2000, 12, ScenarioKind::C, sim::NoiseModel{}.amplified(10.0));
  auto model = net::build<float>(net::ModelSpec{}, 9);
  TrainConfig cfg;
  cfg.lr_online = 1e-3;
  train_online(model, std::span(stream), cfg);
  EXPECT_TRUE(model.all_finite());
}
