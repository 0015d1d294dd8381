#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "cnc/datasets.hpp"
#include "cnc/mlp.hpp"
#include "oracles.hpp"

using namespace cnc;

namespace {

MlpModel random_model(std::vector<int> dims, RngStream r, double bias_sd = 0.3) {
  MlpModel m = MlpModel::he_init(std::move(dims), r.child(0));
  RngStream b = r.child(1);
  for (Layer& l : m.layers())
    for (double& v : l.b) v = bias_sd * b.normal();
  return m;
}

Batch random_batch(int dim, int n, int lo, int hi, RngStream& r) {
  Batch b;
  b.dim = dim;
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) b.x.push_back(r.uniform(-2, 2));
    b.labels.push_back(lo + static_cast<int>(r.uniform_index(static_cast<std::uint64_t>(hi - lo + 1))));
  }
  return b;
}

double accuracy(const MlpModel& m, const Point2Dataset& ds) {
  int ok = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double x[2] = {ds.points[i].x, ds.points[i].y};
    const auto z = logits(m, x);
    ok += static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin()) + 1 == ds.labels[i];
  }
  return static_cast<double>(ok) / static_cast<double>(ds.size());
}

}  // namespace

TEST(Forward, ZeroModelIsUniform) {
  const MlpModel m({3, 5, 4});
  const double x[3] = {1, -2, 3};
  const ForwardResult r = forward(m, x);
  for (double p : r.probs) EXPECT_DOUBLE_EQ(p, 0.25);
  EXPECT_EQ(r.activations.size(), 2u);
  EXPECT_EQ(r.preacts.size(), 2u);
}

TEST(Forward, IdentityLinearLayer) {
  MlpModel m({2, 2});
  m.layers()[0].weight(0, 0) = 1;
  m.layers()[0].weight(1, 1) = 1;
  const double x[2] = {1, 2};
  EXPECT_EQ(logits(m, x), (std::vector<double>{1, 2}));
}

TEST(Forward, MatchesLongDoubleOracle) {
  RngStream r(1);
  for (int t = 0; t < 200; ++t) {
    const MlpModel m = random_model({2, 4, 3}, RngStream(100 + t));
    const std::vector<double> x{r.uniform(-3, 3), r.uniform(-3, 3)};
    const ForwardResult f = forward(m, x);
    const oracle::LongForward o = oracle::forward(m, x);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(f.probs[k], static_cast<double>(o.probs[k]), 1e-12);
      EXPECT_NEAR(f.logits[k], static_cast<double>(o.logits[k]), 1e-12);
    }
  }
}

TEST(Forward, SoftmaxNormalizedEvenForLargeLogits) {
  RngStream r(2);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> z(1 + r.uniform_index(12));
    for (double& v : z) v = r.uniform(-800, 800);
    const auto p = softmax(z);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(Forward, RejectsBadInput) {
  const MlpModel m({2, 3});
  const double x3[3] = {0, 0, 0};
  EXPECT_THROW(forward(m, x3), std::invalid_argument);
  const double nan[2] = {0, NAN};
  EXPECT_THROW(forward(m, nan), std::domain_error);
  EXPECT_THROW(MlpModel({2}), std::invalid_argument);
  EXPECT_THROW(MlpModel({2, 0, 3}), std::invalid_argument);
}

TEST(Loss, AlphaZeroIsPlainCrossEntropy) {
  RngStream r(3);
  const MlpModel m = random_model({2, 6, 4}, RngStream(4));
  const Batch id = random_batch(2, 10, 1, 3, r);
  const Batch ood = random_batch(2, 7, 4, 4, r);
  EXPECT_NEAR(loss_eq2(m, id, ood, 0.0), static_cast<double>(oracle::eq2_loss(m, id, Batch{}, 0.0)), 1e-12);
  EXPECT_NEAR(loss_eq2(m, id, ood, 0.0), loss_eq2(m, id, Batch{}, 0.0), 1e-15);
}

TEST(Loss, ZeroModelBalancedBatches) {
  const MlpModel m({2, 4, 3});
  RngStream r(5);
  const Batch id = random_batch(2, 6, 1, 2, r);
  const Batch ood = random_batch(2, 6, 3, 3, r);
  EXPECT_NEAR(loss_eq2(m, id, ood, 1.0), 2 * std::log(3.0), 1e-12);
  EXPECT_NEAR(backward(m, id, ood, 1.0).loss, 2 * std::log(3.0), 1e-12);
}

TEST(Loss, MatchesScalarOracle) {
  RngStream r(6);
  for (int t = 0; t < 50; ++t) {
    const MlpModel m = random_model({3, 5, 5, 4}, RngStream(200 + t));
    const Batch id = random_batch(3, 5, 1, 3, r);
    const Batch ood = random_batch(3, 4, 4, 4, r);
    const double alpha = r.uniform(0, 2);
    EXPECT_NEAR(loss_eq2(m, id, ood, alpha), static_cast<double>(oracle::eq2_loss(m, id, ood, alpha)), 1e-12);
  }
}

TEST(Loss, RejectsWrongLabels) {
  const MlpModel m({2, 3});
  RngStream r(7);
  const Batch id = random_batch(2, 3, 1, 2, r);
  const Batch bad_ood = random_batch(2, 3, 1, 1, r);
  EXPECT_THROW(loss_eq2(m, id, bad_ood, 1.0), std::invalid_argument);
  const Batch bad_id = random_batch(2, 3, 3, 3, r);
  EXPECT_THROW(loss_eq2(m, bad_id, random_batch(2, 1, 3, 3, r), 1.0), std::invalid_argument);
}

TEST(Backward, LastBiasGradientIsSoftmaxMinusOneHot) {
  const MlpModel m = random_model({2, 5, 3}, RngStream(8));
  Batch id;
  const double x[2] = {0.4, -0.9};
  id.push(x, 2);
  const auto g = backward(m, id, Batch{}, 1.0);
  const auto p = forward(m, x).probs;
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(g.grads.layers()[1].b[k], p[k] - (k == 1 ? 1.0 : 0.0), 1e-14);
}

TEST(Backward, ZeroInputGivesZeroFirstLayerWeightGradient) {
  MlpModel m = MlpModel::he_init({3, 6, 4}, RngStream(9));
  Batch id;
  const double x[3] = {0, 0, 0};
  id.push(x, 1);
  Batch ood;
  ood.push(x, 4);
  const auto g = backward(m, id, ood, 1.0);
  for (double v : g.grads.layers()[0].w) EXPECT_EQ(v, 0.0);
}

TEST(Backward, MatchesFiniteDifferences) {
  RngStream r(10);
  int checked = 0;
  for (int t = 0; checked < 100; ++t) {
    std::vector<int> dims{1 + static_cast<int>(r.uniform_index(4))};
    const int hidden = static_cast<int>(r.uniform_index(3));
    for (int h = 0; h < hidden; ++h) dims.push_back(1 + static_cast<int>(r.uniform_index(16)));
    dims.push_back(2 + static_cast<int>(r.uniform_index(4)));
    const MlpModel m = random_model(dims, RngStream(300 + t));
    const int k = dims.back() - 1;
    const Batch id = random_batch(dims[0], 1 + static_cast<int>(r.uniform_index(6)), 1, k, r);
    const Batch ood = random_batch(dims[0], static_cast<int>(r.uniform_index(5)), k + 1, k + 1, r);
    if (oracle::kink_margin(m, id, ood) < 1e-3) continue;  // a step of h could cross a ReLU kink
    const double alpha = r.uniform(0, 2);
    const auto analytic = oracle::flatten(backward(m, id, ood, alpha).grads);
    const auto numeric = oracle::fd_gradient(m, id, ood, alpha);
    ASSERT_EQ(analytic.size(), numeric.size());
    EXPECT_LT(oracle::max_relative_error(analytic, numeric), 1e-4) << "model " << t;
    ++checked;
  }
}

TEST(Train, ZeroEpochsLeavesModelUnchanged) {
  RngStream r(11);
  const Point2Dataset ds = two_moons(20, 0.1, r);
  const MlpModel m = MlpModel::he_init({2, 8, 2}, RngStream(12));
  GenConfig g;
  g.variant = Variant::none;
  TrainConfig tc;
  tc.epochs = 0;
  const TrainResult res = train(m, ds, g, tc);
  EXPECT_EQ(res.model, m);
  EXPECT_TRUE(res.loss_history.empty());
}

TEST(Train, VanillaHalfMoonFitsAndLossDecreases) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RngStream r(seed);
    const Point2Dataset ds = two_moons(500, 0.1, r);
    GenConfig g;
    g.variant = Variant::none;
    TrainConfig tc;
    tc.epochs = 500;
    tc.seed = seed;
    const TrainResult res = train(MlpModel::he_init({2, 32, 32, 2}, RngStream(seed + 10)), ds, g, tc);
    EXPECT_GE(accuracy(res.model, ds), 0.99) << seed;
    EXPECT_LT(res.loss_history.back(), res.loss_history.front()) << seed;
  }
}

TEST(Train, CncLossDecreases) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RngStream r(seed);
    const Point2Dataset ds = two_moons(100, 0.1, r);
    GenConfig g;
    g.op_pool = default_point_ops();
    g.seed = seed;
    TrainConfig tc;
    tc.epochs = 100;
    tc.seed = seed;
    const TrainResult res = train(MlpModel::he_init({2, 16, 16, 3}, RngStream(seed)), ds, g, tc);
    EXPECT_LT(res.loss_history.back(), res.loss_history.front()) << seed;
  }
}

TEST(Train, BitIdenticalAcrossRuns) {
  RngStream r(13);
  const Point2Dataset ds = two_moons(40, 0.1, r);
  GenConfig g;
  g.op_pool = default_point_ops();
  g.seed = 5;
  TrainConfig tc;
  tc.epochs = 30;
  tc.batch_size = 16;
  tc.seed = 6;
  const MlpModel init = MlpModel::he_init({2, 8, 8, 3}, RngStream(14));
  const TrainResult a = train(init, ds, g, tc);
  const TrainResult b = train(init, ds, g, tc);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(encode_checkpoint(a.model), encode_checkpoint(b.model));
  tc.seed = 7;
  EXPECT_NE(train(init, ds, g, tc).model, a.model);
}

TEST(Train, SingleClassTrailingBatchStillTrains) {
  // 3 + 1 samples: with batch size 3 some epochs end on a one-sample batch.
  Point2Dataset ds;
  ds.class_count = 2;
  ds.points = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  ds.labels = {1, 2, 1, 2};
  GenConfig g;
  g.variant = Variant::pbcc_only;
  TrainConfig tc;
  tc.epochs = 20;
  tc.batch_size = 3;
  EXPECT_NO_THROW(train(MlpModel::he_init({2, 4, 3}, RngStream(1)), ds, g, tc));
}

TEST(Train, RejectsBadConfigAndHead) {
  RngStream r(15);
  const Point2Dataset ds = two_moons(10, 0.1, r);
  GenConfig g;
  g.op_pool = default_point_ops();
  TrainConfig tc;
  tc.epochs = 1;
  EXPECT_THROW(train(MlpModel({2, 4, 2}), ds, g, tc), std::invalid_argument);  // CnC needs K+1 outputs
  for (auto mutate : std::vector<void (*)(TrainConfig&)>{[](TrainConfig& c) { c.alpha = -1; },
                                                          [](TrainConfig& c) { c.lr = 0; },
                                                          [](TrainConfig& c) { c.momentum = 1; },
                                                          [](TrainConfig& c) { c.batch_size = 0; },
                                                          [](TrainConfig& c) { c.epochs = -1; }}) {
    TrainConfig bad = tc;
    mutate(bad);
    EXPECT_THROW(bad.validate(), std::invalid_argument);
  }
}

TEST(Checkpoint, RoundTripAndCorruption) {
  const MlpModel m = random_model({2, 7, 5, 3}, RngStream(16));
  const std::string bytes = encode_checkpoint(m);
  EXPECT_EQ(decode_checkpoint(bytes), m);
  EXPECT_THROW(decode_checkpoint("XXXX" + bytes.substr(4)), FormatError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 8)), FormatError);
  std::string nan = bytes;
  const double bad = NAN;
  std::memcpy(nan.data() + nan.size() - 8, &bad, 8);
  EXPECT_THROW(decode_checkpoint(nan), FormatError);
}
