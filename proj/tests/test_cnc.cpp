#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "cnc/cnc.hpp"
#include "cnc/datasets.hpp"
#include "oracles.hpp"

using namespace cnc;

namespace {

LabeledImageSet image_batch(int k, int per_class, int side, std::uint64_t seed) {
  RngStream r(seed);
  LabeledImageSet s;
  s.class_count = k;
  for (int i = 0; i < k * per_class; ++i) {
    std::vector<float> v(static_cast<std::size_t>(side * side * 3));
    for (float& x : v) x = static_cast<float>(r.uniform());
    s.images.emplace_back(side, side, 3, v);
    s.labels.push_back(1 + i % k);
  }
  return s;
}

GenConfig image_cfg(Variant v) {
  GenConfig g;
  g.variant = v;
  g.op_pool = default_image_ops();
  return g;
}

GenConfig point_cfg(Variant v) {
  GenConfig g;
  g.variant = v;
  g.op_pool = default_point_ops();
  return g;
}

Point2Dataset clusters(int n, double sigma, std::uint64_t seed) {
  RngStream r(seed);
  return gaussian_clusters_2d(4, n, square_corner_centers(), sigma, r);
}

}  // namespace

TEST(Variant, NamesRoundTrip) {
  for (Variant v : {Variant::none, Variant::cnc, Variant::r_cnc, Variant::pbcc_only, Variant::corruption_only}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_EQ(parse_variant("vanilla"), Variant::none);
  EXPECT_THROW(parse_variant("cutmix"), std::invalid_argument);
}

TEST(GenConfig, Validation) {
  GenConfig g = image_cfg(Variant::cnc);
  EXPECT_NO_THROW(g.validate());
  g.ood_ratio = 0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = image_cfg(Variant::cnc);
  g.op_pool.clear();
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = image_cfg(Variant::corruption_only);
  g.severity_pool = {};
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = image_cfg(Variant::cnc);
  g.op_pool = {"snow"};
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g.variant = Variant::pbcc_only;  // pools are irrelevant without corruption
  EXPECT_NO_THROW(g.validate());
}

TEST(CncDatagen, PbccOnlyWithLambdaOneCopiesImageA) {
  const LabeledImageSet batch = image_batch(3, 1, 8, 1);
  GenConfig g = image_cfg(Variant::pbcc_only);
  g.lambda_law = LambdaLaw::fixed(1.0);
  const LabeledImageSet out = cnc_datagen(batch, g, RngStream(2));
  ASSERT_EQ(out.size(), 3u);
  const auto pairs = label_pairs(3);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out.images[i], batch.images[static_cast<std::size_t>(pairs[i].first - 1)]);
    EXPECT_EQ(out.labels[i], 4);
  }
}

TEST(CncDatagen, OrderOfCompositionMatters) {
  const LabeledImageSet batch = image_batch(2, 4, 8, 3);
  const LabeledImageSet a = cnc_datagen(batch, image_cfg(Variant::cnc), RngStream(4));
  const LabeledImageSet b = cnc_datagen(batch, image_cfg(Variant::r_cnc), RngStream(4));
  ASSERT_EQ(a.size(), b.size());
  EXPECT_NE(a.images, b.images);
}

TEST(CncDatagen, DeterministicAndScheduleIndependent) {
  const LabeledImageSet batch = image_batch(3, 3, 8, 5);
  for (Variant v : {Variant::cnc, Variant::r_cnc, Variant::pbcc_only, Variant::corruption_only}) {
    GenConfig g = image_cfg(v);
    const LabeledImageSet a = cnc_datagen(batch, g, RngStream(6));
    const LabeledImageSet b = cnc_datagen(batch, g, RngStream(6));
    EXPECT_EQ(a.images, b.images);
    // Sample i depends only on its own child stream, so a longer run
    // starts with the same samples.
    g.ood_ratio = 2.0;
    const LabeledImageSet c = cnc_datagen(batch, g, RngStream(6));
    ASSERT_EQ(c.size(), 2 * a.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(c.images[i], a.images[i]);
  }
}

TEST(CncDatagen, LabelsAndCountFollowConfig) {
  const LabeledImageSet batch = image_batch(4, 5, 6, 7);
  for (double ratio : {0.1, 0.5, 1.0, 1.37, 3.0}) {
    GenConfig g = image_cfg(Variant::cnc);
    g.ood_ratio = ratio;
    const LabeledImageSet out = cnc_datagen(batch, g, RngStream(8));
    EXPECT_EQ(out.size(), static_cast<std::size_t>(std::llround(ratio * 20)));
    for (int l : out.labels) EXPECT_EQ(l, 5);
    for (const auto& img : out.images) EXPECT_TRUE(img.same_shape(batch.images[0]));
  }
  EXPECT_EQ(cnc_datagen(batch, image_cfg(Variant::none), RngStream(1)).size(), 0u);
}

TEST(CncDatagen, RejectsUnusableInputs) {
  LabeledImageSet one = image_batch(2, 2, 4, 9);
  one.labels = {1, 1, 1, 1};
  EXPECT_THROW(cnc_datagen(one, image_cfg(Variant::cnc), RngStream(1)), std::invalid_argument);
  EXPECT_NO_THROW(cnc_datagen(one, image_cfg(Variant::corruption_only), RngStream(1)));
  GenConfig g = image_cfg(Variant::cnc);
  g.op_pool = {"jitter"};
  EXPECT_THROW(cnc_datagen(image_batch(2, 2, 4, 9), g, RngStream(1)), std::invalid_argument);
  EXPECT_THROW(cnc_datagen_2d(clusters(5, 0.1, 1), image_cfg(Variant::cnc), RngStream(1)), std::invalid_argument);
}

TEST(CncDatagen2d, PbccOnlyStaysInHull) {
  const Point2Dataset ds = clusters(100, 0.25, 10);
  GenConfig g = point_cfg(Variant::pbcc_only);
  g.ood_ratio = 10000.0 / ds.size();
  const Point2Dataset out = cnc_datagen_2d(ds, g, RngStream(11));
  ASSERT_EQ(out.size(), 10000u);
  const auto hull = oracle::jarvis_hull(ds.points);
  for (const Point2& p : out.points) ASSERT_TRUE(oracle::in_hull(hull, p));
  for (int l : out.labels) ASSERT_EQ(l, 5);
}

TEST(CncDatagen2d, CncEscapesHull) {
  const Point2Dataset ds = clusters(100, 0.25, 12);
  GenConfig g = point_cfg(Variant::cnc);
  g.op_pool = {"jitter"};
  g.ood_ratio = 10000.0 / ds.size();
  const Point2Dataset out = cnc_datagen_2d(ds, g, RngStream(13));
  const auto hull = oracle::jarvis_hull(ds.points);
  const auto outside = std::count_if(out.points.begin(), out.points.end(),
                                     [&](Point2 p) { return !oracle::in_hull(hull, p); });
  EXPECT_GT(outside, 0);
}

TEST(CncDatagen2d, ExtremeLambdaStaysNearClusters) {
  const double sigma = 0.25;
  const Point2Dataset ds = clusters(100, sigma, 14);
  for (double lambda : {0.02, 0.98}) {
    GenConfig g = point_cfg(Variant::cnc);
    g.op_pool = {"jitter"};
    g.lambda_law = LambdaLaw::fixed(lambda);
    g.ood_ratio = 2000.0 / ds.size();
    const Point2Dataset out = cnc_datagen_2d(ds, g, RngStream(15));
    std::vector<double> d;
    for (const Point2& p : out.points) {
      double best = 1e300;
      for (const Point2& q : ds.points) best = std::min(best, norm(p - q));
      d.push_back(best);
    }
    std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
    EXPECT_LT(d[d.size() / 2], 3 * sigma) << lambda;
  }
}

TEST(CncDatagen2d, CorruptionOnlyWalksTheBatch) {
  const Point2Dataset ds = clusters(3, 0.25, 16);
  const SeverityTable id = SeverityTable::parse("jitter = 0 0 0 0 0\n");
  GenConfig g = point_cfg(Variant::corruption_only);
  g.op_pool = {"jitter"};
  g.ood_ratio = 2.0;
  const Point2Dataset out = cnc_datagen_2d(ds, g, RngStream(17), std::nullopt, id);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out.points[i], ds.points[i % ds.size()]);
}

TEST(OfflineCache, RoundTrip) {
  const LabeledImageSet out = cnc_datagen(image_batch(2, 3, 5, 18), image_cfg(Variant::cnc), RngStream(19));
  const auto dir = std::filesystem::temp_directory_path() / "cnc_test_cache";
  std::filesystem::remove_all(dir);
  write_offline_cache(out, dir);
  const LabeledImageSet back = read_offline_cache(dir, 2);
  EXPECT_EQ(back.images, out.images);
  EXPECT_EQ(back.labels, out.labels);
}
