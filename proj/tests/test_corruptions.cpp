#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cnc/corruptions.hpp"
#include "cnc/io.hpp"
#include "cnc/severity.hpp"

using namespace cnc;

namespace {

ImageTensor random_image(int w, int h, int c, RngStream r) {
  std::vector<float> v(static_cast<std::size_t>(w * h * c));
  for (float& x : v) x = static_cast<float>(r.uniform());
  return ImageTensor(w, h, c, v);
}

// Smooth image: a few low-frequency waves, so blurs and compression have
// something to act on besides noise.
ImageTensor smooth_image(int side, RngStream r) {
  ImageTensor t(side, side, 3);
  const double fx = r.uniform(0.5, 3.0), fy = r.uniform(0.5, 3.0), ph = r.uniform(0.0, 6.0);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      for (int c = 0; c < 3; ++c)
        t.at(x, y, c) = static_cast<float>(0.5 + 0.4 * std::sin(fx * x / side * 6.28 + ph + c) * std::cos(fy * y / side * 6.28));
  return t;
}

CorruptionSpec spec(const std::string& op, int s, std::uint64_t seed) { return {op, s, RngStream(seed)}; }

double mean_abs_diff(const ImageTensor& a, const ImageTensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a.data()[i] - b.data()[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

TEST(Registry, TenImageAndTwoPointOps) {
  const auto ids = registry_list();
  EXPECT_EQ(ids.size(), 12u);
  for (const auto& id : ids) EXPECT_TRUE(is_registered(id)) << id;
  EXPECT_FALSE(is_registered("snow"));
  EXPECT_FALSE(SeverityTable::defaults().has("snow"));
  EXPECT_THROW(apply_corruption(ImageTensor(2, 2, 1), spec("snow", 1, 0)), std::invalid_argument);
  EXPECT_THROW(apply_corruption(ImageTensor(2, 2, 1), spec("jitter", 1, 0)), std::invalid_argument);
  EXPECT_THROW(corrupt_point_2d({0, 0}, spec("fog", 1, 0)), std::invalid_argument);
  EXPECT_THROW(apply_corruption(ImageTensor(2, 2, 1), spec("contrast", 6, 0)), std::invalid_argument);
  EXPECT_THROW(apply_corruption(ImageTensor(2, 2, 1), spec("contrast", 0, 0)), std::invalid_argument);
}

TEST(SeverityTable, EveryOpHasFiveLevels) {
  const SeverityTable& t = SeverityTable::defaults();
  for (const auto& id : registry_list()) {
    ASSERT_TRUE(t.has(id)) << id;
    for (int s = 1; s <= 5; ++s) EXPECT_TRUE(std::isfinite(t.at(id, s)));
  }
  EXPECT_THROW(t.at("contrast", 6), std::invalid_argument);
  EXPECT_THROW(t.at("nope", 1), std::out_of_range);
}

TEST(SeverityTable, CheckedInConfigMatchesBuiltIn) {
  const std::string text = read_file(std::filesystem::path(CNC_SOURCE_DIR) / "config" / "severity.cfg");
  EXPECT_EQ(text, std::string(kDefaultSeverityTable));
  EXPECT_EQ(SeverityTable::parse(text).rows(), SeverityTable::defaults().rows());
}

TEST(SeverityTable, ParseErrors) {
  EXPECT_THROW(SeverityTable::parse("fog = 1 2 3 4"), std::invalid_argument);
  EXPECT_THROW(SeverityTable::parse("fog = 1 2 3 4 5 6"), std::invalid_argument);
  EXPECT_THROW(SeverityTable::parse("fog 1 2 3 4 5"), std::invalid_argument);
  EXPECT_THROW(SeverityTable::parse("fog = 1 2 x 4 5"), std::invalid_argument);
  const SeverityTable t = SeverityTable::parse("# c\n\n jitter = 0 0 0 0 0  # trailing\n");
  EXPECT_EQ(t.at("jitter", 3), 0.0);
}

TEST(Corruption, ContrastFixesConstantImage) {
  const ImageTensor flat(32, 32, 3, 0.3f);
  for (int s = 1; s <= 5; ++s) EXPECT_EQ(apply_corruption(flat, spec("contrast", s, 1)), flat);
}

TEST(Corruption, GaussianNoiseStd) {
  const ImageTensor gray(32, 32, 3, 0.5f);
  const double sigma = SeverityTable::defaults().at("gaussian_noise", 5);
  const ImageTensor out = apply_corruption(gray, spec("gaussian_noise", 5, 77));
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out.data()[i] - 0.5;
    s += d;
    s2 += d * d;
  }
  const double n = static_cast<double>(out.size());
  const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
  EXPECT_NEAR(sd, sigma, 0.05 * sigma);
}

TEST(Corruption, PixelateIsBlockConstant) {
  const ImageTensor img = random_image(32, 32, 3, RngStream(4));
  for (int s = 1; s <= 5; ++s) {
    const int b = static_cast<int>(SeverityTable::defaults().at("pixelate", s));
    const ImageTensor out = apply_corruption(img, spec("pixelate", s, 0));
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        for (int c = 0; c < 3; ++c) ASSERT_EQ(out.at(x, y, c), out.at(x - x % b, y - y % b, c)) << s;
  }
}

TEST(Corruption, RangeShapeAndDeterminism) {
  for (const auto& op : kImageCorruptions) {
    for (int s = 1; s <= 5; ++s) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        for (const ImageTensor& img : {random_image(17, 13, 3, RngStream(seed)), smooth_image(24, RngStream(seed))}) {
          const CorruptionSpec sp = spec(std::string(op), s, seed * 31 + 5);
          const ImageTensor a = apply_corruption(img, sp);
          const ImageTensor b = apply_corruption(img, sp);
          ASSERT_TRUE(a.same_shape(img)) << op;
          ASSERT_EQ(a, b) << op << " " << s;
          for (float v : a.data()) ASSERT_TRUE(v >= 0.0f && v <= 1.0f) << op;
        }
      }
    }
  }
}

TEST(Corruption, GrayscaleInputsWork) {
  const ImageTensor img = random_image(16, 16, 1, RngStream(2));
  for (const auto& op : kImageCorruptions) {
    const ImageTensor out = apply_corruption(img, spec(std::string(op), 3, 1));
    EXPECT_TRUE(out.same_shape(img)) << op;
  }
}

TEST(Corruption, NoiseSeverityMonotone) {
  const ImageTensor img = smooth_image(16, RngStream(3));
  for (const char* op : {"gaussian_noise", "shot_noise", "speckle_noise"}) {
    double prev = -1;
    for (int s = 1; s <= 5; ++s) {
      double acc = 0;
      for (std::uint64_t seed = 0; seed < 100; ++seed) acc += mean_abs_diff(apply_corruption(img, spec(op, s, seed)), img);
      EXPECT_GE(acc, prev) << op << " severity " << s;
      prev = acc;
    }
  }
}

TEST(Corruption, BlursChangeSmoothImages) {
  const ImageTensor img = smooth_image(32, RngStream(5));
  for (const char* op : {"defocus_blur", "motion_blur", "fog", "elastic_transform", "jpeg_quantize", "contrast"}) {
    EXPECT_GT(mean_abs_diff(apply_corruption(img, spec(op, 5, 9)), img), 1e-4) << op;
  }
}

TEST(PointCorruption, IdentityCases) {
  const SeverityTable zero = SeverityTable::parse("jitter = 0 0 0 0 0\nscale_warp = 1 1 1 1 1\n");
  const Point2 p{0.7, -1.3};
  for (int s = 1; s <= 5; ++s) {
    EXPECT_EQ(corrupt_point_2d(p, spec("jitter", s, 3), {}, zero), p);
    const Point2 q = corrupt_point_2d(p, spec("scale_warp", s, 3), {0.2, 0.1}, zero);
    EXPECT_NEAR(q.x, p.x, 1e-15);
    EXPECT_NEAR(q.y, p.y, 1e-15);
  }
}

TEST(PointCorruption, ScaleWarpAboutCentroid) {
  const Point2 c{1.0, 2.0};
  const double f = SeverityTable::defaults().at("scale_warp", 4);
  const Point2 out = corrupt_point_2d({2.0, 2.0}, spec("scale_warp", 4, 0), c);
  EXPECT_DOUBLE_EQ(out.x, 1.0 + f);
  EXPECT_DOUBLE_EQ(out.y, 2.0);
}

TEST(PointCorruption, JitterRadiusFollowsChi) {
  const double sigma = SeverityTable::defaults().at("jitter", 3);
  const int n = 100000;
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) {
    const Point2 q = corrupt_point_2d({0, 0}, spec("jitter", 3, 1000 + static_cast<std::uint64_t>(i)));
    r[static_cast<std::size_t>(i)] = norm(q);
  }
  double mean = 0;
  for (double v : r) mean += v;
  mean /= n;
  std::sort(r.begin(), r.end());
  // Chi with two degrees of freedom scaled by sigma.
  EXPECT_NEAR(mean, sigma * std::sqrt(std::numbers::pi / 2), 0.05 * sigma);
  for (double q : {0.25, 0.5, 0.9}) {
    const double want = sigma * std::sqrt(-2 * std::log(1 - q));
    EXPECT_NEAR(r[static_cast<std::size_t>(q * n)], want, 0.05 * want) << q;
  }
}
