#include "panotrack/errors.hpp"
#include "panotrack/orientation.hpp"

#include "support/gen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace panotrack;
using namespace panotrack::features;
using ptest::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

template <typename Fn>
ImagePatch make_patch(int w, int h, Fn&& fn)
{
  std::vector<double> data;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      data.push_back(fn(x, y));
    }
  }
  return ImagePatch(w, h, std::move(data));
}

ImagePatch random_patch(Gen& g, int n)
{
  return make_patch(n, n, [&](int, int) { return g.uniform(0, 255); });
}

/// 90 degree rotation of a square patch: new(x, y) = old(y, n - 1 - x).
ImagePatch rotate90(const ImagePatch& p)
{
  const int n = p.width();
  return make_patch(n, n, [&](int x, int y) { return p.at(y, n - 1 - x); });
}

double angle_diff(double a, double b)
{
  double d = std::fmod(a - b, 2 * kPi);
  if (d > kPi) {
    d -= 2 * kPi;
  } else if (d <= -kPi) {
    d += 2 * kPi;
  }
  return std::abs(d);
}

}  // namespace

TEST(Patch, RejectsBadShapes)
{
  EXPECT_THROW(ImagePatch(2, 5, std::vector<double>(10)), InvalidArgument);
  EXPECT_THROW(ImagePatch(3, 3, std::vector<double>(8)), InvalidArgument);
  EXPECT_THROW(ImagePatch(3, 3, std::vector<double>(9, NAN)), InvalidArgument);
}

TEST(Patch, ParsesTextFormat)
{
  std::istringstream in("3 3\n0 1 2\n3 4 5\n6 7 8\n");
  const auto p = parse_patch(in);
  EXPECT_EQ(p.width(), 3);
  EXPECT_EQ(p.at(2, 1), 5);
  std::istringstream truncated("3 3\n0 1 2\n");
  EXPECT_THROW(parse_patch(truncated), ParseError);
  std::istringstream junk("x y");
  EXPECT_THROW(parse_patch(junk), ParseError);
}

TEST(Gradient, HorizontalRamp)
{
  const auto f = gradient(make_patch(7, 7, [](int x, int) { return x; }));
  for (int y = 1; y < 6; ++y) {
    for (int x = 1; x < 6; ++x) {
      EXPECT_DOUBLE_EQ(f.magnitude(x, y), 2.0);
      EXPECT_DOUBLE_EQ(f.direction(x, y), 0.0);
    }
  }
  EXPECT_EQ(f.magnitude(0, 3), 0.0);
  EXPECT_FALSE(f.valid(6, 3));
}

TEST(Gradient, VerticalRamp)
{
  const auto f = gradient(make_patch(7, 7, [](int, int y) { return 3.0 * y; }));
  EXPECT_DOUBLE_EQ(f.magnitude(3, 3), 6.0);
  EXPECT_DOUBLE_EQ(f.direction(3, 3), kPi / 2);
  const auto g = gradient(make_patch(7, 7, [](int, int y) { return y; }));
  EXPECT_DOUBLE_EQ(g.magnitude(2, 4), 2.0);
  EXPECT_DOUBLE_EQ(g.direction(2, 4), kPi / 2);
}

TEST(Gradient, DiagonalRamp)
{
  const auto f = gradient(make_patch(7, 7, [](int x, int y) { return x + y; }));
  EXPECT_DOUBLE_EQ(f.magnitude(3, 3), 2.0 * std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(f.direction(3, 3), kPi / 4);
}

TEST(Gradient, DescendingRampPointsToPi)
{
  const auto f = gradient(make_patch(5, 5, [](int x, int) { return -x; }));
  EXPECT_DOUBLE_EQ(f.direction(2, 2), kPi);
}

TEST(Gradient, FlatPatchHasZeroMagnitude)
{
  const auto f = gradient(make_patch(5, 5, [](int, int) { return 4.0; }));
  EXPECT_EQ(f.magnitude(2, 2), 0.0);
}

TEST(Histogram, InterpolatesBetweenBinCenters)
{
  GradientField f(3, 3);
  // 15 degrees is exactly the center of bin 1.
  f.set(1, 1, 2.0, 15.0 * kPi / 180.0);
  auto h = orientation_histogram(f, {1, 1}, 1, 1.0);
  EXPECT_NEAR(h.bins[1], 2.0, 1e-12);
  EXPECT_NEAR(h.total(), 2.0, 1e-12);
  // 20 degrees sits halfway between the centers of bins 1 and 2.
  f.set(1, 1, 2.0, 20.0 * kPi / 180.0);
  h = orientation_histogram(f, {1, 1}, 1, 1.0);
  EXPECT_NEAR(h.bins[1], 1.0, 1e-12);
  EXPECT_NEAR(h.bins[2], 1.0, 1e-12);
}

TEST(Histogram, GaussianWeightsByDistance)
{
  GradientField f(5, 5);
  f.set(1, 2, 1.0, 15.0 * kPi / 180.0);
  const auto h = orientation_histogram(f, {2, 2}, 2, 1.5);
  EXPECT_NEAR(h.bins[1], std::exp(-1.0 / (2 * 1.5 * 1.5)), 1e-12);
}

TEST(Histogram, EmptyWindowAndBadArguments)
{
  GradientField f(5, 5);
  EXPECT_THROW(orientation_histogram(f, {20, 20}, 2, 1.0), EmptyWindow);
  EXPECT_THROW(orientation_histogram(f, {2, 2}, -1, 1.0), InvalidArgument);
  EXPECT_THROW(orientation_histogram(f, {2, 2}, 1, 0.0), InvalidArgument);
}

TEST(Dominant, RampsGiveTheirDirection)
{
  const std::pair<double (*)(int, int), double> cases[] = {
      {[](int x, int) { return double(x); }, 0.0},
      {[](int, int y) { return double(y); }, kPi / 2},
      {[](int x, int y) { return double(x + y); }, kPi / 4},
      {[](int x, int) { return -double(x); }, kPi},
  };
  for (const auto& [fn, expected] : cases) {
    const auto f = gradient(make_patch(9, 9, fn));
    const auto peaks = dominant_orientation(orientation_histogram(f, {4, 4}, 3, 2.0));
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_LT(angle_diff(peaks[0], expected), 1e-9);
  }
}

TEST(Dominant, SecondaryPeakAboveEightyPercent)
{
  OrientationHistogram h;
  h.bins[3] = 10.0;
  h.bins[20] = 8.5;
  h.bins[30] = 7.9;
  const auto peaks = dominant_orientation(h);
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_NEAR(peaks[0], 3.5 * h.bin_width(), 1e-12);
  EXPECT_NEAR(peaks[1], 20.5 * h.bin_width() - 2 * kPi, 1e-12);
}

TEST(Dominant, ParabolicRefinementShiftsTowardHeavierNeighbour)
{
  OrientationHistogram h;
  h.bins[9] = 4.0;
  h.bins[10] = 10.0;
  h.bins[11] = 8.0;
  const auto peaks = dominant_orientation(h);
  ASSERT_EQ(peaks.size(), 1u);
  // offset = 0.5 (l - r) / (l - 2c + r) = 0.5 * -4 / -8 = 0.25 bins
  EXPECT_NEAR(peaks[0], 10.75 * h.bin_width(), 1e-12);
}

TEST(Dominant, ZeroAndFlatHistograms)
{
  OrientationHistogram zero;
  EXPECT_THROW(dominant_orientation(zero), ZeroHistogram);
  OrientationHistogram flat;
  flat.bins.fill(1.0);
  const auto peaks = dominant_orientation(flat);
  ASSERT_EQ(peaks.size(), 1u);
  EXPECT_NEAR(peaks[0], 0.5 * flat.bin_width(), 1e-12);
}

TEST(Properties, RotationEquivariance)
{
  Gen g(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 * g.integer(3, 8) + 1;
    const int c = n / 2;
    const auto p = random_patch(g, n);
    const auto q = rotate90(p);
    const double sigma = g.uniform(0.5, 4.0);
    const auto hp = orientation_histogram(gradient(p), {c, c}, c, sigma);
    const auto hq = orientation_histogram(gradient(q), {c, c}, c, sigma);
    // A quarter turn is nine bins.
    for (int i = 0; i < kOrientationBins; ++i) {
      EXPECT_NEAR(hq.bins[(i + 9) % kOrientationBins], hp.bins[i], 1e-9 * (1.0 + hp.total()));
    }
    const auto dp = dominant_orientation(hp);
    const auto dq = dominant_orientation(hq);
    ASSERT_EQ(dp.size(), dq.size());
    for (const double a : dp) {
      double best = 10.0;
      for (const double b : dq) {
        best = std::min(best, angle_diff(b, a + kPi / 2));
      }
      EXPECT_LT(best, 1e-9);
    }
  }
}

TEST(Properties, BrightnessInvariance)
{
  Gen g(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = g.integer(5, 16);
    const auto p = random_patch(g, n);
    const double gain = g.uniform(0.1, 10.0);
    const double offset = g.uniform(-100, 100);
    const auto q = make_patch(n, n, [&](int x, int y) { return gain * p.at(x, y) + offset; });
    const PixelCoord center{n / 2, n / 2};
    const auto hp = orientation_histogram(gradient(p), center, n / 2, 2.0);
    const auto hq = orientation_histogram(gradient(q), center, n / 2, 2.0);
    for (int i = 0; i < kOrientationBins; ++i) {
      EXPECT_NEAR(hq.bins[i], gain * hp.bins[i], 1e-9 * gain * (1.0 + hp.total()));
    }
    const auto dp = dominant_orientation(hp);
    const auto dq = dominant_orientation(hq);
    ASSERT_EQ(dp.size(), dq.size());
    for (std::size_t k = 0; k < dp.size(); ++k) {
      EXPECT_LT(angle_diff(dp[k], dq[k]), 1e-9);
    }
  }
}

TEST(Properties, HistogramMassEqualsWeightedMagnitude)
{
  Gen g(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = g.integer(5, 12);
    const auto f = gradient(random_patch(g, n));
    const PixelCoord c{g.integer(0, n - 1), g.integer(0, n - 1)};
    const int r = g.integer(1, 4);
    const double sigma = g.uniform(0.5, 3.0);
    double expected = 0.0;
    bool any = false;
    for (int y = c.y - r; y <= c.y + r; ++y) {
      for (int x = c.x - r; x <= c.x + r; ++x) {
        if (f.valid(x, y)) {
          any = true;
          expected += f.magnitude(x, y) *
                      std::exp(-((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y)) / (2 * sigma * sigma));
        }
      }
    }
    if (!any) {
      EXPECT_THROW(orientation_histogram(f, c, r, sigma), EmptyWindow);
      continue;
    }
    EXPECT_NEAR(orientation_histogram(f, c, r, sigma).total(), expected, 1e-9 * (1.0 + expected));
  }
}
