#include "panotrack/orientation.hpp"

#include "panotrack/ekf_slam.hpp"
#include "panotrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>

namespace panotrack::features {

namespace {
constexpr double kPeakRatio = 0.8;
}

ImagePatch::ImagePatch(int width, int height, std::vector<double> data)
  : width_(width), height_(height), data_(std::move(data))
{
  if (width < 3 || height < 3) {
    throw InvalidArgument("patch must be at least 3x3");
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("patch data length does not match width*height");
  }
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidArgument("patch contains non-finite values");
  }
}

ImagePatch parse_patch(std::istream& in)
{
  int width = 0;
  int height = 0;
  if (!(in >> width >> height)) {
    throw ParseError("patch: expected 'width height' header");
  }
  if (width < 3 || height < 3) {
    throw ParseError("patch: dimensions must be >= 3");
  }
  std::vector<double> data(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(in >> data[i])) {
      throw ParseError("patch: expected " + std::to_string(data.size()) + " values, got " +
                       std::to_string(i));
    }
  }
  return ImagePatch(width, height, std::move(data));
}

ImagePatch load_patch(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open patch file " + path);
  }
  return parse_patch(in);
}

GradientField::GradientField(int width, int height)
  : width_(width),
    height_(height),
    magnitude_(static_cast<std::size_t>(width) * height, 0.0),
    direction_(static_cast<std::size_t>(width) * height, 0.0)
{}

double OrientationHistogram::total() const
{
  return std::accumulate(bins.begin(), bins.end(), 0.0);
}

double OrientationHistogram::bin_width() const
{
  return 2.0 * std::numbers::pi / kOrientationBins;
}

GradientField gradient(const ImagePatch& patch)
{
  GradientField field(patch.width(), patch.height());
  for (int y = 1; y < patch.height() - 1; ++y) {
    for (int x = 1; x < patch.width() - 1; ++x) {
      const double dx = patch.at(x + 1, y) - patch.at(x - 1, y);
      const double dy = patch.at(x, y + 1) - patch.at(x, y - 1);
      // atan2 returns [-pi, pi]; -pi only arises for dy = -0.0 and is folded to pi.
      double theta = std::atan2(dy, dx);
      if (theta <= -std::numbers::pi) {
        theta = std::numbers::pi;
      }
      field.set(x, y, std::sqrt(dx * dx + dy * dy), theta);
    }
  }
  return field;
}

OrientationHistogram orientation_histogram(const GradientField& field, PixelCoord center,
                                           int radius, double sigma)
{
  if (radius < 0 || !(sigma > 0.0)) {
    throw InvalidArgument("orientation_histogram: radius must be >= 0 and sigma > 0");
  }
  OrientationHistogram hist;
  const double bin_width = hist.bin_width();
  const double two_sigma_sq = 2.0 * sigma * sigma;
  bool any_valid = false;

  for (int y = center.y - radius; y <= center.y + radius; ++y) {
    for (int x = center.x - radius; x <= center.x + radius; ++x) {
      if (!field.valid(x, y)) {
        continue;
      }
      any_valid = true;
      const double ddx = x - center.x;
      const double ddy = y - center.y;
      const double weight =
          field.magnitude(x, y) * std::exp(-(ddx * ddx + ddy * ddy) / two_sigma_sq);

      double theta = field.direction(x, y);
      if (theta < 0.0) {
        theta += 2.0 * std::numbers::pi;
      }
      // Position relative to bin centers, which sit at (i + 0.5) * bin_width.
      const double pos = theta / bin_width - 0.5;
      const double lower = std::floor(pos);
      const double frac = pos - lower;
      const int lo = ((static_cast<int>(lower) % kOrientationBins) + kOrientationBins) %
                     kOrientationBins;
      const int hi = (lo + 1) % kOrientationBins;
      hist.bins[lo] += weight * (1.0 - frac);
      hist.bins[hi] += weight * frac;
    }
  }
  if (!any_valid) {
    throw EmptyWindow("orientation window does not intersect the valid gradient region");
  }
  return hist;
}

std::vector<double> dominant_orientation(const OrientationHistogram& hist)
{
  const auto& b = hist.bins;
  const double peak = *std::max_element(b.begin(), b.end());
  if (!(peak > 0.0)) {
    throw ZeroHistogram("dominant_orientation requires a histogram with positive weight");
  }

  std::vector<double> angles;
  for (int i = 0; i < kOrientationBins; ++i) {
    const double left = b[(i + kOrientationBins - 1) % kOrientationBins];
    const double right = b[(i + 1) % kOrientationBins];
    const double c = b[i];
    // Strict on the left, non-strict on the right: a two-bin plateau yields one peak.
    if (!(c > left && c >= right) || c < kPeakRatio * peak) {
      continue;
    }
    const double denom = left - 2.0 * c + right;
    const double offset = denom != 0.0 ? 0.5 * (left - right) / denom : 0.0;
    angles.push_back(ekf::wrap_angle((i + 0.5 + offset) * hist.bin_width()));
  }
  if (angles.empty()) {
    // Flat histogram: no strict local maximum exists, report the first maximal bin center.
    const auto i = std::distance(b.begin(), std::max_element(b.begin(), b.end()));
    angles.push_back(ekf::wrap_angle((static_cast<double>(i) + 0.5) * hist.bin_width()));
  }
  return angles;
}

}  // namespace panotrack::features
