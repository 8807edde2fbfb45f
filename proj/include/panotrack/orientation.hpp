#pragma once

// Gradient field and dominant-orientation extraction for keypoint patches.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace panotrack::features {

/// Row-major luminance grid; value(x, y) = data[y * width + x].
class ImagePatch
{
public:
  ImagePatch(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::vector<double>& data() const { return data_; }

private:
  int width_;
  int height_;
  std::vector<double> data_;
};

/// Reads "width height" followed by `height` rows of `width` values.
ImagePatch parse_patch(std::istream& in);
ImagePatch load_patch(const std::string& path);

class GradientField
{
public:
  GradientField(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool valid(int x, int y) const { return x > 0 && y > 0 && x < width_ - 1 && y < height_ - 1; }
  double magnitude(int x, int y) const { return magnitude_[index(x, y)]; }
  double direction(int x, int y) const { return direction_[index(x, y)]; }

  void set(int x, int y, double magnitude, double direction)
  {
    magnitude_[index(x, y)] = magnitude;
    direction_[index(x, y)] = direction;
  }

private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_;
  int height_;
  std::vector<double> magnitude_;
  std::vector<double> direction_;
};

inline constexpr int kOrientationBins = 36;

struct OrientationHistogram
{
  std::array<double, kOrientationBins> bins{};

  double total() const;
  double bin_width() const;  // radians
};

/// Central-difference gradient over interior pixels; the 1-pixel border is
/// left invalid (magnitude 0).
GradientField gradient(const ImagePatch& patch);

struct PixelCoord
{
  int x = 0;
  int y = 0;
};

/// Gaussian- and magnitude-weighted direction histogram over the square
/// window center +/- radius, with linear interpolation between the two
/// nearest bin centers.
OrientationHistogram orientation_histogram(const GradientField& field, PixelCoord center,
                                           int radius, double sigma);

/// Global peak plus every local peak >= 80% of it, each refined by a
/// parabola through the neighbouring bins. Angles in (-pi, pi].
std::vector<double> dominant_orientation(const OrientationHistogram& hist);

}  // namespace panotrack::features
