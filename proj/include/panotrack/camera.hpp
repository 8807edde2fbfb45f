#pragma once

// Distortion-free pinhole cameras, detections and viewing rays.

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace panotrack::tracking {

/// World->camera extrinsics: X_cam = rotation * X_world + translation.
/// The image is assumed to span [0, 2cx) x [0, 2cy).
struct CameraModel
{
  int id = 0;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Throws InvalidArgument unless the rotation is orthonormal with det +1 and fx, fy > 0.
  void validate() const;

  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }
  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const
  {
    return rotation * world + translation;
  }
  /// Pixel coordinates, or nullopt for points on or behind the image plane.
  std::optional<Eigen::Vector2d> project(const Eigen::Vector3d& world) const;
  bool in_image(const Eigen::Vector2d& pixel) const;

  double image_width() const { return 2.0 * cx; }
  double image_height() const { return 2.0 * cy; }

  /// Camera looking from `eye` toward `target` with world +Z as up.
  static CameraModel look_at(int id, double f, double cx, double cy, const Eigen::Vector3d& eye,
                             const Eigen::Vector3d& target);
};

/// Cameras by id. Lookups of unknown ids throw MissingCamera.
class CameraRig
{
public:
  CameraRig() = default;
  explicit CameraRig(std::span<const CameraModel> cameras);

  void add(const CameraModel& camera);
  const CameraModel& at(int id) const;
  bool contains(int id) const { return cameras_.count(id) != 0; }
  std::size_t size() const { return cameras_.size(); }
  std::vector<CameraModel> list() const;

private:
  std::map<int, CameraModel> cameras_;
};

struct Detection
{
  long frame = 0;
  int camera = 0;
  double u = 0.0;
  double v = 0.0;
  double size = 1.0;   // window side, pixels
  double score = 1.0;
};

struct Ray
{
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();  // unit length

  Eigen::Vector3d at(double t) const { return origin + t * direction; }
};

Ray back_project(const CameraModel& camera, double u, double v);
inline Ray back_project(const CameraModel& camera, const Detection& d)
{
  return back_project(camera, d.u, d.v);
}

/// Distance from a point to a ray (points behind the origin measure to the origin).
double point_ray_distance(const Eigen::Vector3d& p, const Ray& ray);

/// Closest distance between two half-lines.
double ray_distance(const Ray& a, const Ray& b);

/// Point minimizing the summed squared perpendicular distance to all rays.
Eigen::Vector3d least_squares_point(std::span<const Ray> rays);

}  // namespace panotrack::tracking
