#include "panotrack/camera.hpp"

#include "panotrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace panotrack::tracking {

void CameraModel::validate() const
{
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidArgument("camera " + std::to_string(id) + ": focal lengths must be positive");
  }
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho <= 1e-9) || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw InvalidArgument("camera " + std::to_string(id) + ": rotation is not a proper rotation");
  }
  if (!translation.allFinite()) {
    throw InvalidArgument("camera " + std::to_string(id) + ": translation is not finite");
  }
}

std::optional<Eigen::Vector2d> CameraModel::project(const Eigen::Vector3d& world) const
{
  const Eigen::Vector3d pc = to_camera(world);
  if (pc.z() <= 0.0) {
    return std::nullopt;
  }
  return Eigen::Vector2d(fx * pc.x() / pc.z() + cx, fy * pc.y() / pc.z() + cy);
}

bool CameraModel::in_image(const Eigen::Vector2d& pixel) const
{
  return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() < image_width() &&
         pixel.y() < image_height();
}

CameraModel CameraModel::look_at(int id, double f, double cx, double cy, const Eigen::Vector3d& eye,
                                 const Eigen::Vector3d& target)
{
  // Camera axes in world coordinates: z forward, x right, y down in the image.
  const Eigen::Vector3d z = (target - eye).normalized();
  Eigen::Vector3d x = z.cross(Eigen::Vector3d::UnitZ());
  if (x.norm() < 1e-12) {
    x = Eigen::Vector3d::UnitX();
  }
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);

  CameraModel cam;
  cam.id = id;
  cam.fx = f;
  cam.fy = f;
  cam.cx = cx;
  cam.cy = cy;
  cam.rotation.row(0) = x.transpose();
  cam.rotation.row(1) = y.transpose();
  cam.rotation.row(2) = z.transpose();
  cam.translation = -cam.rotation * eye;
  return cam;
}

CameraRig::CameraRig(std::span<const CameraModel> cameras)
{
  for (const auto& c : cameras) {
    add(c);
  }
}

void CameraRig::add(const CameraModel& camera)
{
  camera.validate();
  if (!cameras_.emplace(camera.id, camera).second) {
    throw InvalidArgument("duplicate camera id " + std::to_string(camera.id));
  }
}

const CameraModel& CameraRig::at(int id) const
{
  const auto it = cameras_.find(id);
  if (it == cameras_.end()) {
    throw MissingCamera(id, "detection references unknown camera " + std::to_string(id));
  }
  return it->second;
}

std::vector<CameraModel> CameraRig::list() const
{
  std::vector<CameraModel> out;
  out.reserve(cameras_.size());
  for (const auto& [id, cam] : cameras_) {
    out.push_back(cam);
  }
  return out;
}

Ray back_project(const CameraModel& camera, double u, double v)
{
  const Eigen::Vector3d dir_cam((u - camera.cx) / camera.fx, (v - camera.cy) / camera.fy, 1.0);
  return Ray{camera.center(), (camera.rotation.transpose() * dir_cam).normalized()};
}

double point_ray_distance(const Eigen::Vector3d& p, const Ray& ray)
{
  const double t = std::max(0.0, (p - ray.origin).dot(ray.direction));
  return (p - ray.at(t)).norm();
}

double ray_distance(const Ray& a, const Ray& b)
{
  const Eigen::Vector3d w = a.origin - b.origin;
  const double bb = a.direction.dot(b.direction);
  const double d = a.direction.dot(w);
  const double e = b.direction.dot(w);
  const double denom = 1.0 - bb * bb;

  if (denom > 1e-14) {
    const double s = (bb * e - d) / denom;
    const double t = (e - bb * d) / denom;
    if (s >= 0.0 && t >= 0.0) {
      return (a.at(s) - b.at(t)).norm();
    }
  }
  // Parallel rays or an optimum behind an origin: the minimum lies on a boundary.
  return std::min(point_ray_distance(a.origin, b), point_ray_distance(b.origin, a));
}

Eigen::Vector3d least_squares_point(std::span<const Ray> rays)
{
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (const auto& r : rays) {
    const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - r.direction * r.direction.transpose();
    a += proj;
    rhs += proj * r.origin;
  }
  return a.ldlt().solve(rhs);
}

}  // namespace panotrack::tracking
