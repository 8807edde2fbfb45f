#pragma once

// Joint robot-pose + landmark EKF-SLAM with an iterated measurement update.
//
// State layout: [x, y, phi, l0.x, l0.y, l1.x, l1.y, ...]. Landmark positions
// are global; observations are landmark positions expressed in the robot frame.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace panotrack::ekf {

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

struct RobotPose
{
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
};

struct ControlInput
{
  double du = 0.0;    // forward, robot frame
  double dv = 0.0;    // lateral, robot frame
  double dphi = 0.0;
};

struct NoiseModel
{
  Eigen::Matrix3d q = Eigen::Matrix3d::Zero();       // pose process noise
  Eigen::Matrix2d r_meas = Eigen::Matrix2d::Identity();
  Eigen::Vector2d w_bias = Eigen::Vector2d::Zero();  // additive correction term
};

struct LandmarkObservation
{
  std::optional<std::size_t> landmark_index;  // empty: first sighting of a new landmark
  Eigen::Vector2d z = Eigen::Vector2d::Zero();

  static LandmarkObservation of(std::size_t index, const Eigen::Vector2d& z) { return {index, z}; }
  static LandmarkObservation fresh(const Eigen::Vector2d& z) { return {std::nullopt, z}; }
  bool is_new() const { return !landmark_index.has_value(); }
};

struct SlamState
{
  RobotPose pose;
  std::vector<Eigen::Vector2d> landmarks;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
  long step = 0;

  std::size_t landmark_count() const { return landmarks.size(); }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(3 + 2 * landmarks.size()); }

  Eigen::VectorXd to_vector() const;
  /// Overwrites pose and landmarks from a stacked vector (phi is wrapped).
  void assign_vector(const Eigen::VectorXd& v);

  static SlamState initial(const RobotPose& pose, const Eigen::Matrix3d& pose_cov);
};

/// Pose propagation: control expressed in the robot frame, heading wrapped.
RobotPose motion_model(const RobotPose& pose, const ControlInput& u);

/// R^T (landmark - position) + w_bias, R the heading rotation.
Eigen::Vector2d measurement_model(const SlamState& state, std::size_t landmark_index,
                                  const NoiseModel& noise);

Eigen::MatrixXd jacobian_F(const SlamState& state, const ControlInput& u);

/// 2 x dim() Jacobian of the measurement model; zero outside the pose and
/// observed landmark columns.
Eigen::MatrixXd jacobian_H(const SlamState& state, std::size_t landmark_index);

SlamState predict(const SlamState& state, const ControlInput& u, const NoiseModel& noise);

/// Iterated EKF update. The prior (mean and covariance) stays fixed while the
/// measurement Jacobian is relinearized about the latest iterate. A relinearized
/// iterate that increases the stacked residual norm is rejected and iteration
/// stops, so more iterations never leave a larger residual than fewer.
SlamState update(const SlamState& state, std::span<const LandmarkObservation> obs,
                 const NoiseModel& noise, int n_iter = 2);

/// Appends a newly sighted landmark and grows the covariance with the
/// linearized initialization Jacobians.
SlamState augment(const SlamState& state, const LandmarkObservation& obs, const NoiseModel& noise);

/// Stacked measurement residual norm ||z - h(state)|| for existing-landmark observations.
double residual_norm(const SlamState& state, std::span<const LandmarkObservation> obs,
                     const NoiseModel& noise);

/// Normalized estimation error squared of the pose block.
double pose_nees(const SlamState& state, const RobotPose& truth);

}  // namespace panotrack::ekf
