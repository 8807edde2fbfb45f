#include "panotrack/ekf_slam.hpp"

#include "panotrack/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace panotrack::ekf {

namespace {

Eigen::Matrix2d rotation(double phi)
{
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

void check_index(const SlamState& state, std::size_t idx)
{
  if (idx >= state.landmark_count()) {
    throw IndexOutOfRange("landmark index " + std::to_string(idx) + " out of range (" +
                          std::to_string(state.landmark_count()) + " landmarks)");
  }
}

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

double wrap_angle(double a)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) {
    a += two_pi;
  } else if (a > std::numbers::pi) {
    a -= two_pi;
  }
  return a;
}

Eigen::VectorXd SlamState::to_vector() const
{
  Eigen::VectorXd v(dim());
  v(0) = pose.x;
  v(1) = pose.y;
  v(2) = pose.phi;
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    v.segment<2>(3 + 2 * static_cast<Eigen::Index>(i)) = landmarks[i];
  }
  return v;
}

void SlamState::assign_vector(const Eigen::VectorXd& v)
{
  pose = {v(0), v(1), wrap_angle(v(2))};
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    landmarks[i] = v.segment<2>(3 + 2 * static_cast<Eigen::Index>(i));
  }
}

SlamState SlamState::initial(const RobotPose& pose, const Eigen::Matrix3d& pose_cov)
{
  SlamState s;
  s.pose = {pose.x, pose.y, wrap_angle(pose.phi)};
  s.cov = pose_cov;
  return s;
}

RobotPose motion_model(const RobotPose& pose, const ControlInput& u)
{
  const double c = std::cos(pose.phi);
  const double s = std::sin(pose.phi);
  return {pose.x + c * u.du - s * u.dv, pose.y + s * u.du + c * u.dv,
          wrap_angle(pose.phi + u.dphi)};
}

Eigen::Vector2d measurement_model(const SlamState& state, std::size_t landmark_index,
                                  const NoiseModel& noise)
{
  check_index(state, landmark_index);
  const Eigen::Vector2d delta =
      state.landmarks[landmark_index] - Eigen::Vector2d(state.pose.x, state.pose.y);
  return rotation(state.pose.phi).transpose() * delta + noise.w_bias;
}

Eigen::MatrixXd jacobian_F(const SlamState& state, const ControlInput& u)
{
  Eigen::MatrixXd f = Eigen::MatrixXd::Identity(state.dim(), state.dim());
  const double c = std::cos(state.pose.phi);
  const double s = std::sin(state.pose.phi);
  f(0, 2) = -s * u.du - c * u.dv;
  f(1, 2) = c * u.du - s * u.dv;
  return f;
}

Eigen::MatrixXd jacobian_H(const SlamState& state, std::size_t landmark_index)
{
  check_index(state, landmark_index);
  const double c = std::cos(state.pose.phi);
  const double s = std::sin(state.pose.phi);
  const double dx = state.landmarks[landmark_index].x() - state.pose.x;
  const double dy = state.landmarks[landmark_index].y() - state.pose.y;

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, state.dim());
  // d/d(x, y, phi) of [c dx + s dy, -s dx + c dy]
  h(0, 0) = -c;
  h(0, 1) = -s;
  h(0, 2) = -s * dx + c * dy;
  h(1, 0) = s;
  h(1, 1) = -c;
  h(1, 2) = -c * dx - s * dy;
  const Eigen::Index col = 3 + 2 * static_cast<Eigen::Index>(landmark_index);
  h.block<2, 2>(0, col) = rotation(state.pose.phi).transpose();
  return h;
}

SlamState predict(const SlamState& state, const ControlInput& u, const NoiseModel& noise)
{
  const Eigen::MatrixXd f = jacobian_F(state, u);
  SlamState out = state;
  out.pose = motion_model(state.pose, u);
  out.cov = f * state.cov * f.transpose();
  out.cov.topLeftCorner<3, 3>() += noise.q;
  symmetrize(out.cov);
  ++out.step;
  return out;
}

double residual_norm(const SlamState& state, std::span<const LandmarkObservation> obs,
                     const NoiseModel& noise)
{
  double sq = 0.0;
  for (const auto& o : obs) {
    if (o.is_new()) {
      throw UnknownLandmark("residual requested for an unassociated observation");
    }
    sq += (o.z - measurement_model(state, *o.landmark_index, noise)).squaredNorm();
  }
  return std::sqrt(sq);
}

SlamState update(const SlamState& state, std::span<const LandmarkObservation> obs,
                 const NoiseModel& noise, int n_iter)
{
  if (n_iter < 1) {
    throw InvalidArgument("n_iter must be >= 1");
  }
  if (obs.empty()) {
    return state;
  }
  for (const auto& o : obs) {
    if (o.is_new() || *o.landmark_index >= state.landmark_count()) {
      throw UnknownLandmark("update received an observation of an unknown landmark");
    }
  }

  const Eigen::Index n = state.dim();
  const Eigen::Index m = 2 * static_cast<Eigen::Index>(obs.size());
  const Eigen::VectorXd prior = state.to_vector();
  const Eigen::MatrixXd& p_prior = state.cov;

  Eigen::VectorXd z(m);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const auto row = 2 * static_cast<Eigen::Index>(k);
    z.segment<2>(row) = obs[k].z;
    r.block<2, 2>(row, row) = noise.r_meas;
  }

  SlamState current = state;
  double current_residual = residual_norm(current, obs, noise);
  bool have_posterior = false;

  for (int it = 0; it < n_iter; ++it) {
    Eigen::MatrixXd h(m, n);
    Eigen::VectorXd hx(m);
    for (std::size_t k = 0; k < obs.size(); ++k) {
      const auto row = 2 * static_cast<Eigen::Index>(k);
      h.middleRows(row, 2) = jacobian_H(current, *obs[k].landmark_index);
      hx.segment<2>(row) = measurement_model(current, *obs[k].landmark_index, noise);
    }

    const Eigen::MatrixXd s = h * p_prior * h.transpose() + r;
    const Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success || !s.allFinite()) {
      throw SingularInnovation("innovation covariance is not positive definite");
    }
    const Eigen::MatrixXd k_gain = llt.solve(h * p_prior).transpose();

    Eigen::VectorXd offset = prior - current.to_vector();
    offset(2) = wrap_angle(offset(2));
    const Eigen::VectorXd innovation = z - hx - h * offset;

    SlamState next = state;
    next.assign_vector(prior + k_gain * innovation);

    const Eigen::MatrixXd i_kh = Eigen::MatrixXd::Identity(n, n) - k_gain * h;
    next.cov = i_kh * p_prior * i_kh.transpose() + k_gain * r * k_gain.transpose();
    symmetrize(next.cov);

    const double next_residual = residual_norm(next, obs, noise);
    if (have_posterior && next_residual > current_residual) {
      break;
    }
    current = std::move(next);
    current_residual = next_residual;
    have_posterior = true;
  }
  return current;
}

SlamState augment(const SlamState& state, const LandmarkObservation& obs, const NoiseModel& noise)
{
  if (!obs.is_new()) {
    throw InvalidArgument("augment expects an observation marked NEW");
  }
  const double c = std::cos(state.pose.phi);
  const double s = std::sin(state.pose.phi);
  const Eigen::Vector2d local = obs.z - noise.w_bias;
  const Eigen::Matrix2d rot = rotation(state.pose.phi);

  Eigen::Matrix<double, 2, 3> g_pose;
  g_pose << 1.0, 0.0, -s * local.x() - c * local.y(),
            0.0, 1.0,  c * local.x() - s * local.y();

  const Eigen::Index n = state.dim();
  SlamState out = state;
  out.landmarks.push_back(Eigen::Vector2d(state.pose.x, state.pose.y) + rot * local);
  out.cov = Eigen::MatrixXd::Zero(n + 2, n + 2);
  out.cov.topLeftCorner(n, n) = state.cov;

  const Eigen::MatrixXd cross = g_pose * state.cov.topRows(3);  // 2 x n
  out.cov.block(n, 0, 2, n) = cross;
  out.cov.block(0, n, n, 2) = cross.transpose();
  out.cov.block<2, 2>(n, n) = g_pose * state.cov.topLeftCorner<3, 3>() * g_pose.transpose() +
                              rot * noise.r_meas * rot.transpose();
  symmetrize(out.cov);
  return out;
}

double pose_nees(const SlamState& state, const RobotPose& truth)
{
  const Eigen::Vector3d err(state.pose.x - truth.x, state.pose.y - truth.y,
                            wrap_angle(state.pose.phi - truth.phi));
  const Eigen::Matrix3d p = state.cov.topLeftCorner<3, 3>();
  return err.dot(p.ldlt().solve(err));
}

}  // namespace panotrack::ekf
