#include "panotrack/scenario.hpp"

#include "panotrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <string>

namespace panotrack::sim {

using tracking::CameraModel;
using tracking::Detection;

namespace {

// Independent streams so that changing e.g. the clutter rate leaves the walkers untouched.
constexpr std::uint64_t kWalkerStream = 0x57A1'4E25ULL;
constexpr std::uint64_t kCorruptStream = 0xC022'0B7EULL;
constexpr int kDetours = 8;  // redirected steps a blocked walker tries before waiting

struct Walker
{
  Eigen::Vector2d position;
  Eigen::Vector2d waypoint;
  double speed = 0.0;
  double height = RigGeometry::base_height;
};

class WaypointSampler
{
public:
  WaypointSampler(const ScenarioConfig& c, std::mt19937_64& rng)
    : x_(RigGeometry::walk_margin, c.arena_width - RigGeometry::walk_margin),
      y_(RigGeometry::walk_margin, c.arena_depth - RigGeometry::walk_margin),
      speed_(0.5 * c.v_max_sim, c.v_max_sim),
      rng_(rng)
  {}

  Eigen::Vector2d point() { return {x_(rng_), y_(rng_)}; }
  double speed() { return speed_(rng_); }

  // Next waypoint at least 1 m away and no more than 90 degrees off the current
  // heading, so walkers never double back within a few frames.
  Eigen::Vector2d next(const Eigen::Vector2d& from, const Eigen::Vector2d& heading)
  {
    Eigen::Vector2d fallback = point();
    for (int attempt = 0; attempt < 64; ++attempt) {
      const Eigen::Vector2d p = point();
      const Eigen::Vector2d d = p - from;
      if (d.norm() >= 1.0 && d.dot(heading) >= 0.0) {
        return p;
      }
      if ((p - from).norm() > (fallback - from).norm()) {
        fallback = p;
      }
    }
    return fallback;
  }

private:
  std::uniform_real_distribution<double> x_;
  std::uniform_real_distribution<double> y_;
  std::uniform_real_distribution<double> speed_;
  std::mt19937_64& rng_;
};

// True if `p` keeps personal space from the first `count` walkers other than `self`.
bool clear_of(const std::vector<Walker>& walkers, std::size_t self, const Eigen::Vector2d& p,
              std::size_t count)
{
  for (std::size_t j = 0; j < count; ++j) {
    if (j != self && (walkers[j].position - p).norm() < RigGeometry::personal_space) {
      return false;
    }
  }
  return true;
}

// Direction away from every walker within twice the personal space, nearer
// ones weighted more.
Eigen::Vector2d crowd_escape(const std::vector<Walker>& walkers, std::size_t self)
{
  Eigen::Vector2d push = Eigen::Vector2d::Zero();
  for (std::size_t j = 0; j < walkers.size(); ++j) {
    const Eigen::Vector2d d = walkers[self].position - walkers[j].position;
    const double n = d.norm();
    if (j != self && n > 0.0 && n < 2.0 * RigGeometry::personal_space) {
      push += d / (n * n);
    }
  }
  return push;
}

// Moves a walker along its waypoints for one frame, drawing new waypoints as
// it reaches them.
Walker advance(Walker w, WaypointSampler& sampler, double dt)
{
  double remaining = w.speed * dt;
  for (int legs = 0; remaining > 0.0 && legs < 16; ++legs) {
    const Eigen::Vector2d to_go = w.waypoint - w.position;
    const double d = to_go.norm();
    if (d > remaining) {
      w.position += remaining * to_go / d;
      break;
    }
    w.position = w.waypoint;
    remaining -= d;
    const Eigen::Vector2d heading = d > 0.0 ? Eigen::Vector2d(to_go / d) : Eigen::Vector2d::Zero();
    w.waypoint = sampler.next(w.position, heading);
    w.speed = sampler.speed();
  }
  return w;
}

std::vector<CameraModel> place_cameras(const ScenarioConfig& c)
{
  const Eigen::Vector2d centre(0.5 * c.arena_width, 0.5 * c.arena_depth);
  const double a = 0.5 * c.arena_width + RigGeometry::setback;
  const double b = 0.5 * c.arena_depth + RigGeometry::setback;
  const Eigen::Vector3d look(centre.x(), centre.y(), 0.5 * RigGeometry::base_height);

  std::vector<CameraModel> cams;
  for (int k = 0; k < c.n_cameras; ++k) {
    const double theta =
        (225.0 + 360.0 * static_cast<double>(k) / static_cast<double>(c.n_cameras)) *
        std::numbers::pi / 180.0;
    const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
    const double sx = std::abs(dir.x()) > 1e-12 ? a / std::abs(dir.x()) : INFINITY;
    const double sy = std::abs(dir.y()) > 1e-12 ? b / std::abs(dir.y()) : INFINITY;
    const Eigen::Vector2d p = centre + std::min(sx, sy) * dir;
    cams.push_back(CameraModel::look_at(k, RigGeometry::focal, RigGeometry::cx, RigGeometry::cy,
                                        {p.x(), p.y(), RigGeometry::mount_height}, look));
  }
  return cams;
}

}  // namespace

void ScenarioConfig::validate() const
{
  if (n_targets < 1 || n_frames < 1 || n_cameras < 1) {
    throw InvalidArgument("scenario counts must be >= 1");
  }
  if (!(arena_width > 2 * RigGeometry::walk_margin) || !(arena_depth > 2 * RigGeometry::walk_margin)) {
    throw InvalidArgument("arena must be larger than the walking margin");
  }
  if (!(fps > 0) || v_max_sim < 0 || noise_px < 0 || clutter_rate < 0) {
    throw InvalidArgument("scenario rates must be non-negative (fps positive)");
  }
  if (p_miss < 0 || p_miss > 1) {
    throw InvalidArgument("p_miss must lie in [0, 1]");
  }
}

int density_targets(std::string_view name)
{
  if (name == "low") {
    return 10;
  }
  if (name == "medium") {
    return 25;
  }
  if (name == "high") {
    return 40;
  }
  throw InvalidArgument("unknown density '" + std::string(name) + "' (expected low, medium or high)");
}

World generate_world(const ScenarioConfig& config)
{
  config.validate();
  World world;
  world.cameras = place_cameras(config);

  std::mt19937_64 rng(config.seed ^ kWalkerStream);
  WaypointSampler sampler(config, rng);
  std::uniform_real_distribution<double> jitter(-RigGeometry::height_jitter,
                                                RigGeometry::height_jitter);

  std::vector<Walker> walkers(static_cast<std::size_t>(config.n_targets));
  for (std::size_t i = 0; i < walkers.size(); ++i) {
    auto& w = walkers[i];
    // Rejection-sample a start clear of the walkers already placed.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      w.position = sampler.point();
      if (clear_of(walkers, i, w.position, i)) {
        break;
      }
    }
    w.height = RigGeometry::base_height + jitter(rng);
    w.waypoint = sampler.point();
    w.speed = sampler.speed();
  }

  const double dt = 1.0 / config.fps;
  world.truth.reserve(walkers.size() * static_cast<std::size_t>(config.n_frames));
  for (long f = 0; f < config.n_frames; ++f) {
    if (f > 0) {
      for (std::size_t i = 0; i < walkers.size(); ++i) {
        const Walker moved = advance(walkers[i], sampler, dt);
        if (clear_of(walkers, i, moved.position, walkers.size())) {
          walkers[i] = moved;
          continue;
        }
        // Blocked: step toward fresh waypoints heading out of the crowd, and
        // wait only if every detour is blocked too.
        const Eigen::Vector2d away = crowd_escape(walkers, i);
        bool stepped = false;
        for (int detour = 0; detour < kDetours && !stepped; ++detour) {
          Walker w = walkers[i];
          w.waypoint = sampler.next(w.position, away);
          w.speed = sampler.speed();
          const Walker next = advance(w, sampler, dt);
          if (clear_of(walkers, i, next.position, walkers.size())) {
            walkers[i] = next;
            stepped = true;
          } else if (detour == kDetours - 1) {
            walkers[i].waypoint = w.waypoint;
            walkers[i].speed = w.speed;
          }
        }
      }
    }
    for (std::size_t id = 0; id < walkers.size(); ++id) {
      const auto& w = walkers[id];
      world.truth.push_back(
          {f, static_cast<int>(id), {w.position.x(), w.position.y(), 0.5 * w.height}});
    }
  }
  return world;
}

std::vector<LabelledDetection> project(const RecordList& truth,
                                       const std::vector<CameraModel>& cameras)
{
  std::map<long, std::vector<const ObjectRecord*>> by_frame;
  for (const auto& r : truth) {
    by_frame[r.frame].push_back(&r);
  }
  std::vector<LabelledDetection> out;
  for (const auto& [frame, records] : by_frame) {
    for (const auto& cam : cameras) {
      for (const ObjectRecord* r : records) {
        const Eigen::Vector3d pc = cam.to_camera(r->position);
        const auto pixel = cam.project(r->position);
        if (!pixel || !cam.in_image(*pixel)) {
          continue;
        }
        const double full_height = 2.0 * r->position.z();
        Detection d{frame, cam.id, pixel->x(), pixel->y(), cam.fy * full_height / pc.z(), 1.0};
        out.push_back({d, r->id});
      }
    }
  }
  return out;
}

std::vector<LabelledDetection> corrupt(const std::vector<LabelledDetection>& ideal,
                                       const std::vector<CameraModel>& cameras,
                                       const ScenarioConfig& config)
{
  config.validate();
  std::mt19937_64 rng(config.seed ^ kCorruptStream);
  std::bernoulli_distribution drop(config.p_miss);
  std::normal_distribution<double> noise(0.0, config.noise_px > 0 ? config.noise_px : 1.0);
  std::poisson_distribution<int> clutter_count(config.clutter_rate > 0 ? config.clutter_rate : 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::map<std::pair<long, int>, std::vector<LabelledDetection>> cells;
  long last_frame = -1;
  for (const auto& d : ideal) {
    cells[{d.detection.frame, d.detection.camera}].push_back(d);
    last_frame = std::max(last_frame, d.detection.frame);
  }
  // Clutter also lands in camera-frames that saw no target.
  last_frame = std::max(last_frame, static_cast<long>(config.n_frames) - 1);
  for (long f = 0; f <= last_frame; ++f) {
    for (const auto& cam : cameras) {
      cells[{f, cam.id}];
    }
  }

  std::map<int, const CameraModel*> cam_by_id;
  for (const auto& cam : cameras) {
    cam_by_id[cam.id] = &cam;
  }

  std::vector<LabelledDetection> out;
  for (auto& [key, dets] : cells) {
    for (auto d : dets) {
      if (config.p_miss > 0 && drop(rng)) {
        continue;
      }
      if (config.noise_px > 0) {
        d.detection.u += noise(rng);
        d.detection.v += noise(rng);
      }
      out.push_back(d);
    }
    const auto it = cam_by_id.find(key.second);
    if (config.clutter_rate > 0 && it != cam_by_id.end()) {
      const auto& cam = *it->second;
      const int n = clutter_count(rng);
      for (int k = 0; k < n; ++k) {
        Detection c;
        c.frame = key.first;
        c.camera = cam.id;
        c.u = unit(rng) * cam.image_width();
        c.v = unit(rng) * cam.image_height();
        c.size = 40.0 + 210.0 * unit(rng);
        c.score = unit(rng);
        out.push_back({c, -1});
      }
    }
  }
  return out;
}

std::vector<Detection> strip_labels(const std::vector<LabelledDetection>& labelled)
{
  std::vector<Detection> out;
  out.reserve(labelled.size());
  for (const auto& l : labelled) {
    out.push_back(l.detection);
  }
  return out;
}

double coverage(const RecordList& truth, const std::vector<CameraModel>& cameras, int min_views)
{
  if (truth.empty()) {
    return 0.0;
  }
  std::size_t covered = 0;
  for (const auto& r : truth) {
    int views = 0;
    for (const auto& cam : cameras) {
      const auto pixel = cam.project(r.position);
      if (pixel && cam.in_image(*pixel)) {
        ++views;
      }
    }
    if (views >= min_views) {
      ++covered;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(truth.size());
}

}  // namespace panotrack::sim
