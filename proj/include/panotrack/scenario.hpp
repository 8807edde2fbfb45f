#pragma once

// Seeded synthetic multi-camera pedestrian scenarios: random-waypoint walkers,
// perimeter cameras, pinhole projection and detection corruption.

#include "panotrack/camera.hpp"
#include "panotrack/records.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace panotrack::sim {

struct ScenarioConfig
{
  int n_targets = 10;
  int n_frames = 333;
  int n_cameras = 4;
  double arena_width = 8.0;   // m
  double arena_depth = 8.0;   // m
  double fps = 6.0;
  double v_max_sim = 0.5;     // m/s
  double noise_px = 1.0;
  double p_miss = 0.05;
  double clutter_rate = 0.2;  // expected false detections per camera-frame
  std::uint64_t seed = 1;

  void validate() const;
};

/// Fixed rig geometry shared by all generated scenarios.
struct RigGeometry
{
  static constexpr double focal = 500.0;
  static constexpr double cx = 640.0;
  static constexpr double cy = 512.0;
  static constexpr double mount_height = 3.0;   // m
  static constexpr double setback = 0.5;        // m outside the arena edge
  static constexpr double walk_margin = 0.5;    // m inside the arena edge
  static constexpr double base_height = 1.7;    // m
  static constexpr double height_jitter = 0.05; // m
  static constexpr double personal_space = 0.6; // m, minimum walker separation
};

struct World
{
  RecordList truth;  // (frame, target id, body centre); sorted by frame then id
  std::vector<tracking::CameraModel> cameras;
};

/// Target counts for the named crowd densities: low 10, medium 25, high 40.
/// Throws InvalidArgument for any other name.
int density_targets(std::string_view name);

World generate_world(const ScenarioConfig& config);

struct LabelledDetection
{
  tracking::Detection detection;
  int target_id = -1;  // -1 for clutter
};

/// Ideal pinhole detections of every target in front of and inside each camera.
/// Window size is the target's full height (twice the centre height) over depth.
std::vector<LabelledDetection> project(const RecordList& truth,
                                       const std::vector<tracking::CameraModel>& cameras);

/// Pixel noise, random drop-outs and Poisson clutter. Output is sorted by frame
/// then camera; within a camera-frame true detections precede clutter.
std::vector<LabelledDetection> corrupt(const std::vector<LabelledDetection>& ideal,
                                       const std::vector<tracking::CameraModel>& cameras,
                                       const ScenarioConfig& config);

std::vector<tracking::Detection> strip_labels(const std::vector<LabelledDetection>& labelled);

/// Fraction of ground-truth points seen by at least `min_views` cameras.
double coverage(const RecordList& truth, const std::vector<tracking::CameraModel>& cameras,
                int min_views);

}  // namespace panotrack::sim
