#pragma once

// Library side of the command-line harness. Each cmd_* writes its files into
// an output directory; the run_* / track_* helpers do the same work in memory.

#include "panotrack/clear_mot.hpp"
#include "panotrack/config.hpp"
#include "panotrack/ekf_slam.hpp"
#include "panotrack/scenario.hpp"
#include "panotrack/tracker.hpp"

#include <span>
#include <string>
#include <vector>

namespace panotrack::harness {

// --- simulate ---------------------------------------------------------------

struct Simulation
{
  sim::World world;
  std::vector<tracking::Detection> detections;
};

Simulation simulate(const sim::ScenarioConfig& scenario);

/// Writes detections.csv, cameras.json and truth.csv.
void cmd_simulate(const config::RunConfig& cfg, const std::string& out_dir);

// --- track ------------------------------------------------------------------

struct TrackRun
{
  RecordList records;                             // committed, non-static
  std::vector<tracking::TrackRecord> all_records; // committed, including static
  std::vector<double> frame_seconds;
  double total_seconds = 0.0;
  double best_score = 0.0;
  long bls_evaluations = 0;
};

/// Steps the tracker over every frame between the first and last detection.
/// Raises MissingCamera before tracking if a detection names an unknown camera.
TrackRun track_detections(std::span<const tracking::Detection> detections,
                          const std::vector<tracking::CameraModel>& cameras,
                          const tracking::TrackerParams& params);

/// Writes tracks.csv and timing.json.
TrackRun cmd_track(const std::string& detections_path, const std::string& cameras_path,
                   const config::RunConfig& cfg, const std::string& out_dir);

// --- evaluate ---------------------------------------------------------------

/// Restricts both inputs to their common frame range (warning when they
/// differ), evaluates, and writes report.json.
metrics::MotReport cmd_evaluate(const std::string& truth_path, const std::string& tracks_path,
                                double threshold, const std::string& out_dir);

// --- sweep ------------------------------------------------------------------

struct SweepRow
{
  int k_h = 0;
  int i_bls_max = 0;
  int seed = 0;
  double mota = 0.0;
  double motp = 0.0;
  double seconds = 0.0;
};

struct SweepCell
{
  int k_h = 0;
  int i_bls_max = 0;
  double mean_mota = 0.0;
  double min_mota = 0.0;
  double max_mota = 0.0;
  double mota_gap = 0.0;
  double mean_seconds = 0.0;
};

struct SweepResult
{
  std::vector<SweepRow> rows;    // k_h-major, then i_bls_max, then seed
  std::vector<SweepCell> cells;  // same order, one per (k_h, i_bls_max)
};

/// Seed s of every cell tracks the scenario generated with cfg.seed + s.
SweepResult run_sweep(const config::RunConfig& cfg, int jobs = 1);

/// Writes sweep.csv and sweep_summary.csv.
SweepResult cmd_sweep(const config::RunConfig& cfg, int jobs, const std::string& out_dir);

// --- slam-demo --------------------------------------------------------------

struct SlamStepLog
{
  int step = 0;
  ekf::RobotPose estimate;
  ekf::RobotPose truth;
  double nees = 0.0;
};

struct SlamRun
{
  std::vector<SlamStepLog> steps;
  ekf::SlamState final_state;
  std::vector<Eigen::Vector2d> true_landmarks;  // in state order
  double final_pose_error = 0.0;                // m
  double final_landmark_rmse = 0.0;             // m
};

/// One seeded loop: noisy truth, predict / update / augment per step.
SlamRun run_slam_once(const config::SlamDemoConfig& cfg, std::uint64_t seed);

struct SlamSummary
{
  std::vector<double> mean_nees_per_step;
  double mean_nees = 0.0;
  double mean_final_landmark_rmse = 0.0;
  double mean_final_pose_error = 0.0;
  SlamRun first_run;
};

SlamSummary run_slam_demo(const config::SlamDemoConfig& cfg, std::uint64_t seed);

/// Writes slam_estimates.csv, slam_landmarks.csv, slam_nees.csv and slam_summary.json.
SlamSummary cmd_slam_demo(const config::RunConfig& cfg, const std::string& out_dir);

// --- helpers ----------------------------------------------------------------

RecordList to_object_records(std::span<const tracking::TrackRecord> records);

/// Coefficient of determination of the least-squares line through (x, y).
double linear_fit_r2(std::span<const double> x, std::span<const double> y);

}  // namespace panotrack::harness
