#pragma once

// Run configuration (JSON). Every section is optional; unknown keys are
// rejected with the offending key and its line.
//
// {
//   "seed": 1, "threshold": 1.0, "output_dir": "out",
//   "scenario": { "n_targets": 10, "n_frames": 333, ... },
//   "tracker":  { "l_c": 4, "k_h": 10, "i_bls_max": 1000, ... },
//   "sweep":    { "k_h": [1, 5, ...], "i_bls_max": [500, 1000, 2000], "seeds": 5 },
//   "slam":     { "runs": 200, "steps": 50, ... }
// }

#include "panotrack/clear_mot.hpp"
#include "panotrack/scenario.hpp"
#include "panotrack/tracker.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace panotrack::config {

struct SweepSpec
{
  std::vector<int> k_h = {1, 5, 10, 15, 20, 25, 30};
  std::vector<int> i_bls_max = {500, 1000, 2000};
  int seeds = 5;

  void validate() const;
};

struct SlamDemoConfig
{
  int runs = 200;
  int steps = 50;
  int landmarks = 5;
  double loop_radius = 4.0;       // m
  double landmark_radius = 6.5;   // m, landmarks ring around the loop centre
  double sensor_range = 15.0;     // m
  double q_xy = 0.03;             // m, per-step position noise std
  double q_phi = 0.01;            // rad, per-step heading noise std
  double r_xy = 0.1;              // m, measurement noise std
  int n_iter = 2;

  void validate() const;
};

struct RunConfig
{
  tracking::TrackerParams tracker;
  sim::ScenarioConfig scenario;
  SweepSpec sweep;
  SlamDemoConfig slam;
  double threshold = metrics::kDefaultThreshold;
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  /// Propagates `seed` into the scenario and tracker and validates every section.
  void finalize();
};

/// Parses and finalizes a config; ParseError messages carry "line N" and the key.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace panotrack::config
