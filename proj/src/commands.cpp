#include "panotrack/commands.hpp"

#include "panotrack/errors.hpp"
#include "panotrack/io.hpp"
#include "panotrack/log.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace panotrack::harness {

using tracking::CameraModel;
using tracking::Detection;

namespace {

void ensure_dir(const std::string& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir);
  }
}

std::string join(const std::string& dir, const char* name)
{
  return (std::filesystem::path(dir) / name).string();
}

std::string records_csv(const RecordList& records)
{
  std::ostringstream ss;
  io::write_records(ss, records);
  return ss.str();
}

}  // namespace

// ---------------------------------------------------------------------------

Simulation simulate(const sim::ScenarioConfig& scenario)
{
  Simulation s;
  s.world = sim::generate_world(scenario);
  const auto ideal = sim::project(s.world.truth, s.world.cameras);
  s.detections = sim::strip_labels(sim::corrupt(ideal, s.world.cameras, scenario));
  return s;
}

void cmd_simulate(const config::RunConfig& cfg, const std::string& out_dir)
{
  const auto s = simulate(cfg.scenario);
  ensure_dir(out_dir);
  std::ostringstream det;
  io::write_detections(det, s.detections);
  io::write_file(join(out_dir, "detections.csv"), det.str());
  io::write_file(join(out_dir, "cameras.json"), io::cameras_to_json(s.world.cameras).dump(2) + "\n");
  io::write_file(join(out_dir, "truth.csv"), records_csv(s.world.truth));
  log::info("simulate: {} detections, {} truth records, {} cameras", s.detections.size(),
            s.world.truth.size(), s.world.cameras.size());
}

// ---------------------------------------------------------------------------

RecordList to_object_records(std::span<const tracking::TrackRecord> records)
{
  RecordList out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back({r.frame, r.id, r.position});
  }
  return out;
}

TrackRun track_detections(std::span<const Detection> detections,
                          const std::vector<CameraModel>& cameras,
                          const tracking::TrackerParams& params)
{
  tracking::CameraRig rig(cameras);
  for (const auto& d : detections) {
    if (!rig.contains(d.camera)) {
      throw MissingCamera(d.camera, fmt::format("frame {}: detection references unknown camera {}",
                                                d.frame, d.camera));
    }
  }
  TrackRun run;
  if (detections.empty()) {
    return run;
  }

  std::map<long, std::vector<Detection>> by_frame;
  for (const auto& d : detections) {
    by_frame[d.frame].push_back(d);
  }
  const long first = by_frame.begin()->first;
  const long last = by_frame.rbegin()->first;

  tracking::Tracker tracker(params, std::move(rig));
  const std::vector<Detection> none;
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  for (long f = first; f <= last; ++f) {
    const auto it = by_frame.find(f);
    const auto frame_start = clock::now();
    const auto result = tracker.step(f, it == by_frame.end() ? none : it->second);
    run.frame_seconds.push_back(std::chrono::duration<double>(clock::now() - frame_start).count());
    run.bls_evaluations += result.stats.bls_evaluations;
  }
  run.total_seconds = std::chrono::duration<double>(clock::now() - start).count();

  run.all_records = tracker.best().records();
  run.records = to_object_records(tracker.committed_records());
  run.best_score = tracker.best().score;
  return run;
}

TrackRun cmd_track(const std::string& detections_path, const std::string& cameras_path,
                   const config::RunConfig& cfg, const std::string& out_dir)
{
  const auto detections = io::load_detections(detections_path);
  const auto cameras = io::load_cameras(cameras_path);
  auto run = track_detections(detections, cameras, cfg.tracker);

  ensure_dir(out_dir);
  io::write_file(join(out_dir, "tracks.csv"), records_csv(run.records));
  nlohmann::json timing = {{"frames", run.frame_seconds.size()},
                           {"total_seconds", run.total_seconds},
                           {"per_frame_seconds", run.frame_seconds},
                           {"best_score", run.best_score},
                           {"bls_evaluations", run.bls_evaluations},
                           {"k_h", cfg.tracker.k_h},
                           {"i_bls_max", cfg.tracker.i_bls_max}};
  io::write_file(join(out_dir, "timing.json"), timing.dump(2) + "\n");
  log::info("track: {} frames, {} records, {:.3f} s", run.frame_seconds.size(), run.records.size(),
            run.total_seconds);
  return run;
}

// ---------------------------------------------------------------------------

metrics::MotReport cmd_evaluate(const std::string& truth_path, const std::string& tracks_path,
                                double threshold, const std::string& out_dir)
{
  auto truth = io::load_records(truth_path);
  auto tracks = io::load_records(tracks_path);
  if (truth.empty()) {
    throw EmptyGroundTruth(truth_path + ": ground truth contains no records");
  }
  auto range = [](const RecordList& r) {
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end(), [](const auto& a, const auto& b) {
      return a.frame < b.frame;
    });
    return std::pair{lo->frame, hi->frame};
  };
  const auto [t_lo, t_hi] = range(truth);
  if (!tracks.empty()) {
    const auto [h_lo, h_hi] = range(tracks);
    if (h_lo != t_lo || h_hi != t_hi) {
      const long lo = std::max(t_lo, h_lo);
      const long hi = std::min(t_hi, h_hi);
      log::warn("frame ranges differ (truth {}-{}, tracks {}-{}); evaluating frames {}-{}", t_lo, t_hi,
                h_lo, h_hi, lo, hi);
      auto outside = [lo, hi](const ObjectRecord& r) { return r.frame < lo || r.frame > hi; };
      std::erase_if(truth, outside);
      std::erase_if(tracks, outside);
      if (truth.empty()) {
        throw EmptyGroundTruth("no ground truth inside the common frame range");
      }
    }
  }
  const auto report = metrics::evaluate(truth, tracks, threshold);
  ensure_dir(out_dir);
  io::write_file(join(out_dir, "report.json"), io::report_to_json(report).dump(2) + "\n");
  return report;
}

// ---------------------------------------------------------------------------

SweepResult run_sweep(const config::RunConfig& cfg, int jobs)
{
  cfg.sweep.validate();
  const int seeds = cfg.sweep.seeds;

  std::vector<Simulation> sims;
  for (int s = 0; s < seeds; ++s) {
    auto scenario = cfg.scenario;
    scenario.seed = cfg.seed + static_cast<std::uint64_t>(s);
    sims.push_back(simulate(scenario));
  }

  SweepResult result;
  for (const int k : cfg.sweep.k_h) {
    for (const int i : cfg.sweep.i_bls_max) {
      for (int s = 0; s < seeds; ++s) {
        result.rows.push_back({k, i, s, 0.0, 0.0, 0.0});
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t n = next++; n < result.rows.size(); n = next++) {
      auto& row = result.rows[n];
      auto params = cfg.tracker;
      params.k_h = row.k_h;
      params.i_bls_max = row.i_bls_max;
      params.seed = cfg.seed + static_cast<std::uint64_t>(row.seed);
      const auto& sim = sims[static_cast<std::size_t>(row.seed)];
      const auto run = track_detections(sim.detections, sim.world.cameras, params);
      const auto report = metrics::evaluate(sim.world.truth, run.records, cfg.threshold);
      row.mota = report.mota;
      row.motp = report.motp;
      row.seconds = run.total_seconds;
      log::info("sweep: k_h={} i_bls_max={} seed={} mota={:.4f} {:.3f}s", row.k_h, row.i_bls_max,
                row.seed, row.mota, row.seconds);
    }
  };
  const int workers = std::max(1, jobs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }

  for (std::size_t first = 0; first < result.rows.size(); first += static_cast<std::size_t>(seeds)) {
    SweepCell cell;
    cell.k_h = result.rows[first].k_h;
    cell.i_bls_max = result.rows[first].i_bls_max;
    cell.min_mota = result.rows[first].mota;
    cell.max_mota = result.rows[first].mota;
    for (int s = 0; s < seeds; ++s) {
      const auto& row = result.rows[first + static_cast<std::size_t>(s)];
      cell.mean_mota += row.mota / seeds;
      cell.mean_seconds += row.seconds / seeds;
      cell.min_mota = std::min(cell.min_mota, row.mota);
      cell.max_mota = std::max(cell.max_mota, row.mota);
    }
    cell.mota_gap = cell.max_mota - cell.min_mota;
    result.cells.push_back(cell);
  }
  return result;
}

SweepResult cmd_sweep(const config::RunConfig& cfg, int jobs, const std::string& out_dir)
{
  auto result = run_sweep(cfg, jobs);
  ensure_dir(out_dir);
  std::ostringstream rows;
  rows << "k_h,i_bls_max,seed,mota,motp,seconds\n";
  for (const auto& r : result.rows) {
    fmt::print(rows, "{},{},{},{:.6f},{:.6f},{:.6f}\n", r.k_h, r.i_bls_max, r.seed, r.mota, r.motp,
               r.seconds);
  }
  io::write_file(join(out_dir, "sweep.csv"), rows.str());

  std::ostringstream summary;
  summary << "k_h,i_bls_max,mean_mota,min_mota,max_mota,mota_gap,mean_seconds\n";
  for (const auto& c : result.cells) {
    fmt::print(summary, "{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", c.k_h, c.i_bls_max, c.mean_mota,
               c.min_mota, c.max_mota, c.mota_gap, c.mean_seconds);
  }
  io::write_file(join(out_dir, "sweep_summary.csv"), summary.str());
  return result;
}

// ---------------------------------------------------------------------------

SlamRun run_slam_once(const config::SlamDemoConfig& cfg, std::uint64_t seed)
{
  using ekf::ControlInput;
  using ekf::LandmarkObservation;
  using ekf::RobotPose;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::vector<Eigen::Vector2d> landmarks;
  for (int k = 0; k < cfg.landmarks; ++k) {
    const double a = 2.0 * std::numbers::pi * k / cfg.landmarks + 0.2 * unit(rng);
    const double r = cfg.landmark_radius + 0.5 * unit(rng);
    landmarks.emplace_back(r * std::cos(a), r * std::sin(a));
  }

  ekf::NoiseModel noise;
  noise.q = Eigen::Vector3d(cfg.q_xy * cfg.q_xy, cfg.q_xy * cfg.q_xy, cfg.q_phi * cfg.q_phi).asDiagonal();
  noise.r_meas = cfg.r_xy * cfg.r_xy * Eigen::Matrix2d::Identity();

  // Counter-clockwise circle about the origin, closing after `steps` steps.
  const double turn = 2.0 * std::numbers::pi / cfg.steps;
  const ControlInput u{cfg.loop_radius * std::sin(turn), cfg.loop_radius * (1.0 - std::cos(turn)), turn};

  RobotPose truth{cfg.loop_radius, 0.0, std::numbers::pi / 2.0};
  auto state = ekf::SlamState::initial(truth, Eigen::Matrix3d::Zero());
  std::map<int, std::size_t> slot;  // true landmark -> state index

  SlamRun run;
  for (int step = 1; step <= cfg.steps; ++step) {
    truth = ekf::motion_model(truth, u);
    truth.x += cfg.q_xy * gauss(rng);
    truth.y += cfg.q_xy * gauss(rng);
    truth.phi = ekf::wrap_angle(truth.phi + cfg.q_phi * gauss(rng));
    state = ekf::predict(state, u, noise);

    const double c = std::cos(truth.phi);
    const double s = std::sin(truth.phi);
    std::vector<LandmarkObservation> known;
    std::vector<std::pair<int, LandmarkObservation>> fresh;
    for (int k = 0; k < cfg.landmarks; ++k) {
      const Eigen::Vector2d d = landmarks[static_cast<std::size_t>(k)] - Eigen::Vector2d(truth.x, truth.y);
      if (d.norm() > cfg.sensor_range) {
        continue;
      }
      const Eigen::Vector2d z(c * d.x() + s * d.y() + cfg.r_xy * gauss(rng),
                              -s * d.x() + c * d.y() + cfg.r_xy * gauss(rng));
      const auto it = slot.find(k);
      if (it != slot.end()) {
        known.push_back(LandmarkObservation::of(it->second, z));
      } else {
        fresh.emplace_back(k, LandmarkObservation::fresh(z));
      }
    }
    state = ekf::update(state, known, noise, cfg.n_iter);
    for (const auto& [k, obs] : fresh) {
      state = ekf::augment(state, obs, noise);
      slot[k] = state.landmark_count() - 1;
    }

    double nees = std::numeric_limits<double>::quiet_NaN();
    const Eigen::Matrix3d p = state.cov.topLeftCorner<3, 3>();
    if (Eigen::LLT<Eigen::Matrix3d>(p).info() == Eigen::Success && p.minCoeff() > -1.0 &&
        p.diagonal().minCoeff() > 1e-15) {
      nees = ekf::pose_nees(state, truth);
    }
    run.steps.push_back({step, state.pose, truth, nees});
  }

  run.true_landmarks.resize(state.landmark_count());
  for (const auto& [k, idx] : slot) {
    run.true_landmarks[idx] = landmarks[static_cast<std::size_t>(k)];
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < state.landmark_count(); ++i) {
    sq += (state.landmarks[i] - run.true_landmarks[i]).squaredNorm();
  }
  run.final_landmark_rmse = state.landmark_count() ? std::sqrt(sq / state.landmark_count()) : 0.0;
  run.final_pose_error = std::hypot(state.pose.x - truth.x, state.pose.y - truth.y);
  run.final_state = std::move(state);
  return run;
}

SlamSummary run_slam_demo(const config::SlamDemoConfig& cfg, std::uint64_t seed)
{
  cfg.validate();
  SlamSummary summary;
  summary.mean_nees_per_step.assign(static_cast<std::size_t>(cfg.steps), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(cfg.steps), 0);
  double nees_sum = 0.0;
  long nees_count = 0;
  for (int r = 0; r < cfg.runs; ++r) {
    auto run = run_slam_once(cfg, seed * 1000003ULL + static_cast<std::uint64_t>(r));
    for (std::size_t k = 0; k < run.steps.size(); ++k) {
      const double n = run.steps[k].nees;
      if (std::isfinite(n)) {
        summary.mean_nees_per_step[k] += n;
        ++counts[k];
        nees_sum += n;
        ++nees_count;
      }
    }
    summary.mean_final_landmark_rmse += run.final_landmark_rmse / cfg.runs;
    summary.mean_final_pose_error += run.final_pose_error / cfg.runs;
    if (r == 0) {
      summary.first_run = std::move(run);
    }
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    summary.mean_nees_per_step[k] =
        counts[k] ? summary.mean_nees_per_step[k] / counts[k] : std::numeric_limits<double>::quiet_NaN();
  }
  summary.mean_nees = nees_count ? nees_sum / static_cast<double>(nees_count)
                                 : std::numeric_limits<double>::quiet_NaN();
  return summary;
}

SlamSummary cmd_slam_demo(const config::RunConfig& cfg, const std::string& out_dir)
{
  auto summary = run_slam_demo(cfg.slam, cfg.seed);
  ensure_dir(out_dir);

  std::ostringstream est;
  est << "step,x,y,phi,true_x,true_y,true_phi,nees\n";
  for (const auto& s : summary.first_run.steps) {
    fmt::print(est, "{},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{:.9f},{:.6f}\n", s.step, s.estimate.x,
               s.estimate.y, s.estimate.phi, s.truth.x, s.truth.y, s.truth.phi, s.nees);
  }
  io::write_file(join(out_dir, "slam_estimates.csv"), est.str());

  std::ostringstream lms;
  lms << "index,x,y,true_x,true_y\n";
  const auto& st = summary.first_run.final_state;
  for (std::size_t i = 0; i < st.landmark_count(); ++i) {
    fmt::print(lms, "{},{:.9f},{:.9f},{:.9f},{:.9f}\n", i, st.landmarks[i].x(), st.landmarks[i].y(),
               summary.first_run.true_landmarks[i].x(), summary.first_run.true_landmarks[i].y());
  }
  io::write_file(join(out_dir, "slam_landmarks.csv"), lms.str());

  std::ostringstream nees;
  nees << "step,mean_nees\n";
  for (std::size_t k = 0; k < summary.mean_nees_per_step.size(); ++k) {
    fmt::print(nees, "{},{:.6f}\n", k + 1, summary.mean_nees_per_step[k]);
  }
  io::write_file(join(out_dir, "slam_nees.csv"), nees.str());

  nlohmann::json j = {{"runs", cfg.slam.runs},
                      {"steps", cfg.slam.steps},
                      {"n_iter", cfg.slam.n_iter},
                      {"mean_nees", summary.mean_nees},
                      {"mean_final_landmark_rmse", summary.mean_final_landmark_rmse},
                      {"mean_final_pose_error", summary.mean_final_pose_error}};
  io::write_file(join(out_dir, "slam_summary.json"), j.dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------------------

double linear_fit_r2(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("linear_fit_r2 needs two equally sized series of length >= 2");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) {
    throw InvalidArgument("linear_fit_r2: x has no spread");
  }
  if (syy == 0.0) {
    return 1.0;
  }
  return (sxy * sxy) / (sxx * syy);
}

}  // namespace panotrack::harness
