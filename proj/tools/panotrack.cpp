#include "panotrack/commands.hpp"
#include "panotrack/config.hpp"
#include "panotrack/errors.hpp"
#include "panotrack/io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <optional>
#include <string>

using namespace panotrack;

namespace {

struct Options
{
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::optional<double> threshold;
  std::string detections;
  std::string cameras;
  std::string truth;
  std::string tracks;
  std::optional<int> k_h;
  std::optional<int> i_bls_max;
  std::string density;
};

config::RunConfig load(const Options& o)
{
  auto cfg = o.config.empty() ? config::RunConfig{} : config::load_run_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
  }
  if (o.threshold) {
    cfg.threshold = *o.threshold;
  }
  if (o.k_h) {
    cfg.tracker.k_h = *o.k_h;
  }
  if (o.i_bls_max) {
    cfg.tracker.i_bls_max = *o.i_bls_max;
  }
  if (!o.density.empty()) {
    cfg.scenario.n_targets = sim::density_targets(o.density);
  }
  if (!o.out.empty()) {
    cfg.output_dir = o.out;
  }
  if (o.config.empty()) {
    cfg.tracker.fps = cfg.scenario.fps;
  }
  cfg.finalize();
  return cfg;
}

std::string one_line(std::string s)
{
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"panotrack: multi-view tracking, CLEAR-MOT evaluation and EKF-SLAM tools"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "run configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "override the configured seed");
  };

  auto* simulate = app.add_subcommand("simulate", "generate detections, cameras and ground truth");
  common(simulate);
  simulate->add_option("--density", o.density, "crowd density: low (10), medium (25) or high (40) targets");

  auto* track = app.add_subcommand("track", "run the tracker over a detection file");
  common(track);
  track->add_option("--detections", o.detections, "detection CSV")->required();
  track->add_option("--cameras", o.cameras, "camera JSON")->required();
  track->add_option("--k-h", o.k_h, "override tracker k_h");
  track->add_option("--i-bls-max", o.i_bls_max, "override tracker i_bls_max");

  auto* evaluate = app.add_subcommand("evaluate", "CLEAR-MOT scores of tracks against truth");
  common(evaluate);
  evaluate->add_option("--truth", o.truth, "ground-truth CSV")->required();
  evaluate->add_option("--tracks", o.tracks, "track CSV")->required();
  evaluate->add_option("--threshold", o.threshold, "match threshold in metres");

  auto* sweep = app.add_subcommand("sweep", "k_h x i_bls_max parameter sweep");
  common(sweep);
  sweep->add_option("--jobs", o.jobs, "parallel cells")->check(CLI::PositiveNumber);
  sweep->add_option("--threshold", o.threshold, "match threshold in metres");
  sweep->add_option("--density", o.density, "crowd density: low (10), medium (25) or high (40) targets");

  auto* slam = app.add_subcommand("slam-demo", "Monte-Carlo EKF-SLAM loop");
  common(slam);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fmt::print(stderr, "error: usage: {}\n", one_line(e.what()));
    return 2;
  }

  try {
    const auto cfg = load(o);
    const std::string& out = cfg.output_dir;
    if (simulate->parsed()) {
      harness::cmd_simulate(cfg, out);
    } else if (track->parsed()) {
      const auto run = harness::cmd_track(o.detections, o.cameras, cfg, out);
      fmt::print("frames {} records {} seconds {:.3f}\n", run.frame_seconds.size(), run.records.size(),
                 run.total_seconds);
    } else if (evaluate->parsed()) {
      const auto report = harness::cmd_evaluate(o.truth, o.tracks, cfg.threshold, out);
      fmt::print("{}\n", io::report_to_json(report).dump(2));
    } else if (sweep->parsed()) {
      const auto result = harness::cmd_sweep(cfg, o.jobs, out);
      fmt::print("k_h,i_bls_max,mean_mota,mota_gap,mean_seconds\n");
      for (const auto& c : result.cells) {
        fmt::print("{},{},{:.4f},{:.4f},{:.3f}\n", c.k_h, c.i_bls_max, c.mean_mota, c.mota_gap,
                   c.mean_seconds);
      }
    } else if (slam->parsed()) {
      const auto s = harness::cmd_slam_demo(cfg, out);
      fmt::print("mean_nees {:.4f} landmark_rmse {:.4f} pose_error {:.4f}\n", s.mean_nees,
                 s.mean_final_landmark_rmse, s.mean_final_pose_error);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}: {}\n", e.kind(), one_line(e.what()));
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: internal: {}\n", one_line(e.what()));
    return 1;
  }
  return 0;
}
