#include "panotrack/errors.hpp"
#include "panotrack/scenario.hpp"
#include "panotrack/tracker.hpp"

#include "support/gen.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace panotrack;
using namespace panotrack::tracking;
using ptest::Gen;
using ptest::target_at;

namespace {

Track track_through(std::vector<std::pair<long, Eigen::Vector3d>> states, const TrackerParams& params,
                    double height = 1.7)
{
  Track t;
  for (const auto& [frame, p] : states) {
    t.push({frame, target_at(p, height)}, params);
  }
  return t;
}

sim::World small_world(std::uint64_t seed)
{
  sim::ScenarioConfig cfg;
  cfg.n_frames = 30;
  cfg.seed = seed;
  return sim::generate_world(cfg);
}

}  // namespace

TEST(Params, ValidateRejectsNonsense)
{
  TrackerParams p;
  EXPECT_NO_THROW(p.validate());
  p.k_h = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.fps = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.l_c = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Triangulate, ZeroNoiseRecoversEveryTargetSeenTwice)
{
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto world = small_world(seed);
    const auto ideal = sim::project(world.truth, world.cameras);
    const CameraRig rig(world.cameras);
    TrackerParams params;
    for (long frame = 0; frame < 30; frame += 7) {
      std::vector<Detection> dets;
      std::map<int, std::set<int>> views;
      for (const auto& l : ideal) {
        if (l.detection.frame == frame) {
          dets.push_back(l.detection);
          views[l.target_id].insert(l.detection.camera);
        }
      }
      const auto tri = triangulate(dets, rig, params);
      std::size_t expected = 0;
      for (const auto& r : world.truth) {
        if (r.frame != frame || views[r.id].size() < 2) {
          continue;
        }
        ++expected;
        double best = 1e9;
        for (const auto& t : tri.targets) {
          best = std::min(best, (t.position - r.position).norm());
        }
        EXPECT_LT(best, 1e-6) << "seed " << seed << " frame " << frame << " id " << r.id;
      }
      EXPECT_EQ(tri.targets.size(), expected) << "seed " << seed << " frame " << frame;
      for (const auto& t : tri.targets) {
        EXPECT_NEAR(t.height, 2.0 * t.position.z(), 1e-6);
        EXPECT_GE(t.support.size(), 2u);
        for (std::size_t k = 1; k < t.support.size(); ++k) {
          EXPECT_LT(t.support[k - 1].camera, t.support[k].camera);
        }
      }
    }
  }
}

TEST(Triangulate, SingleCameraIsFlaggedAndHeld)
{
  const auto world = small_world(3);
  const CameraRig rig(world.cameras);
  std::vector<Detection> dets{{0, world.cameras[0].id, 100, 200, 80, 1}, {0, world.cameras[0].id, 300, 200, 80, 1}};
  const auto tri = triangulate(dets, rig, TrackerParams{});
  EXPECT_TRUE(tri.flagged);
  EXPECT_TRUE(tri.targets.empty());
  EXPECT_EQ(tri.unsupported, (std::vector<int>{0, 1}));
  dets[0].camera = 99;
  EXPECT_THROW(triangulate(dets, rig, TrackerParams{}), MissingCamera);
}

TEST(Gate, AppliesEveryThreshold)
{
  TrackerParams p;
  const auto t = track_through({{0, {0, 0, 0.85}}}, p);
  EXPECT_TRUE(gate(t, target_at({0.1, 0, 0.85}, 1.7), 1, p));
  // Speed: 0.2 m in one frame at 6 fps is 1.2 m/s.
  EXPECT_FALSE(gate(t, target_at({0.2, 0, 0.85}, 1.7), 1, p));
  // Two frames allow twice the distance.
  EXPECT_TRUE(gate(t, target_at({0.2, 0, 0.85}, 1.7), 2, p));
  // Height jump.
  EXPECT_FALSE(gate(t, target_at({0.05, 0, 0.85}, 2.1), 1, p));
  // Gap beyond delta_a.
  EXPECT_FALSE(gate(t, target_at({0, 0, 0.85}, 1.7), 1 + p.delta_a, p));
  EXPECT_TRUE(gate(t, target_at({0, 0, 0.85}, 1.7), p.delta_a, p));
  EXPECT_THROW(gate(t, target_at({0, 0, 0.85}, 1.7), 0, p), InvalidArgument);
}

TEST(Gate, WindowSizeChangeOnASharedCamera)
{
  TrackerParams p;
  Track t;
  auto prev = target_at({0, 0, 0.85}, 1.7);
  prev.support = {{1, 0, 100.0}, {2, 0, 50.0}};
  t.push({0, prev}, p);
  auto cand = target_at({0.05, 0, 0.85}, 1.7);
  cand.support = {{1, 0, 125.0}};
  EXPECT_TRUE(gate(t, cand, 1, p));
  cand.support = {{1, 0, 135.0}};
  EXPECT_FALSE(gate(t, cand, 1, p));
  cand.support = {{3, 0, 500.0}};
  EXPECT_TRUE(gate(t, cand, 1, p));
}

TEST(Static, NeedsFullHistoryAndUsesDeltaMin)
{
  TrackerParams p;
  std::vector<Eigen::Vector3d> pos(4, Eigen::Vector3d::Zero());
  EXPECT_THROW(classify_static(pos, p), InsufficientHistory);
  pos.push_back({0.01, 0.01, 0});
  EXPECT_EQ(classify_static(pos, p), Motion::Static);
  pos[0] = {0.1, 0, 0};
  EXPECT_EQ(classify_static(pos, p), Motion::Moving);
  // Only the last l_c + 1 positions count.
  pos.insert(pos.begin(), Eigen::Vector3d(5, 5, 5));
  pos[1] = Eigen::Vector3d::Zero();
  EXPECT_EQ(classify_static(pos, p), Motion::Static);
}

TEST(Track, PushKeepsHistoryVelocityAndStaticFlag)
{
  TrackerParams p;
  Track t;
  for (long f = 0; f < 8; ++f) {
    t.push({f, target_at({0.1 * static_cast<double>(f), 0, 0.85}, 1.7)}, p);
  }
  EXPECT_EQ(t.states.size(), static_cast<std::size_t>(p.l_c + 1));
  EXPECT_EQ(t.states.front().frame, 3);
  EXPECT_NEAR(t.velocity.x(), 0.6, 1e-12);
  EXPECT_FALSE(t.is_static);
  for (long f = 8; f < 13; ++f) {
    t.push({f, target_at({0.7, 0, 0.85}, 1.7)}, p);
  }
  EXPECT_TRUE(t.is_static);
}

TEST(Cost, CrossedDistancesAndMissBirth)
{
  TrackerParams p;
  std::vector<Track> tracks{track_through({{0, {0, 0, 0.85}}}, p), track_through({{0, {2, 0, 0.85}}}, p)};
  std::vector<Target3D> cands{target_at({0.1, 0, 0.85}, 1.7), target_at({2.1, 0, 0.85}, 1.7)};
  const auto prob = FrameProblem::build(tracks, cands, 1, p);
  EXPECT_EQ(prob.distance(0, 1), assign::kForbidden);
  EXPECT_NEAR(cost_function({0, 1}, prob, p), 0.2, 1e-12);
  // The missed track holds 0.1 m from the birth, which also costs a collision.
  EXPECT_NEAR(cost_function({0, assign::kMiss}, prob, p), 0.1 + 1.0 + 1.5 + 2.0, 1e-12);
  EXPECT_EQ(cost_function({1, 0}, prob, p), assign::kForbidden);
  EXPECT_EQ(births_of({0, assign::kMiss}, 2), (std::vector<int>{1}));
  const auto best = associate(prob, p);
  EXPECT_EQ(best.assignment, (Assignment{0, 1}));
  EXPECT_NEAR(best.score, 0.2, 1e-12);
}

TEST(Cost, CollisionsCountPassingTrajectories)
{
  TrackerParams p;
  p.eps_phi = 5;
  p.v_max = 100;
  std::vector<Track> tracks{track_through({{0, {0, 0, 0.85}}}, p), track_through({{0, {1, 0, 0.85}}}, p)};
  // Swapping positions crosses at the midpoint.
  std::vector<Target3D> cands{target_at({1, 0.05, 0.85}, 1.7), target_at({0, 0.05, 0.85}, 1.7)};
  const auto prob = FrameProblem::build(tracks, cands, 1, p);
  EXPECT_EQ(collision_pairs({0, 1}, prob, p), 1);
  EXPECT_EQ(collision_pairs({1, 0}, prob, p), 0);
  // A birth placed on a missed track's position collides with it.
  std::vector<Target3D> on_top{target_at({0.1, 0, 0.85}, 1.7)};
  const auto prob2 = FrameProblem::build(tracks, on_top, 1, p);
  EXPECT_EQ(collision_pairs({assign::kMiss, assign::kMiss}, prob2, p), 1);
  EXPECT_NEAR(cost_function({assign::kMiss, assign::kMiss}, prob2, p), 2.0 + 1.5 + 2.0, 1e-12);
}

TEST(Bls, NeverIncreasesScoreAndReportsTrueCost)
{
  Gen g(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = ptest::random_sequence_instance(g, 4, 6, 1);
    const auto prob = FrameProblem::build(inst.tracks, inst.frames[0], inst.first_frame, inst.params);
    Assignment start(inst.tracks.size(), assign::kMiss);
    const FrameHypothesis h0{start, cost_function(start, prob, inst.params)};
    inst.params.i_bls_max = g.integer(0, 300);
    BlsStats stats;
    const auto out = bls_refine(h0, prob, inst.params, g.bits(), &stats);
    EXPECT_LE(out.score, h0.score + 1e-12);
    EXPECT_NEAR(out.score, cost_function(out.assignment, prob, inst.params), 1e-12);
    EXPECT_LE(stats.evaluations, inst.params.i_bls_max);
    const auto again = bls_refine(h0, prob, inst.params, 7, nullptr);
    const auto twice = bls_refine(h0, prob, inst.params, 7, nullptr);
    EXPECT_EQ(again.assignment, twice.assignment);
  }
}

TEST(Hypotheses, StepKeepsSortedBestKh)
{
  Gen g(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = ptest::random_sequence_instance(g);
    inst.params.k_h = g.integer(1, 8);
    std::vector<GlobalHypothesis> hyps{GlobalHypothesis::bootstrap(inst.tracks)};
    for (std::size_t f = 0; f < inst.frames.size(); ++f) {
      hyps = hypothesis_step(hyps, inst.frames[f], inst.first_frame + static_cast<long>(f), inst.params);
      ASSERT_FALSE(hyps.empty());
      EXPECT_LE(hyps.size(), static_cast<std::size_t>(inst.params.k_h));
      for (std::size_t k = 1; k < hyps.size(); ++k) {
        EXPECT_LE(hyps[k - 1].score, hyps[k].score);
      }
    }
  }
}

TEST(Hypotheses, StepRejectsEmptyParentsAndRegression)
{
  TrackerParams p;
  EXPECT_THROW(hypothesis_step({}, {}, 1, p), InvalidArgument);
  const std::vector<GlobalHypothesis> parents{
      GlobalHypothesis::bootstrap({track_through({{5, {0, 0, 0.85}}}, p)})};
  EXPECT_THROW(hypothesis_step(parents, {}, 5, p), FrameRegression);
}

TEST(Hypotheses, ExhaustiveKhMatchesBruteForceSequence)
{
  Gen g(13);
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = ptest::random_sequence_instance(g);
    const auto oracle = ptest::brute_force_sequence(inst.tracks, inst.frames, inst.first_frame, inst.params);
    EXPECT_NEAR(ptest::exhaustive_tracker_score(inst), oracle.cost, 1e-9) << "trial " << trial;
  }
}

TEST(Hypotheses, LargerKhNeverScoresWorse)
{
  Gen g(14);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = ptest::random_sequence_instance(g);
    const double exhaustive = ptest::exhaustive_tracker_score(inst);
    inst.params.k_h = 1;
    std::vector<GlobalHypothesis> hyps{GlobalHypothesis::bootstrap(inst.tracks)};
    for (std::size_t f = 0; f < inst.frames.size(); ++f) {
      hyps = hypothesis_step(hyps, inst.frames[f], inst.first_frame + static_cast<long>(f), inst.params);
    }
    EXPECT_LE(exhaustive, hyps.front().score + 1e-9);
  }
}

TEST(TrackerRun, FramesMustIncreaseAndMatchDetections)
{
  const auto world = small_world(1);
  Tracker tracker(TrackerParams{}, CameraRig(world.cameras));
  tracker.step(3, {});
  EXPECT_THROW(tracker.step(3, {}), FrameRegression);
  const std::vector<Detection> wrong{{9, world.cameras[0].id, 1, 1, 10, 1}};
  EXPECT_THROW(tracker.step(4, wrong), InvalidArgument);
}

TEST(TrackerRun, NoisyOutputRespectsTrackInvariants)
{
  sim::ScenarioConfig cfg;
  cfg.n_frames = 60;
  cfg.seed = 5;
  const auto world = sim::generate_world(cfg);
  const auto dets = sim::strip_labels(sim::corrupt(sim::project(world.truth, world.cameras), world.cameras, cfg));
  TrackerParams params;
  params.fps = cfg.fps;
  Tracker tracker(params, CameraRig(world.cameras));
  std::size_t k = 0;
  for (long f = 0; f < cfg.n_frames; ++f) {
    std::vector<Detection> frame;
    while (k < dets.size() && dets[k].frame == f) {
      frame.push_back(dets[k++]);
    }
    tracker.step(f, frame);
  }
  const auto records = tracker.best().records();
  EXPECT_FALSE(records.empty());
  EXPECT_TRUE(check_track_invariants(records, params).empty());
}

TEST(TrackerRun, InvariantCheckerFlagsViolations)
{
  TrackerParams p;
  const std::vector<TrackRecord> bad{{0, 1, {0, 0, 0.85}, 1.7, false},
                                     {1, 1, {1, 0, 0.85}, 1.7, false},
                                     {20, 1, {1, 0, 0.85}, 2.5, false}};
  const auto v = check_track_invariants(bad, p);
  EXPECT_GE(v.size(), 3u);
}
