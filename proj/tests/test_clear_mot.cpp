#include "panotrack/clear_mot.hpp"
#include "panotrack/errors.hpp"

#include "support/gen.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace panotrack;
using namespace panotrack::metrics;
using ptest::Gen;

namespace {

ObjectRecord rec(long frame, int id, double x, double y = 0.0) { return {frame, id, {x, y, 0.85}}; }

RecordList random_frame(Gen& g, long frame, int n, int id_base)
{
  RecordList out;
  for (int i = 0; i < n; ++i) {
    out.push_back({frame, id_base + i, {g.uniform(0, 3), g.uniform(0, 3), 0.85}});
  }
  return out;
}

}  // namespace

TEST(MatchFrame, MatchesExhaustiveOptimumOnSmallFrames)
{
  Gen g(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto truth = random_frame(g, 0, g.integer(0, 5), 0);
    const auto hyps = random_frame(g, 0, g.integer(0, 5), 100);
    const double threshold = g.uniform(0.3, 2.0);
    const auto ev = match_frame(truth, hyps, {}, threshold);
    const auto best = ptest::exhaustive_matching(truth, hyps, threshold);
    ASSERT_EQ(static_cast<int>(ev.matches.size()), best.matches) << "trial " << trial;
    double total = 0.0;
    for (const auto& m : ev.matches) {
      total += m.distance;
      EXPECT_LE(m.distance, threshold);
    }
    EXPECT_NEAR(total, best.distance, 1e-9);
    EXPECT_EQ(ev.misses, static_cast<int>(truth.size()) - best.matches);
    EXPECT_EQ(ev.false_positives, static_cast<int>(hyps.size()) - best.matches);
    EXPECT_EQ(ev.id_switches, 0);
  }
}

TEST(MatchFrame, PreviousPairsPersistWithinThreshold)
{
  const RecordList truth{rec(1, 1, 0.0)};
  const RecordList hyps{rec(1, 10, 0.8), rec(1, 11, 0.1)};
  const MatchHistory previous{{1, 10}};
  const auto ev = match_frame(truth, hyps, previous, 1.0);
  ASSERT_EQ(ev.matches.size(), 1u);
  EXPECT_EQ(ev.matches[0].track_id, 10);
  EXPECT_EQ(ev.id_switches, 0);
  EXPECT_EQ(ev.false_positives, 1);
  // Beyond the threshold the pairing is dropped and the nearer track wins.
  const RecordList far{rec(1, 10, 1.5), rec(1, 11, 0.1)};
  const auto ev2 = match_frame(truth, far, previous, 1.0);
  ASSERT_EQ(ev2.matches.size(), 1u);
  EXPECT_EQ(ev2.matches[0].track_id, 11);
  EXPECT_EQ(ev2.id_switches, 1);
}

TEST(Evaluate, HandBuiltIdSwapCostsOneSixth)
{
  // Two people over three frames; the first person's track is replaced by a
  // new id on the last frame.
  const RecordList truth{rec(0, 1, 0), rec(0, 2, 5), rec(1, 1, 0), rec(1, 2, 5), rec(2, 1, 0), rec(2, 2, 5)};
  const RecordList tracks{rec(0, 10, 0.1), rec(0, 20, 5.1), rec(1, 10, 0.1),
                          rec(1, 20, 5.1), rec(2, 30, 0.1), rec(2, 20, 5.1)};
  const auto r = evaluate(truth, tracks);
  EXPECT_EQ(r.id_switches, 1);
  EXPECT_EQ(r.misses, 0);
  EXPECT_EQ(r.false_positives, 0);
  EXPECT_EQ(r.total_truth, 6);
  EXPECT_DOUBLE_EQ(r.mota, 1.0 - 1.0 / 6.0);
  EXPECT_NEAR(r.motp, 0.1, 1e-12);
}

TEST(Evaluate, PerfectTracksScoreOne)
{
  Gen g(2);
  RecordList truth;
  for (long f = 0; f < 20; ++f) {
    for (int id = 0; id < 5; ++id) {
      truth.push_back({f, id, {static_cast<double>(id) * 2.0 + 0.01 * static_cast<double>(f), 0, 0.85}});
    }
  }
  RecordList tracks = truth;
  for (auto& r : tracks) {
    r.id += 100;
  }
  const auto rep = evaluate(truth, tracks);
  EXPECT_DOUBLE_EQ(rep.mota, 1.0);
  EXPECT_DOUBLE_EQ(rep.motp, 0.0);
  EXPECT_EQ(rep.frames, 20);
}

TEST(Evaluate, CountsMissesAndFalsePositives)
{
  const RecordList truth{rec(0, 1, 0), rec(1, 1, 0), rec(2, 1, 0)};
  const RecordList tracks{rec(0, 5, 0), rec(1, 6, 9), rec(3, 7, 9)};
  const auto r = evaluate(truth, tracks);
  EXPECT_EQ(r.matches, 1);
  EXPECT_EQ(r.misses, 2);
  EXPECT_EQ(r.false_positives, 2);
  EXPECT_EQ(r.frames, 4);
  EXPECT_DOUBLE_EQ(r.mota, 1.0 - 4.0 / 3.0);
}

TEST(Evaluate, InvariantUnderTrackRelabelling)
{
  Gen g(3);
  for (int trial = 0; trial < 50; ++trial) {
    RecordList truth;
    RecordList tracks;
    for (long f = 0; f < 10; ++f) {
      auto t = random_frame(g, f, g.integer(1, 5), 0);
      auto h = random_frame(g, f, g.integer(0, 5), 0);
      truth.insert(truth.end(), t.begin(), t.end());
      tracks.insert(tracks.end(), h.begin(), h.end());
    }
    std::map<int, int> relabel;
    for (int id = 0; id < 5; ++id) {
      relabel[id] = 1000 - 7 * id;
    }
    RecordList renamed = tracks;
    for (auto& r : renamed) {
      r.id = relabel[r.id];
    }
    const auto a = evaluate(truth, tracks);
    const auto b = evaluate(truth, renamed);
    EXPECT_DOUBLE_EQ(a.mota, b.mota);
    EXPECT_NEAR(a.motp, b.motp, 1e-12);
    EXPECT_EQ(a.id_switches, b.id_switches);
  }
}

TEST(Evaluate, EmptyGroundTruthIsAnError)
{
  EXPECT_THROW(evaluate({}, {rec(0, 1, 0)}), EmptyGroundTruth);
}
