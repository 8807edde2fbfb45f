#include "panotrack/assignment.hpp"

#include "support/gen.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <set>

using namespace panotrack;
using namespace panotrack::assign;
using ptest::Gen;

namespace {

Eigen::MatrixXd random_costs(Gen& g, int rows, int cols, double p_forbid)
{
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = g.coin(p_forbid) ? kForbidden : g.uniform(0, 2);
    }
  }
  return m;
}

double brute_square(const Eigen::MatrixXd& m)
{
  std::vector<int> perm(static_cast<std::size_t>(m.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = kForbidden;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      c += m(static_cast<Eigen::Index>(i), perm[i]);
    }
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST(SolveSquare, MatchesPermutationEnumeration)
{
  Gen g(1);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = g.integer(1, 6);
    const auto m = random_costs(g, n, n, 0.3);
    const double expected = brute_square(m);
    const auto sol = solve_square(m);
    if (!std::isfinite(expected)) {
      EXPECT_FALSE(sol.has_value());
      continue;
    }
    ASSERT_TRUE(sol.has_value());
    EXPECT_NEAR(sol->cost, expected, 1e-9);
    double recomputed = 0.0;
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      const int j = sol->row_to_col[static_cast<std::size_t>(i)];
      ASSERT_FALSE(used[static_cast<std::size_t>(j)]);
      used[static_cast<std::size_t>(j)] = 1;
      recomputed += m(i, j);
    }
    EXPECT_NEAR(recomputed, sol->cost, 1e-9);
  }
}

TEST(SolveSquare, EmptyMatrix)
{
  const auto sol = solve_square(Eigen::MatrixXd(0, 0));
  ASSERT_TRUE(sol.has_value());
  EXPECT_EQ(sol->cost, 0.0);
}

TEST(SolveTracks, CrossedDistancesPickTheCheapPairing)
{
  TrackProblem p;
  p.pair_cost.resize(2, 2);
  p.pair_cost << 0.1, 0.4, 0.4, 0.1;
  const auto m = solve_tracks(p, Constraints(2));
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(*m, (std::vector<int>{0, 1}));
  EXPECT_NEAR(p.cost_of(*m), 0.2, 1e-12);
}

TEST(SolveTracks, PrefersMissAndBirthOverExpensivePair)
{
  TrackProblem p;
  p.pair_cost.resize(1, 1);
  p.pair_cost << 3.0;
  const auto m = solve_tracks(p, Constraints(1));
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ((*m)[0], kMiss);
  EXPECT_DOUBLE_EQ(p.cost_of(*m), 2.5);
}

TEST(SolveTracks, MatchesEnumerationOnRandomProblems)
{
  Gen g(2);
  for (int trial = 0; trial < 500; ++trial) {
    TrackProblem p;
    p.pair_cost = random_costs(g, g.integer(0, 5), g.integer(0, 5), 0.4);
    p.miss_cost = g.uniform(0.2, 2.0);
    p.birth_cost = g.uniform(0.2, 2.0);
    const auto m = solve_tracks(p, Constraints(p.tracks()));
    ASSERT_TRUE(m.has_value());
    const auto all = ptest::all_pairwise_costs(p);
    EXPECT_NEAR(p.cost_of(*m), all.front(), 1e-9);
    EXPECT_NEAR(ptest::pairwise_cost(p, *m), p.cost_of(*m), 1e-12);
  }
}

TEST(SolveTracks, HonoursConstraints)
{
  TrackProblem p;
  p.pair_cost.resize(2, 2);
  p.pair_cost << 0.1, 0.4, 0.4, 0.1;
  Constraints c(2);
  c.forced[0] = 1;
  auto m = solve_tracks(p, c);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ((*m)[0], 1);
  EXPECT_NE((*m)[1], 1);

  Constraints d(2);
  d.forbidden[0] = {0, kMiss};
  d.forbidden[1] = {1, kMiss};
  m = solve_tracks(p, d);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(*m, (std::vector<int>{1, 0}));

  Constraints e(2);
  e.forced[0] = 0;
  e.forced[1] = 0;
  EXPECT_FALSE(solve_tracks(p, e).has_value());
}

TEST(CostOf, RejectsDoubleUseAndUngatedPairs)
{
  TrackProblem p;
  p.pair_cost.resize(2, 2);
  p.pair_cost << 0.1, kForbidden, 0.3, 0.2;
  EXPECT_EQ(p.cost_of({0, 0}), kForbidden);
  EXPECT_EQ(p.cost_of({1, kMiss}), kForbidden);
  EXPECT_NEAR(p.cost_of({kMiss, kMiss}), 2 * 1.0 + 2 * 1.5, 1e-12);
}

TEST(KBest, EnumeratesEveryMapInCostOrder)
{
  Gen g(3);
  for (int trial = 0; trial < 200; ++trial) {
    TrackProblem p;
    p.pair_cost = random_costs(g, g.integer(0, 4), g.integer(0, 4), 0.3);
    const auto expected = ptest::all_pairwise_costs(p);
    KBestAssignments kb(p);
    std::vector<double> got;
    std::set<std::vector<int>> seen;
    while (auto peek = kb.peek_cost()) {
      const auto r = kb.next();
      ASSERT_TRUE(r.has_value());
      EXPECT_DOUBLE_EQ(*peek, r->cost);
      EXPECT_NEAR(p.cost_of(r->track_to_candidate), r->cost, 1e-9);
      EXPECT_TRUE(seen.insert(r->track_to_candidate).second) << "duplicate solution";
      got.push_back(r->cost);
    }
    EXPECT_FALSE(kb.next().has_value());
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_NEAR(got[k], expected[k], 1e-9);
    }
  }
}

TEST(KBest, DeterministicTieOrder)
{
  TrackProblem p;
  p.pair_cost = Eigen::MatrixXd::Constant(3, 3, 0.5);
  KBestAssignments a(p);
  KBestAssignments b(p);
  for (int k = 0; k < 20; ++k) {
    const auto x = a.next();
    const auto y = b.next();
    ASSERT_EQ(x.has_value(), y.has_value());
    if (!x) {
      break;
    }
    EXPECT_EQ(x->track_to_candidate, y->track_to_candidate);
  }
}
