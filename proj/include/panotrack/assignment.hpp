#pragma once

// Minimum-cost assignment and k-best enumeration.

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

namespace panotrack::assign {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();
inline constexpr int kMiss = -1;

struct Solution
{
  std::vector<int> row_to_col;
  double cost = 0.0;
};

/// Square min-cost assignment; +inf entries are forbidden. Returns nullopt
/// when no assignment avoids every forbidden entry.
std::optional<Solution> solve_square(const Eigen::MatrixXd& cost);

/// Tracks (rows) vs candidates (columns). Each track takes one gated candidate
/// or kMiss; every candidate left over opens a birth.
struct TrackProblem
{
  Eigen::MatrixXd pair_cost;  // tracks x candidates, kForbidden when ungated
  double miss_cost = 1.0;
  double birth_cost = 1.5;

  int tracks() const { return static_cast<int>(pair_cost.rows()); }
  int candidates() const { return static_cast<int>(pair_cost.cols()); }

  /// Pairwise cost of a track->candidate map; kForbidden if it uses an ungated pair
  /// or assigns a candidate twice.
  double cost_of(const std::vector<int>& track_to_candidate) const;
};

struct Constraints
{
  static constexpr int kFree = -2;
  std::vector<int> forced;                  // per track: kFree, kMiss or candidate
  std::vector<std::vector<int>> forbidden;  // per track: disallowed values (kMiss allowed)

  explicit Constraints(int tracks = 0)
    : forced(static_cast<std::size_t>(tracks), kFree),
      forbidden(static_cast<std::size_t>(tracks))
  {}
};

/// Optimal track map under constraints, or nullopt when infeasible.
std::optional<std::vector<int>> solve_tracks(const TrackProblem& problem,
                                             const Constraints& constraints);

/// Murty-style enumeration of track maps in nondecreasing pairwise cost.
/// Ties resolve by discovery order, so the sequence is deterministic.
class KBestAssignments
{
public:
  explicit KBestAssignments(TrackProblem problem);

  struct Ranked
  {
    std::vector<int> track_to_candidate;
    double cost = 0.0;
  };

  /// Cost of the next solution without consuming it.
  std::optional<double> peek_cost() const;
  std::optional<Ranked> next();

  const TrackProblem& problem() const { return problem_; }

private:
  struct Node
  {
    Constraints constraints;
    std::vector<int> solution;
    double cost = 0.0;
    std::size_t order = 0;
  };
  struct Worse
  {
    bool operator()(const Node& a, const Node& b) const
    {
      if (a.cost != b.cost) {
        return a.cost > b.cost;
      }
      return a.order > b.order;
    }
  };

  void push(Constraints constraints);

  TrackProblem problem_;
  std::priority_queue<Node, std::vector<Node>, Worse> queue_;
  std::size_t counter_ = 0;
};

}  // namespace panotrack::assign
