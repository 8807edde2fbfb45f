#include "panotrack/assignment.hpp"

#include "panotrack/errors.hpp"

#include <algorithm>
#include <cmath>

namespace panotrack::assign {

std::optional<Solution> solve_square(const Eigen::MatrixXd& cost)
{
  if (cost.rows() != cost.cols()) {
    throw InvalidArgument("solve_square expects a square matrix");
  }
  const int n = static_cast<int>(cost.rows());
  Solution out;
  if (n == 0) {
    return out;
  }

  // Shortest augmenting path with row/column potentials (1-indexed, column 0 is a sentinel).
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0);
  std::vector<int> way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kForbidden);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kForbidden;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) {
          continue;
        }
        const double a = cost(i0 - 1, j - 1);
        if (a != kForbidden) {
          const double cur = a - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (delta == kForbidden) {
        return std::nullopt;
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  out.row_to_col.assign(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    out.row_to_col[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  }
  for (int i = 0; i < n; ++i) {
    out.cost += cost(i, out.row_to_col[static_cast<std::size_t>(i)]);
  }
  return out;
}

double TrackProblem::cost_of(const std::vector<int>& track_to_candidate) const
{
  const int t = tracks();
  const int c = candidates();
  if (static_cast<int>(track_to_candidate.size()) != t) {
    return kForbidden;
  }
  std::vector<char> taken(static_cast<std::size_t>(c), 0);
  double total = 0.0;
  int assigned = 0;
  for (int i = 0; i < t; ++i) {
    const int j = track_to_candidate[static_cast<std::size_t>(i)];
    if (j == kMiss) {
      total += miss_cost;
      continue;
    }
    if (j < 0 || j >= c || taken[static_cast<std::size_t>(j)] || pair_cost(i, j) == kForbidden) {
      return kForbidden;
    }
    taken[static_cast<std::size_t>(j)] = 1;
    total += pair_cost(i, j);
    ++assigned;
  }
  return total + birth_cost * (c - assigned);
}

std::optional<std::vector<int>> solve_tracks(const TrackProblem& problem,
                                             const Constraints& constraints)
{
  const int t = problem.tracks();
  const int c = problem.candidates();
  const int n = t + c;

  // Rows: tracks, then one birth row per candidate. Columns: candidates, then
  // one miss column per track.
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, kForbidden);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < c; ++j) {
      m(i, j) = problem.pair_cost(i, j);
    }
    m(i, c + i) = problem.miss_cost;
  }
  for (int j = 0; j < c; ++j) {
    m(t + j, j) = problem.birth_cost;
    for (int k = 0; k < t; ++k) {
      m(t + j, c + k) = 0.0;
    }
  }

  auto column_of = [c](int track, int value) { return value == kMiss ? c + track : value; };
  for (int i = 0; i < t; ++i) {
    for (const int value : constraints.forbidden[static_cast<std::size_t>(i)]) {
      m(i, column_of(i, value)) = kForbidden;
    }
    const int forced = constraints.forced[static_cast<std::size_t>(i)];
    if (forced == Constraints::kFree) {
      continue;
    }
    const int col = column_of(i, forced);
    const double keep = m(i, col);
    m.row(i).setConstant(kForbidden);
    m(i, col) = keep;
    if (forced != kMiss) {
      for (int r = 0; r < n; ++r) {
        if (r != i) {
          m(r, col) = kForbidden;
        }
      }
    }
  }

  const auto sol = solve_square(m);
  if (!sol) {
    return std::nullopt;
  }
  std::vector<int> result(static_cast<std::size_t>(t), kMiss);
  for (int i = 0; i < t; ++i) {
    const int col = sol->row_to_col[static_cast<std::size_t>(i)];
    result[static_cast<std::size_t>(i)] = col < c ? col : kMiss;
  }
  return result;
}

KBestAssignments::KBestAssignments(TrackProblem problem) : problem_(std::move(problem))
{
  push(Constraints(problem_.tracks()));
}

void KBestAssignments::push(Constraints constraints)
{
  auto sol = solve_tracks(problem_, constraints);
  if (!sol) {
    return;
  }
  const double cost = problem_.cost_of(*sol);
  if (cost == kForbidden) {
    return;
  }
  queue_.push(Node{std::move(constraints), std::move(*sol), cost, counter_++});
}

std::optional<double> KBestAssignments::peek_cost() const
{
  if (queue_.empty()) {
    return std::nullopt;
  }
  return queue_.top().cost;
}

std::optional<KBestAssignments::Ranked> KBestAssignments::next()
{
  if (queue_.empty()) {
    return std::nullopt;
  }
  Node node = queue_.top();
  queue_.pop();

  // Partition the remaining solution space of this node around its solution.
  Constraints prefix = node.constraints;
  for (int i = 0; i < problem_.tracks(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (node.constraints.forced[ui] != Constraints::kFree) {
      continue;
    }
    Constraints child = prefix;
    child.forbidden[ui].push_back(node.solution[ui]);
    push(std::move(child));
    prefix.forced[ui] = node.solution[ui];
  }
  return Ranked{std::move(node.solution), node.cost};
}

}  // namespace panotrack::assign
