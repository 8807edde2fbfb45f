#include "panotrack/tracker.hpp"

#include "panotrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>

namespace panotrack::tracking {

namespace {

constexpr double kTol = 1e-9;

std::uint64_t splitmix(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix(h ^ splitmix(v)); }

std::uint64_t hash_assignment(const Assignment& a)
{
  std::uint64_t h = a.size();
  for (const int v : a) {
    h = mix(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
  }
  return h;
}

double implied_height(const CameraModel& cam, const Eigen::Vector3d& point, double size)
{
  return size * cam.to_camera(point).z() / cam.fy;
}

}  // namespace

void TrackerParams::validate() const
{
  const bool positive = l_c > 0 && delta_min > 0 && eps_phi > 0 && eps_h > 0 && omega_s_coeff > 0 &&
                        theta_s > 0 && eps_3d > 0 && v_max > 0 && delta_a > 0 && fps > 0;
  if (!positive) {
    throw InvalidArgument("tracker parameters must all be positive");
  }
  if (k_h < 1) {
    throw InvalidArgument("k_h must be >= 1");
  }
  if (i_bls_max < 0) {
    throw InvalidArgument("i_bls_max must be >= 0");
  }
  if (c_miss < 0 || c_birth < 0 || c_coll < 0) {
    throw InvalidArgument("cost weights must be non-negative");
  }
}

// ---------------------------------------------------------------------------
// Triangulation

TriangulationResult triangulate(std::span<const Detection> detections, const CameraRig& rig,
                                const TrackerParams& params)
{
  TriangulationResult result;
  const int n = static_cast<int>(detections.size());

  std::vector<Ray> rays;
  std::vector<const CameraModel*> cams;
  std::set<int> camera_ids;
  rays.reserve(detections.size());
  for (const auto& d : detections) {
    const auto& cam = rig.at(d.camera);
    cams.push_back(&cam);
    rays.push_back(back_project(cam, d));
    camera_ids.insert(d.camera);
  }
  if (camera_ids.size() < 2) {
    result.flagged = true;
    result.unsupported.resize(detections.size());
    std::iota(result.unsupported.begin(), result.unsupported.end(), 0);
    return result;
  }

  const double inf = assign::kForbidden;
  Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(n, n, inf);
  std::vector<std::tuple<double, int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (detections[i].camera == detections[j].camera) {
        continue;
      }
      const double d = ray_distance(rays[i], rays[j]);
      dist(i, j) = dist(j, i) = d;
      if (d <= params.eps_3d) {
        pairs.emplace_back(d, i, j);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());

  std::vector<std::vector<int>> clusters(static_cast<std::size_t>(n));
  std::vector<int> cluster_of(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    clusters[i] = {i};
    cluster_of[i] = i;
  }

  auto fuse = [&](const std::vector<int>& members) {
    std::vector<Ray> rs;
    rs.reserve(members.size());
    for (const int m : members) {
      rs.push_back(rays[m]);
    }
    return least_squares_point(rs);
  };

  // Every view in front of its camera, implied heights agreeing with each other
  // and with twice the point's height (a standing target's window centre sits
  // at half its height).
  auto consistent = [&](const std::vector<int>& members) {
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        if (dist(members[x], members[y]) > params.eps_3d) {
          return false;
        }
      }
    }
    const Eigen::Vector3d point = fuse(members);
    double lo = inf;
    double hi = -inf;
    for (const int m : members) {
      if (cams[m]->to_camera(point).z() <= 0.0) {
        return false;
      }
      const double h = implied_height(*cams[m], point, detections[m].size);
      if (std::abs(h - 2.0 * point.z()) > params.eps_h) {
        return false;
      }
      lo = std::min(lo, h);
      hi = std::max(hi, h);
    }
    return hi - lo <= params.eps_h;
  };

  auto residual = [&](const std::vector<int>& members) {
    const Eigen::Vector3d point = fuse(members);
    double r = 0.0;
    for (const int m : members) {
      r += std::pow(point_ray_distance(point, rays[m]), 2);
    }
    return r;
  };

  for (const auto& [d, i, j] : pairs) {
    const int ci = cluster_of[i];
    const int cj = cluster_of[j];
    if (ci == cj) {
      continue;
    }
    bool ok = true;
    for (const int a : clusters[ci]) {
      for (const int b : clusters[cj]) {
        if (detections[a].camera == detections[b].camera || dist(a, b) > params.eps_3d) {
          ok = false;
        }
      }
    }
    if (!ok) {
      continue;
    }
    std::vector<int> merged = clusters[ci];
    merged.insert(merged.end(), clusters[cj].begin(), clusters[cj].end());
    if (!consistent(merged)) {
      continue;
    }
    const int keep = std::min(ci, cj);
    const int drop = std::max(ci, cj);
    std::sort(merged.begin(), merged.end());
    clusters[keep] = std::move(merged);
    clusters[drop].clear();
    for (const int m : clusters[keep]) {
      cluster_of[m] = keep;
    }
  }

  // Greedy pairing can hand one camera's views of two nearby targets to the
  // wrong clusters; exchange same-camera views while that lowers the residual.
  std::vector<int> multi;
  for (int c = 0; c < n; ++c) {
    if (clusters[c].size() >= 2) {
      multi.push_back(c);
    }
  }
  for (int pass = 0; pass < 4; ++pass) {
    bool improved = false;
    for (std::size_t x = 0; x < multi.size(); ++x) {
      for (std::size_t y = x + 1; y < multi.size(); ++y) {
        auto& a = clusters[multi[x]];
        auto& b = clusters[multi[y]];
        for (std::size_t ia = 0; ia < a.size(); ++ia) {
          for (std::size_t ib = 0; ib < b.size(); ++ib) {
            if (detections[a[ia]].camera != detections[b[ib]].camera) {
              continue;
            }
            const double before = residual(a) + residual(b);
            auto a2 = a;
            auto b2 = b;
            std::swap(a2[ia], b2[ib]);
            if (residual(a2) + residual(b2) < before - 1e-12 && consistent(a2) && consistent(b2)) {
              a = std::move(a2);
              b = std::move(b2);
              improved = true;
            }
          }
        }
      }
    }
    if (!improved) {
      break;
    }
  }
  for (auto& c : clusters) {
    std::sort(c.begin(), c.end());
  }
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    if (a.empty() || b.empty()) {
      return !a.empty() && b.empty();
    }
    return a.front() < b.front();
  });

  // Clusters are ordered by smallest member, so this loop emits targets in
  // order of first detection.
  for (int c = 0; c < n; ++c) {
    const auto& members = clusters[c];
    if (members.empty()) {
      continue;
    }
    if (members.size() == 1) {
      result.unsupported.push_back(members.front());
      continue;
    }
    Target3D t;
    t.position = fuse(members);
    double height_sum = 0.0;
    for (const int m : members) {
      height_sum += implied_height(*cams[m], t.position, detections[m].size);
      t.support.push_back({detections[m].camera, m, detections[m].size});
    }
    t.height = height_sum / static_cast<double>(members.size());
    std::sort(t.support.begin(), t.support.end(),
              [](const SupportEntry& a, const SupportEntry& b) { return a.camera < b.camera; });
    result.targets.push_back(std::move(t));
  }
  std::sort(result.unsupported.begin(), result.unsupported.end());
  return result;
}

// ---------------------------------------------------------------------------
// Tracks, gating, static classification

void Track::push(TrackState state, const TrackerParams& params)
{
  if (!states.empty()) {
    const auto& prev = states.back();
    const double dt = static_cast<double>(state.frame - prev.frame) / params.fps;
    velocity = (state.target.position - prev.target.position) / dt;
  }
  states.push_back(std::move(state));
  while (states.size() > static_cast<std::size_t>(params.l_c) + 1) {
    states.pop_front();
  }
  if (states.size() == static_cast<std::size_t>(params.l_c) + 1) {
    std::vector<Eigen::Vector3d> positions;
    for (const auto& s : states) {
      positions.push_back(s.target.position);
    }
    is_static = classify_static(positions, params) == Motion::Static;
  } else {
    is_static = false;
  }
}

bool gate(const Track& track, const Target3D& candidate, long frame, const TrackerParams& params)
{
  const long last = track.last_seen();
  if (frame <= last) {
    throw InvalidArgument("gate: frame must be after the track's last observation");
  }
  const long gap = frame - last;
  if (gap > params.delta_a) {
    return false;
  }
  const auto& prev = track.last().target;
  const double g = static_cast<double>(gap);
  const double d = (candidate.position - prev.position).norm();
  if (d > params.eps_phi * g) {
    return false;
  }
  if (d / g * params.fps > params.v_max) {
    return false;
  }
  if (std::abs(candidate.height - prev.height) > params.eps_h * g) {
    return false;
  }
  for (const auto& now : candidate.support) {
    for (const auto& before : prev.support) {
      if (now.camera == before.camera &&
          std::abs(now.size - before.size) > params.omega_s_coeff * before.size) {
        return false;
      }
    }
  }
  return true;
}

Motion classify_static(std::span<const Eigen::Vector3d> positions, const TrackerParams& params)
{
  const auto needed = static_cast<std::size_t>(params.l_c) + 1;
  if (positions.size() < needed) {
    throw InsufficientHistory("classify_static needs " + std::to_string(needed) + " positions, got " +
                              std::to_string(positions.size()));
  }
  const auto& current = positions.back();
  double max_disp = 0.0;
  for (std::size_t k = positions.size() - needed; k + 1 < positions.size(); ++k) {
    max_disp = std::max(max_disp, (current - positions[k]).norm());
  }
  return max_disp < params.delta_min ? Motion::Static : Motion::Moving;
}

// ---------------------------------------------------------------------------
// Frame problem and cost

FrameProblem FrameProblem::build(std::vector<Track> tracks, std::vector<Target3D> candidates,
                                 long frame, const TrackerParams& params)
{
  FrameProblem p;
  p.frame = frame;
  p.tracks = std::move(tracks);
  p.candidates = std::move(candidates);
  const auto t = static_cast<Eigen::Index>(p.tracks.size());
  const auto c = static_cast<Eigen::Index>(p.candidates.size());
  p.distance = Eigen::MatrixXd::Constant(t, c, assign::kForbidden);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      const auto& track = p.tracks[static_cast<std::size_t>(i)];
      const auto& cand = p.candidates[static_cast<std::size_t>(j)];
      if (gate(track, cand, frame, params)) {
        p.distance(i, j) = (cand.position - track.last().target.position).norm();
      }
    }
  }
  return p;
}

assign::TrackProblem FrameProblem::pairwise(const TrackerParams& params) const
{
  return assign::TrackProblem{distance, params.c_miss, params.c_birth};
}

std::vector<int> births_of(const Assignment& assignment, std::size_t candidate_count)
{
  std::vector<char> taken(candidate_count, 0);
  for (const int j : assignment) {
    if (j >= 0) {
      taken[static_cast<std::size_t>(j)] = 1;
    }
  }
  std::vector<int> out;
  for (std::size_t j = 0; j < candidate_count; ++j) {
    if (!taken[j]) {
      out.push_back(static_cast<int>(j));
    }
  }
  return out;
}

int collision_pairs(const Assignment& assignment, const FrameProblem& problem,
                    const TrackerParams& params)
{
  struct Motion
  {
    Eigen::Vector3d from;
    Eigen::Vector3d to;
  };
  std::vector<Motion> moves;
  moves.reserve(problem.tracks.size() + problem.candidates.size());
  for (std::size_t i = 0; i < problem.tracks.size(); ++i) {
    const Eigen::Vector3d& from = problem.tracks[i].last().target.position;
    const int j = assignment[i];
    moves.push_back({from, j >= 0 ? problem.candidates[static_cast<std::size_t>(j)].position : from});
  }
  for (const int b : births_of(assignment, problem.candidates.size())) {
    const auto& p = problem.candidates[static_cast<std::size_t>(b)].position;
    moves.push_back({p, p});
  }

  const double limit_sq = params.theta_s * params.theta_s;
  int count = 0;
  for (std::size_t a = 0; a < moves.size(); ++a) {
    for (std::size_t b = a + 1; b < moves.size(); ++b) {
      // Closest approach of the relative motion w0 + tau * dw, tau in [0, 1].
      const Eigen::Vector3d w0 = moves[a].from - moves[b].from;
      const Eigen::Vector3d dw = (moves[a].to - moves[b].to) - w0;
      const double dd = dw.squaredNorm();
      const double tau = dd > 0.0 ? std::clamp(-w0.dot(dw) / dd, 0.0, 1.0) : 0.0;
      if ((w0 + tau * dw).squaredNorm() < limit_sq) {
        ++count;
      }
    }
  }
  return count;
}

double cost_function(const Assignment& assignment, const FrameProblem& problem,
                     const TrackerParams& params)
{
  double total = 0.0;
  int assigned = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const int j = assignment[i];
    if (j == assign::kMiss) {
      total += params.c_miss;
      continue;
    }
    const double d = problem.distance(static_cast<Eigen::Index>(i), j);
    if (d == assign::kForbidden) {
      return assign::kForbidden;
    }
    total += d;
    ++assigned;
  }
  total += params.c_birth * static_cast<double>(problem.candidates.size() - assigned);
  total += params.c_coll * collision_pairs(assignment, problem, params);
  return total;
}

FrameHypothesis associate(const FrameProblem& problem, const TrackerParams& params)
{
  auto sol = assign::solve_tracks(problem.pairwise(params),
                                  assign::Constraints(static_cast<int>(problem.tracks.size())));
  // All-miss with all-births is always feasible, so a solution exists.
  FrameHypothesis h{std::move(*sol), 0.0};
  h.score = cost_function(h.assignment, problem, params);
  return h;
}

// ---------------------------------------------------------------------------
// Local search

namespace {

struct Move
{
  enum Kind { Swap, Drop, Merge } kind;
  int a;
  int b;
};

std::vector<Move> feasible_moves(const Assignment& a, const FrameProblem& problem)
{
  auto gated = [&](int track, int cand) {
    return cand == assign::kMiss || problem.distance(track, cand) != assign::kForbidden;
  };
  const int t = static_cast<int>(a.size());
  std::vector<Move> moves;
  for (int i = 0; i < t; ++i) {
    for (int j = i + 1; j < t; ++j) {
      if (a[i] != a[j] && gated(i, a[j]) && gated(j, a[i])) {
        moves.push_back({Move::Swap, i, j});
      }
    }
  }
  for (int i = 0; i < t; ++i) {
    if (a[i] != assign::kMiss) {
      moves.push_back({Move::Drop, i, 0});
    }
  }
  const auto births = births_of(a, problem.candidates.size());
  for (int i = 0; i < t; ++i) {
    if (a[i] != assign::kMiss) {
      continue;
    }
    for (const int b : births) {
      if (gated(i, b)) {
        moves.push_back({Move::Merge, i, b});
      }
    }
  }
  return moves;
}

void apply(Assignment& a, const Move& m)
{
  switch (m.kind) {
    case Move::Swap: std::swap(a[m.a], a[m.b]); break;
    case Move::Drop: a[m.a] = assign::kMiss; break;
    case Move::Merge: a[m.a] = m.b; break;
  }
}

}  // namespace

FrameHypothesis bls_refine(FrameHypothesis hypothesis, const FrameProblem& problem,
                           const TrackerParams& params, std::uint64_t seed, BlsStats* stats)
{
  BlsStats local;
  BlsStats& st = stats ? *stats : local;
  if (params.i_bls_max <= 0) {
    return hypothesis;
  }

  std::mt19937_64 rng(seed);
  Assignment current = hypothesis.assignment;
  double current_cost = cost_function(current, problem, params);
  FrameHypothesis best{current, current_cost};
  long budget = params.i_bls_max;

  while (budget > 0) {
    const auto moves = feasible_moves(current, problem);
    if (moves.empty()) {
      break;
    }
    double best_move_cost = current_cost;
    const Move* best_move = nullptr;
    for (const auto& m : moves) {
      if (budget == 0) {
        break;
      }
      --budget;
      ++st.evaluations;
      Assignment trial = current;
      apply(trial, m);
      const double c = cost_function(trial, problem, params);
      if (c < best_move_cost - kTol) {
        best_move_cost = c;
        best_move = &m;
      }
    }
    if (best_move) {
      apply(current, *best_move);
      current_cost = best_move_cost;
      ++st.improvements;
      if (current_cost < best.score - kTol) {
        best = {current, current_cost};
      }
    } else {
      // Local optimum: perturb and keep searching from the perturbed point.
      apply(current, moves[rng() % moves.size()]);
      current_cost = cost_function(current, problem, params);
      ++st.kicks;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Hypotheses

GlobalHypothesis GlobalHypothesis::bootstrap(std::vector<Track> tracks, int next_id)
{
  GlobalHypothesis h;
  h.tracks = std::move(tracks);
  h.next_id = next_id;
  for (const auto& t : h.tracks) {
    h.next_id = std::max(h.next_id, t.id + 1);
  }
  return h;
}

std::vector<TrackRecord> GlobalHypothesis::records() const
{
  std::vector<const HistoryNode*> chain;
  for (const HistoryNode* node = history.get(); node; node = node->parent.get()) {
    chain.push_back(node);
  }
  std::vector<TrackRecord> out;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    out.insert(out.end(), (*it)->records.begin(), (*it)->records.end());
  }
  return out;
}

namespace {

struct Child
{
  std::size_t parent;
  Assignment assignment;
  double frame_cost;
  double score;
  std::size_t order;
};

GlobalHypothesis materialize(const GlobalHypothesis& parent, const FrameProblem& problem,
                             const Child& child, const TrackerParams& params)
{
  GlobalHypothesis h;
  h.assignment = child.assignment;
  h.births = births_of(child.assignment, problem.candidates.size());
  h.frame_cost = child.frame_cost;
  h.score = child.score;
  h.next_id = parent.next_id;
  h.lineage = mix(mix(parent.lineage, static_cast<std::uint64_t>(problem.frame)),
                  hash_assignment(child.assignment));

  auto node = std::make_shared<HistoryNode>();
  node->frame = problem.frame;
  node->parent = parent.history;

  h.tracks = problem.tracks;
  for (std::size_t i = 0; i < h.tracks.size(); ++i) {
    const int j = child.assignment[i];
    if (j == assign::kMiss) {
      continue;
    }
    auto& track = h.tracks[i];
    track.push({problem.frame, problem.candidates[static_cast<std::size_t>(j)]}, params);
    node->records.push_back({problem.frame, track.id, track.last().target.position,
                             track.last().target.height, track.is_static});
  }
  for (const int b : h.births) {
    Track track;
    track.id = h.next_id++;
    track.push({problem.frame, problem.candidates[static_cast<std::size_t>(b)]}, params);
    node->records.push_back({problem.frame, track.id, track.last().target.position,
                             track.last().target.height, track.is_static});
    h.tracks.push_back(std::move(track));
  }
  std::sort(node->records.begin(), node->records.end(),
            [](const TrackRecord& a, const TrackRecord& b) { return a.id < b.id; });
  h.history = std::move(node);
  return h;
}

}  // namespace

std::vector<GlobalHypothesis> hypothesis_step(const std::vector<GlobalHypothesis>& parents,
                                              const std::vector<Target3D>& candidates,
                                              long frame, const TrackerParams& params,
                                              StepStats* stats)
{
  if (parents.empty()) {
    throw InvalidArgument("hypothesis_step needs at least one parent hypothesis");
  }
  const auto k_h = static_cast<std::size_t>(params.k_h);

  std::vector<FrameProblem> problems;
  std::vector<assign::KBestAssignments> generators;
  problems.reserve(parents.size());
  generators.reserve(parents.size());
  for (const auto& parent : parents) {
    std::vector<Track> live;
    for (const auto& t : parent.tracks) {
      if (frame <= t.last_seen()) {
        throw FrameRegression("hypothesis_step: frame " + std::to_string(frame) +
                              " is not after track observations");
      }
      if (frame - t.last_seen() <= params.delta_a) {
        live.push_back(t);
      }
    }
    problems.push_back(FrameProblem::build(std::move(live), candidates, frame, params));
    generators.emplace_back(problems.back().pairwise(params));
  }

  // Best-first over all parents' k-best streams. The pairwise cost never
  // exceeds the full frame cost, so once the next bound reaches the current
  // k_h-th best full score no remaining child can enter the top k_h.
  using Entry = std::tuple<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  for (std::size_t p = 0; p < parents.size(); ++p) {
    if (const auto c = generators[p].peek_cost()) {
      frontier.emplace(parents[p].score + *c, p);
    }
  }

  std::vector<Child> children;
  std::priority_queue<double> kept;  // the k_h smallest scores, max on top
  std::vector<char> has_child(parents.size(), 0);
  const std::size_t pop_cap = 4 * k_h + 32;
  std::size_t pops = 0;
  while (!frontier.empty() && pops < pop_cap) {
    const auto [bound, p] = frontier.top();
    if (kept.size() >= k_h && bound >= kept.top()) {
      break;
    }
    frontier.pop();
    ++pops;
    auto ranked = generators[p].next();
    const double fc = cost_function(ranked->track_to_candidate, problems[p], params);
    const double score = parents[p].score + fc;
    children.push_back({p, std::move(ranked->track_to_candidate), fc, score, children.size()});
    has_child[p] = 1;
    kept.push(score);
    if (kept.size() > k_h) {
      kept.pop();
    }
    if (const auto c = generators[p].peek_cost()) {
      frontier.emplace(parents[p].score + *c, p);
    }
  }

  // Refine each contributing parent's best child within the per-parent budget.
  std::set<std::pair<std::size_t, Assignment>> seen;
  for (const auto& c : children) {
    seen.emplace(c.parent, c.assignment);
  }
  long evaluations = 0;
  const std::size_t generated = children.size();
  for (std::size_t p = 0; p < parents.size(); ++p) {
    if (!has_child[p] || params.i_bls_max == 0) {
      continue;
    }
    const auto first = std::find_if(children.begin(), children.begin() + static_cast<long>(generated),
                                    [p](const Child& c) { return c.parent == p; });
    BlsStats bs;
    const std::uint64_t seed =
        mix(mix(params.seed, parents[p].lineage), static_cast<std::uint64_t>(frame));
    auto refined = bls_refine({first->assignment, first->frame_cost}, problems[p], params, seed, &bs);
    evaluations += bs.evaluations;
    if (seen.emplace(p, refined.assignment).second) {
      children.push_back({p, std::move(refined.assignment), refined.score,
                          parents[p].score + refined.score, children.size()});
    }
  }

  std::sort(children.begin(), children.end(), [](const Child& a, const Child& b) {
    return std::tie(a.score, a.parent, a.order) < std::tie(b.score, b.parent, b.order);
  });
  if (children.size() > k_h) {
    children.resize(k_h);
  }

  std::vector<GlobalHypothesis> out;
  out.reserve(children.size());
  for (const auto& c : children) {
    out.push_back(materialize(parents[c.parent], problems[c.parent], c, params));
  }
  if (stats) {
    stats->bls_evaluations = evaluations;
    stats->children_considered = static_cast<long>(generated);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tracker

Tracker::Tracker(TrackerParams params, CameraRig rig) : params_(params), rig_(std::move(rig))
{
  params_.validate();
  hypotheses_.push_back(GlobalHypothesis::bootstrap());
}

StepResult Tracker::step(long frame, std::span<const Detection> detections)
{
  if (last_frame_ && frame <= *last_frame_) {
    throw FrameRegression("frame " + std::to_string(frame) + " does not follow frame " +
                          std::to_string(*last_frame_));
  }
  for (const auto& d : detections) {
    if (d.frame != frame) {
      throw InvalidArgument("detection for frame " + std::to_string(d.frame) +
                            " passed to step for frame " + std::to_string(frame));
    }
  }
  auto tri = triangulate(detections, rig_, params_);
  held_.clear();
  for (const int i : tri.unsupported) {
    held_.push_back(detections[static_cast<std::size_t>(i)]);
  }
  auto result = step_candidates(frame, std::move(tri.targets));
  result.flagged = tri.flagged;
  result.held_detections = held_.size();
  return result;
}

StepResult Tracker::step_candidates(long frame, std::vector<Target3D> candidates)
{
  if (last_frame_ && frame <= *last_frame_) {
    throw FrameRegression("frame " + std::to_string(frame) + " does not follow frame " +
                          std::to_string(*last_frame_));
  }
  StepResult result;
  result.frame = frame;
  result.candidates = candidates.size();
  hypotheses_ = hypothesis_step(hypotheses_, candidates, frame, params_, &result.stats);
  last_frame_ = frame;

  const auto& node = best().history;
  if (node && node->frame == frame) {
    for (const auto& r : node->records) {
      if (!(params_.exclude_static && r.is_static)) {
        result.tracks.push_back(r);
      }
    }
  }
  return result;
}

std::vector<TrackRecord> Tracker::committed_records() const
{
  auto records = best().records();
  if (params_.exclude_static) {
    std::erase_if(records, [](const TrackRecord& r) { return r.is_static; });
  }
  return records;
}

std::vector<std::string> check_track_invariants(std::span<const TrackRecord> records,
                                                const TrackerParams& params)
{
  std::vector<TrackRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(), [](const TrackRecord& a, const TrackRecord& b) {
    return std::tie(a.id, a.frame) < std::tie(b.id, b.frame);
  });
  std::vector<std::string> violations;
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    const auto& a = sorted[k - 1];
    const auto& b = sorted[k];
    if (a.id != b.id) {
      continue;
    }
    const std::string where = "track " + std::to_string(b.id) + " frame " + std::to_string(b.frame);
    const long gap = b.frame - a.frame;
    if (gap < 1) {
      violations.push_back(where + ": duplicate frame");
      continue;
    }
    const double g = static_cast<double>(gap);
    const double d = (b.position - a.position).norm();
    if (gap > params.delta_a) {
      violations.push_back(where + ": frame gap exceeds delta_a");
    }
    if (d > params.eps_phi * g + kTol) {
      violations.push_back(where + ": displacement exceeds eps_phi");
    }
    if (d / g * params.fps > params.v_max + kTol) {
      violations.push_back(where + ": speed exceeds v_max");
    }
    if (std::abs(b.height - a.height) > params.eps_h * g + kTol) {
      violations.push_back(where + ": height change exceeds eps_h");
    }
  }
  return violations;
}

}  // namespace panotrack::tracking
