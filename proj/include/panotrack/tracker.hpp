#pragma once

// Online multi-view 3D multi-target tracking with a bounded set of global
// assignment hypotheses.
//
// Per frame: detections from all cameras are fused into 3D candidates, every
// surviving hypothesis is extended with its k-best gated assignments, the best
// child of each parent is refined by local search, and the k_h cheapest
// children survive. Hypothesis scores are cumulative frame costs.

#include "panotrack/assignment.hpp"
#include "panotrack/camera.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace panotrack::tracking {

struct TrackerParams
{
  int l_c = 4;                  // comparison interval, frames
  double delta_min = 0.05;      // static feature threshold, m
  double eps_phi = 0.5;         // max 3D distance between continuous detections, m per frame
  double eps_h = 0.3;           // max height change, m
  double omega_s_coeff = 0.3;   // window size change, fraction of size
  double theta_s = 0.3;         // collision distance, m
  double eps_3d = 2.5;          // max ray distance for simultaneous detections, m
  double v_max = 0.8;           // m/s
  int delta_a = 9;              // max frame gap on a track
  int k_h = 10;
  int i_bls_max = 1000;
  double fps = 6.0;

  double c_miss = 1.0;
  double c_birth = 1.5;
  double c_coll = 2.0;

  bool exclude_static = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SupportEntry
{
  int camera = 0;
  int detection = 0;  // index into the frame's detection list
  double size = 0.0;
};

struct Target3D
{
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double height = 0.0;
  std::vector<SupportEntry> support;  // sorted by camera, one entry per camera
};

struct TriangulationResult
{
  std::vector<Target3D> targets;
  std::vector<int> unsupported;  // detections not fused with any other view
  bool flagged = false;          // fewer than two cameras contributed
};

/// Greedy cross-camera clustering, best ray distance first. Two clusters merge
/// when they share no camera, every cross pair of rays is within eps_3d, and
/// the heights implied by each view's window size at the fused point agree to
/// within eps_h, both with each other and with twice the point's height above
/// the ground plane (detections mark the window centre). A final pass swaps
/// same-camera views between clusters while that lowers the ray residual.
TriangulationResult triangulate(std::span<const Detection> detections, const CameraRig& rig,
                                const TrackerParams& params);

struct TrackState
{
  long frame = 0;
  Target3D target;
};

struct Track
{
  int id = 0;
  std::deque<TrackState> states;  // most recent l_c + 1 states, oldest first
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // m/s
  bool is_static = false;

  long last_seen() const { return states.back().frame; }
  const TrackState& last() const { return states.back(); }

  void push(TrackState state, const TrackerParams& params);
};

bool gate(const Track& track, const Target3D& candidate, long frame, const TrackerParams& params);

enum class Motion { Static, Moving };

/// Static iff every position in the last l_c + 1 lies within delta_min of the current one.
Motion classify_static(std::span<const Eigen::Vector3d> positions, const TrackerParams& params);

/// One frame's association problem for a fixed set of tracks.
struct FrameProblem
{
  long frame = 0;
  std::vector<Track> tracks;
  std::vector<Target3D> candidates;
  Eigen::MatrixXd distance;  // tracks x candidates, kForbidden where ungated

  static FrameProblem build(std::vector<Track> tracks, std::vector<Target3D> candidates,
                            long frame, const TrackerParams& params);

  assign::TrackProblem pairwise(const TrackerParams& params) const;
};

using Assignment = std::vector<int>;  // per track: candidate index or assign::kMiss

/// Candidates no track claims; each opens a new track.
std::vector<int> births_of(const Assignment& assignment, std::size_t candidate_count);

/// Number of object pairs whose straight-line motion over the frame brings them
/// within theta_s. Missed tracks hold their last position, births sit still.
int collision_pairs(const Assignment& assignment, const FrameProblem& problem,
                    const TrackerParams& params);

double cost_function(const Assignment& assignment, const FrameProblem& problem,
                     const TrackerParams& params);

struct FrameHypothesis
{
  Assignment assignment;
  double score = 0.0;
};

/// Optimal pairwise assignment (collision term excluded from the matrix, then
/// included in the returned score).
FrameHypothesis associate(const FrameProblem& problem, const TrackerParams& params);

struct BlsStats
{
  long evaluations = 0;
  long improvements = 0;
  long kicks = 0;
};

/// Best-improving local search over swap / drop-to-birth / merge-birth moves.
/// Each scored move consumes one unit of the i_bls_max budget. At a local
/// optimum the search applies a seeded random move and continues; the best
/// assignment seen is returned, so the score never increases.
FrameHypothesis bls_refine(FrameHypothesis hypothesis, const FrameProblem& problem,
                           const TrackerParams& params, std::uint64_t seed,
                           BlsStats* stats = nullptr);

struct TrackRecord
{
  long frame = 0;
  int id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double height = 0.0;
  bool is_static = false;
};

struct HistoryNode
{
  long frame = 0;
  std::vector<TrackRecord> records;
  std::shared_ptr<const HistoryNode> parent;
};

struct GlobalHypothesis
{
  std::vector<Track> tracks;
  Assignment assignment;       // last frame's map over the parent's live tracks
  std::vector<int> births;     // last frame's births, candidate indices
  double frame_cost = 0.0;
  double score = 0.0;          // cumulative
  int next_id = 0;
  std::uint64_t lineage = 0;
  std::shared_ptr<const HistoryNode> history;

  static GlobalHypothesis bootstrap(std::vector<Track> tracks = {}, int next_id = 0);

  /// Records along this hypothesis' lineage, ordered by (frame, id).
  std::vector<TrackRecord> records() const;
};

struct StepStats
{
  long bls_evaluations = 0;
  long children_considered = 0;
};

/// Extends every parent and keeps the k_h best children, sorted by score.
std::vector<GlobalHypothesis> hypothesis_step(const std::vector<GlobalHypothesis>& parents,
                                              const std::vector<Target3D>& candidates,
                                              long frame, const TrackerParams& params,
                                              StepStats* stats = nullptr);

struct StepResult
{
  long frame = 0;
  std::vector<TrackRecord> tracks;  // best hypothesis, this frame, non-static
  std::size_t candidates = 0;
  std::size_t held_detections = 0;
  bool flagged = false;
  StepStats stats;
};

class Tracker
{
public:
  Tracker(TrackerParams params, CameraRig rig);

  /// All detections must carry `frame`; frames must strictly increase.
  StepResult step(long frame, std::span<const Detection> detections);

  /// Same as step, starting from already-fused candidates.
  StepResult step_candidates(long frame, std::vector<Target3D> candidates);

  const std::vector<GlobalHypothesis>& hypotheses() const { return hypotheses_; }
  const GlobalHypothesis& best() const { return hypotheses_.front(); }

  /// Best hypothesis' committed track records (static ones dropped when
  /// exclude_static is set), ordered by (frame, id).
  std::vector<TrackRecord> committed_records() const;

  /// Single-view detections from the last frame; discarded on the next step.
  const std::vector<Detection>& held() const { return held_; }

  const TrackerParams& params() const { return params_; }

private:
  TrackerParams params_;
  CameraRig rig_;
  std::vector<GlobalHypothesis> hypotheses_;
  std::vector<Detection> held_;
  std::optional<long> last_frame_;
};

/// Violations of the track invariants (distance, speed, gap, height) in a
/// record stream; empty when every consecutive pair per id is consistent.
std::vector<std::string> check_track_invariants(std::span<const TrackRecord> records,
                                                const TrackerParams& params);

}  // namespace panotrack::tracking
