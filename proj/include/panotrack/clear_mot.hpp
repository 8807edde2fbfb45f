#pragma once

// CLEAR-MOT evaluation of 3D track output against ground truth.

#include "panotrack/records.hpp"

#include <map>
#include <span>
#include <vector>

namespace panotrack::metrics {

inline constexpr double kDefaultThreshold = 1.0;  // m

struct FrameMatch
{
  int truth_id = 0;
  int track_id = 0;
  double distance = 0.0;
};

struct FrameEvents
{
  long frame = 0;
  std::vector<FrameMatch> matches;
  int misses = 0;
  int false_positives = 0;
  int id_switches = 0;
  int truth_count = 0;
  int hypothesis_count = 0;
};

/// Last track id each ground-truth object was matched to.
using MatchHistory = std::map<int, int>;

/// Matches one frame. Pairings from `previous` survive while the track is
/// present and within `threshold`; the rest are matched to maximize the number
/// of pairs, then minimize their summed distance. A truth matched to a track
/// other than its previous one counts one id switch.
FrameEvents match_frame(std::span<const ObjectRecord> truth, std::span<const ObjectRecord> hypotheses,
                        const MatchHistory& previous, double threshold);

void update_history(MatchHistory& history, const FrameEvents& events);

struct MotReport
{
  double mota = 0.0;
  double motp = 0.0;  // m
  long matches = 0;
  long misses = 0;
  long false_positives = 0;
  long id_switches = 0;
  long total_truth = 0;
  long frames = 0;
  double match_threshold = kDefaultThreshold;
};

/// Folds match_frame over every frame present in either list, in order.
MotReport evaluate(const RecordList& truth, const RecordList& tracks,
                   double threshold = kDefaultThreshold);

}  // namespace panotrack::metrics
