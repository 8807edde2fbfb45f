#include "panotrack/clear_mot.hpp"

#include "panotrack/assignment.hpp"
#include "panotrack/errors.hpp"

#include <algorithm>
#include <set>

namespace panotrack::metrics {

FrameEvents match_frame(std::span<const ObjectRecord> truth, std::span<const ObjectRecord> hypotheses,
                        const MatchHistory& previous, double threshold)
{
  if (!(threshold > 0.0)) {
    throw InvalidArgument("match threshold must be positive");
  }
  FrameEvents ev;
  ev.frame = truth.empty() ? (hypotheses.empty() ? 0 : hypotheses.front().frame) : truth.front().frame;
  ev.truth_count = static_cast<int>(truth.size());
  ev.hypothesis_count = static_cast<int>(hypotheses.size());

  std::vector<char> truth_used(truth.size(), 0);
  std::vector<char> hyp_used(hypotheses.size(), 0);

  auto add_match = [&](std::size_t t, std::size_t h, double d) {
    truth_used[t] = 1;
    hyp_used[h] = 1;
    ev.matches.push_back({truth[t].id, hypotheses[h].id, d});
  };

  // Persistent correspondences first.
  for (std::size_t t = 0; t < truth.size(); ++t) {
    const auto it = previous.find(truth[t].id);
    if (it == previous.end()) {
      continue;
    }
    for (std::size_t h = 0; h < hypotheses.size(); ++h) {
      if (hyp_used[h] || hypotheses[h].id != it->second) {
        continue;
      }
      const double d = (truth[t].position - hypotheses[h].position).norm();
      if (d <= threshold) {
        add_match(t, h, d);
      }
      break;
    }
  }

  std::vector<std::size_t> free_t;
  std::vector<std::size_t> free_h;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (!truth_used[t]) {
      free_t.push_back(t);
    }
  }
  for (std::size_t h = 0; h < hypotheses.size(); ++h) {
    if (!hyp_used[h]) {
      free_h.push_back(h);
    }
  }

  if (!free_t.empty() && !free_h.empty()) {
    const auto nt = static_cast<Eigen::Index>(free_t.size());
    const auto nh = static_cast<Eigen::Index>(free_h.size());
    // Leaving an object unmatched costs more than any feasible distance sum, so
    // the solver first maximizes the number of matches.
    const double unmatched = threshold * static_cast<double>(std::min(nt, nh) + 1) + 1.0;
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(nt + nh, nh + nt, assign::kForbidden);
    for (Eigen::Index i = 0; i < nt; ++i) {
      for (Eigen::Index j = 0; j < nh; ++j) {
        const double d = (truth[free_t[i]].position - hypotheses[free_h[j]].position).norm();
        if (d <= threshold) {
          m(i, j) = d;
        }
      }
      m(i, nh + i) = unmatched;
    }
    for (Eigen::Index j = 0; j < nh; ++j) {
      m(nt + j, j) = unmatched;
      for (Eigen::Index k = 0; k < nt; ++k) {
        m(nt + j, nh + k) = 0.0;
      }
    }
    const auto sol = assign::solve_square(m);
    for (Eigen::Index i = 0; i < nt; ++i) {
      const int j = sol->row_to_col[static_cast<std::size_t>(i)];
      if (j < nh) {
        add_match(free_t[i], free_h[static_cast<std::size_t>(j)], m(i, j));
      }
    }
  }

  for (const auto& match : ev.matches) {
    const auto it = previous.find(match.truth_id);
    if (it != previous.end() && it->second != match.track_id) {
      ++ev.id_switches;
    }
  }
  std::sort(ev.matches.begin(), ev.matches.end(),
            [](const FrameMatch& a, const FrameMatch& b) { return a.truth_id < b.truth_id; });
  ev.misses = ev.truth_count - static_cast<int>(ev.matches.size());
  ev.false_positives = ev.hypothesis_count - static_cast<int>(ev.matches.size());
  return ev;
}

void update_history(MatchHistory& history, const FrameEvents& events)
{
  for (const auto& m : events.matches) {
    history[m.truth_id] = m.track_id;
  }
}

MotReport evaluate(const RecordList& truth, const RecordList& tracks, double threshold)
{
  if (truth.empty()) {
    throw EmptyGroundTruth("ground truth contains no records");
  }
  std::map<long, std::pair<RecordList, RecordList>> frames;
  for (const auto& r : truth) {
    frames[r.frame].first.push_back(r);
  }
  for (const auto& r : tracks) {
    frames[r.frame].second.push_back(r);
  }

  MotReport report;
  report.match_threshold = threshold;
  MatchHistory history;
  double distance_sum = 0.0;
  for (const auto& [frame, lists] : frames) {
    auto ev = match_frame(lists.first, lists.second, history, threshold);
    update_history(history, ev);
    report.matches += static_cast<long>(ev.matches.size());
    report.misses += ev.misses;
    report.false_positives += ev.false_positives;
    report.id_switches += ev.id_switches;
    report.total_truth += ev.truth_count;
    for (const auto& m : ev.matches) {
      distance_sum += m.distance;
    }
    ++report.frames;
  }
  report.mota = 1.0 - static_cast<double>(report.misses + report.false_positives + report.id_switches) /
                          static_cast<double>(report.total_truth);
  report.motp = report.matches > 0 ? distance_sum / static_cast<double>(report.matches) : 0.0;
  return report;
}

}  // namespace panotrack::metrics
