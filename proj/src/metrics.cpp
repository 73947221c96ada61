#include "chronodiar/metrics.hpp"

#include <algorithm>
#include <limits>

namespace chronodiar {

CollarSemantics parse_collar_semantics(const std::string& name) {
  if (name == "half_each_side") return CollarSemantics::HalfEachSide;
  if (name == "full_each_side") return CollarSemantics::FullEachSide;
  throw std::invalid_argument("unknown collar semantics '" + name +
                              "' (expected half_each_side or full_each_side)");
}

LabelMapping parse_label_mapping(const std::string& name) {
  if (name == "identity") return LabelMapping::Identity;
  if (name == "optimal") return LabelMapping::Optimal;
  throw std::invalid_argument("unknown mapping '" + name + "' (expected identity or optimal)");
}

DerReport& DerReport::operator+=(const DerReport& other) {
  confusion += other.confusion;
  false_alarm += other.false_alarm;
  miss += other.miss;
  total += other.total;
  return *this;
}

Timeline scoring_support(const Annotation& reference, const Uem& uem, const MetricConfig& cfg) {
  if (uem.empty()) {
    throw std::invalid_argument("scoring_support: empty UEM, nothing to score");
  }
  if (!(cfg.collar >= 0.0)) {
    throw std::invalid_argument("scoring_support: collar must be >= 0");
  }
  Timeline support = uem;
  const double half =
      cfg.collar_semantics == CollarSemantics::HalfEachSide ? cfg.collar / 2.0 : cfg.collar;
  if (half > 0.0) {
    std::vector<Segment> collars;
    collars.reserve(2 * reference.turns().size());
    for (const auto& t : reference.turns()) {
      collars.emplace_back(t.segment.start - half, t.segment.start + half);
      collars.emplace_back(t.segment.end - half, t.segment.end + half);
    }
    support = subtract(support, Timeline(std::move(collars)));
  }
  if (cfg.skip_overlap) {
    support = subtract(support, overlap_timeline(reference));
  }
  return support;
}

std::vector<int> solve_assignment(const Matrix& cost) {
  const auto rows = cost.rows();
  const auto cols = cost.cols();
  if (rows == 0) {
    return {};
  }
  if (rows > cols) {
    const std::vector<int> by_col = solve_assignment(cost.transpose());
    std::vector<int> out(static_cast<std::size_t>(rows), -1);
    for (std::size_t c = 0; c < by_col.size(); ++c) {
      out[static_cast<std::size_t>(by_col[c])] = static_cast<int>(c);
    }
    return out;
  }
  // Shortest augmenting path Hungarian method with row/column potentials,
  // 1-based internally. Requires rows <= cols.
  const auto n = static_cast<std::size_t>(rows);
  const auto m = static_cast<std::size_t>(cols);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> out(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (owner[j] != 0) {
      out[owner[j] - 1] = static_cast<int>(j - 1);
    }
  }
  return out;
}

Matrix cooccurrence(const Annotation& reference, const Annotation& hypothesis) {
  const auto ref = reference.speakers();
  const auto hyp = hypothesis.speakers();
  Matrix out(static_cast<Eigen::Index>(ref.size()), static_cast<Eigen::Index>(hyp.size()));
  for (std::size_t r = 0; r < ref.size(); ++r) {
    const Timeline rt = reference.speaker_timeline(ref[r]);
    for (std::size_t h = 0; h < hyp.size(); ++h) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(h)) =
          total_duration(intersection(rt, hypothesis.speaker_timeline(hyp[h])));
    }
  }
  return out;
}

std::map<std::string, std::string> optimal_mapping(const Annotation& reference,
                                                   const Annotation& hypothesis) {
  const auto ref = reference.speakers();
  const auto hyp = hypothesis.speakers();
  std::map<std::string, std::string> out;
  if (ref.empty() || hyp.empty()) {
    return out;
  }
  const Matrix overlap = cooccurrence(reference, hypothesis);
  const std::vector<int> assigned = solve_assignment(-overlap.transpose());
  for (std::size_t h = 0; h < hyp.size(); ++h) {
    const int r = assigned[h];
    if (r >= 0 && overlap(r, static_cast<Eigen::Index>(h)) > kTimeEpsilon) {
      out.emplace(hyp[h], ref[static_cast<std::size_t>(r)]);
    }
  }
  return out;
}

namespace {

// Prefix that cannot appear in a parsed speaker id (ids never contain control
// characters), used to keep unmapped hypothesis speakers distinct.
constexpr char kUnmappedPrefix[] = "\x1f" "unmapped:";

struct Event {
  double time;
  int delta;
  bool is_ref;
  const std::string* label;
};

}  // namespace

DerReport der(const Annotation& reference, const Annotation& hypothesis, const Uem& uem,
              const MetricConfig& cfg, LabelMapping mapping) {
  const Timeline support = scoring_support(reference, uem, cfg);
  const Annotation ref = reference.cropped(support);
  Annotation hyp = hypothesis.cropped(support);

  if (mapping == LabelMapping::Optimal) {
    std::map<std::string, std::string> rename = optimal_mapping(ref, hyp);
    for (const auto& h : hyp.speakers()) {
      rename.try_emplace(h, kUnmappedPrefix + h);
    }
    hyp = hyp.relabeled(rename);
  }

  std::vector<Event> events;
  events.reserve(2 * (ref.turns().size() + hyp.turns().size()));
  for (const auto& t : ref.turns()) {
    events.push_back({t.segment.start, +1, true, &t.speaker});
    events.push_back({t.segment.end, -1, true, &t.speaker});
  }
  for (const auto& t : hyp.turns()) {
    events.push_back({t.segment.start, +1, false, &t.speaker});
    events.push_back({t.segment.end, -1, false, &t.speaker});
  }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.time < b.time; });

  std::map<std::string, int> ref_active;
  std::map<std::string, int> hyp_active;
  int n_ref = 0;
  int n_hyp = 0;
  DerReport report;
  double prev = events.empty() ? 0.0 : events.front().time;
  for (std::size_t i = 0; i < events.size();) {
    const double now = events[i].time;
    const double span = now - prev;
    if (span > 0.0 && (n_ref > 0 || n_hyp > 0)) {
      int correct = 0;
      for (const auto& [label, count] : ref_active) {
        if (count > 0) {
          auto it = hyp_active.find(label);
          if (it != hyp_active.end() && it->second > 0) {
            ++correct;
          }
        }
      }
      report.total += span * n_ref;
      report.miss += span * std::max(n_ref - n_hyp, 0);
      report.false_alarm += span * std::max(n_hyp - n_ref, 0);
      report.confusion += span * (std::min(n_ref, n_hyp) - correct);
    }
    for (; i < events.size() && events[i].time == now; ++i) {
      const auto& e = events[i];
      auto& active = e.is_ref ? ref_active : hyp_active;
      int& n = e.is_ref ? n_ref : n_hyp;
      int& c = active[*e.label];
      const bool was = c > 0;
      c += e.delta;
      if (!was && c > 0) ++n;
      if (was && c <= 0) --n;
    }
    prev = now;
  }
  if (!(report.total > 0.0)) {
    throw std::domain_error("der: no reference speech inside the scoring support (DER undefined)");
  }
  return report;
}

Annotation frames_to_annotation(std::span<const LabeledFrame> frames, double merge_gap) {
  Annotation out;
  if (frames.empty()) {
    return out;
  }
  std::string label = frames.front().label;
  double start = frames.front().span.start;
  double end = frames.front().span.end;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.label == label && f.span.start - end <= merge_gap + kTimeEpsilon) {
      end = std::max(end, f.span.end);
      continue;
    }
    // Overlapping windows with different labels: cut at the new frame's start.
    const double cut = f.label != label ? std::min(end, f.span.start) : end;
    if (cut - start > kTimeEpsilon) {
      out.add(Segment(start, cut), label);
    }
    label = f.label;
    start = f.span.start;
    end = f.span.end;
  }
  out.add(Segment(start, end), label);
  return out;
}

double accuracy(std::span<const std::string> predicted, std::span<const GroundTruthLabel> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("accuracy: predictions and truth differ in length");
  }
  std::size_t eligible = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!truth[i].is_speaker()) {
      continue;
    }
    ++eligible;
    if (predicted[i] == truth[i].speaker_id()) {
      ++correct;
    }
  }
  if (eligible == 0) {
    throw std::domain_error("accuracy: no single-speaker frames to score");
  }
  return static_cast<double>(correct) / static_cast<double>(eligible);
}

double accuracy(std::span<const Prediction> predicted, std::span<const GroundTruthLabel> truth) {
  std::vector<std::string> labels;
  labels.reserve(predicted.size());
  for (const auto& p : predicted) {
    labels.push_back(p.label);
  }
  return accuracy(std::span<const std::string>(labels), truth);
}

}  // namespace chronodiar
