#include "chronodiar/core.hpp"

#include <algorithm>
#include <set>

namespace chronodiar {

EmbeddingFrame::EmbeddingFrame(double start, double end, const Vector& vector)
    : start_(start), end_(end) {
  if (!std::isfinite(start) || !std::isfinite(end) || !(end > start)) {
    throw std::invalid_argument("EmbeddingFrame: end must be greater than start");
  }
  if (vector.size() < 2) {
    throw std::invalid_argument("EmbeddingFrame: dimension must be at least 2");
  }
  vector_ = normalize(vector);
}

GroundTruthLabel GroundTruthLabel::speaker(std::string id) {
  if (id.empty()) {
    throw std::invalid_argument("GroundTruthLabel: empty speaker id");
  }
  return GroundTruthLabel(Kind::Speaker, std::move(id));
}

Segment::Segment(double start, double end) : start(start), end(end) {
  if (!std::isfinite(start) || !std::isfinite(end) || !(end > start)) {
    throw std::invalid_argument("Segment: end must be greater than start (got [" +
                                std::to_string(start) + ", " + std::to_string(end) + "])");
  }
}

Timeline::Timeline(std::vector<Segment> segments) {
  std::sort(segments.begin(), segments.end(), [](const Segment& a, const Segment& b) {
    return a.start < b.start || (a.start == b.start && a.end < b.end);
  });
  for (const auto& s : segments) {
    if (!segments_.empty() && s.start <= segments_.back().end + kTimeEpsilon) {
      segments_.back().end = std::max(segments_.back().end, s.end);
    } else {
      segments_.push_back(s);
    }
  }
}

Segment Timeline::extent() const {
  if (segments_.empty()) {
    throw std::logic_error("Timeline::extent: empty timeline");
  }
  return Segment(segments_.front().start, segments_.back().end);
}

Timeline union_of(const Timeline& a, const Timeline& b) {
  std::vector<Segment> all = a.segments();
  all.insert(all.end(), b.segments().begin(), b.segments().end());
  return Timeline(std::move(all));
}

Timeline intersection(const Timeline& a, const Timeline& b) {
  std::vector<Segment> out;
  const auto& sa = a.segments();
  const auto& sb = b.segments();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double lo = std::max(sa[i].start, sb[j].start);
    const double hi = std::min(sa[i].end, sb[j].end);
    if (hi - lo > kTimeEpsilon) {
      out.emplace_back(lo, hi);
    }
    if (sa[i].end < sb[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  return Timeline(std::move(out));
}

Timeline subtract(const Timeline& a, const Timeline& b) {
  std::vector<Segment> out;
  const auto& sb = b.segments();
  std::size_t j = 0;
  for (const auto& seg : a.segments()) {
    double cursor = seg.start;
    while (j < sb.size() && sb[j].end <= cursor) {
      ++j;
    }
    std::size_t k = j;
    while (k < sb.size() && sb[k].start < seg.end) {
      if (sb[k].start - cursor > kTimeEpsilon) {
        out.emplace_back(cursor, sb[k].start);
      }
      cursor = std::max(cursor, sb[k].end);
      ++k;
    }
    if (seg.end - cursor > kTimeEpsilon) {
      out.emplace_back(cursor, seg.end);
    }
  }
  return Timeline(std::move(out));
}

double total_duration(const Timeline& t) {
  double sum = 0.0;
  for (const auto& s : t.segments()) {
    sum += s.duration();
  }
  return sum;
}

Timeline crop(const Timeline& t, const Segment& window) {
  return intersection(t, Timeline({window}));
}

void Annotation::add(const Segment& segment, const std::string& speaker) {
  if (speaker.empty()) {
    throw std::invalid_argument("Annotation::add: empty speaker id");
  }
  auto& mine = by_speaker_[speaker];
  auto pos = std::lower_bound(mine.begin(), mine.end(), segment,
                              [](const Segment& a, const Segment& b) { return a.start < b.start; });
  const bool hits_next = pos != mine.end() && pos->start < segment.end - kTimeEpsilon;
  const bool hits_prev = pos != mine.begin() && std::prev(pos)->end > segment.start + kTimeEpsilon;
  if (hits_next || hits_prev) {
    throw std::invalid_argument("Annotation::add: overlapping turns for speaker '" + speaker + "'");
  }
  mine.insert(pos, segment);
  turns_.push_back({segment, speaker});
}

std::vector<std::string> Annotation::speakers() const {
  std::vector<std::string> out;
  for (const auto& [name, segs] : by_speaker_) {
    if (!segs.empty()) {
      out.push_back(name);
    }
  }
  return out;
}

Timeline Annotation::speaker_timeline(const std::string& speaker) const {
  auto it = by_speaker_.find(speaker);
  return it == by_speaker_.end() ? Timeline() : Timeline(it->second);
}

Timeline Annotation::speech() const {
  std::vector<Segment> all;
  all.reserve(turns_.size());
  for (const auto& t : turns_) {
    all.push_back(t.segment);
  }
  return Timeline(std::move(all));
}

Annotation Annotation::cropped(const Timeline& support) const {
  Annotation out;
  for (const auto& t : turns_) {
    const Timeline pieces = intersection(Timeline({t.segment}), support);
    for (const auto& piece : pieces.segments()) {
      out.add(piece, t.speaker);
    }
  }
  return out;
}

Annotation Annotation::relabeled(const std::map<std::string, std::string>& mapping) const {
  Annotation out;
  for (const auto& t : turns_) {
    auto it = mapping.find(t.speaker);
    out.add(t.segment, it == mapping.end() ? t.speaker : it->second);
  }
  return out;
}

Timeline overlap_timeline(const Annotation& ann) {
  // Sweep over per-speaker merged timelines; at equal times ends are
  // processed before starts so touching turns do not count as overlap.
  std::vector<std::pair<double, int>> events;
  for (const auto& spk : ann.speakers()) {
    const Timeline mine = ann.speaker_timeline(spk);
    for (const auto& s : mine.segments()) {
      events.emplace_back(s.start, +1);
      events.emplace_back(s.end, -1);
    }
  }
  std::sort(events.begin(), events.end());
  std::vector<Segment> out;
  int active = 0;
  double open = 0.0;
  for (const auto& [time, delta] : events) {
    const int next = active + delta;
    if (active < 2 && next >= 2) {
      open = time;
    } else if (active >= 2 && next < 2 && time - open > kTimeEpsilon) {
      out.emplace_back(open, time);
    }
    active = next;
  }
  return Timeline(std::move(out));
}

}  // namespace chronodiar
