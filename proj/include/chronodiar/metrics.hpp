// Frame accuracy and diarization error rate.
//
// DER follows the usual protocol: only the UEM region is scored, a collar
// around every reference boundary is forgiven, and (by default) regions of
// overlapped reference speech are skipped. Within the scored support, at
// each instant with R reference and H hypothesis speakers of which C agree:
//   miss = max(R - H, 0), false alarm = max(H - R, 0), confusion = min(R, H) - C
// integrated over time, and total = integral of R.

#pragma once

#include "chronodiar/classifiers.hpp"
#include "chronodiar/core.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chronodiar {

enum class CollarSemantics {
  HalfEachSide,  ///< forgive [b - c/2, b + c/2]
  FullEachSide,  ///< forgive [b - c, b + c]
};

enum class LabelMapping { Identity, Optimal };

CollarSemantics parse_collar_semantics(const std::string& name);
LabelMapping parse_label_mapping(const std::string& name);

struct MetricConfig {
  double collar = 0.25;
  bool skip_overlap = true;
  CollarSemantics collar_semantics = CollarSemantics::HalfEachSide;
};

struct DerReport {
  double confusion = 0.0;
  double false_alarm = 0.0;
  double miss = 0.0;
  double total = 0.0;

  double confusion_rate() const { return confusion / total; }
  double fa_rate() const { return false_alarm / total; }
  double miss_rate() const { return miss / total; }
  double der() const { return (confusion + false_alarm + miss) / total; }

  DerReport& operator+=(const DerReport& other);
};

using Uem = Timeline;

/// uem minus collar neighbourhoods around reference boundaries, minus
/// overlapped reference speech when cfg.skip_overlap.
Timeline scoring_support(const Annotation& reference, const Uem& uem, const MetricConfig& cfg);

/// Hypothesis label -> reference label, maximizing total co-occurrence.
/// Hypothesis labels left without a (positive-overlap) partner are absent.
std::map<std::string, std::string> optimal_mapping(const Annotation& reference,
                                                   const Annotation& hypothesis);

/// Co-occurrence duration matrix: rows = reference speakers, cols =
/// hypothesis speakers, both in sorted order.
Matrix cooccurrence(const Annotation& reference, const Annotation& hypothesis);

/// Unmapped hypothesis speakers under LabelMapping::Optimal keep their own
/// identity, so they count as confusion (or false alarm) wherever active.
DerReport der(const Annotation& reference, const Annotation& hypothesis, const Uem& uem,
              const MetricConfig& cfg = {}, LabelMapping mapping = LabelMapping::Identity);

struct LabeledFrame {
  Segment span;
  std::string label;
};

/// Merges runs of consecutive same-label frames into turns. A gap of at most
/// merge_gap seconds between consecutive same-label frames is bridged.
Annotation frames_to_annotation(std::span<const LabeledFrame> frames, double merge_gap = 0.3);

/// Fraction of frames with single-speaker truth whose predicted label matches.
/// Overlap and non-speech frames are ignored. Throws if none are eligible.
double accuracy(std::span<const std::string> predicted, std::span<const GroundTruthLabel> truth);
double accuracy(std::span<const Prediction> predicted, std::span<const GroundTruthLabel> truth);

/// Minimum-cost assignment of rows to columns for a rectangular cost matrix.
/// Returns, for each row, the assigned column or -1 (only when rows > cols).
std::vector<int> solve_assignment(const Matrix& cost);

}  // namespace chronodiar
