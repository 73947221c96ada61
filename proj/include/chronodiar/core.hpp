// Vector math and timeline algebra shared by every other module.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace chronodiar {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Absolute tolerance (seconds) used for every touching/overlap decision.
inline constexpr double kTimeEpsilon = 1e-9;

/// Smallest norm accepted by normalize().
inline constexpr double kMinNorm = 1e-12;

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_distance(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_distance: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  // Inputs are unit-norm by contract, so no re-normalization here.
  return typename DerivedA::Scalar(1) - a.dot(b);
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> normalize(
    const Eigen::MatrixBase<Derived>& v) {
  if (!v.allFinite()) {
    throw std::invalid_argument("normalize: vector has non-finite entries");
  }
  const auto norm = v.norm();
  if (!(norm > kMinNorm)) {
    throw std::invalid_argument("normalize: vector norm is zero or too small");
  }
  return v / norm;
}

/// One ~200 ms speech window: its time span plus a unit-norm embedding.
class EmbeddingFrame {
 public:
  /// Normalizes `vector`; throws std::invalid_argument on bad span or vector.
  EmbeddingFrame(double start, double end, const Vector& vector);

  double start() const { return start_; }
  double end() const { return end_; }
  double duration() const { return end_ - start_; }
  const Vector& vector() const { return vector_; }
  Eigen::Index dimension() const { return vector_.size(); }

 private:
  double start_;
  double end_;
  Vector vector_;
};

class GroundTruthLabel {
 public:
  enum class Kind { Speaker, Overlap, NonSpeech };

  static GroundTruthLabel speaker(std::string id);
  static GroundTruthLabel overlap() { return GroundTruthLabel(Kind::Overlap, {}); }
  static GroundTruthLabel non_speech() { return GroundTruthLabel(Kind::NonSpeech, {}); }

  Kind kind() const { return kind_; }
  bool is_speaker() const { return kind_ == Kind::Speaker; }
  /// Speaker id; empty unless kind() == Speaker.
  const std::string& speaker_id() const { return speaker_; }

  friend bool operator==(const GroundTruthLabel&, const GroundTruthLabel&) = default;

 private:
  GroundTruthLabel(Kind kind, std::string speaker) : kind_(kind), speaker_(std::move(speaker)) {}

  Kind kind_;
  std::string speaker_;
};

struct Segment {
  double start = 0.0;
  double end = 0.0;

  Segment() = default;
  /// Throws std::invalid_argument unless end > start.
  Segment(double start, double end);

  double duration() const { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Sorted list of disjoint, non-touching segments.
class Timeline {
 public:
  Timeline() = default;
  /// Accepts segments in any order; sorts them and merges overlapping or
  /// touching ones (within kTimeEpsilon).
  explicit Timeline(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  std::size_t size() const { return segments_.size(); }

  /// Smallest segment covering the whole timeline. Throws if empty.
  Segment extent() const;

  friend bool operator==(const Timeline&, const Timeline&) = default;

 private:
  std::vector<Segment> segments_;
};

Timeline union_of(const Timeline& a, const Timeline& b);
Timeline intersection(const Timeline& a, const Timeline& b);
Timeline subtract(const Timeline& a, const Timeline& b);
double total_duration(const Timeline& t);
/// Restricts `t` to a single window.
Timeline crop(const Timeline& t, const Segment& window);

struct Turn {
  Segment segment;
  std::string speaker;
};

/// A labelled set of speaker turns. Turns of one speaker never overlap;
/// turns of different speakers may (overlapped speech).
class Annotation {
 public:
  Annotation() = default;

  /// Throws std::invalid_argument if the turn overlaps an existing turn of
  /// the same speaker by more than kTimeEpsilon.
  void add(const Segment& segment, const std::string& speaker);

  const std::vector<Turn>& turns() const { return turns_; }
  bool empty() const { return turns_.empty(); }
  /// Sorted, unique speaker ids.
  std::vector<std::string> speakers() const;
  Timeline speaker_timeline(const std::string& speaker) const;
  /// All instants where at least one speaker is active.
  Timeline speech() const;
  /// Every turn intersected with `support`; turns falling outside are dropped.
  Annotation cropped(const Timeline& support) const;
  /// Renames speakers; labels missing from `mapping` are kept as-is.
  Annotation relabeled(const std::map<std::string, std::string>& mapping) const;

 private:
  std::vector<Turn> turns_;
  std::map<std::string, std::vector<Segment>> by_speaker_;
};

/// Instants where two or more speakers are active.
Timeline overlap_timeline(const Annotation& ann);

}  // namespace chronodiar
