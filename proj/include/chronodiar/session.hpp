// Streaming diarization session: chronological enrollment split followed by
// the batch-wise self-training loop.

#pragma once

#include "chronodiar/classifiers.hpp"
#include "chronodiar/core.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace chronodiar {

struct SelfTrainConfig {
  int batch_size = 10;
  /// Pseudo-labels with score below this are not fed back. Absent = accept all.
  std::optional<double> score_threshold;
  bool adaptive = true;

  void validate() const;
};

struct SplitSpec {
  double train_seconds_per_speaker = 1.0;
  /// Start of the test region in seconds. Frames between the enrollment
  /// split and this time are neither trained on nor tested.
  std::optional<double> fixed_test_start;
};

struct SplitResult {
  std::vector<LabeledSample> train;
  /// First frame index after the enrollment window.
  std::size_t split_index = 0;
  /// First frame index of the test region (== split_index unless overridden).
  std::size_t test_start_index = 0;
};

/// Thrown when some speaker never accumulates the required enrollment time.
class SplitError : public std::runtime_error {
 public:
  SplitError(const std::string& speaker, double accumulated, double required);
  const std::string& speaker() const { return speaker_; }

 private:
  std::string speaker_;
};

/// Scans frames in order, accumulating single-speaker time per speaker; the
/// split lands right after the frame at which every speaker in `speakers`
/// reached spec.train_seconds_per_speaker. An empty `speakers` set means
/// every speaker id appearing in `truth`.
SplitResult chronological_split(std::span<const EmbeddingFrame> frames,
                                std::span<const GroundTruthLabel> truth, const SplitSpec& spec,
                                const std::set<std::string>& speakers = {});

struct LatencyStats {
  double median_us = 0.0;
  double mean_us = 0.0;
  double max_us = 0.0;
};

struct SessionResult {
  std::vector<Prediction> predictions;
  ModelState final_state;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  /// Per-frame predict time plus its share of the following model update.
  LatencyStats latency;
};

/// Fits on `train`, then walks `test_frames` in batches of
/// selftrain.batch_size: predict the batch, record those predictions, and
/// (if adaptive) fold accepted pseudo-labels back into the model. Recorded
/// predictions are never revised.
SessionResult run_session(std::span<const LabeledSample> train,
                          std::span<const EmbeddingFrame> test_frames,
                          const ClassifierConfig& classifier, const SelfTrainConfig& selftrain);

}  // namespace chronodiar
