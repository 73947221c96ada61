// End-to-end experiment driver: load or generate recordings, run sessions,
// score them and sweep the enrollment length.

#pragma once

#include "chronodiar/classifiers.hpp"
#include "chronodiar/datagen.hpp"
#include "chronodiar/io.hpp"
#include "chronodiar/metrics.hpp"
#include "chronodiar/session.hpp"

#include <optional>
#include <string>
#include <vector>

namespace chronodiar {

/// One conversation: embedding frames with ground truth plus the reference
/// annotation and UEM used for scoring.
struct Recording {
  std::string id;
  std::string language = "und";
  std::vector<EmbeddingFrame> frames;
  std::vector<GroundTruthLabel> truth;
  Annotation reference;
  Uem uem;
};

Recording recording_from_conversation(std::string id, const Conversation& conv);

/// Reads `<id>.jsonl`-style embeddings plus the matching RTTM/UEM entries.
/// Throws std::runtime_error (or io::ParseError) on missing or inconsistent data.
Recording load_recording(const std::string& embeddings_path, const std::string& rttm_path,
                         const std::string& uem_path, const std::string& file_id);

/// Writes <dir>/<id>.jsonl, <dir>/<id>.rttm and <dir>/<id>.uem. Returns the paths.
std::vector<std::string> write_recording(const std::string& dir, const Recording& rec);

/// All recordings in `dir` with a complete .jsonl/.rttm/.uem triple, by id.
std::vector<Recording> load_corpus(const std::string& dir);

struct RunSettings {
  ClassifierConfig classifier;
  SelfTrainConfig selftrain;
  double train_seconds = 1.0;
  MetricConfig metric;
  LabelMapping mapping = LabelMapping::Identity;
  double merge_gap = 0.3;
};

struct RunOutcome {
  io::ReportRow row;
  SessionResult session;
  Annotation hypothesis;
  std::size_t test_start_index = 0;
};

/// Split, run the session on the test region and score it. DER is computed
/// over the UEM restricted to the test region.
RunOutcome run_recording(const Recording& rec, const RunSettings& settings,
                         std::optional<double> fixed_test_start = std::nullopt);

struct SweepConfig {
  std::vector<double> train_seconds{0.5, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<ClassifierKind> classifiers{ClassifierKind::Knn, ClassifierKind::Gnb,
                                          ClassifierKind::Nc};
  std::vector<bool> adaptive{false, true};
  RunSettings base;
  int workers = 1;

  void validate() const;
};

/// Per-file rows for every (classifier, adaptive, train_seconds). The test
/// region of each file starts after the enrollment window of the largest
/// train_seconds, so it is identical across settings.
std::vector<io::ReportRow> sweep(const std::vector<Recording>& corpus, const SweepConfig& cfg);

struct SummaryRow {
  std::string classifier;
  bool adaptive = false;
  double train_seconds = 0.0;
  std::size_t n_files = 0;
  double accuracy_mean = 0.0;
  /// Population standard deviation across files.
  double accuracy_std = 0.0;
  /// Unweighted mean of per-file DER.
  double der_mean = 0.0;
  /// Components summed over files, then divided by summed reference time.
  DerReport der_corpus;
};

std::vector<SummaryRow> summarize(const std::vector<io::ReportRow>& rows);

inline constexpr const char* kSummaryHeader =
    "classifier,adaptive,train_seconds,n_files,accuracy_mean,accuracy_std,der_mean,"
    "corpus_confusion,corpus_fa,corpus_miss,corpus_der";

std::string write_summary(const std::vector<SummaryRow>& rows);

}  // namespace chronodiar
