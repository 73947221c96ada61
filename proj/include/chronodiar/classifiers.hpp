// Incremental classifiers over unit-norm embeddings: k-nearest neighbours,
// Gaussian naive Bayes and nearest centroid. Every model keeps sufficient
// statistics so that feeding samples in batches gives the same state as a
// single fit over all of them.

#pragma once

#include "chronodiar/core.hpp"

#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace chronodiar {

enum class ClassifierKind { Knn, Gnb, Nc };

std::string to_string(ClassifierKind kind);
/// Accepts "knn", "gnb", "nc". Throws std::invalid_argument otherwise.
ClassifierKind parse_classifier_kind(const std::string& name);

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::Nc;
  int k = 3;
  double var_smoothing = 0.1;
  /// GNB only: ignore class counts and use equal priors.
  bool uniform_prior = false;

  void validate() const;
};

enum class SampleOrigin { Enrollment, Pseudo };

struct LabeledSample {
  Vector vector;
  std::string label;
  SampleOrigin origin = SampleOrigin::Enrollment;
};

struct Prediction {
  std::string label;
  double score = 0.0;
  std::map<std::string, double> posteriors;
};

struct KnnState {
  /// Column i is the i-th stored sample; only the first `count` columns are live.
  Matrix samples;
  std::vector<int> labels;
  Eigen::Index count = 0;
};

/// Per-class moments with one column per class, plus pooled per-feature
/// moments over all samples for the variance-smoothing term.
struct GnbState {
  Eigen::VectorXd counts;
  Matrix means;
  Matrix m2;
  double pooled_count = 0.0;
  Vector pooled_mean;
  Vector pooled_m2;
};

struct NcState {
  Matrix sums;
  Eigen::VectorXd counts;
};

class ModelState {
 public:
  const ClassifierConfig& config() const { return config_; }
  /// Sorted class labels; class index i in the statistics refers to classes()[i].
  const std::vector<std::string>& classes() const { return classes_; }
  Eigen::Index dimension() const { return dimension_; }
  /// Total number of samples absorbed so far.
  std::size_t sample_count() const { return samples_seen_; }

  const KnnState& knn() const { return std::get<KnnState>(stats_); }
  const GnbState& gnb() const { return std::get<GnbState>(stats_); }
  const NcState& nc() const { return std::get<NcState>(stats_); }

  /// Index of `label` in classes(), or -1.
  int class_index(const std::string& label) const;

 private:
  friend ModelState fit(const ClassifierConfig&, std::span<const LabeledSample>);
  friend ModelState partial_update(ModelState, std::span<const LabeledSample>);
  friend void partial_update_in_place(ModelState&, std::span<const LabeledSample>);

  ClassifierConfig config_;
  std::vector<std::string> classes_;
  Eigen::Index dimension_ = 0;
  std::size_t samples_seen_ = 0;
  std::variant<KnnState, GnbState, NcState> stats_;
};

/// Builds a model from scratch. The class set is fixed to the labels present
/// in `samples`. Throws std::invalid_argument on an empty or inconsistent set.
ModelState fit(const ClassifierConfig& config, std::span<const LabeledSample> samples);

/// Folds `batch` into the model. Labels must belong to the fitted class set.
ModelState partial_update(ModelState state, std::span<const LabeledSample> batch);
void partial_update_in_place(ModelState& state, std::span<const LabeledSample> batch);

Prediction predict(const ModelState& state, const Vector& x);
std::vector<Prediction> predict_batch(const ModelState& state,
                                      std::span<const EmbeddingFrame> frames);

/// Centroid of class i (normalized class mean, or zero if the mean vanishes).
Vector nc_centroid(const ModelState& state, int class_index);

/// Smoothing term added to every GNB class variance:
/// var_smoothing * max_j pooled variance of feature j.
double gnb_epsilon(const ModelState& state);

/// Per-class unnormalized GNB log posterior (log likelihood + log prior).
Eigen::VectorXd gnb_joint_log_likelihood(const ModelState& state, const Vector& x);

/// Turns per-class scores into a Prediction: label = argmax (ties go to the
/// lexicographically smallest label), posteriors = softmax of the scores.
Prediction prediction_from_log_scores(const std::vector<std::string>& classes,
                                      const Eigen::VectorXd& log_scores);

}  // namespace chronodiar
