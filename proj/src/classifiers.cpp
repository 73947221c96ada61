#include "chronodiar/classifiers.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

namespace chronodiar {

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Knn:
      return "knn";
    case ClassifierKind::Gnb:
      return "gnb";
    case ClassifierKind::Nc:
      return "nc";
  }
  return "unknown";
}

ClassifierKind parse_classifier_kind(const std::string& name) {
  if (name == "knn") return ClassifierKind::Knn;
  if (name == "gnb") return ClassifierKind::Gnb;
  if (name == "nc") return ClassifierKind::Nc;
  throw std::invalid_argument("unknown classifier '" + name + "' (expected knn, gnb or nc)");
}

void ClassifierConfig::validate() const {
  if (k < 1) {
    throw std::invalid_argument("ClassifierConfig: k must be >= 1");
  }
  if (!(var_smoothing >= 0.0) || !std::isfinite(var_smoothing)) {
    throw std::invalid_argument("ClassifierConfig: var_smoothing must be >= 0");
  }
}

int ModelState::class_index(const std::string& label) const {
  auto it = std::lower_bound(classes_.begin(), classes_.end(), label);
  if (it == classes_.end() || *it != label) {
    return -1;
  }
  return static_cast<int>(it - classes_.begin());
}

ModelState fit(const ClassifierConfig& config, std::span<const LabeledSample> samples) {
  config.validate();
  if (samples.empty()) {
    throw std::invalid_argument("fit: empty sample set");
  }
  std::set<std::string> labels;
  for (const auto& s : samples) {
    labels.insert(s.label);
  }

  ModelState state;
  state.config_ = config;
  state.classes_.assign(labels.begin(), labels.end());
  state.dimension_ = samples.front().vector.size();
  const auto d = state.dimension_;
  const auto c = static_cast<Eigen::Index>(state.classes_.size());

  switch (config.kind) {
    case ClassifierKind::Knn:
      state.stats_ = KnnState{Matrix(d, 0), {}, 0};
      break;
    case ClassifierKind::Gnb:
      state.stats_ = GnbState{Eigen::VectorXd::Zero(c), Matrix::Zero(d, c), Matrix::Zero(d, c),
                              0.0,  Vector::Zero(d),            Vector::Zero(d)};
      break;
    case ClassifierKind::Nc:
      state.stats_ = NcState{Matrix::Zero(d, c), Eigen::VectorXd::Zero(c)};
      break;
  }
  partial_update_in_place(state, samples);
  return state;
}

namespace {

// Chan et al. merge of (count, mean, m2) with a batch whose moments were
// computed by two passes. Columns are features.
void merge_moments(double& count, Eigen::Ref<Vector> mean, Eigen::Ref<Vector> m2,
                   const Matrix& batch) {
  const double nb = static_cast<double>(batch.cols());
  if (nb == 0.0) {
    return;
  }
  const Vector batch_mean = batch.rowwise().sum() / nb;
  const Vector batch_m2 = (batch.colwise() - batch_mean).array().square().rowwise().sum();
  const double n = count + nb;
  const Vector delta = batch_mean - mean;
  mean += delta * (nb / n);
  m2 += batch_m2 + delta.cwiseProduct(delta) * (count * nb / n);
  count = n;
}

void update_knn(KnnState& st, const std::vector<int>& idx, std::span<const LabeledSample> batch) {
  const Eigen::Index needed = st.count + static_cast<Eigen::Index>(batch.size());
  if (needed > st.samples.cols()) {
    const Eigen::Index capacity = std::max<Eigen::Index>(needed, 2 * st.samples.cols());
    st.samples.conservativeResize(Eigen::NoChange, capacity);
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    st.samples.col(st.count) = batch[i].vector;
    st.labels.push_back(idx[i]);
    ++st.count;
  }
}

void update_nc(NcState& st, const std::vector<int>& idx, std::span<const LabeledSample> batch) {
  for (std::size_t i = 0; i < batch.size(); ++i) {
    st.sums.col(idx[i]) += batch[i].vector;
    st.counts(idx[i]) += 1.0;
  }
}

void update_gnb(GnbState& st, const std::vector<int>& idx, std::span<const LabeledSample> batch) {
  const auto d = st.means.rows();
  const auto c = st.means.cols();
  Matrix all(d, static_cast<Eigen::Index>(batch.size()));
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    all.col(static_cast<Eigen::Index>(i)) = batch[i].vector;
    members[static_cast<std::size_t>(idx[i])].push_back(static_cast<Eigen::Index>(i));
  }
  for (Eigen::Index cls = 0; cls < c; ++cls) {
    const auto& rows = members[static_cast<std::size_t>(cls)];
    if (rows.empty()) {
      continue;
    }
    Matrix part(d, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
      part.col(static_cast<Eigen::Index>(j)) = all.col(rows[j]);
    }
    double count = st.counts(cls);
    merge_moments(count, st.means.col(cls), st.m2.col(cls), part);
    st.counts(cls) = count;
  }
  merge_moments(st.pooled_count, st.pooled_mean, st.pooled_m2, all);
}

}  // namespace

void partial_update_in_place(ModelState& state, std::span<const LabeledSample> batch) {
  std::vector<int> idx;
  idx.reserve(batch.size());
  for (const auto& s : batch) {
    if (s.vector.size() != state.dimension_) {
      throw std::invalid_argument("partial_update: dimension mismatch (expected " +
                                  std::to_string(state.dimension_) + ", got " +
                                  std::to_string(s.vector.size()) + ")");
    }
    if (!s.vector.allFinite()) {
      throw std::invalid_argument("partial_update: non-finite sample");
    }
    const int ci = state.class_index(s.label);
    if (ci < 0) {
      throw std::invalid_argument("partial_update: label '" + s.label +
                                  "' is not one of the enrolled classes");
    }
    idx.push_back(ci);
  }
  std::visit(
      [&](auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, KnnState>) {
          update_knn(st, idx, batch);
        } else if constexpr (std::is_same_v<T, NcState>) {
          update_nc(st, idx, batch);
        } else {
          update_gnb(st, idx, batch);
        }
      },
      state.stats_);
  state.samples_seen_ += batch.size();
}

ModelState partial_update(ModelState state, std::span<const LabeledSample> batch) {
  partial_update_in_place(state, batch);
  return state;
}

Vector nc_centroid(const ModelState& state, int class_index) {
  const auto& st = state.nc();
  const Vector mean = st.sums.col(class_index) / st.counts(class_index);
  const double norm = mean.norm();
  return norm > kMinNorm ? Vector(mean / norm) : Vector(Vector::Zero(mean.size()));
}

double gnb_epsilon(const ModelState& state) {
  const auto& st = state.gnb();
  if (st.pooled_count <= 0.0) {
    return 0.0;
  }
  return state.config().var_smoothing * (st.pooled_m2 / st.pooled_count).maxCoeff();
}

Eigen::VectorXd gnb_joint_log_likelihood(const ModelState& state, const Vector& x) {
  const auto& st = state.gnb();
  const double eps = gnb_epsilon(state);
  const auto c = st.means.cols();
  const double total = st.counts.sum();
  Eigen::VectorXd out(c);
  constexpr double kLog2Pi = 1.8378770664093453;
  for (Eigen::Index cls = 0; cls < c; ++cls) {
    const double n = st.counts(cls);
    const Eigen::ArrayXd var =
        (st.m2.col(cls).array() / n + eps).max(std::numeric_limits<double>::min());
    const Eigen::ArrayXd diff = x.array() - st.means.col(cls).array();
    const double ll = -0.5 * (kLog2Pi + var.log()).sum() - 0.5 * (diff.square() / var).sum();
    const double log_prior = state.config().uniform_prior ? -std::log(static_cast<double>(c))
                                                          : std::log(n / total);
    out(cls) = ll + log_prior;
  }
  return out;
}

Prediction prediction_from_log_scores(const std::vector<std::string>& classes,
                                      const Eigen::VectorXd& log_scores) {
  Prediction p;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < log_scores.size(); ++i) {
    if (log_scores(i) > log_scores(best)) {
      best = i;
    }
  }
  const double top = log_scores(best);
  Eigen::VectorXd post;
  if (!std::isfinite(top)) {
    post = Eigen::VectorXd::Constant(log_scores.size(), 1.0 / static_cast<double>(log_scores.size()));
  } else {
    post = (log_scores.array() - top).exp();
    post /= post.sum();
  }
  for (Eigen::Index i = 0; i < post.size(); ++i) {
    p.posteriors.emplace(classes[static_cast<std::size_t>(i)], post(i));
  }
  p.label = classes[static_cast<std::size_t>(best)];
  p.score = post(best);
  return p;
}

namespace {

Prediction predict_knn(const ModelState& state, const Vector& x) {
  const auto& st = state.knn();
  const Eigen::VectorXd dist =
      Eigen::VectorXd::Ones(st.count) - st.samples.leftCols(st.count).transpose() * x;
  const auto k = std::min<Eigen::Index>(state.config().k, st.count);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(st.count));
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return dist(a) < dist(b) || (dist(a) == dist(b) && a < b);
                    });
  std::vector<int> votes(state.classes().size(), 0);
  for (Eigen::Index i = 0; i < k; ++i) {
    ++votes[static_cast<std::size_t>(st.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])])];
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) {
      best = c;
    }
  }
  Prediction p;
  for (std::size_t c = 0; c < votes.size(); ++c) {
    p.posteriors.emplace(state.classes()[c], static_cast<double>(votes[c]) / static_cast<double>(k));
  }
  p.label = state.classes()[best];
  p.score = static_cast<double>(votes[best]) / static_cast<double>(k);
  return p;
}

Prediction predict_nc(const ModelState& state, const Vector& x) {
  const auto c = static_cast<int>(state.classes().size());
  Eigen::VectorXd neg_dist(c);
  for (int i = 0; i < c; ++i) {
    neg_dist(i) = -cosine_distance(x, nc_centroid(state, i));
  }
  return prediction_from_log_scores(state.classes(), neg_dist);
}

}  // namespace

Prediction predict(const ModelState& state, const Vector& x) {
  if (state.classes().empty() || state.sample_count() == 0) {
    throw std::logic_error("predict: model has not been fitted");
  }
  if (x.size() != state.dimension()) {
    throw std::invalid_argument("predict: dimension mismatch (expected " +
                                std::to_string(state.dimension()) + ", got " +
                                std::to_string(x.size()) + ")");
  }
  switch (state.config().kind) {
    case ClassifierKind::Knn:
      return predict_knn(state, x);
    case ClassifierKind::Gnb:
      return prediction_from_log_scores(state.classes(), gnb_joint_log_likelihood(state, x));
    case ClassifierKind::Nc:
      return predict_nc(state, x);
  }
  throw std::logic_error("predict: unknown classifier kind");
}

std::vector<Prediction> predict_batch(const ModelState& state,
                                      std::span<const EmbeddingFrame> frames) {
  std::vector<Prediction> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    out.push_back(predict(state, f.vector()));
  }
  return out;
}

}  // namespace chronodiar
