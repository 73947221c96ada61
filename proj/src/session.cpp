#include "chronodiar/session.hpp"

#include <algorithm>
#include <chrono>
#include <map>

namespace chronodiar {

void SelfTrainConfig::validate() const {
  if (batch_size < 1) {
    throw std::invalid_argument("SelfTrainConfig: batch_size must be >= 1");
  }
  if (score_threshold && !(*score_threshold >= 0.0 && *score_threshold <= 1.0)) {
    throw std::invalid_argument("SelfTrainConfig: score_threshold must lie in [0, 1]");
  }
}

SplitError::SplitError(const std::string& speaker, double accumulated, double required)
    : std::runtime_error("enrollment target unreachable: speaker '" + speaker + "' has " +
                         std::to_string(accumulated) + " s of single-speaker frames, needs " +
                         std::to_string(required) + " s"),
      speaker_(speaker) {}

SplitResult chronological_split(std::span<const EmbeddingFrame> frames,
                                std::span<const GroundTruthLabel> truth, const SplitSpec& spec,
                                const std::set<std::string>& speakers) {
  if (frames.size() != truth.size()) {
    throw std::invalid_argument("chronological_split: frames and truth differ in length");
  }
  if (!(spec.train_seconds_per_speaker > 0.0)) {
    throw std::invalid_argument("chronological_split: train seconds must be positive");
  }
  std::set<std::string> enrolled = speakers;
  if (enrolled.empty()) {
    for (const auto& t : truth) {
      if (t.is_speaker()) {
        enrolled.insert(t.speaker_id());
      }
    }
  }
  if (enrolled.size() < 2) {
    throw std::invalid_argument("chronological_split: need at least two speakers");
  }

  const double target = spec.train_seconds_per_speaker - kTimeEpsilon;
  std::map<std::string, double> accumulated;
  for (const auto& s : enrolled) {
    accumulated[s] = 0.0;
  }
  std::size_t satisfied = 0;
  std::optional<std::size_t> split;
  for (std::size_t i = 0; i < frames.size() && !split; ++i) {
    if (!truth[i].is_speaker()) {
      continue;
    }
    auto it = accumulated.find(truth[i].speaker_id());
    if (it == accumulated.end()) {
      continue;
    }
    const bool was_done = it->second >= target;
    it->second += frames[i].duration();
    if (!was_done && it->second >= target && ++satisfied == enrolled.size()) {
      split = i + 1;
    }
  }
  if (!split) {
    for (const auto& [name, secs] : accumulated) {
      if (secs < target) {
        throw SplitError(name, secs, spec.train_seconds_per_speaker);
      }
    }
  }

  SplitResult out;
  out.split_index = *split;
  out.test_start_index = *split;
  for (std::size_t i = 0; i < *split; ++i) {
    if (truth[i].is_speaker() && enrolled.contains(truth[i].speaker_id())) {
      out.train.push_back({frames[i].vector(), truth[i].speaker_id(), SampleOrigin::Enrollment});
    }
  }
  if (spec.fixed_test_start) {
    const double t0 = *spec.fixed_test_start;
    if (*split > 0 && frames[*split - 1].start() >= t0 - kTimeEpsilon) {
      throw std::invalid_argument(
          "chronological_split: fixed test start lies inside the enrollment window");
    }
    auto first = std::find_if(frames.begin() + static_cast<std::ptrdiff_t>(*split), frames.end(),
                              [&](const EmbeddingFrame& f) { return f.start() >= t0 - kTimeEpsilon; });
    out.test_start_index = static_cast<std::size_t>(first - frames.begin());
  }
  return out;
}

SessionResult run_session(std::span<const LabeledSample> train,
                          std::span<const EmbeddingFrame> test_frames,
                          const ClassifierConfig& classifier, const SelfTrainConfig& selftrain) {
  using Clock = std::chrono::steady_clock;
  selftrain.validate();

  SessionResult result{{}, fit(classifier, train), 0, 0, {}};
  if (result.final_state.classes().size() < 2) {
    throw std::invalid_argument("run_session: training data must cover at least two classes");
  }
  ModelState& model = result.final_state;
  result.predictions.reserve(test_frames.size());

  std::vector<double> frame_us;
  frame_us.reserve(test_frames.size());
  std::vector<LabeledSample> pseudo;
  const auto batch = static_cast<std::size_t>(selftrain.batch_size);

  for (std::size_t begin = 0; begin < test_frames.size(); begin += batch) {
    const std::size_t end = std::min(begin + batch, test_frames.size());
    pseudo.clear();
    for (std::size_t i = begin; i < end; ++i) {
      const auto t0 = Clock::now();
      result.predictions.push_back(predict(model, test_frames[i].vector()));
      frame_us.push_back(std::chrono::duration<double, std::micro>(Clock::now() - t0).count());

      const auto& p = result.predictions.back();
      const bool accept =
          selftrain.adaptive && (!selftrain.score_threshold || p.score >= *selftrain.score_threshold);
      if (accept) {
        pseudo.push_back({test_frames[i].vector(), p.label, SampleOrigin::Pseudo});
        ++result.accepted;
      } else {
        ++result.rejected;
      }
    }
    if (!pseudo.empty()) {
      const auto t0 = Clock::now();
      partial_update_in_place(model, pseudo);
      const double share = std::chrono::duration<double, std::micro>(Clock::now() - t0).count() /
                           static_cast<double>(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        frame_us[i] += share;
      }
    }
  }

  if (!frame_us.empty()) {
    std::vector<double> sorted = frame_us;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    result.latency.median_us = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double sum = 0.0;
    for (double v : sorted) {
      sum += v;
    }
    result.latency.mean_us = sum / static_cast<double>(n);
    result.latency.max_us = sorted.back();
  }
  return result;
}

}  // namespace chronodiar
