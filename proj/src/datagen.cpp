#include "chronodiar/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chronodiar {

void GenConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("GenConfig: ") + what);
  };
  require(dimension >= 2, "dimension must be >= 2");
  require(n_speakers >= 1, "n_speakers must be >= 1");
  require(duration > 0.0, "duration must be positive");
  require(frame_period > 0.0, "frame_period must be positive");
  require(duration >= frame_period, "duration must cover at least one frame");
  require(kappa >= 0.0 && std::isfinite(kappa), "kappa must be >= 0");
  require(min_pairwise_angle >= 0.0 && min_pairwise_angle <= 180.0,
          "min_pairwise_angle must lie in [0, 180]");
  require(turn_mean > 0.0, "turn_mean must be positive");
  require(pause_mean > 0.0, "pause_mean must be positive");
  require(overlap_prob >= 0.0 && overlap_prob <= 1.0, "overlap_prob must lie in [0, 1]");
  if (enrollment_skew) {
    require(enrollment_skew->skew_duration_seconds > 0.0, "skew duration must be positive");
    bool known = false;
    for (int i = 0; i < n_speakers; ++i) {
      known = known || speaker_name(i) == enrollment_skew->speaker;
    }
    require(known, "enrollment_skew names an unknown speaker");
  }
}

std::string speaker_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "spk%02d", index);
  return buf;
}

Vector sample_uniform_direction(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(d);
  do {
    for (Eigen::Index i = 0; i < d; ++i) {
      v(i) = normal(rng);
    }
  } while (!(v.norm() > 1e-6));
  return v.normalized();
}

Vector sample_vmf(const Vector& mean, double kappa, Rng& rng) {
  const auto d = mean.size();
  const double dm1 = static_cast<double>(d - 1);

  // Wood (1994): sample w = <x, mean>.
  const double b = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
  std::gamma_distribution<double> gamma(dm1 / 2.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double w = 0.0;
  while (true) {
    const double g1 = gamma(rng);
    const double g2 = gamma(rng);
    if (g1 + g2 <= 0.0) continue;
    const double z = g1 / (g1 + g2);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = uniform(rng);
    if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) {
      break;
    }
  }
  w = std::clamp(w, -1.0, 1.0);

  Vector tangent;
  do {
    tangent = sample_uniform_direction(d, rng);
    tangent -= tangent.dot(mean) * mean;
  } while (!(tangent.norm() > 1e-6));
  tangent.normalize();

  Vector x = w * mean + std::sqrt(std::max(0.0, 1.0 - w * w)) * tangent;
  return x.normalized();
}

namespace {

std::vector<Vector> sample_means(const GenConfig& cfg, Rng& rng) {
  const double min_cos = std::cos(cfg.min_pairwise_angle * std::numbers::pi / 180.0);
  constexpr int kRestarts = 200;
  constexpr int kTriesPerSpeaker = 2000;
  for (int restart = 0; restart < kRestarts; ++restart) {
    std::vector<Vector> means;
    for (int s = 0; s < cfg.n_speakers; ++s) {
      bool placed = false;
      for (int attempt = 0; attempt < kTriesPerSpeaker && !placed; ++attempt) {
        Vector cand = sample_uniform_direction(cfg.dimension, rng);
        placed = std::all_of(means.begin(), means.end(),
                             [&](const Vector& m) { return m.dot(cand) <= min_cos + 1e-12; });
        if (placed) means.push_back(std::move(cand));
      }
      if (!placed) break;
    }
    if (static_cast<int>(means.size()) == cfg.n_speakers) {
      return means;
    }
  }
  throw std::invalid_argument("generate_conversation: cannot place " +
                              std::to_string(cfg.n_speakers) + " speakers at least " +
                              std::to_string(cfg.min_pairwise_angle) + " degrees apart in d=" +
                              std::to_string(cfg.dimension));
}

// Rotates `mean` by `degrees` within the plane it spans with `away_from`,
// moving away from `away_from`.
Vector rotate_away(const Vector& mean, const Vector& away_from, double degrees, Rng& rng) {
  Vector tangent = -(away_from - away_from.dot(mean) * mean);
  if (!(tangent.norm() > 1e-9)) {
    tangent = sample_uniform_direction(mean.size(), rng);
    tangent -= tangent.dot(mean) * mean;
  }
  tangent.normalize();
  const double a = degrees * std::numbers::pi / 180.0;
  return (std::cos(a) * mean + std::sin(a) * tangent).normalized();
}

struct GridTurn {
  long begin;  // frame index, inclusive
  long end;    // frame index, exclusive
  int speaker;
};

long frames_for(double seconds, double period) {
  return std::lround(seconds / period);
}

std::vector<GridTurn> sample_turns(const GenConfig& cfg, long total_frames, Rng& rng) {
  std::exponential_distribution<double> turn_len(1.0 / cfg.turn_mean);
  std::exponential_distribution<double> pause_len(1.0 / cfg.pause_mean);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::uniform_int_distribution<int> first_speaker(0, cfg.n_speakers - 1);

  std::vector<GridTurn> turns;
  std::vector<long> last_end(static_cast<std::size_t>(cfg.n_speakers), 0);
  long cursor = frames_for(pause_len(rng), cfg.frame_period);
  int speaker = first_speaker(rng);
  while (cursor < total_frames) {
    const long len = std::max(1L, frames_for(turn_len(rng), cfg.frame_period));
    turns.push_back({cursor, std::min(cursor + len, total_frames), speaker});

    int next = speaker;
    if (cfg.n_speakers == 2) {
      next = 1 - speaker;
    } else if (cfg.n_speakers > 2) {
      std::uniform_int_distribution<int> other(0, cfg.n_speakers - 2);
      next = other(rng);
      if (next >= speaker) ++next;
    }

    const GridTurn& cur = turns.back();
    long next_start = cur.end + frames_for(pause_len(rng), cfg.frame_period);
    if (cfg.n_speakers > 1 && uniform(rng) < cfg.overlap_prob) {
      // Overlap at most half of the current turn.
      const long cap = (cur.end - cur.begin) / 2;
      const long want = std::max(1L, frames_for(0.2 + 0.8 * uniform(rng), cfg.frame_period));
      const long ov = std::min(cap, want);
      if (ov >= 1) next_start = cur.end - ov;
    }
    // A speaker's turns never overlap each other.
    last_end[static_cast<std::size_t>(speaker)] = cur.end;
    next_start = std::max(next_start, last_end[static_cast<std::size_t>(next)]);
    cursor = next_start;
    speaker = next;
  }
  return turns;
}

}  // namespace

Conversation generate_conversation(const GenConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Conversation conv;
  conv.speaker_means = sample_means(cfg, rng);

  std::optional<int> skewed;
  Vector skew_mean;
  if (cfg.enrollment_skew) {
    for (int s = 0; s < cfg.n_speakers; ++s) {
      if (speaker_name(s) == cfg.enrollment_skew->speaker) skewed = s;
    }
    const Vector& own = conv.speaker_means[static_cast<std::size_t>(*skewed)];
    Vector nearest = own;
    double best = -2.0;
    for (int s = 0; s < cfg.n_speakers; ++s) {
      if (s == *skewed) continue;
      const double cs = own.dot(conv.speaker_means[static_cast<std::size_t>(s)]);
      if (cs > best) {
        best = cs;
        nearest = conv.speaker_means[static_cast<std::size_t>(s)];
      }
    }
    skew_mean = rotate_away(own, nearest, cfg.enrollment_skew->drift_angle_degrees, rng);
  }

  const long total_frames = std::max(1L, static_cast<long>(std::floor(cfg.duration / cfg.frame_period + 1e-9)));
  const std::vector<GridTurn> turns = sample_turns(cfg, total_frames, rng);

  std::vector<std::vector<int>> active(static_cast<std::size_t>(total_frames));
  for (const auto& t : turns) {
    conv.annotation.add(Segment(static_cast<double>(t.begin) * cfg.frame_period,
                                static_cast<double>(t.end) * cfg.frame_period),
                        speaker_name(t.speaker));
    for (long k = t.begin; k < t.end; ++k) {
      active[static_cast<std::size_t>(k)].push_back(t.speaker);
    }
  }
  if (!turns.empty()) {
    conv.uem = Timeline({conv.annotation.speech().extent()});
  }

  double skewed_seconds = 0.0;
  for (long k = 0; k < total_frames; ++k) {
    auto& here = active[static_cast<std::size_t>(k)];
    if (here.empty()) continue;
    std::sort(here.begin(), here.end());
    const double start = static_cast<double>(k) * cfg.frame_period;
    const double end = static_cast<double>(k + 1) * cfg.frame_period;
    if (here.size() == 1) {
      const int s = here.front();
      const bool drifted = skewed && s == *skewed &&
                           skewed_seconds < cfg.enrollment_skew->skew_duration_seconds - kTimeEpsilon;
      if (skewed && s == *skewed) skewed_seconds += end - start;
      const Vector& mean = drifted ? skew_mean : conv.speaker_means[static_cast<std::size_t>(s)];
      conv.frames.emplace_back(start, end, sample_vmf(mean, cfg.kappa, rng));
      conv.truth.push_back(GroundTruthLabel::speaker(speaker_name(s)));
    } else {
      Vector mix = Vector::Zero(cfg.dimension);
      for (int s : here) {
        mix += sample_vmf(conv.speaker_means[static_cast<std::size_t>(s)], cfg.kappa, rng);
      }
      if (!(mix.norm() > kMinNorm)) {
        mix = conv.speaker_means[static_cast<std::size_t>(here.front())];
      }
      conv.frames.emplace_back(start, end, mix);
      conv.truth.push_back(GroundTruthLabel::overlap());
    }
  }
  return conv;
}

}  // namespace chronodiar
