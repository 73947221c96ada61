// Synthetic conversations: speakers are von Mises-Fisher clusters on the unit
// sphere, turns follow an alternating semi-Markov process, and frames are
// emitted on a fixed grid inside speech.

#pragma once

#include "chronodiar/core.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace chronodiar {

using Rng = std::mt19937_64;

struct EnrollmentSkew {
  std::string speaker;
  double drift_angle_degrees = 0.0;
  /// Seconds of the speaker's own single-speaker speech drawn from the drifted mean.
  double skew_duration_seconds = 0.0;
};

struct GenConfig {
  int dimension = 256;
  int n_speakers = 2;
  double duration = 600.0;
  double frame_period = 0.2;
  double kappa = 350.0;
  double min_pairwise_angle = 60.0;
  double turn_mean = 3.0;
  double pause_mean = 0.5;
  double overlap_prob = 0.0;
  std::optional<EnrollmentSkew> enrollment_skew;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Draw from vMF(mean, kappa) on S^(d-1) using Wood's rejection sampler for
/// the component along `mean` and a uniform tangent direction.
Vector sample_vmf(const Vector& mean, double kappa, Rng& rng);

/// Uniformly random unit vector in R^d.
Vector sample_uniform_direction(Eigen::Index d, Rng& rng);

/// Speaker ids used by the generator: "spk00", "spk01", ...
std::string speaker_name(int index);

struct Conversation {
  std::vector<EmbeddingFrame> frames;
  std::vector<GroundTruthLabel> truth;
  Annotation annotation;
  Timeline uem;
  /// True mean direction per speaker, indexed like speaker_name().
  std::vector<Vector> speaker_means;
};

/// Throws std::invalid_argument for invalid configs and for mean-direction
/// constraints that cannot be met (too many speakers for the angle and d).
Conversation generate_conversation(const GenConfig& cfg);

}  // namespace chronodiar
