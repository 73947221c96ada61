#include "chronodiar/classifiers.hpp"
#include "chronodiar/config.hpp"
#include "chronodiar/datagen.hpp"
#include "chronodiar/metrics.hpp"

#include <doctest.h>

using namespace chronodiar;

namespace {

GenConfig small_config(std::uint64_t seed) {
  GenConfig cfg;
  cfg.dimension = 8;
  cfg.duration = 120.0;
  cfg.kappa = 30.0;
  cfg.seed = seed;
  return cfg;
}

bool same_conversation(const Conversation& a, const Conversation& b) {
  if (a.frames.size() != b.frames.size() || !(a.truth == b.truth) || !(a.uem == b.uem)) {
    return false;
  }
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    if (a.frames[i].start() != b.frames[i].start() || a.frames[i].end() != b.frames[i].end() ||
        a.frames[i].vector() != b.frames[i].vector()) {
      return false;
    }
  }
  return a.annotation.turns().size() == b.annotation.turns().size();
}

}  // namespace

TEST_CASE("vMF with kappa 0 is uniform on the sphere") {
  Rng rng(1);
  Vector mean = Vector::Zero(3);
  mean(0) = 1.0;
  Vector sum = Vector::Zero(3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_vmf(mean, 0.0, rng);
  CHECK((sum / n).norm() < 0.02);
}

TEST_CASE("vMF with huge kappa concentrates on the mean") {
  Rng rng(2);
  for (Eigen::Index d : {2, 3, 16, 256}) {
    Vector mean = sample_uniform_direction(d, rng);
    for (int i = 0; i < 200; ++i) {
      const Vector x = sample_vmf(mean, 1e6, rng);
      CHECK(x.dot(mean) > 0.999);
      CHECK(std::abs(x.norm() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("vMF draws are unit norm") {
  Rng rng(3);
  for (double kappa : {0.0, 0.5, 5.0, 50.0, 500.0}) {
    for (Eigen::Index d : {2, 5, 64}) {
      const Vector mean = sample_uniform_direction(d, rng);
      for (int i = 0; i < 100; ++i) {
        CHECK(std::abs(sample_vmf(mean, kappa, rng).norm() - 1.0) < 1e-9);
      }
    }
  }
}

TEST_CASE("vMF mean resultant length grows with kappa") {
  Rng rng(4);
  const Vector mean = sample_uniform_direction(16, rng);
  double previous = -1.0;
  for (double kappa : {1.0, 10.0, 50.0, 200.0}) {
    double sum = 0.0;
    for (int i = 0; i < 4000; ++i) sum += sample_vmf(mean, kappa, rng).dot(mean);
    const double r = sum / 4000.0;
    CHECK(r > previous);
    previous = r;
  }
}

TEST_CASE("speaker names") {
  CHECK(speaker_name(0) == "spk00");
  CHECK(speaker_name(12) == "spk12");
}

TEST_CASE("generator config validation") {
  GenConfig cfg;
  cfg.dimension = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GenConfig{};
  cfg.overlap_prob = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GenConfig{};
  cfg.kappa = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GenConfig{};
  cfg.enrollment_skew = EnrollmentSkew{"spk07", 90.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(GenConfig{}.validate());
}

TEST_CASE("infeasible mean-direction constraints are rejected") {
  GenConfig cfg = small_config(1);
  cfg.dimension = 2;
  cfg.n_speakers = 3;
  cfg.min_pairwise_angle = 130.0;
  CHECK_THROWS_AS(generate_conversation(cfg), std::invalid_argument);
}

TEST_CASE("no overlap probability means no overlapped speech") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Conversation c = generate_conversation(small_config(seed));
    CHECK(overlap_timeline(c.annotation).empty());
    for (const auto& t : c.truth) CHECK(t.is_speaker());
  }
}

TEST_CASE("generation is deterministic per seed") {
  const Conversation a = generate_conversation(small_config(9));
  const Conversation b = generate_conversation(small_config(9));
  const Conversation c = generate_conversation(small_config(10));
  CHECK(same_conversation(a, b));
  CHECK_FALSE(same_conversation(a, c));
}

TEST_CASE("default conversation length") {
  GenConfig cfg;
  cfg.seed = 4;
  const Conversation c = generate_conversation(cfg);
  CHECK(c.frames.size() >= 1500);
  CHECK(c.frames.size() <= 3000);
  CHECK(c.frames.front().dimension() == 256);
}

TEST_CASE("frame labels agree with the annotation") {
  for (double overlap : {0.0, 0.3}) {
    GenConfig cfg = small_config(5);
    cfg.n_speakers = 3;
    cfg.overlap_prob = overlap;
    const Conversation c = generate_conversation(cfg);
    REQUIRE(c.frames.size() == c.truth.size());
    for (std::size_t i = 0; i < c.frames.size(); ++i) {
      const double mid = 0.5 * (c.frames[i].start() + c.frames[i].end());
      std::vector<std::string> active;
      for (const auto& t : c.annotation.turns()) {
        if (mid > t.segment.start && mid < t.segment.end) active.push_back(t.speaker);
      }
      REQUIRE_FALSE(active.empty());
      if (active.size() == 1) {
        CHECK(c.truth[i] == GroundTruthLabel::speaker(active.front()));
      } else {
        CHECK(c.truth[i] == GroundTruthLabel::overlap());
      }
      if (i > 0) CHECK(c.frames[i].start() >= c.frames[i - 1].end() - kTimeEpsilon);
    }
    if (overlap > 0.0) CHECK_FALSE(overlap_timeline(c.annotation).empty());
  }
}

TEST_CASE("per-speaker frame time matches the annotation") {
  GenConfig cfg = small_config(6);
  cfg.overlap_prob = 0.2;
  const Conversation c = generate_conversation(cfg);
  const Timeline ov = overlap_timeline(c.annotation);
  for (const auto& spk : c.annotation.speakers()) {
    double frames = 0.0;
    for (std::size_t i = 0; i < c.frames.size(); ++i) {
      if (c.truth[i] == GroundTruthLabel::speaker(spk)) frames += c.frames[i].duration();
    }
    const double annotated = total_duration(subtract(c.annotation.speaker_timeline(spk), ov));
    CHECK(std::abs(frames - annotated) <= cfg.frame_period);
  }
  CHECK(c.uem.size() == 1);
  CHECK(c.uem.extent() == c.annotation.speech().extent());
}

TEST_CASE("speaker means respect the minimum pairwise angle") {
  GenConfig cfg = small_config(7);
  cfg.n_speakers = 4;
  cfg.min_pairwise_angle = 80.0;
  const Conversation c = generate_conversation(cfg);
  REQUIRE(c.speaker_means.size() == 4);
  const double limit = std::cos(80.0 * 3.14159265358979323846 / 180.0);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      CHECK(c.speaker_means[i].dot(c.speaker_means[j]) <= limit + 1e-12);
    }
  }
}

TEST_CASE("enrollment skew drifts only the start of the designated speaker") {
  GenConfig cfg = small_config(8);
  cfg.kappa = 1e6;
  cfg.enrollment_skew = EnrollmentSkew{"spk01", 90.0, 1.0};
  const Conversation c = generate_conversation(cfg);
  const Vector& own = c.speaker_means[1];
  double seen = 0.0;
  for (std::size_t i = 0; i < c.frames.size(); ++i) {
    if (!(c.truth[i] == GroundTruthLabel::speaker("spk01"))) continue;
    const double cosine = c.frames[i].vector().dot(own);
    if (seen < 1.0 - 1e-9) {
      CHECK(std::abs(cosine) < 0.01);
    } else {
      CHECK(cosine > 0.99);
    }
    seen += c.frames[i].duration();
  }
}

TEST_CASE("calibrated clusters are separable by a static nearest-centroid model") {
  // kappa 21 in d = 16 puts frames at cosine distance ~0.3 from their mean;
  // the 70 degree constraint keeps means nearly orthogonal.
  GenConfig cfg;
  cfg.dimension = 16;
  cfg.kappa = 21.0;
  cfg.min_pairwise_angle = 70.0;
  cfg.seed = 3;
  const Conversation c = generate_conversation(cfg);
  double intra = 0.0;
  std::size_t n = 0;
  std::vector<LabeledSample> train;
  for (std::size_t i = 0; i < c.frames.size(); ++i) {
    const int s = c.truth[i].speaker_id() == "spk00" ? 0 : 1;
    intra += cosine_distance(c.frames[i].vector(), c.speaker_means[static_cast<std::size_t>(s)]);
    ++n;
    if (i % 2 == 0) train.push_back({c.frames[i].vector(), c.truth[i].speaker_id()});
  }
  intra /= static_cast<double>(n);
  const double inter = cosine_distance(c.speaker_means[0], c.speaker_means[1]);
  CHECK(intra == doctest::Approx(0.3).epsilon(0.25));
  CHECK(inter > 0.65);

  ClassifierConfig nc;
  nc.kind = ClassifierKind::Nc;
  const ModelState model = fit(nc, train);
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 1; i < c.frames.size(); i += 2) {
    correct += predict(model, c.frames[i].vector()).label == c.truth[i].speaker_id();
    ++total;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("config reader") {
  const GenConfig cfg = config::gen_config_from_text(
      "# comment\n"
      "dimension = 12\n"
      "kappa = 40.5   # trailing comment\n"
      "seed = 77\n"
      "[enrollment_skew]\n"
      "speaker = \"spk00\"\n"
      "drift_angle_degrees = 45\n"
      "skew_duration_seconds = 2.0\n");
  CHECK(cfg.dimension == 12);
  CHECK(cfg.kappa == 40.5);
  CHECK(cfg.seed == 77);
  REQUIRE(cfg.enrollment_skew.has_value());
  CHECK(cfg.enrollment_skew->speaker == "spk00");
  CHECK(cfg.enrollment_skew->drift_angle_degrees == 45.0);
  CHECK(cfg.duration == GenConfig{}.duration);

  CHECK_THROWS_AS(config::gen_config_from_text("dimensoin = 3\n"), config::ConfigError);
  CHECK_THROWS_AS(config::gen_config_from_text("dimension = 2.5\n"), config::ConfigError);
  CHECK_THROWS_AS(config::gen_config_from_text("dimension = \"x\"\n"), config::ConfigError);
  CHECK_THROWS_AS(config::gen_config_from_text("dimension 3\n"), config::ConfigError);
  CHECK_THROWS_AS(config::gen_config_from_text("[broken\n"), config::ConfigError);
  CHECK_THROWS_AS(config::load_gen_config("/nonexistent.toml"), std::exception);
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"separable", "skewed_enrollment", "overlapping"}) {
    const GenConfig cfg =
        config::load_gen_config(std::string(CHRONODIAR_CONFIG_DIR) + "/" + name + ".toml");
    CHECK_NOTHROW(cfg.validate());
  }
}
