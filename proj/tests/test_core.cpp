#include "chronodiar/core.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace chronodiar;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Timeline tl(std::initializer_list<std::pair<double, double>> spans) {
  std::vector<Segment> segs;
  for (const auto& [a, b] : spans) segs.emplace_back(a, b);
  return Timeline(std::move(segs));
}

Timeline random_timeline(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 20.0);
  std::uniform_int_distribution<int> n(0, 6);
  std::vector<Segment> segs;
  const int count = n(rng);
  for (int i = 0; i < count; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    if (a != b) segs.emplace_back(std::min(a, b), std::max(a, b));
  }
  return Timeline(std::move(segs));
}

}  // namespace

TEST_CASE("cosine_distance on axis-aligned vectors") {
  CHECK(cosine_distance(vec({1, 0}), vec({1, 0})) == doctest::Approx(0.0));
  CHECK(cosine_distance(vec({1, 0}), vec({0, 1})) == doctest::Approx(1.0));
  CHECK(cosine_distance(vec({1, 0}), vec({-1, 0})) == doctest::Approx(2.0));
}

TEST_CASE("cosine_distance rejects mismatched dimensions") {
  CHECK_THROWS_AS(cosine_distance(vec({1, 0}), vec({1, 0, 0})), std::invalid_argument);
}

TEST_CASE("cosine_distance is symmetric and bounded") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const Vector a = oracle::random_unit(2 + trial % 7, rng);
    const Vector b = oracle::random_unit(2 + trial % 7, rng);
    const double ab = cosine_distance(a, b);
    CHECK(ab == cosine_distance(b, a));
    CHECK(ab >= -1e-12);
    CHECK(ab <= 2.0 + 1e-12);
  }
}

TEST_CASE("normalize") {
  const Vector n = normalize(vec({3, 4}));
  CHECK(n(0) == doctest::Approx(0.6));
  CHECK(n(1) == doctest::Approx(0.8));
  CHECK(normalize(vec({1, 0})) == vec({1, 0}));
  CHECK_THROWS_AS(normalize(vec({0, 0})), std::invalid_argument);
  CHECK_THROWS_AS(normalize(vec({1e-13, 0})), std::invalid_argument);
  CHECK_THROWS_AS(normalize(vec({std::nan(""), 1})), std::invalid_argument);
}

TEST_CASE("EmbeddingFrame validates and normalizes") {
  const EmbeddingFrame f(0.0, 0.2, vec({3, 4}));
  CHECK(f.vector().norm() == doctest::Approx(1.0));
  CHECK(f.duration() == doctest::Approx(0.2));
  CHECK(f.dimension() == 2);
  CHECK_THROWS_AS(EmbeddingFrame(0.2, 0.2, vec({1, 0})), std::invalid_argument);
  CHECK_THROWS_AS(EmbeddingFrame(0.0, 0.2, vec({1})), std::invalid_argument);
  CHECK_THROWS_AS(EmbeddingFrame(0.0, 0.2, vec({0, 0})), std::invalid_argument);
}

TEST_CASE("Segment requires end > start") {
  CHECK_THROWS_AS(Segment(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Segment(2.0, 1.0), std::invalid_argument);
  CHECK(Segment(1.0, 3.5).duration() == doctest::Approx(2.5));
}

TEST_CASE("timeline operations") {
  CHECK(subtract(tl({{0, 10}}), tl({{4, 6}})) == tl({{0, 4}, {6, 10}}));
  const Timeline u = union_of(tl({{0, 2}}), tl({{2, 5}}));
  CHECK(u.size() == 1);
  CHECK(u == tl({{0, 5}}));
  CHECK(total_duration(tl({{0, 4}, {6, 10}})) == doctest::Approx(8.0));
  CHECK(intersection(tl({{0, 4}, {6, 10}}), tl({{3, 7}})) == tl({{3, 4}, {6, 7}}));
  CHECK(crop(tl({{0, 4}, {6, 10}}), Segment(2, 8)) == tl({{2, 4}, {6, 8}}));
  CHECK(total_duration(Timeline()) == 0.0);
}

TEST_CASE("Timeline sorts and merges its input") {
  const Timeline t = tl({{5, 6}, {0, 1}, {0.5, 2}, {6, 7}});
  REQUIRE(t.size() == 2);
  CHECK(t.segments()[0] == Segment(0, 2));
  CHECK(t.segments()[1] == Segment(5, 7));
  CHECK(t.extent() == Segment(0, 7));
  CHECK_THROWS_AS(Timeline().extent(), std::logic_error);
}

TEST_CASE("timeline algebra properties on random inputs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const Timeline a = random_timeline(rng);
    const Timeline b = random_timeline(rng);
    CHECK(total_duration(union_of(a, b)) + total_duration(intersection(a, b)) ==
          doctest::Approx(total_duration(a) + total_duration(b)).epsilon(1e-12));
    CHECK(subtract(a, a).empty());
    CHECK(subtract(a, Timeline()) == a);
    const Timeline parts = union_of(subtract(a, b), intersection(a, b));
    CHECK(total_duration(parts) == doctest::Approx(total_duration(a)).epsilon(1e-12));
    for (const Timeline& t : {union_of(a, b), intersection(a, b), subtract(a, b)}) {
      for (std::size_t i = 1; i < t.size(); ++i) {
        CHECK(t.segments()[i].start > t.segments()[i - 1].end + kTimeEpsilon);
      }
    }
  }
}

TEST_CASE("GroundTruthLabel kinds") {
  const auto a = GroundTruthLabel::speaker("spkA");
  CHECK(a.is_speaker());
  CHECK(a.speaker_id() == "spkA");
  CHECK_FALSE(GroundTruthLabel::overlap().is_speaker());
  CHECK(GroundTruthLabel::non_speech().kind() == GroundTruthLabel::Kind::NonSpeech);
  CHECK(a == GroundTruthLabel::speaker("spkA"));
  CHECK_FALSE(a == GroundTruthLabel::speaker("spkB"));
  CHECK_THROWS_AS(GroundTruthLabel::speaker(""), std::invalid_argument);
}

TEST_CASE("Annotation rejects overlapping turns of one speaker") {
  Annotation ann;
  ann.add(Segment(0, 5), "A");
  ann.add(Segment(5, 6), "A");
  ann.add(Segment(3, 8), "B");
  CHECK_THROWS_AS(ann.add(Segment(4, 7), "A"), std::invalid_argument);
  CHECK(ann.speakers() == std::vector<std::string>{"A", "B"});
  CHECK(ann.speaker_timeline("A") == tl({{0, 6}}));
  CHECK(ann.speech() == tl({{0, 8}}));
}

TEST_CASE("Annotation cropping and relabeling") {
  Annotation ann;
  ann.add(Segment(0, 4), "A");
  ann.add(Segment(4, 9), "B");
  const Annotation c = ann.cropped(tl({{2, 5}, {8, 20}}));
  CHECK(c.speaker_timeline("A") == tl({{2, 4}}));
  CHECK(c.speaker_timeline("B") == tl({{4, 5}, {8, 9}}));
  const Annotation r = ann.relabeled({{"A", "X"}});
  CHECK(r.speakers() == std::vector<std::string>{"B", "X"});
}

TEST_CASE("overlap_timeline") {
  Annotation two;
  two.add(Segment(0, 5), "A");
  two.add(Segment(3, 8), "B");
  CHECK(overlap_timeline(two) == tl({{3, 5}}));

  Annotation apart;
  apart.add(Segment(0, 5), "A");
  apart.add(Segment(6, 8), "B");
  CHECK(overlap_timeline(apart).empty());

  Annotation three;
  three.add(Segment(0, 6), "A");
  three.add(Segment(2, 4), "B");
  three.add(Segment(3, 8), "C");
  CHECK(overlap_timeline(three) == tl({{2, 6}}));
  CHECK(overlap_timeline(three) == oracle::overlap_by_sweep(three));

  Annotation touching;
  touching.add(Segment(0, 5), "A");
  touching.add(Segment(5, 8), "B");
  CHECK(overlap_timeline(touching).empty());
}

TEST_CASE("overlap_timeline of a single speaker is empty") {
  Annotation one;
  one.add(Segment(0, 2), "A");
  one.add(Segment(2, 3), "A");
  one.add(Segment(7, 9), "A");
  CHECK(overlap_timeline(one).empty());
}

TEST_CASE("overlap_timeline matches the sweep oracle on random annotations") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  for (int trial = 0; trial < 200; ++trial) {
    Annotation ann;
    for (const char* spk : {"A", "B", "C", "D"}) {
      double t = u(rng) / 10.0;
      for (int i = 0; i < 4; ++i) {
        const double len = 0.1 + u(rng) / 6.0;
        ann.add(Segment(t, t + len), spk);
        t += len + u(rng) / 10.0 + 0.01;
      }
    }
    const Timeline got = overlap_timeline(ann);
    const Timeline want = oracle::overlap_by_sweep(ann);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got.segments()[i].start == doctest::Approx(want.segments()[i].start));
      CHECK(got.segments()[i].end == doctest::Approx(want.segments()[i].end));
    }
  }
}
