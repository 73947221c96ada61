#include "chronodiar/config.hpp"
#include "chronodiar/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <unistd.h>

using namespace chronodiar;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("chronodiar_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

int cli(const std::string& args) {
  const std::string cmd = std::string(CHRONODIAR_CLI) + " " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_path(const std::string& name) {
  return std::string(CHRONODIAR_CONFIG_DIR) + "/" + name + ".toml";
}

std::vector<Recording> small_corpus(int n, double duration) {
  const GenConfig base = config::load_gen_config(config_path("separable"));
  std::vector<Recording> out;
  for (int i = 0; i < n; ++i) {
    GenConfig cfg = base;
    cfg.duration = duration;
    cfg.seed = base.seed + static_cast<std::uint64_t>(i);
    out.push_back(recording_from_conversation("f" + std::to_string(i), generate_conversation(cfg)));
  }
  return out;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("recordings survive a write/load round trip") {
  TempDir dir;
  const Recording rec = small_corpus(1, 60.0).front();
  const auto paths = write_recording(dir.str(), rec);
  REQUIRE(paths.size() == 3);
  const Recording back = load_recording(paths[0], paths[1], paths[2], rec.id);
  CHECK(back.frames.size() == rec.frames.size());
  CHECK(back.truth == rec.truth);
  CHECK(back.reference.turns().size() == rec.reference.turns().size());
  const auto corpus = load_corpus(dir.str());
  REQUIRE(corpus.size() == 1);
  CHECK(corpus[0].id == rec.id);
  CHECK_THROWS(load_recording(paths[0], paths[1], paths[2], "other"));
}

TEST_CASE("run_recording scores only the test region") {
  const Recording rec = small_corpus(1, 120.0).front();
  RunSettings s;
  const RunOutcome out = run_recording(rec, s);
  CHECK(out.session.predictions.size() == rec.frames.size() - out.test_start_index);
  CHECK(out.row.accuracy > 0.8);
  CHECK(out.row.der.total > 0.0);
  CHECK(out.row.der.total < total_duration(rec.uem));
  CHECK(out.row.train_seconds == 1.0);
  CHECK(out.row.classifier == "nc");
}

TEST_CASE("sweep cardinality and a shared test region") {
  const auto corpus = small_corpus(20, 60.0);
  SweepConfig cfg;
  cfg.train_seconds = {0.5, 1, 2};
  cfg.classifiers = {ClassifierKind::Nc};
  cfg.adaptive = {false, true};
  cfg.workers = 2;
  const auto rows = sweep(corpus, cfg);
  CHECK(rows.size() == 120);
  const auto summary = summarize(rows);
  CHECK(summary.size() == 6);
  for (const auto& s : summary) CHECK(s.n_files == 20);
  CHECK(count_lines(write_summary(summary)) == 7);

  // Every setting of one file scores the same reference time.
  for (const auto& r : rows) {
    if (r.file == rows.front().file) CHECK(r.der.total == doctest::Approx(rows.front().der.total));
  }

  cfg.workers = 1;
  CHECK(io::write_report(sweep(corpus, cfg)) == io::write_report(rows));
}

TEST_CASE("summary statistics") {
  const auto corpus = small_corpus(1, 60.0);
  SweepConfig cfg;
  cfg.train_seconds = {1, 2};
  cfg.classifiers = {ClassifierKind::Gnb};
  const auto summary = summarize(sweep(corpus, cfg));
  REQUIRE(summary.size() == 4);
  for (const auto& s : summary) CHECK(s.accuracy_std == 0.0);

  io::ReportRow a{"a", "x", "nc", false, 1.0, 0.8, DerReport{1, 0, 0, 10}};
  io::ReportRow b{"b", "x", "nc", false, 1.0, 0.6, DerReport{0, 0, 3, 30}};
  const auto two = summarize({a, b});
  REQUIRE(two.size() == 1);
  CHECK(two[0].accuracy_mean == doctest::Approx(0.7));
  CHECK(two[0].accuracy_std == doctest::Approx(0.1));
  CHECK(two[0].der_mean == doctest::Approx(0.1));
  CHECK(two[0].der_corpus.der() == doctest::Approx(0.1));
}

TEST_CASE("sweep config validation") {
  SweepConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.train_seconds = {1, 1};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.train_seconds = {};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SweepConfig{};
  cfg.classifiers.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("cli generate") {
  TempDir a;
  TempDir b;
  const std::string args = "generate --config " + config_path("separable") + " --seed 7 --out ";
  REQUIRE(cli(args + a.str() + " > /dev/null") == 0);
  REQUIRE(cli(args + b.str() + " > /dev/null") == 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a.str())) {
    ++files;
    const std::string name = entry.path().filename().string();
    CHECK(io::read_file(entry.path().string()) == io::read_file(b / name));
  }
  CHECK(files == 3);
  CHECK(fs::exists(a / "separable_s7.jsonl"));
  CHECK(cli("generate --config " + a / "missing.toml" + " --out " + a.str() + " 2> /dev/null") != 0);

  io::write_file(a / "bad.toml", "dimension = 1\n");
  CHECK(cli("generate --config " + a / "bad.toml" + " --out " + a.str() + " 2> /dev/null") == 2);
}

TEST_CASE("cli run") {
  TempDir dir;
  REQUIRE(cli("generate --config " + config_path("separable") + " --seed 3 --out " + dir.str() +
              " > /dev/null") == 0);
  const std::string inputs = " --embeddings " + dir / "separable_s3.jsonl" + " --rttm " +
                             dir / "separable_s3.rttm" + " --uem " + dir / "separable_s3.uem";

  REQUIRE(cli("run" + inputs + " --classifier nc --out " + dir / "default.csv") == 0);
  const std::string report = io::read_file(dir / "default.csv");
  CHECK(count_lines(report) == 2);
  CHECK(report.find(",nc,false,1.000000,") != std::string::npos);

  REQUIRE(cli("run" + inputs + " --classifier nc --train-seconds 1 --out " + dir / "static.csv") == 0);
  REQUIRE(cli("run" + inputs + " --classifier nc --train-seconds 1 --adaptive --batch-size 1000000 --out " +
              dir / "single.csv") == 0);
  const std::string single = io::read_file(dir / "single.csv");
  const std::string stat = io::read_file(dir / "static.csv");
  // Only the adaptive column differs.
  auto strip = [](std::string s) {
    for (const char* flag : {",true,", ",false,"}) {
      const auto pos = s.find(flag);
      if (pos != std::string::npos) s.replace(pos, std::string(flag).size(), ",");
    }
    return s;
  };
  CHECK(strip(single) == strip(stat));

  CHECK(cli("run" + inputs + " --classifier svm 2> /dev/null") == 1);
  CHECK(cli("run" + inputs + " --train-seconds 1000 2> /dev/null") == 2);
  CHECK(cli("run --embeddings " + dir / "nope.jsonl" + " --rttm x --uem y 2> /dev/null") == 1);
}

TEST_CASE("cli sweep") {
  TempDir dir;
  REQUIRE(cli("generate --config " + config_path("separable") + " --count 2 --out " + dir.str() +
              " > /dev/null") == 0);
  REQUIRE(cli("sweep --data " + dir.str() + " --train-seconds 0.5,1,2 --classifiers nc --modes static,adaptive" +
              " --report " + dir / "rows.csv" + " --summary " + dir / "summary.csv") == 0);
  CHECK(count_lines(io::read_file(dir / "rows.csv")) == 1 + 12);
  const std::string summary = io::read_file(dir / "summary.csv");
  CHECK(count_lines(summary) == 1 + 6);
  CHECK(summary.rfind(std::string(kSummaryHeader), 0) == 0);
  CHECK(cli("sweep --data " + dir.str() + " --train-seconds 2,1 --report /dev/null 2> /dev/null") == 1);
}

TEST_CASE("cli score") {
  TempDir dir;
  io::write_file(dir / "ref.rttm",
                 "SPEAKER f1 1 0 6 <NA> <NA> A <NA> <NA>\n"
                 "SPEAKER f2 1 0 4 <NA> <NA> A <NA> <NA>\n");
  io::write_file(dir / "hyp.rttm",
                 "SPEAKER f1 1 0 4 <NA> <NA> A <NA> <NA>\n"
                 "SPEAKER f1 1 4 2 <NA> <NA> B <NA> <NA>\n"
                 "SPEAKER f2 1 2 4 <NA> <NA> A <NA> <NA>\n");
  io::write_file(dir / "all.uem", "f1 1 0 10\nf2 1 0 10\n");

  REQUIRE(cli("score --ref " + dir / "ref.rttm" + " --hyp " + dir / "ref.rttm" + " --uem " +
              dir / "all.uem" + " > " + dir / "self.csv") == 0);
  const std::string self = io::read_file(dir / "self.csv");
  CHECK(self.find("ALL,0.000000,0.000000,0.000000,9.500000,0.000000") != std::string::npos);

  REQUIRE(cli("score --collar 0 --ref " + dir / "ref.rttm" + " --hyp " + dir / "hyp.rttm" +
              " --uem " + dir / "all.uem" + " > " + dir / "out.csv") == 0);
  const std::string out = io::read_file(dir / "out.csv");
  CHECK(out.find("f1,2.000000,0.000000,0.000000,6.000000,0.333333") != std::string::npos);
  CHECK(out.find("f2,0.000000,2.000000,2.000000,4.000000,1.000000") != std::string::npos);
  CHECK(out.find("ALL,2.000000,2.000000,2.000000,10.000000,0.600000") != std::string::npos);

  CHECK(cli("score --ref " + dir / "ref.rttm" + " --hyp " + dir / "hyp.rttm" + " --uem " +
            dir / "missing.uem" + " 2> /dev/null") != 0);
}
