// chronodiar: generate synthetic conversations, run streaming diarization
// sessions, sweep enrollment length and score RTTM hypotheses.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include "chronodiar/config.hpp"
#include "chronodiar/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

using namespace chronodiar;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct ScoringFlags {
  double collar = 0.25;
  std::string collar_semantics = "half_each_side";
  bool no_skip_overlap = false;
  std::string mapping = "identity";

  void add_to(CLI::App* app) {
    app->add_option("--collar", collar, "Forgiveness collar around reference boundaries (s)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--collar-semantics", collar_semantics, "half_each_side or full_each_side")
        ->check(CLI::IsMember({"half_each_side", "full_each_side"}));
    app->add_flag("--no-skip-overlap", no_skip_overlap, "Score overlapped reference speech too");
    app->add_option("--mapping", mapping, "Hypothesis label mapping")
        ->check(CLI::IsMember({"identity", "optimal"}));
  }

  MetricConfig metric() const {
    return MetricConfig{collar, !no_skip_overlap, parse_collar_semantics(collar_semantics)};
  }
};

struct SessionFlags {
  std::string classifier = "nc";
  bool adaptive = false;
  int batch_size = 10;
  std::optional<double> threshold;
  int k = 3;
  double var_smoothing = 0.1;
  bool uniform_prior = false;
  double merge_gap = 0.3;
  std::uint64_t seed = 0;

  void add_to(CLI::App* app, bool with_classifier) {
    if (with_classifier) {
      app->add_option("--classifier", classifier, "Classifier")
          ->check(CLI::IsMember({"knn", "gnb", "nc"}));
      app->add_flag("--adaptive", adaptive, "Enable chronological self-training");
    }
    app->add_option("--batch-size", batch_size, "Self-training batch size")
        ->check(CLI::PositiveNumber);
    app->add_option("--threshold", threshold, "Minimum score for a pseudo-label to be used")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--k", k, "Neighbours for knn")->check(CLI::PositiveNumber);
    app->add_option("--var-smoothing", var_smoothing, "GNB variance smoothing")
        ->check(CLI::NonNegativeNumber);
    app->add_flag("--uniform-prior", uniform_prior, "GNB: equal class priors");
    app->add_option("--merge-gap", merge_gap, "Bridge gaps up to this long between same-label frames")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--seed", seed,
                    "Accepted for scripting symmetry; sessions are deterministic and use no RNG");
  }

  RunSettings settings(const ScoringFlags& scoring, double train_seconds) const {
    RunSettings s;
    s.classifier.kind = parse_classifier_kind(classifier);
    s.classifier.k = k;
    s.classifier.var_smoothing = var_smoothing;
    s.classifier.uniform_prior = uniform_prior;
    s.selftrain.batch_size = batch_size;
    s.selftrain.score_threshold = threshold;
    s.selftrain.adaptive = adaptive;
    s.train_seconds = train_seconds;
    s.metric = scoring.metric();
    s.mapping = parse_label_mapping(scoring.mapping);
    s.merge_gap = merge_gap;
    return s;
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_file(path, text);
  }
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, int count) {
  GenConfig cfg = config::load_gen_config(config_path);
  if (seed) cfg.seed = *seed;
  const std::string stem = std::filesystem::path(config_path).stem().string();
  for (int i = 0; i < count; ++i) {
    GenConfig one = cfg;
    one.seed = cfg.seed + static_cast<std::uint64_t>(i);
    const Conversation conv = generate_conversation(one);
    const Recording rec = recording_from_conversation(stem + "_s" + std::to_string(one.seed), conv);
    for (const auto& path : write_recording(out_dir, rec)) {
      std::cout << "wrote " << path << "\n";
    }
    std::size_t overlap = 0;
    for (const auto& t : rec.truth) overlap += t.kind() == GroundTruthLabel::Kind::Overlap;
    std::cout << rec.id << ": " << rec.frames.size() << " frames (" << overlap << " overlap), "
              << rec.reference.speakers().size() << " speakers, uem "
              << fixed6(total_duration(rec.uem)) << " s\n";
  }
  return 0;
}

int cmd_score(const std::string& ref_path, const std::string& hyp_path,
              const std::string& uem_path, const ScoringFlags& flags) {
  const auto refs = io::parse_rttm(io::read_file(ref_path));
  const auto hyps = io::parse_rttm(io::read_file(hyp_path));
  const auto uems = io::parse_uem(io::read_file(uem_path));
  const MetricConfig metric = flags.metric();
  const LabelMapping mapping = parse_label_mapping(flags.mapping);

  std::cout << "file,confusion,fa,miss,total,der\n";
  DerReport corpus;
  for (const auto& [file, ref] : refs) {
    auto uem = uems.find(file);
    if (uem == uems.end()) {
      throw std::runtime_error("no UEM entry for file '" + file + "'");
    }
    auto hyp = hyps.find(file);
    const DerReport r = der(ref, hyp == hyps.end() ? Annotation() : hyp->second, uem->second,
                            metric, mapping);
    corpus += r;
    std::cout << file << "," << fixed6(r.confusion) << "," << fixed6(r.false_alarm) << ","
              << fixed6(r.miss) << "," << fixed6(r.total) << "," << fixed6(r.der()) << "\n";
  }
  if (corpus.total > 0.0) {
    std::cout << "ALL," << fixed6(corpus.confusion) << "," << fixed6(corpus.false_alarm) << ","
              << fixed6(corpus.miss) << "," << fixed6(corpus.total) << "," << fixed6(corpus.der())
              << "\n";
  }
  return 0;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw CLI::ValidationError("--train-seconds", "bad number " + item);
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming speaker diarization with chronological self-training"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write synthetic conversations (.jsonl/.rttm/.uem)");
  std::string gen_config;
  std::string gen_out = ".";
  std::optional<std::uint64_t> gen_seed;
  int gen_count = 1;
  gen->add_option("--config", gen_config, "Generator config (.toml)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--seed", gen_seed, "Override the config seed");
  gen->add_option("--count", gen_count, "Number of conversations (seeds seed..seed+count-1)")
      ->check(CLI::PositiveNumber);

  // run
  auto* run = app.add_subcommand("run", "Enroll, self-train and score one recording");
  std::string run_emb, run_rttm, run_uem, run_id, run_out, run_hyp, run_language = "und";
  double run_train = 1.0;
  SessionFlags run_session_flags;
  ScoringFlags run_scoring;
  run->add_option("--embeddings", run_emb, "Embedding frames (.jsonl)")->required()->check(CLI::ExistingFile);
  run->add_option("--rttm", run_rttm, "Reference RTTM")->required()->check(CLI::ExistingFile);
  run->add_option("--uem", run_uem, "UEM")->required()->check(CLI::ExistingFile);
  run->add_option("--file-id", run_id, "File id in RTTM/UEM (default: embeddings file stem)");
  run->add_option("--train-seconds", run_train, "Enrollment seconds per speaker")
      ->check(CLI::PositiveNumber);
  run->add_option("--language", run_language, "Language column of the report");
  run->add_option("--out", run_out, "CSV report path (default stdout)");
  run->add_option("--hyp-rttm", run_hyp, "Also write the hypothesis as RTTM");
  run_session_flags.add_to(run, true);
  run_scoring.add_to(run);

  // sweep
  auto* sw = app.add_subcommand("sweep", "Accuracy/DER as a function of enrollment time");
  std::string sw_data, sw_report = "-", sw_summary, sw_train = "0.5,1,2,3,4,5,6,7,8,9,10";
  std::vector<std::string> sw_classifiers{"knn", "gnb", "nc"};
  std::vector<std::string> sw_modes{"static", "adaptive"};
  int sw_workers = 1;
  SessionFlags sw_session_flags;
  ScoringFlags sw_scoring;
  sw->add_option("--data", sw_data, "Directory of <id>.jsonl/.rttm/.uem triples")
      ->required()->check(CLI::ExistingDirectory);
  sw->add_option("--train-seconds", sw_train, "Comma-separated, strictly increasing");
  sw->add_option("--classifiers", sw_classifiers, "Classifiers")
      ->delimiter(',')->check(CLI::IsMember({"knn", "gnb", "nc"}));
  sw->add_option("--modes", sw_modes, "static and/or adaptive")
      ->delimiter(',')->check(CLI::IsMember({"static", "adaptive"}));
  sw->add_option("--workers", sw_workers, "Parallel files")->check(CLI::PositiveNumber);
  sw->add_option("--report", sw_report, "Per-file CSV (default stdout)");
  sw->add_option("--summary", sw_summary, "Per-setting summary CSV (default stderr)");
  sw_session_flags.add_to(sw, false);
  sw_scoring.add_to(sw);

  // score
  auto* sc = app.add_subcommand("score", "DER of a hypothesis RTTM against a reference");
  std::string sc_ref, sc_hyp, sc_uem;
  ScoringFlags sc_scoring;
  sc->add_option("--ref", sc_ref, "Reference RTTM")->required()->check(CLI::ExistingFile);
  sc->add_option("--hyp", sc_hyp, "Hypothesis RTTM")->required()->check(CLI::ExistingFile);
  sc->add_option("--uem", sc_uem, "UEM")->required()->check(CLI::ExistingFile);
  sc_scoring.add_to(sc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*gen) {
      return cmd_generate(gen_config, gen_out, gen_seed, gen_count);
    }
    if (*run) {
      const std::string id =
          run_id.empty() ? std::filesystem::path(run_emb).stem().string() : run_id;
      Recording rec = load_recording(run_emb, run_rttm, run_uem, id);
      rec.language = run_language;
      const RunOutcome outcome = run_recording(rec, run_session_flags.settings(run_scoring, run_train));
      emit(run_out, io::write_report({outcome.row}));
      if (!run_hyp.empty()) {
        io::write_file(run_hyp, io::write_rttm({{rec.id, outcome.hypothesis}}));
      }
      return 0;
    }
    if (*sw) {
      SweepConfig cfg;
      try {
        cfg.train_seconds = parse_number_list(sw_train);
      } catch (const std::exception&) {
        std::cerr << "--train-seconds: expected comma-separated numbers\n";
        return kUsageError;
      }
      cfg.classifiers.clear();
      for (const auto& c : sw_classifiers) cfg.classifiers.push_back(parse_classifier_kind(c));
      cfg.adaptive.clear();
      for (const auto& m : sw_modes) cfg.adaptive.push_back(m == "adaptive");
      cfg.workers = sw_workers;
      cfg.base = sw_session_flags.settings(sw_scoring, 1.0);
      try {
        cfg.validate();
      } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kUsageError;
      }
      const auto corpus = load_corpus(sw_data);
      if (corpus.empty()) {
        throw std::runtime_error("no recordings found in '" + sw_data + "'");
      }
      const auto rows = sweep(corpus, cfg);
      emit(sw_report, io::write_report(rows));
      const std::string summary = write_summary(summarize(rows));
      if (sw_summary.empty()) {
        std::cerr << summary;
      } else {
        emit(sw_summary, summary);
      }
      return 0;
    }
    if (*sc) {
      return cmd_score(sc_ref, sc_hyp, sc_uem, sc_scoring);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
