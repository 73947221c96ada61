#include "chronodiar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace chronodiar {

namespace fs = std::filesystem;

Recording recording_from_conversation(std::string id, const Conversation& conv) {
  Recording rec;
  rec.id = std::move(id);
  rec.language = "synthetic";
  rec.frames = conv.frames;
  rec.truth = conv.truth;
  rec.reference = conv.annotation;
  rec.uem = conv.uem;
  return rec;
}

Recording load_recording(const std::string& embeddings_path, const std::string& rttm_path,
                         const std::string& uem_path, const std::string& file_id) {
  std::ifstream in(embeddings_path);
  if (!in) {
    throw std::runtime_error("cannot open '" + embeddings_path + "' for reading");
  }
  const auto records = io::read_embeddings(in);
  const auto rttm = io::parse_rttm(io::read_file(rttm_path));
  const auto uems = io::parse_uem(io::read_file(uem_path));

  Recording rec;
  rec.id = file_id;
  auto ref = rttm.find(file_id);
  if (ref == rttm.end()) {
    throw std::runtime_error("file id '" + file_id + "' not found in " + rttm_path);
  }
  rec.reference = ref->second;
  auto uem = uems.find(file_id);
  if (uem == uems.end()) {
    throw std::runtime_error("file id '" + file_id + "' not found in " + uem_path);
  }
  rec.uem = uem->second;
  rec.frames.reserve(records.size());
  rec.truth.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].truth) {
      throw std::runtime_error(embeddings_path + ": record " + std::to_string(i + 1) +
                               " has no truth label; evaluation needs ground truth");
    }
    rec.frames.push_back(records[i].frame());
    rec.truth.push_back(records[i].truth_label());
  }
  return rec;
}

std::vector<std::string> write_recording(const std::string& dir, const Recording& rec) {
  fs::create_directories(dir);
  const fs::path base = fs::path(dir) / rec.id;
  std::vector<std::string> paths{base.string() + ".jsonl", base.string() + ".rttm",
                                 base.string() + ".uem"};

  std::vector<io::EmbeddingRecord> records;
  records.reserve(rec.frames.size());
  for (std::size_t i = 0; i < rec.frames.size(); ++i) {
    records.push_back({rec.frames[i].start(), rec.frames[i].end(), io::truth_tag(rec.truth[i]),
                       rec.frames[i].vector()});
  }
  std::ostringstream frames;
  io::write_embeddings(frames, records);
  io::write_file(paths[0], frames.str());
  io::write_file(paths[1], io::write_rttm({{rec.id, rec.reference}}));
  io::write_file(paths[2], io::write_uem({{rec.id, rec.uem}}));
  return paths;
}

std::vector<Recording> load_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("'" + dir + "' is not a directory");
  }
  std::set<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".jsonl") {
      ids.insert(entry.path().stem().string());
    }
  }
  std::vector<Recording> out;
  for (const auto& id : ids) {
    const fs::path base = fs::path(dir) / id;
    const std::string rttm = base.string() + ".rttm";
    const std::string uem = base.string() + ".uem";
    if (!fs::exists(rttm) || !fs::exists(uem)) {
      throw std::runtime_error("recording '" + id + "' lacks its .rttm or .uem file");
    }
    out.push_back(load_recording(base.string() + ".jsonl", rttm, uem, id));
  }
  return out;
}

RunOutcome run_recording(const Recording& rec, const RunSettings& settings,
                         std::optional<double> fixed_test_start) {
  const auto speakers = rec.reference.speakers();
  SplitSpec spec{settings.train_seconds, fixed_test_start};
  SplitResult split = chronological_split(rec.frames, rec.truth, spec,
                                          std::set<std::string>(speakers.begin(), speakers.end()));
  if (split.test_start_index >= rec.frames.size()) {
    throw std::runtime_error("recording '" + rec.id + "' has no frames after enrollment");
  }
  const std::span<const EmbeddingFrame> test(rec.frames.begin() +
                                                 static_cast<std::ptrdiff_t>(split.test_start_index),
                                             rec.frames.end());
  const std::span<const GroundTruthLabel> test_truth(
      rec.truth.begin() + static_cast<std::ptrdiff_t>(split.test_start_index), rec.truth.end());

  RunOutcome out;
  out.test_start_index = split.test_start_index;
  out.session = run_session(split.train, test, settings.classifier, settings.selftrain);

  std::vector<LabeledFrame> labeled;
  labeled.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    labeled.push_back({Segment(test[i].start(), test[i].end()), out.session.predictions[i].label});
  }
  out.hypothesis = frames_to_annotation(labeled, settings.merge_gap);

  const Segment region(test.front().start(),
                       std::max(rec.uem.extent().end, test.back().end()));
  const Uem scored = crop(rec.uem, region);

  out.row.file = rec.id;
  out.row.language = rec.language;
  out.row.classifier = to_string(settings.classifier.kind);
  out.row.adaptive = settings.selftrain.adaptive;
  out.row.train_seconds = settings.train_seconds;
  out.row.accuracy = accuracy(out.session.predictions, test_truth);
  out.row.der = der(rec.reference, out.hypothesis, scored, settings.metric, settings.mapping);
  return out;
}

void SweepConfig::validate() const {
  if (train_seconds.empty() || classifiers.empty() || adaptive.empty()) {
    throw std::invalid_argument("SweepConfig: lists must be nonempty");
  }
  for (std::size_t i = 0; i < train_seconds.size(); ++i) {
    if (!(train_seconds[i] > 0.0)) {
      throw std::invalid_argument("SweepConfig: train seconds must be positive");
    }
    if (i > 0 && !(train_seconds[i] > train_seconds[i - 1])) {
      throw std::invalid_argument("SweepConfig: train seconds must be strictly increasing");
    }
  }
  if (workers < 1) {
    throw std::invalid_argument("SweepConfig: workers must be >= 1");
  }
}

namespace {

std::vector<io::ReportRow> sweep_one(const Recording& rec, const SweepConfig& cfg) {
  const auto speakers = rec.reference.speakers();
  const SplitResult widest =
      chronological_split(rec.frames, rec.truth, SplitSpec{cfg.train_seconds.back(), std::nullopt},
                          std::set<std::string>(speakers.begin(), speakers.end()));
  if (widest.split_index >= rec.frames.size()) {
    throw std::runtime_error("recording '" + rec.id + "' has no frames after enrollment");
  }
  const double test_start = rec.frames[widest.split_index].start();

  std::vector<io::ReportRow> rows;
  for (ClassifierKind kind : cfg.classifiers) {
    for (bool adaptive : cfg.adaptive) {
      for (double t : cfg.train_seconds) {
        RunSettings s = cfg.base;
        s.classifier.kind = kind;
        s.selftrain.adaptive = adaptive;
        s.train_seconds = t;
        rows.push_back(run_recording(rec, s, test_start).row);
      }
    }
  }
  return rows;
}

}  // namespace

std::vector<io::ReportRow> sweep(const std::vector<Recording>& corpus, const SweepConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<io::ReportRow>> per_file(corpus.size());
  std::vector<std::exception_ptr> errors(corpus.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) {
      try {
        per_file[i] = sweep_one(corpus[i], cfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), corpus.size());
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back(work);
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<io::ReportRow> rows;
  for (auto& part : per_file) {
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::stable_sort(rows.begin(), rows.end(), [](const io::ReportRow& a, const io::ReportRow& b) {
    return std::tie(a.file, a.classifier, a.adaptive, a.train_seconds) <
           std::tie(b.file, b.classifier, b.adaptive, b.train_seconds);
  });
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<io::ReportRow>& rows) {
  using Key = std::tuple<std::string, bool, double>;
  std::map<Key, std::vector<const io::ReportRow*>> groups;
  for (const auto& r : rows) {
    groups[{r.classifier, r.adaptive, r.train_seconds}].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    std::tie(s.classifier, s.adaptive, s.train_seconds) = key;
    s.n_files = members.size();
    const double n = static_cast<double>(members.size());
    for (const auto* r : members) {
      s.accuracy_mean += r->accuracy;
      s.der_mean += r->der.der();
      s.der_corpus += r->der;
    }
    s.accuracy_mean /= n;
    s.der_mean /= n;
    double var = 0.0;
    for (const auto* r : members) {
      var += (r->accuracy - s.accuracy_mean) * (r->accuracy - s.accuracy_mean);
    }
    s.accuracy_std = std::sqrt(var / n);
    out.push_back(s);
  }
  return out;
}

std::string write_summary(const std::vector<SummaryRow>& rows) {
  auto f6 = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& s : rows) {
    out += s.classifier + "," + (s.adaptive ? "true" : "false") + "," + f6(s.train_seconds) + "," +
           std::to_string(s.n_files) + "," + f6(s.accuracy_mean) + "," + f6(s.accuracy_std) + "," +
           f6(s.der_mean) + "," + f6(s.der_corpus.confusion_rate()) + "," +
           f6(s.der_corpus.fa_rate()) + "," + f6(s.der_corpus.miss_rate()) + "," +
           f6(s.der_corpus.der()) + "\n";
  }
  return out;
}

}  // namespace chronodiar
