#include "chronodiar/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

namespace chronodiar::io {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string field;
  while (ss >> field) {
    out.push_back(field);
  }
  return out;
}

bool is_skippable(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line.compare(first, 2, ";;") == 0;
}

double parse_number(const std::string& token, std::size_t line, const char* field) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (!token.empty() && *begin == '+') {
    ++begin;
  }
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError(line, std::string("invalid ") + field + " '" + token + "'");
  }
  return value;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!is_skippable(line)) {
      fn(line, number);
    }
  }
}

}  // namespace

std::map<std::string, Annotation> parse_rttm(const std::string& text) {
  std::map<std::string, Annotation> out;
  for_each_line(text, [&](const std::string& line, std::size_t n) {
    const auto f = split_fields(line);
    if (f.size() != 10) {
      throw ParseError(n, "expected 10 RTTM fields, found " + std::to_string(f.size()));
    }
    if (f[0] != "SPEAKER") {
      throw ParseError(n, "unsupported RTTM record type '" + f[0] + "'");
    }
    const double tbeg = parse_number(f[3], n, "tbeg");
    const double tdur = parse_number(f[4], n, "tdur");
    if (!(tdur > 0.0)) {
      throw ParseError(n, "tdur must be positive");
    }
    try {
      out[f[1]].add(Segment(tbeg, tbeg + tdur), f[7]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(n, e.what());
    }
  });
  return out;
}

std::string write_rttm(const std::map<std::string, Annotation>& annotations) {
  std::string out;
  for (const auto& [file, ann] : annotations) {
    std::vector<Turn> turns = ann.turns();
    std::stable_sort(turns.begin(), turns.end(), [](const Turn& a, const Turn& b) {
      return std::tie(a.segment.start, a.speaker) < std::tie(b.segment.start, b.speaker);
    });
    for (const auto& t : turns) {
      out += "SPEAKER " + file + " 1 " + fixed6(t.segment.start) + " " +
             fixed6(t.segment.duration()) + " <NA> <NA> " + t.speaker + " <NA> <NA>\n";
    }
  }
  return out;
}

std::map<std::string, Uem> parse_uem(const std::string& text) {
  std::map<std::string, std::vector<Segment>> parts;
  for_each_line(text, [&](const std::string& line, std::size_t n) {
    const auto f = split_fields(line);
    if (f.size() != 4) {
      throw ParseError(n, "expected 4 UEM fields, found " + std::to_string(f.size()));
    }
    const double tbeg = parse_number(f[2], n, "tbeg");
    const double tend = parse_number(f[3], n, "tend");
    if (!(tend > tbeg)) {
      throw ParseError(n, "tend must be greater than tbeg");
    }
    parts[f[0]].emplace_back(tbeg, tend);
  });
  std::map<std::string, Uem> out;
  for (auto& [file, segs] : parts) {
    out.emplace(file, Timeline(std::move(segs)));
  }
  return out;
}

std::string write_uem(const std::map<std::string, Uem>& uems) {
  std::string out;
  for (const auto& [file, uem] : uems) {
    for (const auto& s : uem.segments()) {
      out += file + " 1 " + fixed6(s.start) + " " + fixed6(s.end) + "\n";
    }
  }
  return out;
}

GroundTruthLabel EmbeddingRecord::truth_label() const {
  if (!truth) {
    throw std::logic_error("EmbeddingRecord: record has no ground truth");
  }
  return parse_truth_tag(*truth);
}

std::optional<std::string> truth_tag(const GroundTruthLabel& label) {
  switch (label.kind()) {
    case GroundTruthLabel::Kind::Speaker:
      return label.speaker_id();
    case GroundTruthLabel::Kind::Overlap:
      return std::string(kOverlapTag);
    case GroundTruthLabel::Kind::NonSpeech:
      return std::string(kNonSpeechTag);
  }
  return std::nullopt;
}

GroundTruthLabel parse_truth_tag(const std::string& tag) {
  if (tag == kOverlapTag) return GroundTruthLabel::overlap();
  if (tag == kNonSpeechTag) return GroundTruthLabel::non_speech();
  return GroundTruthLabel::speaker(tag);
}

std::vector<EmbeddingRecord> read_embeddings(std::istream& in) {
  std::vector<EmbeddingRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(n, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
      throw ParseError(n, "record must be a JSON object");
    }
    EmbeddingRecord rec;
    try {
      rec.start = j.at("start").get<double>();
      rec.end = j.at("end").get<double>();
      if (j.contains("truth") && !j.at("truth").is_null()) {
        rec.truth = j.at("truth").get<std::string>();
        if (rec.truth->empty()) {
          throw ParseError(n, "empty truth label");
        }
      }
      const auto& v = j.at("v");
      if (!v.is_array()) {
        throw ParseError(n, "\"v\" must be an array");
      }
      rec.vector.resize(static_cast<Eigen::Index>(v.size()));
      for (std::size_t i = 0; i < v.size(); ++i) {
        rec.vector(static_cast<Eigen::Index>(i)) = v[i].get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(n, std::string("bad record: ") + e.what());
    }
    if (!std::isfinite(rec.start) || !std::isfinite(rec.end) || !(rec.end > rec.start)) {
      throw ParseError(n, "end must be greater than start");
    }
    if (rec.vector.size() < 2) {
      throw ParseError(n, "vector must have at least 2 entries");
    }
    if (!out.empty() && rec.vector.size() != out.front().vector.size()) {
      throw ParseError(n, "dimension mismatch: expected " +
                              std::to_string(out.front().vector.size()) + ", found " +
                              std::to_string(rec.vector.size()));
    }
    if (!rec.vector.allFinite()) {
      throw ParseError(n, "non-finite vector entry");
    }
    if (!(rec.vector.norm() > kMinNorm)) {
      throw ParseError(n, "zero-norm vector");
    }
    if (!out.empty() && rec.start < out.back().start) {
      throw ParseError(n, "records are not in chronological order");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<EmbeddingRecord> read_embeddings(const std::string& text) {
  std::istringstream in(text);
  return read_embeddings(in);
}

void write_embeddings(std::ostream& out, std::span<const EmbeddingRecord> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["start"] = r.start;
    j["end"] = r.end;
    if (r.truth) {
      j["truth"] = *r.truth;
    }
    j["v"] = std::vector<double>(r.vector.data(), r.vector.data() + r.vector.size());
    out << j.dump() << '\n';
  }
}

std::string write_report(std::vector<ReportRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.file, a.classifier, a.adaptive, a.train_seconds) <
           std::tie(b.file, b.classifier, b.adaptive, b.train_seconds);
  });
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : rows) {
    out += r.file + "," + r.language + "," + r.classifier + "," + (r.adaptive ? "true" : "false") +
           "," + fixed6(r.train_seconds) + "," + fixed6(r.accuracy) + "," +
           fixed6(r.der.confusion_rate()) + "," + fixed6(r.der.fa_rate()) + "," +
           fixed6(r.der.miss_rate()) + "," + fixed6(r.der.der()) + "\n";
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

}  // namespace chronodiar::io
