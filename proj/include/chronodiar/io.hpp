// Readers and writers for the on-disk formats:
//   RTTM     SPEAKER <file> <chan> <tbeg> <tdur> <NA> <NA> <speaker> <NA> <NA>
//   UEM      <file> <chan> <tbeg> <tend>
//   frames   one JSON object per line: {"start":s,"end":e,"truth":"spkA","v":[...]}
//   report   CSV, see kReportHeader
// Parsers reject malformed lines with the 1-based line number; only blank
// lines and ";;" comments are skipped.

#pragma once

#include "chronodiar/core.hpp"
#include "chronodiar/metrics.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chronodiar::io {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr const char* kOverlapTag = "OVERLAP";
inline constexpr const char* kNonSpeechTag = "NONSPEECH";

std::map<std::string, Annotation> parse_rttm(const std::string& text);
std::string write_rttm(const std::map<std::string, Annotation>& annotations);

std::map<std::string, Uem> parse_uem(const std::string& text);
std::string write_uem(const std::map<std::string, Uem>& uems);

struct EmbeddingRecord {
  double start = 0.0;
  double end = 0.0;
  std::optional<std::string> truth;
  Vector vector;

  EmbeddingFrame frame() const { return EmbeddingFrame(start, end, vector); }
  /// Requires truth to be present.
  GroundTruthLabel truth_label() const;
};

std::optional<std::string> truth_tag(const GroundTruthLabel& label);
GroundTruthLabel parse_truth_tag(const std::string& tag);

std::vector<EmbeddingRecord> read_embeddings(std::istream& in);
std::vector<EmbeddingRecord> read_embeddings(const std::string& text);
void write_embeddings(std::ostream& out, std::span<const EmbeddingRecord> records);

struct ReportRow {
  std::string file;
  std::string language;
  std::string classifier;
  bool adaptive = false;
  double train_seconds = 0.0;
  double accuracy = 0.0;
  DerReport der;
};

inline constexpr const char* kReportHeader =
    "file,language,classifier,adaptive,train_seconds,accuracy,confusion,fa,miss,der";

/// Rows are sorted by (file, classifier, adaptive, train_seconds) before
/// writing; confusion/fa/miss/der are rates relative to scored speech.
std::string write_report(std::vector<ReportRow> rows);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace chronodiar::io
