#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgd/parsetree.hpp"

namespace fgd {

// Schema or invariant failure tied to a 1-based line of a JSONL file.
class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CorpusDiagnostic {
  std::size_t line = 0;
  std::string utterance_id;
  std::string message;
};

// Decodes one corpus object. Throws std::invalid_argument on schema
// violations (missing/mistyped fields, malformed tree); invariants are not
// checked here.
ParsedUtterance utterance_from_json(const nlohmann::json& record);

nlohmann::ordered_json utterance_to_json(const ParsedUtterance& utt);

// Sequential reader over the line-delimited corpus format. In lenient mode
// bad records are skipped and logged; in strict mode the first bad record
// throws CorpusError.
class CorpusReader {
 public:
  CorpusReader(std::istream& in, bool strict);

  std::optional<ParsedUtterance> next();

  // Line number of the record most recently returned by next().
  std::size_t line() const { return last_line_; }
  std::size_t accepted() const { return accepted_; }
  std::size_t skipped() const { return skipped_; }
  const std::vector<CorpusDiagnostic>& diagnostics() const { return diagnostics_; }

 private:
  void reject(std::size_t line, const std::string& id, const std::string& message);

  std::istream& in_;
  bool strict_;
  std::size_t line_no_ = 0;
  std::size_t last_line_ = 0;
  std::size_t accepted_ = 0;
  std::size_t skipped_ = 0;
  std::set<std::string> seen_ids_;
  std::vector<CorpusDiagnostic> diagnostics_;
};

struct CorpusReadResult {
  std::vector<ParsedUtterance> records;
  std::vector<CorpusDiagnostic> diagnostics;
  std::size_t skipped = 0;
};

CorpusReadResult read_corpus(const std::string& path, bool strict = false);
CorpusReadResult read_corpus(std::istream& in, bool strict = false);

}  // namespace fgd
