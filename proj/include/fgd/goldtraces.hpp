#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fgd/label.hpp"
#include "fgd/parsetree.hpp"

namespace fgd {

// A coindexed (-NONE-..., *T*-n) leaf paired with its filler.
struct TraceSite {
  int trace_index = 0;
  std::string gap_parent_label;
  TreePath filler_path;
  std::string filler_category;
  std::string trace_kind;
  TreePath trace_path;
};

struct UnmatchedTrace {
  int trace_index = 0;  // 0 when the trace carries no coindex
  std::string trace_kind;
  TreePath trace_path;
  std::string reason;
};

struct TraceExtraction {
  std::vector<TraceSite> sites;
  std::vector<UnmatchedTrace> unmatched;
};

// Numeric coindex carried by a raw label ("WHNP-1-<INANIM>" -> 1), if any.
std::optional<int> coindex_of(const std::string& raw_label);

TraceExtraction extract_traces(const ConstituencyTree& tree);

struct GoldOptions {
  // Wh-movement traces are always counted. Relative-clause traces are
  // counted only with rc_traces set, recognised by a substring of the kind.
  bool rc_traces = false;
  std::string rc_trace_pattern = "REL";
};

inline constexpr const char* kWhTraceKind = "-NONE-ABAR-WH-";

struct GoldInference {
  std::optional<Label> label;  // empty = unknown
  std::string construction;    // "matrix", "embedded", "relative" or "unknown"
  std::string site;            // "subject", "object", "adjunct", "possessive" or "unknown"
  std::string reason;          // why the outcome is unknown
  TraceSite trace;

  bool known() const { return label.has_value(); }
};

GoldInference infer_gold_label(const ConstituencyTree& tree, const TraceSite& site,
                               const GoldOptions& options = {});

struct GoldTree {
  std::string id;
  ConstituencyTree tree;
  int line = 0;  // first line of the record
};

struct GoldDiagnostic {
  std::string utterance_id;
  int line = 0;
  std::string message;
};

struct GoldCorpusResult {
  std::map<std::string, LabelSet> labels;
  std::vector<GoldDiagnostic> diagnostics;
  long n_sites = 0;
  long n_unknown = 0;
  long n_unmatched = 0;
};

GoldCorpusResult gold_label_corpus(const std::vector<GoldTree>& trees,
                                   const GoldOptions& options = {});

// Reads a bracketed-tree file: one tree per line or spread over several
// lines, blank lines between records optional. A record may start with
// "id<TAB>"; records without one are named "tree-<ordinal>". Malformed
// records are reported in `malformed` and skipped, or throw CorpusError
// in strict mode.
struct GoldTreeFile {
  std::vector<GoldTree> trees;
  std::vector<GoldDiagnostic> malformed;
};

GoldTreeFile read_gold_trees(std::istream& in, bool strict = false);
GoldTreeFile read_gold_trees(const std::string& path, bool strict = false);

}  // namespace fgd
