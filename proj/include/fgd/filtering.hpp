#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgd/label.hpp"

namespace fgd {

// A construction family name ("matrixQ", "embeddedQ", "RC") or a
// comma-separated label list.
struct FilterTarget {
  std::string name;
  LabelSet labels;

  static FilterTarget parse(const std::string& text);  // throws std::invalid_argument
  bool hits(const LabelSet& utterance_labels) const;
};

struct CorpusEntry {
  std::string utterance_id;
  long tokens = 0;
  LabelSet labels;
};

// Token unit used for every count in a plan.
inline constexpr const char* kTokenUnit = "corpus-token";

struct FilterPlan {
  std::string mode;  // "targeted" or "control"
  FilterTarget target;
  std::optional<std::uint64_t> seed;
  double tolerance = 0;
  bool exclude_target = false;
  long removed_sentences = 0;
  long removed_tokens = 0;
  long matched_tokens = 0;  // control: the targeted plan's token count
  std::vector<std::string> removed_ids;  // corpus order
};

class FilterInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

FilterPlan plan_targeted_filter(const std::vector<CorpusEntry>& corpus, const FilterTarget& target);

// Same sentence count as `targeted`, drawn by matching its length histogram
// and repaired by swaps until tokens are within tolerance (a fraction of the
// targeted token count). With exclude_target, target-labelled sentences are
// not eligible. Throws FilterInfeasible naming the deficit.
FilterPlan plan_control_filter(const std::vector<CorpusEntry>& corpus, const FilterPlan& targeted,
                               std::uint64_t seed, double tolerance = 0.005,
                               bool exclude_target = false);

nlohmann::ordered_json plan_to_json(const FilterPlan& plan);
FilterPlan plan_from_json(const nlohmann::json& j);

struct ApplyOptions {
  // Every plan id must occur in the corpus; disable to re-apply a plan to
  // already-filtered output.
  bool require_all_ids = true;
};

struct ApplyResult {
  long input = 0;
  long kept = 0;
  long removed = 0;
  std::vector<std::string> missing_ids;
};

// Streams corpus JSONL lines, copying kept lines byte-for-byte to `kept`.
// Removed utterances go to `removed` as {"utterance_id","labels","n_tokens",
// "text"}; `text` receives one detokenized kept sentence per line. Labels for
// the sidecar come from `labels` when given. Throws std::invalid_argument on
// an unknown plan id (when required) or a malformed line.
ApplyResult apply_filter(std::istream& corpus, const FilterPlan& plan, std::ostream& kept,
                         std::ostream* removed = nullptr, std::ostream* text = nullptr,
                         const LabelMap* labels = nullptr, const ApplyOptions& options = {});

// Joins tokens with spaces, attaching punctuation and clitics to the left.
std::string detokenize(const std::vector<std::string>& tokens);

}  // namespace fgd
