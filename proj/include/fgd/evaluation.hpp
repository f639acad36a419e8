#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fgd/label.hpp"

namespace fgd {

// Total map Label -> canonical Label.
class MergePolicy {
 public:
  static MergePolicy identity();
  // CC_SMQ -> SMQ, CC_OMQ -> OMQ, CC_AMQ -> AMQ.
  static MergePolicy cross_clausal_to_base();

  Label apply(Label label) const { return map_[static_cast<std::size_t>(label)]; }
  const std::string& name() const { return name_; }

 private:
  MergePolicy(std::string name, std::array<Label, kLabelCount> map)
      : name_(std::move(name)), map_(map) {}
  std::string name_;
  std::array<Label, kLabelCount> map_;
};

LabelSet merge_labels(const LabelSet& labels, const MergePolicy& policy);

// PMQ, PlainMQ, PRC, SRC_reduced, ORC_reduced.
LabelSet default_excluded_labels();

// A gold (id, label) pair the detector omits by design, credited as a true
// positive for recall.
struct TpOverride {
  std::string utterance_id;
  Label label{};
  bool forced_tp = true;
};

// JSONL: {"utterance_id" | "id": str, "label": str, "forced_tp": bool}.
std::vector<TpOverride> read_overrides(std::istream& in);

struct LabelScore {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long forced_tp = 0;
  long n_predicted = 0;
  long n_gold = 0;
};

struct EvalReport {
  std::map<Label, LabelScore> per_label;
  std::string merge_policy;
  LabelSet excluded;
  bool has_overrides = false;
  long unused_overrides = 0;
};

// Rows are every label in the image of the policy that is not excluded.
// Recall counts forced true positives: (tp + forced_tp) / n_gold, with
// tp + forced_tp + fn = n_gold; precision uses predictions only.
EvalReport score(const LabelMap& predictions, const LabelMap& gold, const MergePolicy& policy,
                 const LabelSet& excluded, const std::vector<TpOverride>& overrides = {});

std::string report_to_csv(const EvalReport& report);

// Fraction of sentences whose positive votes exceed half of their votes.
// Throws std::invalid_argument on no sentences or a sentence without votes.
double majority_accuracy(const std::vector<std::vector<bool>>& judgments);

}  // namespace fgd
