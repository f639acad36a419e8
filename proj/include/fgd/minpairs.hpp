#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgd/label.hpp"

namespace fgd {

// Four skeletons split into context and continuation by a literal '|'.
// Slots are written {name}, {name.field} or {name:cap} / {name.field:cap};
// each slot name is declared with a lexical class.
struct PairTemplate {
  std::string template_id;
  Family construction{};
  std::string site;  // "subject" or "object"
  std::map<std::string, std::string> slots;
  std::string grammatical_gap;
  std::string ungrammatical_gap;
  std::string grammatical_filled;
  std::string ungrammatical_filled;
};

// Template file: {"templates": [{"template_id", "construction", "site",
// "slots": {name: class}, "grammatical_gap", "ungrammatical_gap",
// "grammatical_filled", "ungrammatical_filled"}]}. Throws
// std::invalid_argument on malformed templates, undeclared slots, mismatched
// continuations and subject relative-clause templates.
std::vector<PairTemplate> templates_from_json(const nlohmann::json& j);
std::vector<PairTemplate> read_templates(const std::string& path);

// One lexical item: its fields; "form" is the field used by a bare {slot}.
using LexEntry = std::map<std::string, std::string>;
// Lexical class -> entries. In JSON an entry is a string (its form) or an
// object of fields.
using Lexicon = std::map<std::string, std::vector<LexEntry>>;

Lexicon lexicon_from_json(const nlohmann::json& j);
Lexicon read_lexicon(const std::string& path);

struct Sentence {
  std::string context;
  std::string continuation;
  std::string text() const;
};

struct MinimalPair {
  Sentence grammatical;
  Sentence ungrammatical;
};

struct MinimalPairItem {
  std::string item_id;
  std::string template_id;
  Family construction{};
  std::string site;
  std::map<std::string, std::string> bindings;  // slot -> form of the bound entry
  // [0]: filler present vs absent with an open gap; [1]: gap filled by a pronoun.
  std::array<MinimalPair, 2> pairs;
};

MinimalPairItem instantiate(const PairTemplate& t, const std::map<std::string, LexEntry>& binding,
                            const std::string& item_id);

// Cartesian product of slot bindings per template, in slot-name order with
// the last slot varying fastest. With a limit below the product size, a
// seeded sample of distinct bindings is kept in enumeration order.
std::vector<MinimalPairItem> expand_templates(const std::vector<PairTemplate>& templates,
                                              const Lexicon& lexicon,
                                              std::optional<std::uint64_t> limit = {},
                                              std::uint64_t seed = 0);

nlohmann::ordered_json item_to_json(const MinimalPairItem& item);
MinimalPairItem item_from_json(const nlohmann::json& j);

struct ScoringRequest {
  std::string request_id;  // "<item_id>/p<pair>/<g|u>"
  std::string context;
  std::string continuation;
};

std::vector<ScoringRequest> emit_scoring_requests(const std::vector<MinimalPairItem>& items);
nlohmann::ordered_json request_to_json(const ScoringRequest& r);

struct ScoreRecord {
  std::string request_id;
  double logprob = 0;
};

// JSONL {"request_id", "logprob"}; non-finite values and duplicates throw.
std::vector<ScoreRecord> read_scores(std::istream& in);

struct AccuracyRow {
  std::string construction;
  std::string site;
  long n_pairs = 0;
  long n_correct = 0;
  std::optional<double> accuracy;
};

struct AccuracyReport {
  std::vector<AccuracyRow> rows;  // per construction x site
  AccuracyRow overall;
  std::vector<std::string> missing_pairs;  // "<item_id>/p<pair>" lacking a score
};

// A pair is correct iff logprob(grammatical) > logprob(ungrammatical).
// Pairs with a missing side are reported and left out. Scores whose
// request_id names no request throw std::invalid_argument listing them.
AccuracyReport score_accuracy(const std::vector<MinimalPairItem>& items,
                              const std::vector<ScoreRecord>& scores);

std::string accuracy_csv(const AccuracyReport& report, const std::string& scorer_convention);

}  // namespace fgd
