#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "fgd/corpus.hpp"
#include "fgd/label.hpp"
#include "fgd/parsetree.hpp"
#include "fgd/stats.hpp"

namespace fgd::test {

inline std::string fixture(const std::string& name) {
  return std::string(FGD_FIXTURE_DIR) + "/" + name;
}

inline std::string data_file(const std::string& name) {
  return std::string(FGD_DATA_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<ParsedUtterance> fixture_corpus() {
  return read_corpus(fixture("gold_parses.jsonl"), true).records;
}

inline std::map<std::string, ParsedUtterance> fixture_by_id() {
  std::map<std::string, ParsedUtterance> out;
  for (auto& u : fixture_corpus()) out.emplace(u.meta.utterance_id, std::move(u));
  return out;
}

inline LabelMap expected_labels() {
  auto j = nlohmann::json::parse(slurp(fixture("gold_parses_expected.json")));
  LabelMap out;
  for (auto& [id, arr] : j.items()) {
    LabelSet s;
    for (const auto& l : arr) s.insert(parse_label(l.get<std::string>()));
    out[id] = s;
  }
  return out;
}

inline ParsedUtterance restamp(ParsedUtterance u, const std::string& id,
                               SpeakerGroup group = SpeakerGroup::Adult,
                               std::optional<double> age = {}, const std::string& transcript = "t") {
  u.meta.utterance_id = id;
  u.meta.speaker_group = group;
  u.meta.child_age_months = age;
  u.meta.transcript_id = transcript;
  return u;
}

inline std::string to_jsonl(const std::vector<ParsedUtterance>& corpus) {
  std::string out;
  for (const auto& u : corpus) out += utterance_to_json(u).dump() + "\n";
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Random bracketing built as a string, independent of the library serializer.
struct RandomTree {
  std::string text;
  std::vector<std::string> words;
};

inline void grow(std::mt19937_64& rng, int depth, RandomTree& t) {
  static const std::vector<std::string> kLabels = {
      "S", "NP", "VP", "SBAR", "WHNP-1", "NP-SBJ", "PP-LOC-2", "SQ", "ADJP", "S-TPC-3",
      "NP-<ANIM>", "WHADVP-12=4", "FRAG", "-NONE-", "-LRB-", "PRN"};
  static const std::vector<std::string> kTags = {"DT", "NN", "VBD", "PRP", "WP", "-NONE-",
                                                 "MD", "IN", ".", "PRP$", "-NONE-ABAR-WH-"};
  static const std::vector<std::string> kWords = {"the", "dog", "saw", "*T*-1", "what", "?",
                                                  "0", "it's", "N'T", "a-b", "cats", "*"};
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  if (depth == 0 || std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
    auto w = pick(kWords);
    t.words.push_back(w);
    t.text += "(" + pick(kTags) + " " + w + ")";
    return;
  }
  t.text += "(" + pick(kLabels);
  const int n = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int i = 0; i < n; ++i) {
    t.text += " ";
    grow(rng, depth - 1, t);
  }
  t.text += ")";
}

inline RandomTree random_tree(std::mt19937_64& rng, int max_depth = 6) {
  RandomTree t;
  grow(rng, max_depth, t);
  return t;
}

// Naive preorder search used as an oracle for find_subtrees.
inline void naive_find(const ConstituencyTree& node, TreePath& path, const std::string& parent,
                       const std::vector<std::string>& kids, std::vector<TreePath>& out) {
  if (node.is_leaf()) return;
  if (node.label() == parent) {
    const auto& ch = node.children();
    bool hit = kids.empty();
    for (std::size_t s = 0; !hit && s + kids.size() <= ch.size(); ++s) {
      bool ok = true;
      for (std::size_t k = 0; k < kids.size(); ++k) ok = ok && ch[s + k].label() == kids[k];
      hit = ok;
    }
    if (hit) out.push_back(path);
  }
  for (std::size_t i = 0; i < node.children().size(); ++i) {
    path.push_back(static_cast<int>(i));
    naive_find(node.children()[i], path, parent, kids, out);
    path.pop_back();
  }
}

// Twenty utterances with planted agreements and disagreements; the expected
// per-label counts are tallied by hand in the evaluation tests.
struct EvalCase {
  LabelMap predicted;
  LabelMap gold;
};

inline EvalCase evaluation_corpus() {
  using L = Label;
  const std::vector<std::tuple<const char*, LabelSet, LabelSet>> rows = {
      {"u01", {L::OMQ}, {L::OMQ}},
      {"u02", {L::OMQ}, {L::OMQ}},
      {"u03", {L::OMQ}, {}},
      {"u04", {}, {L::OMQ}},
      {"u05", {L::CC_OMQ}, {L::OMQ}},
      {"u06", {L::CC_OMQ}, {L::CC_OMQ}},
      {"u07", {L::SMQ}, {L::SMQ}},
      {"u08", {L::SMQ}, {L::OMQ}},
      {"u09", {L::SMQ, L::SRC}, {L::SMQ, L::SRC}},
      {"u10", {L::SRC}, {L::SRC}},
      {"u11", {L::SRC}, {L::ORC}},
      {"u12", {L::ORC}, {L::ORC}},
      {"u13", {L::ORC}, {L::ORC}},
      {"u14", {}, {}},
      {"u15", {L::PMQ}, {L::PMQ}},
      {"u16", {L::AEQ}, {L::AEQ}},
      {"u17", {L::AEQ}, {}},
      {"u18", {}, {L::AEQ}},
      {"u19", {L::OEQ}, {L::OEQ}},
      {"u20", {L::SEQ}, {L::OEQ}},
  };
  EvalCase c;
  for (const auto& [id, gold, pred] : rows) {
    c.gold[id] = gold;
    c.predicted[id] = pred;
  }
  return c;
}

// Cell-level planted corpus: `n` utterances in the bin, of which the first
// `k` carry `labels` and the rest carry none.
inline void plant(std::vector<LabeledUtterance>& out, double age, SpeakerGroup group, long n,
                  long k, const LabelSet& labels) {
  for (long i = 0; i < n; ++i) {
    LabeledUtterance u;
    u.utterance_id = "p" + std::to_string(out.size());
    u.transcript_id = "t";
    u.group = group;
    u.age_months = age;
    if (i < k) u.labels = labels;
    out.push_back(std::move(u));
  }
}

// The five printed paradigms, in the order grammatical gap, ungrammatical
// gap, grammatical filled, ungrammatical filled.
inline const std::map<std::string, std::array<std::string, 4>>& printed_paradigms() {
  static const std::map<std::string, std::array<std::string, 4>> p = {
      {"matrix-object",
       {"What will you build today", "You will build today", "You will build it",
        "What will you build it"}},
      {"matrix-subject",
       {"Who will chase the doctor", "will chase the doctor", "It will chase the doctor",
        "Who will it chase the doctor"}},
      {"embedded-object",
       {"I knew what you built today", "I knew that you built today", "I knew that you built it",
        "I knew what you built it"}},
      {"embedded-subject",
       {"I knew who chased the doctor", "I knew that chased the doctor",
        "I knew that they chased the doctor", "I knew who they chased the doctor"}},
      {"rc-object",
       {"I knew the cake that you made", "I knew that you made", "I knew that you made it",
        "I knew the cake that you made it"}},
  };
  return p;
}

}  // namespace fgd::test
