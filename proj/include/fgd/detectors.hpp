#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fgd/label.hpp"
#include "fgd/parsetree.hpp"

namespace fgd {

struct TokenSpan {
  int first = 0;  // inclusive, 1-based
  int last = 0;
  bool operator==(const TokenSpan&) const = default;
};

struct Detection {
  Label label{};
  std::optional<TokenSpan> filler_span;
  TreePath clause_node;
  // Identifiers of the heuristics that fired, in firing order.
  std::vector<std::string> evidence;
};

// Verb lemmas that select interrogative complements.
class EmbeddingVerbLexicon {
 public:
  EmbeddingVerbLexicon();  // the default list
  explicit EmbeddingVerbLexicon(std::set<std::string> lemmas);

  // One lemma per line; '#' starts a comment.
  static EmbeddingVerbLexicon from_file(const std::string& path);

  bool contains(const std::string& lemma) const { return lemmas_.count(lemma) > 0; }
  const std::set<std::string>& lemmas() const { return lemmas_; }

 private:
  std::set<std::string> lemmas_;
};

// Free-relative markers that veto an embedded-question reading.
class FreeRelativeExclusions {
 public:
  FreeRelativeExclusions();
  explicit FreeRelativeExclusions(std::set<std::string> words);

  bool contains(const std::string& word) const { return words_.count(word) > 0; }
  const std::set<std::string>& words() const { return words_; }

 private:
  std::set<std::string> words_;
};

std::vector<Detection> detect_relative_clauses(const ParsedUtterance& utt);
std::vector<Detection> detect_matrix_questions(const ParsedUtterance& utt);
std::vector<Detection> detect_embedded_questions(const ParsedUtterance& utt,
                                                 const EmbeddingVerbLexicon& lexicon,
                                                 const FreeRelativeExclusions& exclusions);

// Union of the three detectors ordered by clause node (preorder) then label,
// with duplicate (label, clause node) pairs removed.
std::vector<Detection> detect_all(const ParsedUtterance& utt, const EmbeddingVerbLexicon& lexicon,
                                  const FreeRelativeExclusions& exclusions = {});

LabelSet labels_of(const std::vector<Detection>& detections);

// One line of the detection output file.
nlohmann::ordered_json detections_to_json(const std::string& utterance_id,
                                          const std::vector<Detection>& detections);

}  // namespace fgd
