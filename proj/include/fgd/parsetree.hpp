#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fgd {

struct Token {
  int index = 0;  // 1-based
  std::string text;
  std::string lemma;
  std::string pos;
};

// Child-index list from the root; the empty path names the root itself.
using TreePath = std::vector<int>;

// Label with coindices and functional decorations removed: "WHNP-1-<INANIM>"
// becomes "WHNP". Labels that start with '-' ("-NONE-ABAR-WH-", "-LRB-") are
// returned unchanged.
std::string strip_label(std::string_view raw_label);

class ConstituencyTree {
 public:
  ConstituencyTree() = default;

  static ConstituencyTree make_leaf(std::string raw_label, std::string word, int token_index);
  static ConstituencyTree make_node(std::string raw_label, std::vector<ConstituencyTree> children);

  const std::string& label() const { return label_; }
  const std::string& raw_label() const { return raw_label_; }
  const std::vector<ConstituencyTree>& children() const { return children_; }
  bool is_leaf() const { return leaf_token_index_.has_value(); }
  std::optional<int> leaf_token_index() const { return leaf_token_index_; }
  // Surface string of a leaf; empty for internal nodes.
  const std::string& word() const { return word_; }

  // nullptr when the path does not name a node.
  const ConstituencyTree* at(const TreePath& path) const;

  std::vector<int> leaf_indices() const;
  std::vector<std::string> leaf_words() const;
  std::size_t leaf_count() const;

 private:
  std::string raw_label_;
  std::string label_;
  std::vector<ConstituencyTree> children_;
  std::string word_;
  std::optional<int> leaf_token_index_;
};

class BracketParseError : public std::runtime_error {
 public:
  BracketParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Parses one Penn-style bracketing. Leaves are numbered 1..n left to right.
ConstituencyTree parse_bracketed(std::string_view text);

// Single-line bracketing using raw labels, one space between siblings.
std::string serialize_bracketed(const ConstituencyTree& tree);

// Collapses whitespace runs to one space and drops spaces after "(" and
// before ")", so two bracketings that differ only in layout compare equal.
std::string normalize_bracketed_whitespace(std::string_view text);

// Violations of the leaf-numbering invariants; empty when the tree is valid.
std::vector<std::string> check_tree(const ConstituencyTree& tree);

// Every node labelled `parent_label` whose children contain `child_labels`
// as a contiguous run, in preorder. Matching uses stripped labels.
std::vector<TreePath> find_subtrees(const ConstituencyTree& tree, std::string_view parent_label,
                                    const std::vector<std::string>& child_labels);

struct DependencyEdge {
  int dependent = 0;
  int head = 0;  // 0 = root
  std::string relation;
};

class DependencyGraph {
 public:
  DependencyGraph() = default;
  explicit DependencyGraph(std::vector<DependencyEdge> edges);

  const std::vector<DependencyEdge>& edges() const { return edges_; }
  // Largest dependent index seen; equals the token count for valid graphs.
  int size() const { return size_; }

  // -1 when the token has no edge.
  int head_of(int token) const;
  std::string_view relation_of(int token) const;

  // Dependents of `head` (0 allowed, meaning the root) in ascending order.
  std::vector<int> children(int head, std::optional<std::string_view> relation = {}) const;

  // True when `ancestor` lies on the head chain above `token` (or equals it).
  bool dominates(int ancestor, int token) const;

  // Violations of the single-root tree invariants against a token count.
  std::vector<std::string> check(std::size_t n_tokens) const;

 private:
  std::vector<DependencyEdge> edges_;
  std::vector<int> heads_;                 // index by token, -1 missing
  std::vector<std::string> relations_;     // index by token
  int size_ = 0;
};

// Throws std::out_of_range unless 1 <= head <= n.
std::vector<int> dep_children(const DependencyGraph& graph, int head,
                              std::optional<std::string_view> relation = {});

enum class SpeakerGroup { Adult, TargetChild, OtherChild };

std::string_view to_string(SpeakerGroup group);
std::optional<SpeakerGroup> speaker_group_from_string(std::string_view text);

struct UtteranceMeta {
  std::string utterance_id;
  std::string corpus_id;
  std::string transcript_id;
  SpeakerGroup speaker_group = SpeakerGroup::Adult;
  std::optional<double> child_age_months;
};

struct ParsedUtterance {
  UtteranceMeta meta;
  std::vector<Token> tokens;
  ConstituencyTree constituency;
  DependencyGraph dependency;
};

// All record-level invariant violations (tokens, tree, graph, alignment).
std::vector<std::string> check_utterance(const ParsedUtterance& utt);

}  // namespace fgd
