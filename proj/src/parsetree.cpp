#include "fgd/parsetree.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace fgd {

std::string strip_label(std::string_view raw_label) {
  if (raw_label.empty() || raw_label.front() == '-') return std::string(raw_label);
  auto cut = raw_label.find_first_of("-=", 1);
  return std::string(raw_label.substr(0, cut));
}

ConstituencyTree ConstituencyTree::make_leaf(std::string raw_label, std::string word,
                                             int token_index) {
  ConstituencyTree t;
  t.label_ = strip_label(raw_label);
  t.raw_label_ = std::move(raw_label);
  t.word_ = std::move(word);
  t.leaf_token_index_ = token_index;
  return t;
}

ConstituencyTree ConstituencyTree::make_node(std::string raw_label,
                                             std::vector<ConstituencyTree> children) {
  ConstituencyTree t;
  t.label_ = strip_label(raw_label);
  t.raw_label_ = std::move(raw_label);
  t.children_ = std::move(children);
  return t;
}

const ConstituencyTree* ConstituencyTree::at(const TreePath& path) const {
  const ConstituencyTree* node = this;
  for (int i : path) {
    if (i < 0 || static_cast<std::size_t>(i) >= node->children_.size()) return nullptr;
    node = &node->children_[static_cast<std::size_t>(i)];
  }
  return node;
}

namespace {

template <typename F>
void for_each_leaf(const ConstituencyTree& t, F&& f) {
  if (t.is_leaf()) {
    f(t);
    return;
  }
  for (const auto& c : t.children()) for_each_leaf(c, f);
}

bool is_atom_char(char c) {
  return c != '(' && c != ')' && !std::isspace(static_cast<unsigned char>(c));
}

struct Frame {
  std::size_t open = 0;
  std::string label;
  std::vector<ConstituencyTree> children;
  std::optional<std::string> word;
};

}  // namespace

std::vector<int> ConstituencyTree::leaf_indices() const {
  std::vector<int> out;
  for_each_leaf(*this, [&](const ConstituencyTree& l) { out.push_back(*l.leaf_token_index()); });
  return out;
}

std::vector<std::string> ConstituencyTree::leaf_words() const {
  std::vector<std::string> out;
  for_each_leaf(*this, [&](const ConstituencyTree& l) { out.push_back(l.word()); });
  return out;
}

std::size_t ConstituencyTree::leaf_count() const {
  std::size_t n = 0;
  for_each_leaf(*this, [&](const ConstituencyTree&) { ++n; });
  return n;
}

ConstituencyTree parse_bracketed(std::string_view text) {
  std::size_t pos = 0;
  const std::size_t end = text.size();
  auto skip_ws = [&] {
    while (pos < end && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto read_atom = [&] {
    std::size_t start = pos;
    while (pos < end && is_atom_char(text[pos])) ++pos;
    return std::string(text.substr(start, pos - start));
  };

  std::vector<Frame> stack;
  std::optional<ConstituencyTree> result;
  int next_leaf = 0;

  skip_ws();
  if (pos == end) throw BracketParseError("empty input", 0);
  if (text[pos] != '(') throw BracketParseError("expected '('", pos);

  while (true) {
    skip_ws();
    if (pos == end) {
      if (!stack.empty()) throw BracketParseError("unterminated bracket", stack.back().open);
      break;
    }
    const char c = text[pos];
    if (c == '(') {
      if (result) throw BracketParseError("trailing content after tree", pos);
      if (!stack.empty() && stack.back().word) {
        throw BracketParseError("node mixes a token and subtrees", pos);
      }
      Frame f;
      f.open = pos++;
      skip_ws();
      if (pos < end && is_atom_char(text[pos])) f.label = read_atom();
      stack.push_back(std::move(f));
    } else if (c == ')') {
      if (stack.empty()) throw BracketParseError("unbalanced ')'", pos);
      Frame f = std::move(stack.back());
      stack.pop_back();
      ConstituencyTree node;
      if (f.word) {
        node = ConstituencyTree::make_leaf(std::move(f.label), std::move(*f.word), ++next_leaf);
      } else if (f.children.empty()) {
        if (f.label.empty()) throw BracketParseError("empty node", f.open);
        throw BracketParseError("leaf with no token", f.open);
      } else {
        node = ConstituencyTree::make_node(std::move(f.label), std::move(f.children));
      }
      if (stack.empty()) {
        result = std::move(node);
      } else {
        stack.back().children.push_back(std::move(node));
      }
      ++pos;
    } else {
      if (stack.empty()) throw BracketParseError("text outside brackets", pos);
      Frame& f = stack.back();
      const std::size_t at = pos;
      std::string atom = read_atom();
      if (!f.children.empty()) throw BracketParseError("node mixes a token and subtrees", at);
      if (f.word) throw BracketParseError("more than one token under a preterminal", at);
      f.word = std::move(atom);
    }
  }
  if (!result) throw BracketParseError("no tree", 0);
  return std::move(*result);
}

namespace {

void serialize_into(const ConstituencyTree& t, std::string& out) {
  out += '(';
  out += t.raw_label();
  if (t.is_leaf()) {
    out += ' ';
    out += t.word();
  } else {
    for (const auto& c : t.children()) {
      out += ' ';
      serialize_into(c, out);
    }
  }
  out += ')';
}

bool labels_match_at(const std::vector<ConstituencyTree>& children, std::size_t start,
                     const std::vector<std::string>& pattern) {
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    if (children[start + k].label() != pattern[k]) return false;
  }
  return true;
}

void find_into(const ConstituencyTree& t, std::string_view parent,
               const std::vector<std::string>& pattern, TreePath& path,
               std::vector<TreePath>& out) {
  if (t.is_leaf()) return;
  if (t.label() == parent && t.children().size() >= pattern.size()) {
    for (std::size_t s = 0; s + pattern.size() <= t.children().size(); ++s) {
      if (labels_match_at(t.children(), s, pattern)) {
        out.push_back(path);
        break;
      }
    }
  }
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    path.push_back(static_cast<int>(i));
    find_into(t.children()[i], parent, pattern, path, out);
    path.pop_back();
  }
}

void check_nodes(const ConstituencyTree& t, std::vector<std::string>& problems) {
  if (t.is_leaf()) {
    if (!t.children().empty()) problems.push_back("leaf '" + t.raw_label() + "' has children");
    return;
  }
  if (t.children().empty()) {
    problems.push_back("internal node '" + t.raw_label() + "' has no children");
  }
  for (const auto& c : t.children()) check_nodes(c, problems);
}

}  // namespace

std::string serialize_bracketed(const ConstituencyTree& tree) {
  std::string out;
  serialize_into(tree, out);
  return out;
}

std::string normalize_bracketed_whitespace(std::string_view text) {
  std::string collapsed;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
      continue;
    }
    if (pending_space && !collapsed.empty() && collapsed.back() != '(' && c != ')') {
      collapsed += ' ';
    }
    pending_space = false;
    collapsed += c;
  }
  return collapsed;
}

std::vector<std::string> check_tree(const ConstituencyTree& tree) {
  std::vector<std::string> problems;
  check_nodes(tree, problems);
  auto idx = tree.leaf_indices();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] != static_cast<int>(i) + 1) {
      problems.push_back("leaf " + std::to_string(i + 1) + " carries token index " +
                         std::to_string(idx[i]));
      break;
    }
  }
  return problems;
}

std::vector<TreePath> find_subtrees(const ConstituencyTree& tree, std::string_view parent_label,
                                    const std::vector<std::string>& child_labels) {
  std::vector<TreePath> out;
  TreePath path;
  find_into(tree, parent_label, child_labels, path, out);
  return out;
}

DependencyGraph::DependencyGraph(std::vector<DependencyEdge> edges) : edges_(std::move(edges)) {
  for (const auto& e : edges_) size_ = std::max(size_, e.dependent);
  heads_.assign(static_cast<std::size_t>(size_) + 1, -1);
  relations_.assign(static_cast<std::size_t>(size_) + 1, std::string());
  for (const auto& e : edges_) {
    if (e.dependent < 1) continue;
    auto d = static_cast<std::size_t>(e.dependent);
    if (heads_[d] != -1) continue;  // duplicates are reported by check()
    heads_[d] = e.head;
    relations_[d] = e.relation;
  }
}

int DependencyGraph::head_of(int token) const {
  if (token < 1 || token > size_) return -1;
  return heads_[static_cast<std::size_t>(token)];
}

std::string_view DependencyGraph::relation_of(int token) const {
  if (token < 1 || token > size_) return {};
  return relations_[static_cast<std::size_t>(token)];
}

std::vector<int> DependencyGraph::children(int head,
                                           std::optional<std::string_view> relation) const {
  std::vector<int> out;
  for (int t = 1; t <= size_; ++t) {
    const auto i = static_cast<std::size_t>(t);
    if (heads_[i] == head && (!relation || relations_[i] == *relation)) out.push_back(t);
  }
  return out;
}

bool DependencyGraph::dominates(int ancestor, int token) const {
  int cur = token;
  for (int steps = 0; steps <= size_ + 1 && cur > 0; ++steps) {
    if (cur == ancestor) return true;
    cur = head_of(cur);
  }
  return cur == ancestor;
}

std::vector<std::string> DependencyGraph::check(std::size_t n_tokens) const {
  std::vector<std::string> problems;
  const int n = static_cast<int>(n_tokens);
  std::vector<int> seen(n_tokens + 1, 0);
  int roots = 0;
  for (const auto& e : edges_) {
    if (e.dependent < 1 || e.dependent > n) {
      problems.push_back("dependent " + std::to_string(e.dependent) + " out of range 1.." +
                         std::to_string(n));
      continue;
    }
    if (e.head < 0 || e.head > n) {
      problems.push_back("head " + std::to_string(e.head) + " of token " +
                         std::to_string(e.dependent) + " out of range 0.." + std::to_string(n));
    }
    if (e.head == 0) ++roots;
    ++seen[static_cast<std::size_t>(e.dependent)];
  }
  for (int t = 1; t <= n; ++t) {
    if (seen[static_cast<std::size_t>(t)] != 1) {
      problems.push_back("token " + std::to_string(t) + " appears " +
                         std::to_string(seen[static_cast<std::size_t>(t)]) +
                         " times as dependent");
    }
  }
  if (roots != 1) problems.push_back("expected exactly one root edge, found " + std::to_string(roots));
  if (!problems.empty()) return problems;

  // Root reachability: every head chain must terminate at 0 within n steps.
  for (int t = 1; t <= n; ++t) {
    int cur = t;
    int steps = 0;
    while (cur != 0 && steps <= n) {
      cur = head_of(cur);
      ++steps;
    }
    if (cur != 0) {
      problems.push_back("token " + std::to_string(t) + " is not reachable from the root (cycle)");
      break;
    }
  }
  return problems;
}

std::vector<int> dep_children(const DependencyGraph& graph, int head,
                              std::optional<std::string_view> relation) {
  if (head < 1 || head > graph.size()) {
    throw std::out_of_range("head " + std::to_string(head) + " outside 1.." +
                            std::to_string(graph.size()));
  }
  return graph.children(head, relation);
}

std::string_view to_string(SpeakerGroup group) {
  switch (group) {
    case SpeakerGroup::Adult:
      return "adult";
    case SpeakerGroup::TargetChild:
      return "target_child";
    case SpeakerGroup::OtherChild:
      return "other_child";
  }
  return "?";
}

std::optional<SpeakerGroup> speaker_group_from_string(std::string_view text) {
  if (text == "adult") return SpeakerGroup::Adult;
  if (text == "target_child") return SpeakerGroup::TargetChild;
  if (text == "other_child") return SpeakerGroup::OtherChild;
  return std::nullopt;
}

std::vector<std::string> check_utterance(const ParsedUtterance& utt) {
  std::vector<std::string> problems;
  const auto n = utt.tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tok = utt.tokens[i];
    if (tok.index != static_cast<int>(i) + 1) {
      problems.push_back("token indices are not contiguous 1..n (position " +
                         std::to_string(i + 1) + " has index " + std::to_string(tok.index) + ")");
      break;
    }
  }
  for (const auto& tok : utt.tokens) {
    if (tok.text.empty()) problems.push_back("token " + std::to_string(tok.index) + " has empty text");
  }
  if (utt.meta.utterance_id.empty()) problems.push_back("utterance_id is empty");
  if (utt.meta.child_age_months) {
    double a = *utt.meta.child_age_months;
    if (!std::isfinite(a) || a < 0) problems.push_back("child_age_months must be finite and >= 0");
  }
  for (auto& p : check_tree(utt.constituency)) problems.push_back("tree: " + p);
  const auto leaves = utt.constituency.leaf_count();
  if (leaves != n) {
    problems.push_back("tree has " + std::to_string(leaves) + " leaves but record has " +
                       std::to_string(n) + " tokens");
  } else {
    auto words = utt.constituency.leaf_words();
    for (std::size_t i = 0; i < n; ++i) {
      if (words[i] != utt.tokens[i].text) {
        problems.push_back("leaf " + std::to_string(i + 1) + " '" + words[i] +
                           "' does not match token text '" + utt.tokens[i].text + "'");
        break;
      }
    }
  }
  if (utt.dependency.edges().size() != n) {
    problems.push_back("dependency graph has " + std::to_string(utt.dependency.edges().size()) +
                       " edges but record has " + std::to_string(n) + " tokens");
  }
  for (auto& p : utt.dependency.check(n)) problems.push_back("deps: " + p);
  return problems;
}

}  // namespace fgd
