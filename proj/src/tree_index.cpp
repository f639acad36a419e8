#include "tree_index.hpp"

#include <algorithm>
#include <cctype>

namespace fgd::detail {

TreeIndex::TreeIndex(const ConstituencyTree& tree) {
  TreePath path;
  build(tree, -1, path);
  int max_token = 0;
  for (const auto& n : nodes_) max_token = std::max(max_token, n.last);
  token_leaf_.assign(static_cast<std::size_t>(max_token) + 1, -1);
  for (int i = 0; i < size(); ++i) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.is_leaf() && n.first > 0) token_leaf_[static_cast<std::size_t>(n.first)] = i;
  }
}

int TreeIndex::build(const ConstituencyTree& t, int parent, TreePath& path) {
  const int me = size();
  nodes_.push_back(FlatNode{&t, parent, {}, path, 0, 0});
  if (t.is_leaf()) {
    const int tok = t.leaf_token_index().value_or(0);
    nodes_.back().first = tok;
    nodes_.back().last = tok;
    return me;
  }
  int first = 0;
  int last = 0;
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    path.push_back(static_cast<int>(i));
    const int c = build(t.children()[i], me, path);
    path.pop_back();
    nodes_[static_cast<std::size_t>(me)].children.push_back(c);
    const auto& cn = nodes_[static_cast<std::size_t>(c)];
    if (cn.first > 0) {
      if (first == 0 || cn.first < first) first = cn.first;
      last = std::max(last, cn.last);
    }
  }
  nodes_[static_cast<std::size_t>(me)].first = first;
  nodes_[static_cast<std::size_t>(me)].last = last;
  return me;
}

std::vector<int> TreeIndex::ancestors(int i) const {
  std::vector<int> out;
  for (int p = (*this)[i].parent; p >= 0; p = (*this)[p].parent) out.push_back(p);
  return out;
}

int TreeIndex::leaf_for_token(int token) const {
  if (token < 1 || static_cast<std::size_t>(token) >= token_leaf_.size()) return -1;
  return token_leaf_[static_cast<std::size_t>(token)];
}

int TreeIndex::first_child_with(int node, bool (*pred)(std::string_view), std::size_t from) const {
  const auto& kids = (*this)[node].children;
  for (std::size_t k = from; k < kids.size(); ++k) {
    if (pred((*this)[kids[k]].label())) return kids[k];
  }
  return -1;
}

std::vector<int> TreeIndex::leaves_under(int node) const {
  std::vector<int> out;
  std::vector<int> stack{node};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    const auto& fn = (*this)[n];
    if (fn.is_leaf()) {
      out.push_back(n);
      continue;
    }
    for (auto it = fn.children.rbegin(); it != fn.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

bool is_wh_category(std::string_view label) {
  return label == "WHNP" || label == "WHADVP" || label == "WHPP" || label == "WHADJP";
}

bool is_clause_label(std::string_view label) {
  return label == "S" || label == "SQ" || label == "SINV";
}

bool is_punct_tag(std::string_view label) {
  return label == "." || label == "," || label == ":" || label == "``" || label == "''" ||
         label == "-LRB-" || label == "-RRB-" || label == "HYPH" || label == "NFP" ||
         label == "$" || label == "#";
}

bool is_verb_tag(std::string_view label) {
  return label == "MD" || (label.size() >= 2 && label[0] == 'V' && label[1] == 'B');
}

bool is_empty_element(const TreeIndex& idx, int node) {
  auto leaves = idx.leaves_under(node);
  if (leaves.empty()) return false;
  return std::all_of(leaves.begin(), leaves.end(),
                     [&](int l) { return idx[l].label().rfind("-NONE-", 0) == 0; });
}

bool is_root_wrapper(std::string_view label) {
  return label.empty() || label == "TOP" || label == "ROOT" || label == "S" || label == "FRAG" ||
         label == "UCP" || label == "INTJ";
}

bool is_root_level(const TreeIndex& idx, int node) {
  for (int p = idx[node].parent; p >= 0; p = idx[p].parent) {
    if (!is_root_wrapper(idx[p].label())) return false;
  }
  return true;
}

bool np_precedes_vp(const TreeIndex& idx, int clause) {
  bool seen_np = false;
  for (int c : idx[clause].children) {
    const auto& lab = idx[c].label();
    if (is_empty_element(idx, c)) continue;
    if (lab == "NP") {
      seen_np = true;
      continue;
    }
    if (lab == "VP") {
      if (seen_np) return true;
      // Intermediate layer holding auxiliaries, e.g. (VP (MD should) (NP ..) (VP ..)).
      return np_precedes_vp(idx, c);
    }
    if (is_clause_label(lab) && !seen_np) return np_precedes_vp(idx, c);
  }
  return false;
}

int lowest_clause(const TreeIndex& idx, int clause) {
  int cur = clause;
  while (true) {
    const auto& kids = idx[cur].children;
    bool has_core = std::any_of(kids.begin(), kids.end(), [&](int c) {
      const auto& l = idx[c].label();
      return l == "VP" || l == "NP";
    });
    if (has_core) return cur;
    int next = idx.first_child_with(cur, &is_clause_label);
    if (next < 0) return cur;
    cur = next;
  }
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace fgd::detail
