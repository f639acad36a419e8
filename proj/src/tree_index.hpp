#pragma once

// Flattened preorder view of a ConstituencyTree with parent links and token
// spans. Internal to the library.

#include <string>
#include <string_view>
#include <vector>

#include "fgd/parsetree.hpp"

namespace fgd::detail {

struct FlatNode {
  const ConstituencyTree* tree = nullptr;
  int parent = -1;
  std::vector<int> children;
  TreePath path;
  int first = 0;  // token span, inclusive; 0 when the node yields nothing
  int last = 0;

  const std::string& label() const { return tree->label(); }
  bool is_leaf() const { return tree->is_leaf(); }
  bool covers(int token) const { return first > 0 && token >= first && token <= last; }
};

class TreeIndex {
 public:
  explicit TreeIndex(const ConstituencyTree& tree);

  const FlatNode& operator[](int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Proper ancestors from parent upward.
  std::vector<int> ancestors(int i) const;
  // Leaf node holding a token index, or -1.
  int leaf_for_token(int token) const;
  // Children of `node` from position `from` on.
  int first_child_with(int node, bool (*pred)(std::string_view), std::size_t from = 0) const;
  // All leaf nodes under `node`, left to right.
  std::vector<int> leaves_under(int node) const;

 private:
  int build(const ConstituencyTree& t, int parent, TreePath& path);

  std::vector<FlatNode> nodes_;
  std::vector<int> token_leaf_;
};

bool is_wh_category(std::string_view label);
bool is_clause_label(std::string_view label);    // S, SQ, SINV
bool is_punct_tag(std::string_view label);
bool is_verb_tag(std::string_view label);        // VB*, MD
bool is_empty_element(const TreeIndex& idx, int node);  // yields only -NONE- leaves

// Labels that may sit above a root-level question: wrappers, fragments and
// coordinations, but never a VP, NP or SBAR.
bool is_root_wrapper(std::string_view label);
// Every proper ancestor of `node` is a root wrapper.
bool is_root_level(const TreeIndex& idx, int node);

// Subject-position test: does an overt NP precede the VP in this clause,
// descending through unary and auxiliary layers?
bool np_precedes_vp(const TreeIndex& idx, int clause);

// Descends from an S-like node through S-only layers to the lowest clause.
int lowest_clause(const TreeIndex& idx, int clause);

std::string lowercase(std::string_view s);

}  // namespace fgd::detail
