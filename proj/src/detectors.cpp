#include "fgd/detectors.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string_view>

#include "tree_index.hpp"

namespace fgd {

using detail::FlatNode;
using detail::TreeIndex;
using detail::is_clause_label;
using detail::is_punct_tag;
using detail::is_verb_tag;
using detail::is_wh_category;
using detail::lowercase;

EmbeddingVerbLexicon::EmbeddingVerbLexicon()
    : lemmas_{"know",   "see",    "tell",       "look",   "remember", "wonder",
              "guess",  "ask",    "say",        "forget", "figure",   "understand",
              "decide", "show",   "watch",      "hear",   "think"} {}

EmbeddingVerbLexicon::EmbeddingVerbLexicon(std::set<std::string> lemmas) {
  for (const auto& l : lemmas) lemmas_.insert(lowercase(l));
  if (lemmas_.empty()) throw std::invalid_argument("embedding-verb lexicon must not be empty");
}

EmbeddingVerbLexicon EmbeddingVerbLexicon::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon '" + path + "'");
  std::set<std::string> lemmas;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    lemmas.insert(line.substr(b, e - b + 1));
  }
  return EmbeddingVerbLexicon(std::move(lemmas));
}

FreeRelativeExclusions::FreeRelativeExclusions()
    : words_{"whatever", "whoever", "whomever", "whichever", "whenever", "wherever"} {}

FreeRelativeExclusions::FreeRelativeExclusions(std::set<std::string> words) {
  for (const auto& w : words) words_.insert(lowercase(w));
}

namespace {

bool is_subject_rel(std::string_view r) {
  return r == "nsubj" || r == "nsubjpass" || r == "csubj" || r == "csubjpass";
}

bool is_object_rel(std::string_view r) {
  return r == "dobj" || r == "obj" || r == "iobj" || r == "pobj" || r == "attr" ||
         r == "dative" || r == "oprd";
}

bool is_complement_rel(std::string_view r) { return r == "ccomp" || r == "xcomp"; }

bool is_adjunct_filler(std::string_view label) {
  return label == "WHADVP" || label == "WHPP" || label == "WHADJP";
}

bool is_np(std::string_view label) { return label == "NP"; }
bool is_vp_or_clause(std::string_view label) { return label == "VP" || is_clause_label(label); }

bool is_skippable_lead(std::string_view label) {
  return is_punct_tag(label) || label == "INTJ" || label == "CC" || label == "UH";
}

class Analysis {
 public:
  explicit Analysis(const ParsedUtterance& utt)
      : utt_(utt), idx_(utt.constituency), g_(utt.dependency),
        n_(static_cast<int>(utt.tokens.size())) {}

  const TreeIndex& idx() const { return idx_; }
  const DependencyGraph& graph() const { return g_; }
  int n() const { return n_; }

  std::string_view pos(int t) const {
    if (t < 1 || t > n_) return {};
    return utt_.tokens[static_cast<std::size_t>(t - 1)].pos;
  }
  std::string word_lower(int t) const {
    if (t < 1 || t > n_) return {};
    return lowercase(utt_.tokens[static_cast<std::size_t>(t - 1)].text);
  }
  std::string lemma_lower(int t) const {
    if (t < 1 || t > n_) return {};
    const auto& tok = utt_.tokens[static_cast<std::size_t>(t - 1)];
    return lowercase(tok.lemma.empty() ? tok.text : tok.lemma);
  }
  int head(int t) const { return g_.head_of(t); }
  std::string_view rel(int t) const { return g_.relation_of(t); }

  bool root_level(int node) const { return is_root_level(idx_, node); }

  int first_content_child(int node, std::size_t from = 0) const {
    const auto& kids = idx_[node].children;
    for (std::size_t k = from; k < kids.size(); ++k) {
      if (!is_skippable_lead(idx_[kids[k]].label())) return kids[k];
    }
    return -1;
  }

  std::size_t child_position(int parent, int child) const {
    const auto& kids = idx_[parent].children;
    return static_cast<std::size_t>(std::find(kids.begin(), kids.end(), child) - kids.begin());
  }

  // Token of the phrase whose head lies outside the phrase.
  int phrase_head(TokenSpan span) const {
    for (int t = span.first; t <= span.last; ++t) {
      int h = head(t);
      if (h < span.first || h > span.last) return t;
    }
    return -1;
  }

  // Nearest verb at or above a token on the head chain.
  int nearest_verb(int t) const {
    for (int steps = 0; t > 0 && steps <= n_; ++steps) {
      if (is_verb_tag(pos(t))) return t;
      t = head(t);
    }
    return -1;
  }

  bool under_complement(int verb) const {
    for (int steps = 0, t = verb; t > 0 && steps <= n_; ++steps) {
      if (is_complement_rel(rel(t))) return true;
      t = head(t);
    }
    return false;
  }

  bool has_subject_outside(int governor, TokenSpan span) const {
    for (int d : g_.children(governor)) {
      if ((d < span.first || d > span.last) && is_subject_rel(rel(d))) return true;
    }
    return false;
  }

  // Relative-clause verb: a clause token that attaches to the modified noun
  // phrase with relcl (or acl).
  int rc_verb(int np_child, int clause_node) const {
    const auto& np = idx_[np_child];
    const auto& cl = idx_[clause_node];
    if (np.first == 0 || cl.first == 0) return -1;
    for (int t = cl.first; t <= cl.last; ++t) {
      int h = head(t);
      auto r = rel(t);
      if ((r == "relcl" || r == "acl") && np.covers(h)) return t;
    }
    return -1;
  }

  // Object or subject reading of a WHNP gap. Dependency evidence decides when
  // it is informative; otherwise the NP-before-VP test does.
  bool object_gap(int clause, TokenSpan filler, std::vector<std::string>& ev) const {
    const bool constituency_object = clause >= 0 && detail::np_precedes_vp(idx_, clause);
    ev.push_back(constituency_object ? "cons:np-before-vp" : "cons:no-np-before-vp");
    std::optional<bool> dependency_object;
    if (int h = phrase_head(filler); h > 0) {
      auto r = rel(h);
      int gov = head(h);
      if (is_subject_rel(r)) {
        dependency_object = false;
        ev.push_back("dep:wh-" + std::string(r));
      } else if (gov > 0 && has_subject_outside(gov, filler)) {
        dependency_object = true;
        ev.push_back("dep:governor-has-subject");
      } else if (is_object_rel(r)) {
        dependency_object = true;
        ev.push_back("dep:wh-" + std::string(r));
      }
    }
    if (dependency_object && *dependency_object != constituency_object) {
      ev.push_back("site:dependency-over-constituency");
    }
    return dependency_object.value_or(constituency_object);
  }

  TokenSpan span_of(int node) const { return {idx_[node].first, idx_[node].last}; }

  bool any_leaf(int node, bool (*pred)(const FlatNode&, const Analysis&)) const {
    for (int l : idx_.leaves_under(node)) {
      if (pred(idx_[l], *this)) return true;
    }
    return false;
  }

 private:
  const ParsedUtterance& utt_;
  TreeIndex idx_;
  const DependencyGraph& g_;
  int n_;
};

bool is_possessive_wh(const FlatNode& leaf, const Analysis& a) {
  return leaf.label() == "WP$" || a.word_lower(leaf.first) == "whose";
}

bool is_polar_marker(const FlatNode& leaf, const Analysis& a) {
  auto w = a.word_lower(leaf.first);
  return w == "whether" || w == "if";
}

bool is_aux_lemma(const std::string& lemma) {
  static const std::set<std::string> aux = {"be",   "do",    "have",   "will",  "would",
                                            "can",  "could", "shall",  "should", "may",
                                            "might", "must", "'ll",   "'d",    "wo",
                                            "ca",   "is",    "are",    "was",   "were",
                                            "am",   "did",   "does",   "has",   "had"};
  return aux.count(lemma) > 0;
}

Detection make(Label label, const FlatNode& clause, std::optional<TokenSpan> filler,
               std::vector<std::string> ev) {
  return Detection{label, filler, clause.path, std::move(ev)};
}

void matrix_wh_questions(const Analysis& a, std::vector<Detection>& out) {
  const auto& idx = a.idx();
  for (int node = 0; node < idx.size(); ++node) {
    if (idx[node].label() != "SBARQ" || !a.root_level(node)) continue;
    int filler = a.first_content_child(node);
    if (filler < 0 || !is_wh_category(idx[filler].label())) continue;
    const auto pos = a.child_position(node, filler);
    int sister = idx.first_child_with(node, &is_vp_or_clause, pos + 1);
    if (sister < 0) continue;  // bare wh-phrase: handled as a fragment

    const TokenSpan span = a.span_of(filler);
    std::vector<std::string> ev{"matrix:sbarq-" + idx[filler].label()};
    int h = a.phrase_head(span);
    const auto& sq = idx[sister];
    if (h > 0 && sq.covers(a.head(h))) {
      ev.push_back("dep:wh-attaches-into-clause");
    } else {
      ev.push_back("dep:wh-attachment-unconfirmed");
    }
    int gap_verb = h > 0 ? a.nearest_verb(a.head(h)) : -1;
    const bool cc = gap_verb > 0 && a.under_complement(gap_verb);
    if (cc) ev.push_back("dep:gap-below-complement");

    Label label;
    if (is_adjunct_filler(idx[filler].label())) {
      label = cc ? Label::CC_AMQ : Label::AMQ;
    } else {
      const int clause = detail::lowest_clause(idx, sister);
      const bool object = a.object_gap(clause, span, ev);
      if (object) {
        label = cc ? Label::CC_OMQ : Label::OMQ;
      } else {
        label = cc ? Label::CC_SMQ : Label::SMQ;
      }
    }
    out.push_back(make(label, idx[node], span, std::move(ev)));
  }
}

void polar_matrix_questions(const Analysis& a, std::vector<Detection>& out) {
  const auto& idx = a.idx();
  for (int node = 0; node < idx.size(); ++node) {
    if (idx[node].label() != "SQ" || !a.root_level(node)) continue;
    int lead = a.first_content_child(node);
    if (lead < 0 || !idx[lead].is_leaf() || !is_verb_tag(idx[lead].label())) continue;
    const int tok = idx[lead].first;
    if (idx[lead].label() != "MD" && !is_aux_lemma(a.lemma_lower(tok)) &&
        !is_aux_lemma(a.word_lower(tok))) {
      continue;
    }
    int subj = idx.first_child_with(node, &is_np, a.child_position(node, lead) + 1);
    if (subj < 0 || detail::is_empty_element(idx, subj)) continue;
    out.push_back(make(Label::PMQ, idx[node], std::nullopt, {"matrix:root-sq-aux-inversion"}));
  }
}

void plain_questions(const Analysis& a, std::vector<Detection>& out) {
  const auto& idx = a.idx();
  if (a.n() == 0 || a.n() > 3) return;
  int first = 0;
  int last = 0;
  for (int t = 1; t <= a.n(); ++t) {
    int leaf = idx.leaf_for_token(t);
    bool punct = is_punct_tag(a.pos(t)) || (leaf >= 0 && is_punct_tag(idx[leaf].label()));
    if (punct) continue;
    if (first == 0) first = t;
    if (last != 0 && t != last + 1) return;  // content must be contiguous
    last = t;
  }
  if (first == 0) return;

  std::optional<std::string> evidence;
  for (int node = 0; node < idx.size(); ++node) {
    if (is_wh_category(idx[node].label()) && idx[node].first == first && idx[node].last == last) {
      evidence = "plain:wh-phrase-yield";
      break;
    }
  }
  if (!evidence && first == last && !a.pos(first).empty() && a.pos(first).front() == 'W') {
    evidence = "plain:single-wh-word";
  }
  if (!evidence) return;

  int clause = 0;
  while ((idx[clause].label().empty() || idx[clause].label() == "TOP" ||
          idx[clause].label() == "ROOT") &&
         idx[clause].children.size() == 1 && !idx[idx[clause].children[0]].is_leaf()) {
    clause = idx[clause].children[0];
  }
  out.push_back(make(Label::PlainMQ, idx[clause], TokenSpan{first, last}, {*evidence}));
}

void embedded_questions(const Analysis& a, const EmbeddingVerbLexicon& lexicon,
                        const FreeRelativeExclusions& exclusions, std::vector<Detection>& out) {
  const auto& idx = a.idx();
  for (int vp = 0; vp < idx.size(); ++vp) {
    if (idx[vp].label() != "VP") continue;
    const auto& kids = idx[vp].children;
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const int sbar = kids[k];
      if (idx[sbar].label() != "SBAR") continue;
      int lead = a.first_content_child(sbar);
      if (lead < 0) continue;
      const auto& lead_label = idx[lead].label();
      const bool wh = is_wh_category(lead_label);
      bool polar = false;
      if (idx[lead].is_leaf()) {
        polar = (lead_label == "IN" || lead_label == "CC") && is_polar_marker(idx[lead], a);
      } else if (wh) {
        polar = a.any_leaf(lead, &is_polar_marker);
      }
      if (!wh && !polar) continue;

      int verb = -1;
      for (std::size_t j = k; j-- > 0;) {
        const auto& c = idx[kids[j]];
        if (c.is_leaf() && is_verb_tag(c.label())) {
          verb = c.first;
          break;
        }
      }
      if (verb < 0 || !lexicon.contains(a.lemma_lower(verb))) continue;

      bool excluded = false;
      for (int l : idx.leaves_under(sbar)) {
        if (exclusions.contains(a.word_lower(idx[l].first))) {
          excluded = true;
          break;
        }
      }
      if (excluded) continue;

      int clause = idx.first_child_with(sbar, &is_clause_label, a.child_position(sbar, lead) + 1);
      if (clause < 0) continue;
      clause = detail::lowest_clause(idx, clause);

      const TokenSpan span = a.span_of(lead);
      const int h = a.phrase_head(span);
      if (h <= 0 || h == verb || !a.graph().dominates(verb, h)) continue;

      std::vector<std::string> ev{"embedded:vp-sbar", "lexicon:" + a.lemma_lower(verb),
                                  "dep:wh-under-selecting-verb"};
      Label label;
      if (polar) {
        ev.push_back("embedded:whether-if");
        label = Label::PEQ;
      } else if (is_adjunct_filler(lead_label)) {
        label = Label::AEQ;
      } else {
        label = a.object_gap(clause, span, ev) ? Label::OEQ : Label::SEQ;
      }
      out.push_back(make(label, idx[sbar], span, std::move(ev)));
    }
  }
}

bool missing_object(const Analysis& a, int verb) {
  for (int d : a.graph().children(verb)) {
    auto r = a.rel(d);
    if (r == "dobj" || r == "obj") return false;
  }
  const auto& idx = a.idx();
  int leaf = idx.leaf_for_token(verb);
  if (leaf < 0) return true;
  int vp = idx[leaf].parent;
  if (vp < 0 || idx[vp].label() != "VP") return true;
  for (int c : idx[vp].children) {
    if (idx[c].label() == "NP" && !detail::is_empty_element(idx, c)) return false;
  }
  return true;
}

void relative_clauses(const Analysis& a, std::vector<Detection>& out) {
  const auto& idx = a.idx();
  for (int np = 0; np < idx.size(); ++np) {
    if (idx[np].label() != "NP") continue;
    const auto& kids = idx[np].children;
    for (std::size_t k = 0; k + 1 < kids.size(); ++k) {
      const int head_np = kids[k];
      const int mod = kids[k + 1];
      if (idx[head_np].label() != "NP") continue;
      const auto& mod_label = idx[mod].label();

      if (mod_label == "SBAR" || mod_label == "S") {
        int lead = mod_label == "SBAR" ? a.first_content_child(mod) : -1;
        if (lead >= 0 && is_wh_category(idx[lead].label())) {
          int clause =
              idx.first_child_with(mod, &is_clause_label, a.child_position(mod, lead) + 1);
          if (clause < 0) continue;
          clause = detail::lowest_clause(idx, clause);
          const int verb = a.rc_verb(head_np, mod);
          if (verb < 0) continue;
          const TokenSpan span = a.span_of(lead);
          const int h = a.phrase_head(span);
          if (h <= 0 || !a.graph().dominates(verb, h)) continue;

          std::vector<std::string> ev{"rc:np-np-sbar", "rc:" + idx[lead].label(),
                                      "dep:relcl-to-modified-noun"};
          Label label;
          if (a.any_leaf(lead, &is_possessive_wh)) {
            label = Label::PRC;
          } else if (is_adjunct_filler(idx[lead].label())) {
            label = Label::ARC;
          } else {
            label = a.object_gap(clause, span, ev) ? Label::ORC : Label::SRC;
          }
          out.push_back(make(label, idx[mod], span, std::move(ev)));
          continue;
        }

        // No wh-phrase: zero or "that" relativizer followed by a filled subject.
        int clause = mod;
        std::optional<TokenSpan> comp;
        if (mod_label == "SBAR") {
          if (lead < 0) continue;
          if (idx[lead].is_leaf()) {
            auto w = a.word_lower(idx[lead].first);
            if (w != "that" && w != "who") continue;
            comp = a.span_of(lead);
            clause = idx.first_child_with(mod, &is_clause_label, a.child_position(mod, lead) + 1);
          } else if (is_clause_label(idx[lead].label())) {
            clause = lead;
          } else {
            continue;
          }
          if (clause < 0) continue;
        }
        clause = detail::lowest_clause(idx, clause);
        if (!detail::np_precedes_vp(idx, clause)) continue;
        const int verb = a.rc_verb(head_np, mod);
        if (verb < 0 || !missing_object(a, verb)) continue;
        out.push_back(make(Label::ORC_reduced, idx[mod], comp,
                           {"rc:reduced-np-np-" + mod_label, "cons:np-before-vp",
                            "dep:relcl-to-modified-noun", "dep:verb-lacks-object"}));
      } else if (mod_label == "VP") {
        int lead = a.first_content_child(mod);
        if (lead < 0 || !idx[lead].is_leaf()) continue;
        const auto& tag = idx[lead].label();
        if (tag != "VBN" && tag != "VBG") continue;
        const int participle = idx[lead].first;
        auto r = a.rel(participle);
        if ((r != "acl" && r != "relcl") || !idx[head_np].covers(a.head(participle))) continue;
        out.push_back(make(Label::SRC_reduced, idx[mod], std::nullopt,
                           {"rc:participial-np-np-vp", "rc:" + tag, "dep:acl-to-modified-noun"}));
      }
    }
  }
}

bool preorder_then_label(const Detection& x, const Detection& y) {
  if (x.clause_node != y.clause_node) return x.clause_node < y.clause_node;
  return x.label < y.label;
}

void canonicalize(std::vector<Detection>& d) {
  std::stable_sort(d.begin(), d.end(), preorder_then_label);
  d.erase(std::unique(d.begin(), d.end(),
                      [](const Detection& x, const Detection& y) {
                        return x.label == y.label && x.clause_node == y.clause_node;
                      }),
          d.end());
}

}  // namespace

std::vector<Detection> detect_relative_clauses(const ParsedUtterance& utt) {
  Analysis a(utt);
  std::vector<Detection> out;
  relative_clauses(a, out);
  canonicalize(out);
  return out;
}

std::vector<Detection> detect_matrix_questions(const ParsedUtterance& utt) {
  Analysis a(utt);
  std::vector<Detection> out;
  matrix_wh_questions(a, out);
  polar_matrix_questions(a, out);
  plain_questions(a, out);
  canonicalize(out);
  return out;
}

std::vector<Detection> detect_embedded_questions(const ParsedUtterance& utt,
                                                 const EmbeddingVerbLexicon& lexicon,
                                                 const FreeRelativeExclusions& exclusions) {
  Analysis a(utt);
  std::vector<Detection> out;
  embedded_questions(a, lexicon, exclusions, out);
  canonicalize(out);
  return out;
}

std::vector<Detection> detect_all(const ParsedUtterance& utt, const EmbeddingVerbLexicon& lexicon,
                                  const FreeRelativeExclusions& exclusions) {
  Analysis a(utt);
  std::vector<Detection> out;
  matrix_wh_questions(a, out);
  polar_matrix_questions(a, out);
  plain_questions(a, out);
  embedded_questions(a, lexicon, exclusions, out);
  relative_clauses(a, out);
  canonicalize(out);
  return out;
}

LabelSet labels_of(const std::vector<Detection>& detections) {
  LabelSet out;
  for (const auto& d : detections) out.insert(d.label);
  return out;
}

nlohmann::ordered_json detections_to_json(const std::string& utterance_id,
                                          const std::vector<Detection>& detections) {
  nlohmann::ordered_json out;
  out["utterance_id"] = utterance_id;
  auto labels = nlohmann::ordered_json::array();
  for (Label l : labels_of(detections)) labels.push_back(std::string(to_string(l)));
  out["labels"] = std::move(labels);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& d : detections) {
    nlohmann::ordered_json j;
    j["label"] = std::string(to_string(d.label));
    if (d.filler_span) {
      j["filler_span"] = {d.filler_span->first, d.filler_span->last};
    } else {
      j["filler_span"] = nullptr;
    }
    j["clause_path"] = d.clause_node;
    j["evidence"] = d.evidence;
    arr.push_back(std::move(j));
  }
  out["detections"] = std::move(arr);
  return out;
}

}  // namespace fgd
