#include "fgd/goldtraces.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <stdexcept>

#include "fgd/corpus.hpp"
#include "tree_index.hpp"

namespace fgd {

using detail::TreeIndex;

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

// "*T*" or "*T*-n"; returns the coindex (0 when absent), or nullopt when the
// word is not a movement trace.
std::optional<int> trace_word_index(std::string_view word) {
  constexpr std::string_view kTrace = "*T*";
  if (word.substr(0, kTrace.size()) != kTrace) return std::nullopt;
  auto rest = word.substr(kTrace.size());
  if (rest.empty()) return 0;
  if (rest[0] != '-' || !all_digits(rest.substr(1))) return std::nullopt;
  return std::stoi(std::string(rest.substr(1)));
}

int node_at(const TreeIndex& idx, const TreePath& path) {
  for (int i = 0; i < idx.size(); ++i) {
    if (idx[i].path == path) return i;
  }
  return -1;
}

bool is_adjunct_filler(std::string_view label) {
  return label == "WHADVP" || label == "WHPP" || label == "WHADJP";
}

bool has_possessive_wh(const TreeIndex& idx, int node) {
  for (int l : idx.leaves_under(node)) {
    if (idx[l].label() == "WP$") return true;
  }
  return false;
}

Label label_for(const std::string& construction, const std::string& site, bool cc) {
  if (construction == "matrix") {
    if (site == "subject") return cc ? Label::CC_SMQ : Label::SMQ;
    if (site == "object") return cc ? Label::CC_OMQ : Label::OMQ;
    return cc ? Label::CC_AMQ : Label::AMQ;
  }
  if (construction == "embedded") {
    if (site == "subject") return Label::SEQ;
    if (site == "object") return Label::OEQ;
    return Label::AEQ;
  }
  if (site == "subject") return Label::SRC;
  if (site == "object") return Label::ORC;
  if (site == "possessive") return Label::PRC;
  return Label::ARC;
}

GoldInference unknown(GoldInference g, std::string reason) {
  g.label.reset();
  g.reason = std::move(reason);
  return g;
}

}  // namespace

std::optional<int> coindex_of(const std::string& raw_label) {
  if (raw_label.empty() || raw_label[0] == '-') return std::nullopt;
  // Split on '-' and '=' after the category, keeping <...> groups whole.
  std::vector<std::string> parts;
  std::string cur;
  int angle = 0;
  for (std::size_t i = 0; i < raw_label.size(); ++i) {
    char c = raw_label[i];
    if (c == '<') ++angle;
    if (c == '>' && angle > 0) --angle;
    if (angle == 0 && i > 0 && (c == '-' || c == '=')) {
      parts.push_back(cur);
      cur.clear();
      continue;
    }
    cur += c;
  }
  parts.push_back(cur);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (all_digits(parts[i])) return std::stoi(parts[i]);
  }
  return std::nullopt;
}

TraceExtraction extract_traces(const ConstituencyTree& tree) {
  TreeIndex idx(tree);
  TraceExtraction out;
  for (int i = 0; i < idx.size(); ++i) {
    const auto& n = idx[i];
    if (!n.is_leaf() || n.tree->raw_label().rfind("-NONE-", 0) != 0) continue;
    auto ti = trace_word_index(n.tree->word());
    if (!ti) continue;
    const std::string& kind = n.tree->raw_label();
    if (*ti == 0) {
      out.unmatched.push_back({0, kind, n.path, "trace carries no coindex"});
      continue;
    }
    int filler = -1;
    for (int j = 0; j < idx.size(); ++j) {
      if (j == i || idx[j].tree->raw_label().rfind("-NONE-", 0) == 0) continue;
      if (coindex_of(idx[j].tree->raw_label()) != *ti) continue;
      if (filler < 0 || (detail::is_wh_category(idx[j].label()) &&
                         !detail::is_wh_category(idx[filler].label()))) {
        filler = j;
      }
    }
    if (filler < 0) {
      out.unmatched.push_back(
          {*ti, kind, n.path, "no filler with coindex " + std::to_string(*ti)});
      continue;
    }
    TraceSite site;
    site.trace_index = *ti;
    site.gap_parent_label = n.parent >= 0 ? idx[n.parent].label() : std::string();
    site.filler_path = idx[filler].path;
    site.filler_category = idx[filler].label();
    site.trace_kind = kind;
    site.trace_path = n.path;
    out.sites.push_back(std::move(site));
  }
  return out;
}

GoldInference infer_gold_label(const ConstituencyTree& tree, const TraceSite& site,
                               const GoldOptions& options) {
  GoldInference g;
  g.construction = "unknown";
  g.site = "unknown";
  g.trace = site;

  const bool wh_kind = site.trace_kind.rfind(kWhTraceKind, 0) == 0;
  const bool rc_kind = options.rc_traces && !options.rc_trace_pattern.empty() &&
                       site.trace_kind.find(options.rc_trace_pattern) != std::string::npos;
  if (!wh_kind && !rc_kind) return unknown(g, "trace kind " + site.trace_kind + " not counted");

  TreeIndex idx(tree);
  const int filler = node_at(idx, site.filler_path);
  const int trace = node_at(idx, site.trace_path);
  if (filler < 0 || trace < 0) return unknown(g, "site does not belong to this tree");
  const int parent = idx[filler].parent;
  if (parent < 0) return unknown(g, "filler is the root");

  const auto& plabel = idx[parent].label();
  if (plabel == "SBARQ" && detail::is_root_level(idx, parent)) {
    g.construction = "matrix";
  } else if (plabel == "SBAR" && idx[parent].parent >= 0) {
    const int gp = idx[parent].parent;
    const auto& glabel = idx[gp].label();
    if (glabel == "VP") {
      g.construction = "embedded";
    } else if (glabel == "NP") {
      const auto& kids = idx[gp].children;
      auto pos = std::find(kids.begin(), kids.end(), parent) - kids.begin();
      for (auto k = pos - 1; k >= 0; --k) {
        const auto& l = idx[kids[static_cast<std::size_t>(k)]].label();
        if (detail::is_punct_tag(l)) continue;
        if (l == "NP") g.construction = "relative";
        break;
      }
    }
  }
  if (g.construction == "unknown") return unknown(g, "filler parent " + plabel + " not classified");

  const auto& fcat = site.filler_category;
  const auto& gap = site.gap_parent_label;
  if (is_adjunct_filler(fcat) || gap == "ADVP" || gap == "PP") {
    g.site = "adjunct";
    g.label = label_for(g.construction, g.site, false);
    return g;
  }
  if (fcat != "WHNP" || gap != "NP") {
    return unknown(g, "filler " + fcat + " with gap under " + gap + " not classified");
  }
  if (g.construction == "relative" && has_possessive_wh(idx, filler)) {
    g.site = "possessive";
    g.label = label_for(g.construction, g.site, false);
    return g;
  }

  const auto& pkids = idx[parent].children;
  const auto fpos =
      static_cast<std::size_t>(std::find(pkids.begin(), pkids.end(), filler) - pkids.begin());
  const int sister = idx.first_child_with(parent, &detail::is_clause_label, fpos + 1);
  if (sister < 0) return unknown(g, "no clause follows the filler");

  int clause = -1;
  for (int a : idx.ancestors(trace)) {
    if (detail::is_clause_label(idx[a].label())) {
      clause = a;
      break;
    }
  }
  bool inside = false;
  for (int a = clause; a >= 0; a = idx[a].parent) {
    if (a == sister) inside = true;
  }
  if (clause < 0 || !inside) return unknown(g, "trace lies outside the filler's sister clause");

  g.site = detail::np_precedes_vp(idx, clause) ? "object" : "subject";
  const bool cc = g.construction == "matrix" && clause != detail::lowest_clause(idx, sister);
  g.label = label_for(g.construction, g.site, cc);
  return g;
}

GoldCorpusResult gold_label_corpus(const std::vector<GoldTree>& trees, const GoldOptions& options) {
  GoldCorpusResult out;
  for (const auto& t : trees) {
    if (out.labels.count(t.id)) {
      out.diagnostics.push_back({t.id, t.line, "duplicate id; labels merged"});
    }
    auto& set = out.labels[t.id];
    auto ex = extract_traces(t.tree);
    for (const auto& u : ex.unmatched) {
      ++out.n_unmatched;
      out.diagnostics.push_back({t.id, t.line, "unmatched trace: " + u.reason});
    }
    for (const auto& s : ex.sites) {
      ++out.n_sites;
      auto g = infer_gold_label(t.tree, s, options);
      if (g.known()) {
        set.insert(*g.label);
      } else {
        ++out.n_unknown;
        out.diagnostics.push_back(
            {t.id, t.line, "unknown (trace " + std::to_string(s.trace_index) + "): " + g.reason});
      }
    }
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

GoldTreeFile read_gold_trees(std::istream& in, bool strict) {
  GoldTreeFile out;
  std::string buffer;
  std::string id;
  int start = 0;
  int depth = 0;
  int ordinal = 0;
  int line_no = 0;

  auto finish = [&](const char* failure) {
    ++ordinal;
    std::string name = id.empty() ? "tree-" + std::to_string(ordinal) : id;
    std::string message;
    if (failure) {
      message = failure;
    } else {
      try {
        out.trees.push_back({name, parse_bracketed(buffer), start});
      } catch (const BracketParseError& e) {
        message = e.what();
      }
    }
    if (!message.empty()) {
      if (strict) throw CorpusError(static_cast<std::size_t>(start), name + ": " + message);
      out.malformed.push_back({name, start, message});
    }
    buffer.clear();
    id.clear();
    depth = 0;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    const auto tab = line.find('\t');
    const auto paren = line.find('(');
    const bool has_id = tab != std::string::npos && (paren == std::string::npos || tab < paren);
    if (has_id && !buffer.empty()) finish("unterminated tree");
    if (buffer.empty()) {
      if (trim(line).empty()) continue;
      start = line_no;
      if (has_id) {
        id = trim(std::string_view(line).substr(0, tab));
        body = std::string_view(line).substr(tab + 1);
      }
    } else if (trim(line).empty()) {
      finish("unterminated tree");
      continue;
    }
    buffer.append(body);
    buffer.push_back('\n');
    for (char c : body) {
      if (c == '(') ++depth;
      if (c == ')') --depth;
    }
    if (depth < 0) {
      finish("unbalanced ')'");
    } else if (depth == 0) {
      finish(nullptr);
    }
  }
  if (!buffer.empty()) finish("unterminated tree");
  return out;
}

GoldTreeFile read_gold_trees(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_gold_trees(in, strict);
}

}  // namespace fgd
