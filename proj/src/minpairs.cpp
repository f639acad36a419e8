#include "fgd/minpairs.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "format.hpp"
#include "random.hpp"

namespace fgd {

namespace {

struct SlotRef {
  std::string name;
  std::string field = "form";
  bool cap = false;
};

// Splits a skeleton into literal text and slot references.
struct Piece {
  std::string text;
  std::optional<SlotRef> slot;
};

std::vector<Piece> tokenize_skeleton(const std::string& s, const std::string& where) {
  std::vector<Piece> out;
  std::string lit;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '}') throw std::invalid_argument(where + ": stray '}'");
    if (s[i] != '{') {
      lit += s[i];
      continue;
    }
    auto close = s.find('}', i);
    if (close == std::string::npos) throw std::invalid_argument(where + ": unclosed '{'");
    std::string body = s.substr(i + 1, close - i - 1);
    SlotRef ref;
    auto colon = body.find(':');
    if (colon != std::string::npos) {
      if (body.substr(colon + 1) != "cap") {
        throw std::invalid_argument(where + ": unknown modifier in {" + body + "}");
      }
      ref.cap = true;
      body = body.substr(0, colon);
    }
    auto dot = body.find('.');
    if (dot != std::string::npos) {
      ref.field = body.substr(dot + 1);
      body = body.substr(0, dot);
    }
    if (body.empty() || ref.field.empty()) {
      throw std::invalid_argument(where + ": empty slot reference");
    }
    ref.name = body;
    if (!lit.empty()) out.push_back({lit, std::nullopt});
    lit.clear();
    out.push_back({"", ref});
    i = close;
  }
  if (!lit.empty()) out.push_back({lit, std::nullopt});
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(' ');
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(' ');
  return s.substr(b, e - b + 1);
}

std::pair<std::string, std::string> split_skeleton(const std::string& s, const std::string& where) {
  auto bar = s.find('|');
  if (bar == std::string::npos || s.find('|', bar + 1) != std::string::npos) {
    throw std::invalid_argument(where + ": skeleton needs exactly one '|'");
  }
  return {trim(s.substr(0, bar)), trim(s.substr(bar + 1))};
}

std::string render(const std::string& text, const std::map<std::string, LexEntry>& binding,
                   const std::string& where) {
  std::string out;
  for (const auto& p : tokenize_skeleton(text, where)) {
    if (!p.slot) {
      out += p.text;
      continue;
    }
    auto b = binding.find(p.slot->name);
    if (b == binding.end()) throw std::invalid_argument(where + ": unbound slot " + p.slot->name);
    auto f = b->second.find(p.slot->field);
    if (f == b->second.end()) {
      throw std::invalid_argument(where + ": slot " + p.slot->name + " has no field " +
                                  p.slot->field);
    }
    std::string v = f->second;
    if (p.slot->cap && !v.empty()) {
      v[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(v[0])));
    }
    out += v;
  }
  return out;
}

Sentence render_sentence(const std::string& skeleton,
                         const std::map<std::string, LexEntry>& binding, const std::string& where) {
  auto [ctx, cont] = split_skeleton(skeleton, where);
  return {render(ctx, binding, where), render(cont, binding, where)};
}

const std::string& skeleton(const PairTemplate& t, int k) {
  switch (k) {
    case 0:
      return t.grammatical_gap;
    case 1:
      return t.ungrammatical_gap;
    case 2:
      return t.grammatical_filled;
    default:
      return t.ungrammatical_filled;
  }
}

constexpr std::array<const char*, 4> kSkeletonKeys = {"grammatical_gap", "ungrammatical_gap",
                                                      "grammatical_filled", "ungrammatical_filled"};

}  // namespace

std::string Sentence::text() const {
  if (context.empty()) return continuation;
  if (continuation.empty()) return context;
  return context + " " + continuation;
}

std::vector<PairTemplate> templates_from_json(const nlohmann::json& j) {
  std::vector<PairTemplate> out;
  std::set<std::string> ids;
  for (const auto& tj : j.at("templates")) {
    PairTemplate t;
    t.template_id = tj.at("template_id").get<std::string>();
    const std::string where = "template " + t.template_id;
    if (!ids.insert(t.template_id).second) throw std::invalid_argument(where + ": duplicate id");
    auto fam = family_from_string(tj.at("construction").get<std::string>());
    if (!fam) throw std::invalid_argument(where + ": unknown construction");
    t.construction = *fam;
    t.site = tj.at("site").get<std::string>();
    if (t.site != "subject" && t.site != "object") {
      throw std::invalid_argument(where + ": site must be subject or object");
    }
    if (t.construction == Family::RC && t.site == "subject") {
      throw std::invalid_argument(where + ": subject relative-clause pairs are not generated");
    }
    for (const auto& [name, cls] : tj.at("slots").items()) t.slots[name] = cls.get<std::string>();
    t.grammatical_gap = tj.at(kSkeletonKeys[0]).get<std::string>();
    t.ungrammatical_gap = tj.at(kSkeletonKeys[1]).get<std::string>();
    t.grammatical_filled = tj.at(kSkeletonKeys[2]).get<std::string>();
    t.ungrammatical_filled = tj.at(kSkeletonKeys[3]).get<std::string>();

    std::array<std::pair<std::string, std::string>, 4> parts;
    for (int k = 0; k < 4; ++k) {
      const std::string w = where + " " + kSkeletonKeys[static_cast<std::size_t>(k)];
      parts[static_cast<std::size_t>(k)] = split_skeleton(skeleton(t, k), w);
      for (const auto& p : tokenize_skeleton(skeleton(t, k), w)) {
        if (p.slot && !t.slots.count(p.slot->name)) {
          throw std::invalid_argument(w + ": undeclared slot " + p.slot->name);
        }
      }
    }
    for (int pair = 0; pair < 2; ++pair) {
      const auto& g = parts[static_cast<std::size_t>(2 * pair)];
      const auto& u = parts[static_cast<std::size_t>(2 * pair + 1)];
      if (g.second != u.second) {
        throw std::invalid_argument(where + ": pair " + std::to_string(pair) +
                                    " continuations differ");
      }
      if (g.first == u.first) {
        throw std::invalid_argument(where + ": pair " + std::to_string(pair) +
                                    " contexts are identical");
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<PairTemplate> read_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return templates_from_json(nlohmann::json::parse(in));
}

Lexicon lexicon_from_json(const nlohmann::json& j) {
  Lexicon lex;
  for (const auto& [cls, entries] : j.items()) {
    auto& v = lex[cls];
    for (const auto& e : entries) {
      LexEntry entry;
      if (e.is_string()) {
        entry["form"] = e.get<std::string>();
      } else {
        for (const auto& [k, val] : e.items()) entry[k] = val.get<std::string>();
      }
      if (!entry.count("form")) {
        throw std::invalid_argument("lexicon class " + cls + ": entry without a form");
      }
      v.push_back(std::move(entry));
    }
    if (v.empty()) throw std::invalid_argument("lexicon class " + cls + " is empty");
  }
  return lex;
}

Lexicon read_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return lexicon_from_json(nlohmann::json::parse(in));
}

MinimalPairItem instantiate(const PairTemplate& t, const std::map<std::string, LexEntry>& binding,
                            const std::string& item_id) {
  MinimalPairItem item;
  item.item_id = item_id;
  item.template_id = t.template_id;
  item.construction = t.construction;
  item.site = t.site;
  for (const auto& [name, _] : t.slots) {
    auto b = binding.find(name);
    if (b == binding.end()) {
      throw std::invalid_argument("template " + t.template_id + ": unbound slot " + name);
    }
    item.bindings[name] = b->second.at("form");
  }
  const std::string where = "template " + t.template_id;
  for (int pair = 0; pair < 2; ++pair) {
    auto& mp = item.pairs[static_cast<std::size_t>(pair)];
    mp.grammatical = render_sentence(skeleton(t, 2 * pair), binding, where);
    mp.ungrammatical = render_sentence(skeleton(t, 2 * pair + 1), binding, where);
  }
  return item;
}

std::vector<MinimalPairItem> expand_templates(const std::vector<PairTemplate>& templates,
                                              const Lexicon& lexicon,
                                              std::optional<std::uint64_t> limit,
                                              std::uint64_t seed) {
  std::vector<MinimalPairItem> out;
  detail::Rng rng(seed);
  for (const auto& t : templates) {
    std::vector<std::pair<std::string, const std::vector<LexEntry>*>> slots;
    for (const auto& [name, cls] : t.slots) {
      auto it = lexicon.find(cls);
      if (it == lexicon.end()) {
        throw std::invalid_argument("template " + t.template_id + ": slot " + name +
                                    " uses unknown lexical class " + cls);
      }
      slots.emplace_back(name, &it->second);
    }
    std::uint64_t total = 1;
    bool overflow = false;
    for (const auto& [_, entries] : slots) {
      const std::uint64_t n = entries->size();
      if (total > ~std::uint64_t{0} / n) overflow = true;
      total = overflow ? ~std::uint64_t{0} : total * n;
    }
    if (overflow && !limit) {
      throw std::invalid_argument("template " + t.template_id + ": too many bindings without a limit");
    }

    std::vector<std::uint64_t> picks;
    if (!limit || *limit >= total) {
      for (std::uint64_t i = 0; i < total; ++i) picks.push_back(i);
    } else {
      // Floyd's sampling of `limit` distinct indices.
      std::unordered_set<std::uint64_t> chosen;
      for (std::uint64_t j = total - *limit; j < total; ++j) {
        std::uint64_t r = rng.below(j + 1);
        if (!chosen.insert(r).second) chosen.insert(j);
      }
      picks.assign(chosen.begin(), chosen.end());
      std::sort(picks.begin(), picks.end());
    }

    const int width = std::max<int>(4, static_cast<int>(std::to_string(picks.size()).size()));
    for (std::size_t k = 0; k < picks.size(); ++k) {
      std::map<std::string, LexEntry> binding;
      std::uint64_t rest = picks[k];
      for (auto it = slots.rbegin(); it != slots.rend(); ++it) {
        const auto n = it->second->size();
        binding[it->first] = (*it->second)[static_cast<std::size_t>(rest % n)];
        rest /= n;
      }
      std::string ord = std::to_string(k + 1);
      ord.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(ord.size()))), '0');
      out.push_back(instantiate(t, binding, t.template_id + "-" + ord));
    }
  }
  return out;
}

nlohmann::ordered_json item_to_json(const MinimalPairItem& item) {
  nlohmann::ordered_json j;
  j["item_id"] = item.item_id;
  j["template_id"] = item.template_id;
  j["construction"] = std::string(to_string(item.construction));
  j["site"] = item.site;
  nlohmann::ordered_json b = nlohmann::ordered_json::object();
  for (const auto& [k, v] : item.bindings) b[k] = v;
  j["bindings"] = b;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& p : item.pairs) {
    nlohmann::ordered_json pj;
    pj["grammatical"] = {p.grammatical.context, p.grammatical.continuation};
    pj["ungrammatical"] = {p.ungrammatical.context, p.ungrammatical.continuation};
    pairs.push_back(pj);
  }
  j["pairs"] = pairs;
  return j;
}

MinimalPairItem item_from_json(const nlohmann::json& j) {
  MinimalPairItem item;
  item.item_id = j.at("item_id").get<std::string>();
  item.template_id = j.at("template_id").get<std::string>();
  auto fam = family_from_string(j.at("construction").get<std::string>());
  if (!fam) throw std::invalid_argument("item " + item.item_id + ": unknown construction");
  item.construction = *fam;
  item.site = j.at("site").get<std::string>();
  if (j.contains("bindings")) {
    for (const auto& [k, v] : j.at("bindings").items()) item.bindings[k] = v.get<std::string>();
  }
  const auto& pairs = j.at("pairs");
  if (pairs.size() != 2) throw std::invalid_argument("item " + item.item_id + ": needs 2 pairs");
  for (std::size_t i = 0; i < 2; ++i) {
    auto side = [&](const char* key) {
      const auto& s = pairs[i].at(key);
      return Sentence{s.at(0).get<std::string>(), s.at(1).get<std::string>()};
    };
    item.pairs[i].grammatical = side("grammatical");
    item.pairs[i].ungrammatical = side("ungrammatical");
  }
  return item;
}

std::vector<ScoringRequest> emit_scoring_requests(const std::vector<MinimalPairItem>& items) {
  std::vector<ScoringRequest> out;
  out.reserve(items.size() * 4);
  for (const auto& item : items) {
    for (std::size_t p = 0; p < 2; ++p) {
      const auto base = item.item_id + "/p" + std::to_string(p) + "/";
      const auto& mp = item.pairs[p];
      out.push_back({base + "g", mp.grammatical.context, mp.grammatical.continuation});
      out.push_back({base + "u", mp.ungrammatical.context, mp.ungrammatical.continuation});
    }
  }
  return out;
}

nlohmann::ordered_json request_to_json(const ScoringRequest& r) {
  nlohmann::ordered_json j;
  j["request_id"] = r.request_id;
  j["context"] = r.context;
  j["continuation"] = r.continuation;
  return j;
}

std::vector<ScoreRecord> read_scores(std::istream& in) {
  std::vector<ScoreRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ScoreRecord r;
    try {
      auto j = nlohmann::json::parse(line);
      r.request_id = j.at("request_id").get<std::string>();
      r.logprob = j.at("logprob").get<double>();
    } catch (const std::exception& e) {
      throw std::invalid_argument("scores line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!std::isfinite(r.logprob)) {
      throw std::invalid_argument("scores line " + std::to_string(line_no) +
                                  ": logprob is not finite");
    }
    if (!seen.insert(r.request_id).second) {
      throw std::invalid_argument("scores line " + std::to_string(line_no) + ": duplicate " +
                                  r.request_id);
    }
    out.push_back(std::move(r));
  }
  return out;
}

AccuracyReport score_accuracy(const std::vector<MinimalPairItem>& items,
                              const std::vector<ScoreRecord>& scores) {
  std::unordered_map<std::string, double> by_id;
  for (const auto& s : scores) by_id[s.request_id] = s.logprob;

  std::unordered_set<std::string> known;
  for (const auto& r : emit_scoring_requests(items)) known.insert(r.request_id);
  std::vector<std::string> unmatched;
  for (const auto& s : scores) {
    if (!known.count(s.request_id)) unmatched.push_back(s.request_id);
  }
  if (!unmatched.empty()) {
    std::string list;
    for (std::size_t i = 0; i < unmatched.size() && i < 20; ++i) {
      list += (i ? ", " : "") + unmatched[i];
    }
    if (unmatched.size() > 20) list += ", ...";
    throw std::invalid_argument(std::to_string(unmatched.size()) +
                                " score(s) match no request: " + list);
  }

  AccuracyReport rep;
  std::map<std::pair<Family, std::string>, AccuracyRow> rows;
  rep.overall.construction = "overall";
  rep.overall.site = "all";
  for (const auto& item : items) {
    auto& row = rows[{item.construction, item.site}];
    row.construction = std::string(to_string(item.construction));
    row.site = item.site;
    for (std::size_t p = 0; p < 2; ++p) {
      const auto base = item.item_id + "/p" + std::to_string(p) + "/";
      auto g = by_id.find(base + "g");
      auto u = by_id.find(base + "u");
      if (g == by_id.end() || u == by_id.end()) {
        rep.missing_pairs.push_back(item.item_id + "/p" + std::to_string(p));
        continue;
      }
      const bool correct = g->second > u->second;
      ++row.n_pairs;
      ++rep.overall.n_pairs;
      if (correct) {
        ++row.n_correct;
        ++rep.overall.n_correct;
      }
    }
  }
  auto finish = [](AccuracyRow& r) {
    if (r.n_pairs > 0) {
      r.accuracy = static_cast<double>(r.n_correct) / static_cast<double>(r.n_pairs);
    }
  };
  for (auto& [_, r] : rows) {
    finish(r);
    rep.rows.push_back(r);
  }
  finish(rep.overall);
  return rep;
}

std::string accuracy_csv(const AccuracyReport& report, const std::string& scorer_convention) {
  std::ostringstream out;
  out << "# scorer_convention=" << scorer_convention
      << " missing_pairs=" << report.missing_pairs.size() << " tie=incorrect\n";
  out << "construction,site,n_pairs,accuracy\n";
  auto line = [&](const AccuracyRow& r) {
    out << r.construction << ',' << r.site << ',' << r.n_pairs << ','
        << (r.accuracy ? detail::format_fixed(*r.accuracy, 6) : "n/a") << "\n";
  };
  for (const auto& r : report.rows) line(r);
  line(report.overall);
  return out.str();
}

}  // namespace fgd
