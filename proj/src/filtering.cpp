#include "fgd/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "random.hpp"

namespace fgd {

FilterTarget FilterTarget::parse(const std::string& text) {
  FilterTarget t;
  t.name = text;
  if (auto f = family_from_string(text)) {
    t.labels = family_labels(*f);
    return t;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) t.labels.insert(parse_label(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (t.labels.empty()) throw std::invalid_argument("empty filter target");
  return t;
}

bool FilterTarget::hits(const LabelSet& utterance_labels) const {
  return std::any_of(utterance_labels.begin(), utterance_labels.end(),
                     [&](Label l) { return labels.count(l) > 0; });
}

FilterPlan plan_targeted_filter(const std::vector<CorpusEntry>& corpus, const FilterTarget& target) {
  FilterPlan p;
  p.mode = "targeted";
  p.target = target;
  for (const auto& e : corpus) {
    if (!target.hits(e.labels)) continue;
    p.removed_ids.push_back(e.utterance_id);
    p.removed_tokens += e.tokens;
  }
  p.removed_sentences = static_cast<long>(p.removed_ids.size());
  return p;
}

FilterPlan plan_control_filter(const std::vector<CorpusEntry>& corpus, const FilterPlan& targeted,
                               std::uint64_t seed, double tolerance, bool exclude_target) {
  if (!(tolerance >= 0)) throw std::invalid_argument("tolerance must be non-negative");
  FilterPlan p;
  p.mode = "control";
  p.target = targeted.target;
  p.seed = seed;
  p.tolerance = tolerance;
  p.exclude_target = exclude_target;
  p.matched_tokens = targeted.removed_tokens;

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < corpus.size(); ++i) position.emplace(corpus[i].utterance_id, i);
  std::map<long, long> want;
  for (const auto& id : targeted.removed_ids) {
    auto it = position.find(id);
    if (it == position.end()) {
      throw std::invalid_argument("targeted plan id " + id + " is not in the corpus");
    }
    ++want[corpus[it->second].tokens];
  }
  const long k = static_cast<long>(targeted.removed_ids.size());
  const long target_tokens = targeted.removed_tokens;
  if (k == 0) return p;

  std::map<long, std::vector<std::size_t>> free;
  long pool = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (exclude_target && targeted.target.hits(corpus[i].labels)) continue;
    free[corpus[i].tokens].push_back(i);
    ++pool;
  }
  if (pool < k) {
    throw FilterInfeasible("control needs " + std::to_string(k) + " sentences but the pool has " +
                           std::to_string(pool) + " (deficit " + std::to_string(k - pool) + ")");
  }
  detail::Rng rng(seed);
  for (auto& [_, bucket] : free) rng.shuffle(bucket);

  std::map<long, std::vector<std::size_t>> chosen;
  auto take = [&](long len) {
    auto& b = free[len];
    chosen[len].push_back(b.back());
    b.pop_back();
    if (b.empty()) free.erase(len);
  };

  std::vector<long> unmet;
  for (const auto& [len, count] : want) {
    auto it = free.find(len);
    long have = it == free.end() ? 0 : static_cast<long>(it->second.size());
    long n = std::min(have, count);
    for (long i = 0; i < n; ++i) take(len);
    for (long i = n; i < count; ++i) unmet.push_back(len);
  }
  // Lengths the pool cannot supply are filled from the nearest length.
  for (long len : unmet) {
    auto hi = free.lower_bound(len);
    long pick;
    if (hi == free.end()) {
      pick = std::prev(hi)->first;
    } else if (hi == free.begin() || hi->first == len) {
      pick = hi->first;
    } else {
      auto lo = std::prev(hi);
      pick = (len - lo->first <= hi->first - len) ? lo->first : hi->first;
    }
    take(pick);
  }

  long selected_tokens = 0;
  for (const auto& [len, v] : chosen) selected_tokens += len * static_cast<long>(v.size());
  long diff = selected_tokens - target_tokens;
  const double allowance = tolerance * static_cast<double>(target_tokens);

  const long max_swaps = 4 * k + 64;
  for (long step = 0; std::fabs(static_cast<double>(diff)) > allowance; ++step) {
    if (step >= max_swaps || free.empty()) {
      throw FilterInfeasible("control token total misses the target by " + std::to_string(diff) +
                             " tokens (allowed " + std::to_string(allowance) + ")");
    }
    long best_ls = 0;
    long best_lu = 0;
    long best = std::labs(diff);
    for (const auto& [ls, _] : chosen) {
      const long wanted = ls - diff;
      auto hi = free.lower_bound(wanted);
      for (auto it : {hi, hi == free.begin() ? free.end() : std::prev(hi)}) {
        if (it == free.end()) continue;
        const long nd = diff + it->first - ls;
        if (std::labs(nd) < best) {
          best = std::labs(nd);
          best_ls = ls;
          best_lu = it->first;
        }
      }
    }
    if (best >= std::labs(diff)) {
      throw FilterInfeasible("control token total misses the target by " + std::to_string(diff) +
                             " tokens (allowed " + std::to_string(allowance) +
                             "); no swap improves it");
    }
    auto& out = chosen[best_ls];
    const auto j = static_cast<std::size_t>(rng.below(out.size()));
    std::swap(out[j], out.back());
    const std::size_t dropped = out.back();
    out.pop_back();
    if (out.empty()) chosen.erase(best_ls);
    take(best_lu);
    free[best_ls].push_back(dropped);
    diff += best_lu - best_ls;
  }

  std::vector<std::size_t> all;
  for (const auto& [_, v] : chosen) all.insert(all.end(), v.begin(), v.end());
  std::sort(all.begin(), all.end());
  for (auto i : all) {
    p.removed_ids.push_back(corpus[i].utterance_id);
    p.removed_tokens += corpus[i].tokens;
  }
  p.removed_sentences = static_cast<long>(p.removed_ids.size());
  return p;
}

nlohmann::ordered_json plan_to_json(const FilterPlan& plan) {
  nlohmann::ordered_json j;
  j["mode"] = plan.mode;
  j["target"] = plan.target.name;
  auto labels = nlohmann::ordered_json::array();
  for (Label l : plan.target.labels) labels.push_back(std::string(to_string(l)));
  j["target_labels"] = labels;
  j["seed"] = plan.seed ? nlohmann::ordered_json(*plan.seed) : nlohmann::ordered_json(nullptr);
  j["tolerance"] = plan.tolerance;
  j["exclude_target"] = plan.exclude_target;
  j["token_unit"] = kTokenUnit;
  j["removed_sentences"] = plan.removed_sentences;
  j["removed_tokens"] = plan.removed_tokens;
  if (plan.mode == "control") j["matched_tokens"] = plan.matched_tokens;
  j["removed_ids"] = plan.removed_ids;
  return j;
}

FilterPlan plan_from_json(const nlohmann::json& j) {
  FilterPlan p;
  p.mode = j.at("mode").get<std::string>();
  if (p.mode != "targeted" && p.mode != "control") {
    throw std::invalid_argument("plan mode must be targeted or control");
  }
  p.target = FilterTarget::parse(j.at("target").get<std::string>());
  if (j.contains("seed") && !j.at("seed").is_null()) p.seed = j.at("seed").get<std::uint64_t>();
  p.tolerance = j.value("tolerance", 0.0);
  p.exclude_target = j.value("exclude_target", false);
  p.removed_ids = j.at("removed_ids").get<std::vector<std::string>>();
  p.removed_sentences = j.value("removed_sentences", static_cast<long>(p.removed_ids.size()));
  p.removed_tokens = j.value("removed_tokens", 0L);
  p.matched_tokens = j.value("matched_tokens", 0L);
  if (p.removed_sentences != static_cast<long>(p.removed_ids.size())) {
    throw std::invalid_argument("plan removed_sentences disagrees with removed_ids");
  }
  return p;
}

namespace {

bool attaches_left(const std::string& t) {
  static const std::set<std::string> kPunct = {".", ",", "?", "!", ";", ":", "...", ")", "]",
                                                "}", "%", "n't"};
  if (kPunct.count(t)) return true;
  return t.size() > 1 && t[0] == '\'';
}

}  // namespace

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  bool glue = true;
  for (const auto& t : tokens) {
    if (!glue && !attaches_left(t)) out += ' ';
    out += t;
    glue = t == "(" || t == "[" || t == "{";
  }
  return out;
}

ApplyResult apply_filter(std::istream& corpus, const FilterPlan& plan, std::ostream& kept,
                         std::ostream* removed, std::ostream* text, const LabelMap* labels,
                         const ApplyOptions& options) {
  std::unordered_set<std::string> drop(plan.removed_ids.begin(), plan.removed_ids.end());
  std::unordered_set<std::string> seen;
  ApplyResult r;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(corpus, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    std::string id;
    std::vector<std::string> words;
    try {
      j = nlohmann::json::parse(line);
      id = j.at("utterance_id").get<std::string>();
      for (const auto& t : j.at("tokens")) words.push_back(t.at("text").get<std::string>());
    } catch (const std::exception& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
    ++r.input;
    if (drop.count(id)) {
      seen.insert(id);
      ++r.removed;
      if (removed) {
        nlohmann::ordered_json s;
        s["utterance_id"] = id;
        auto ls = nlohmann::ordered_json::array();
        if (labels) {
          auto it = labels->find(id);
          if (it != labels->end()) {
            for (Label l : it->second) ls.push_back(std::string(to_string(l)));
          }
        }
        s["labels"] = ls;
        s["n_tokens"] = words.size();
        s["text"] = detokenize(words);
        *removed << s.dump() << '\n';
      }
      continue;
    }
    ++r.kept;
    kept << line << '\n';
    if (text) *text << detokenize(words) << '\n';
  }
  for (const auto& id : plan.removed_ids) {
    if (!seen.count(id)) r.missing_ids.push_back(id);
  }
  if (options.require_all_ids && !r.missing_ids.empty()) {
    std::string list;
    for (std::size_t i = 0; i < r.missing_ids.size() && i < 10; ++i) {
      list += (i ? ", " : "") + r.missing_ids[i];
    }
    if (r.missing_ids.size() > 10) list += ", ...";
    throw std::invalid_argument(std::to_string(r.missing_ids.size()) +
                                " plan id(s) not in the corpus: " + list);
  }
  return r;
}

}  // namespace fgd
