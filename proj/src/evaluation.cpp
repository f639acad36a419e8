#include "fgd/evaluation.hpp"

#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "format.hpp"

namespace fgd {

MergePolicy MergePolicy::identity() {
  std::array<Label, kLabelCount> m{};
  for (Label l : kAllLabels) m[static_cast<std::size_t>(l)] = l;
  return MergePolicy("identity", m);
}

MergePolicy MergePolicy::cross_clausal_to_base() {
  auto p = identity();
  p.name_ = "cross-clausal-to-base";
  p.map_[static_cast<std::size_t>(Label::CC_SMQ)] = Label::SMQ;
  p.map_[static_cast<std::size_t>(Label::CC_OMQ)] = Label::OMQ;
  p.map_[static_cast<std::size_t>(Label::CC_AMQ)] = Label::AMQ;
  return p;
}

LabelSet merge_labels(const LabelSet& labels, const MergePolicy& policy) {
  LabelSet out;
  for (Label l : labels) out.insert(policy.apply(l));
  return out;
}

LabelSet default_excluded_labels() {
  return {Label::PMQ, Label::PlainMQ, Label::PRC, Label::SRC_reduced, Label::ORC_reduced};
}

std::vector<TpOverride> read_overrides(std::istream& in) {
  std::vector<TpOverride> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      TpOverride o;
      if (j.contains("utterance_id")) {
        o.utterance_id = j.at("utterance_id").get<std::string>();
      } else {
        o.utterance_id = j.at("id").get<std::string>();
      }
      o.label = parse_label(j.at("label").get<std::string>());
      if (j.contains("forced_tp")) o.forced_tp = j.at("forced_tp").get<bool>();
      out.push_back(std::move(o));
    } catch (const std::exception& e) {
      throw std::invalid_argument("overrides line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

namespace {

LabelSet prepare(const LabelSet& labels, const MergePolicy& policy, const LabelSet& excluded) {
  LabelSet out;
  for (Label l : merge_labels(labels, policy)) {
    if (!excluded.count(l)) out.insert(l);
  }
  return out;
}

}  // namespace

EvalReport score(const LabelMap& predictions, const LabelMap& gold, const MergePolicy& policy,
                 const LabelSet& excluded, const std::vector<TpOverride>& overrides) {
  EvalReport r;
  r.merge_policy = policy.name();
  r.excluded = excluded;
  r.has_overrides = !overrides.empty();
  for (Label l : kAllLabels) {
    Label m = policy.apply(l);
    if (!excluded.count(m)) r.per_label[m];
  }

  std::set<std::pair<std::string, Label>> forced;
  for (const auto& o : overrides) {
    if (o.forced_tp) forced.insert({o.utterance_id, policy.apply(o.label)});
  }

  std::set<std::string> ids;
  for (const auto& [id, _] : predictions) ids.insert(id);
  for (const auto& [id, _] : gold) ids.insert(id);
  static const LabelSet kEmpty;

  long used = 0;
  for (const auto& id : ids) {
    auto pit = predictions.find(id);
    auto git = gold.find(id);
    LabelSet p = prepare(pit == predictions.end() ? kEmpty : pit->second, policy, excluded);
    LabelSet g = prepare(git == gold.end() ? kEmpty : git->second, policy, excluded);
    for (Label l : p) {
      auto& s = r.per_label[l];
      ++s.n_predicted;
      if (g.count(l)) {
        ++s.tp;
      } else {
        ++s.fp;
      }
    }
    for (Label l : g) {
      auto& s = r.per_label[l];
      ++s.n_gold;
      if (p.count(l)) continue;
      if (forced.count({id, l})) {
        ++s.forced_tp;
        ++used;
      } else {
        ++s.fn;
      }
    }
  }
  r.unused_overrides = static_cast<long>(forced.size()) - used;

  for (auto& [_, s] : r.per_label) {
    if (s.n_predicted > 0) s.precision = static_cast<double>(s.tp) / static_cast<double>(s.n_predicted);
    if (s.n_gold > 0) {
      s.recall = static_cast<double>(s.tp + s.forced_tp) / static_cast<double>(s.n_gold);
    }
    if (s.precision && s.recall) {
      double d = *s.precision + *s.recall;
      s.f1 = d > 0 ? 2.0 * *s.precision * *s.recall / d : 0.0;
    }
  }
  return r;
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "# merge_policy=" << report.merge_policy << " excluded=";
  bool first = true;
  for (Label l : report.excluded) {
    out << (first ? "" : ",") << to_string(l);
    first = false;
  }
  out << "\n";
  out << "label,precision,recall,f1,tp,fp,fn,n_predicted,n_gold";
  if (report.has_overrides) out << ",forced_tp";
  out << "\n";
  auto cell = [](const std::optional<double>& v) {
    return v ? detail::format_fixed(*v, 6) : std::string("n/a");
  };
  for (const auto& [label, s] : report.per_label) {
    out << to_string(label) << ',' << cell(s.precision) << ',' << cell(s.recall) << ','
        << cell(s.f1) << ',' << s.tp << ',' << s.fp << ',' << s.fn << ',' << s.n_predicted << ','
        << s.n_gold;
    if (report.has_overrides) out << ',' << s.forced_tp;
    out << "\n";
  }
  return out.str();
}

double majority_accuracy(const std::vector<std::vector<bool>>& judgments) {
  if (judgments.empty()) throw std::invalid_argument("majority_accuracy: no sentences");
  long correct = 0;
  for (std::size_t i = 0; i < judgments.size(); ++i) {
    const auto& votes = judgments[i];
    if (votes.empty()) {
      throw std::invalid_argument("majority_accuracy: sentence " + std::to_string(i) +
                                  " has no votes");
    }
    long pos = 0;
    for (bool v : votes) pos += v ? 1 : 0;
    if (2 * pos > static_cast<long>(votes.size())) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(judgments.size());
}

}  // namespace fgd
