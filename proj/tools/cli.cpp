#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fgd/corpus.hpp"
#include "fgd/detectors.hpp"
#include "fgd/evaluation.hpp"
#include "fgd/filtering.hpp"
#include "fgd/goldtraces.hpp"
#include "fgd/io.hpp"
#include "fgd/minpairs.hpp"
#include "fgd/stats.hpp"

namespace fgd::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct Summary {
  ojson counts = ojson::object();
  std::vector<std::string> outputs;
  std::ostream* err = &std::cerr;
};

ojson effective_config(const CLI::App& sub) {
  ojson cfg = ojson::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const auto name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (opt->count() > 0) {
      auto res = opt->reduced_results();
      if (opt->get_items_expected_max() == 0) {
        cfg[name] = true;
      } else if (res.size() == 1) {
        cfg[name] = res.front();
      } else {
        cfg[name] = res;
      }
    } else if (opt->get_items_expected_max() == 0) {
      cfg[name] = false;
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    } else {
      cfg[name] = nullptr;
    }
  }
  return cfg;
}

void write_file(const std::string& path, const std::string& content, Summary& s) {
  AtomicFile f(path);
  f.stream() << content;
  f.commit();
  s.outputs.push_back(path);
}

ojson label_counts_json(const std::array<long, kLabelCount>& counts) {
  ojson j = ojson::object();
  for (Label l : kAllLabels) j[std::string(to_string(l))] = counts[static_cast<std::size_t>(l)];
  return j;
}

struct DetectorConfig {
  std::string lexicon;
  std::string exclusions;

  EmbeddingVerbLexicon load_lexicon() const {
    return lexicon.empty() ? EmbeddingVerbLexicon() : EmbeddingVerbLexicon::from_file(lexicon);
  }
  FreeRelativeExclusions load_exclusions() const {
    if (exclusions.empty()) return FreeRelativeExclusions();
    auto in = open_input(exclusions);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string w;
      while (ls >> w) words.insert(w);
    }
    return FreeRelativeExclusions(std::move(words));
  }
};

void add_detector_options(CLI::App& sub, DetectorConfig& dc) {
  sub.add_option("--lexicon", dc.lexicon, "Embedding-verb lemma list, one per line")
      ;
  sub.add_option("--exclusions", dc.exclusions, "Free-relative exclusion words, one per line")
      ;
}

// Labels for every record of a corpus file, from a detection file when given
// and from the detectors otherwise. Calls `visit(record, labels)` in order.
template <typename Visit>
void for_each_labeled(const std::string& corpus, const std::string& detections, bool strict,
                      const DetectorConfig& dc, Summary& s, Visit visit) {
  std::optional<LabelMap> given;
  if (!detections.empty()) given = read_label_jsonl(detections);
  const auto lex = dc.load_lexicon();
  const auto excl = dc.load_exclusions();
  auto in = open_input(corpus);
  CorpusReader reader(in, strict);
  long unlabeled = 0;
  while (auto rec = reader.next()) {
    LabelSet labels;
    if (given) {
      auto it = given->find(rec->meta.utterance_id);
      if (it == given->end()) {
        ++unlabeled;
      } else {
        labels = it->second;
      }
    } else {
      labels = labels_of(detect_all(*rec, lex, excl));
    }
    visit(*rec, labels);
  }
  s.counts["records"] = reader.accepted();
  s.counts["skipped"] = reader.skipped();
  if (given) s.counts["records_without_detections"] = unlabeled;
  for (const auto& d : reader.diagnostics()) {
    *s.err << "line " << d.line << (d.utterance_id.empty() ? "" : " " + d.utterance_id)
              << ": " << d.message << "\n";
  }
}

// ---- detect ---------------------------------------------------------------

struct DetectOpts {
  std::string in;
  std::string out;
  int jobs = 1;
  bool strict = false;
  DetectorConfig dc;
};

void run_detect(const DetectOpts& o, Summary& s) {
  const auto lex = o.dc.load_lexicon();
  const auto excl = o.dc.load_exclusions();
  auto in = open_input(o.in);
  CorpusReader reader(in, o.strict);
  AtomicFile out(o.out);

  std::array<long, kLabelCount> counts{};
  long with_fgd = 0;
  const std::size_t batch_size = 512 * static_cast<std::size_t>(o.jobs);
  std::vector<ParsedUtterance> batch;
  std::vector<std::string> lines;

  auto flush = [&] {
    lines.assign(batch.size(), {});
    std::vector<LabelSet> labels(batch.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < batch.size(); i = next++) {
        auto dets = detect_all(batch[i], lex, excl);
        labels[i] = labels_of(dets);
        lines[i] = detections_to_json(batch[i].meta.utterance_id, dets).dump();
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < o.jobs; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < batch.size(); ++i) {
      out.stream() << lines[i] << '\n';
      if (!labels[i].empty()) ++with_fgd;
      for (Label l : labels[i]) ++counts[static_cast<std::size_t>(l)];
    }
    batch.clear();
  };

  while (auto rec = reader.next()) {
    batch.push_back(std::move(*rec));
    if (batch.size() >= batch_size) flush();
  }
  flush();
  out.commit();
  s.outputs.push_back(o.out);
  s.counts["records"] = reader.accepted();
  s.counts["skipped"] = reader.skipped();
  s.counts["utterances_with_fgd"] = with_fgd;
  s.counts["labels"] = label_counts_json(counts);
  for (const auto& d : reader.diagnostics()) {
    *s.err << "line " << d.line << (d.utterance_id.empty() ? "" : " " + d.utterance_id)
              << ": " << d.message << "\n";
  }
}

// ---- gold -----------------------------------------------------------------

struct GoldOpts {
  std::string in;
  std::string out;
  std::string diagnostics;
  bool strict = false;
  GoldOptions options;
};

void run_gold(const GoldOpts& o, Summary& s) {
  auto file = read_gold_trees(o.in, o.strict);
  auto result = gold_label_corpus(file.trees, o.options);

  std::ostringstream body;
  std::set<std::string> written;
  std::array<long, kLabelCount> counts{};
  for (const auto& t : file.trees) {
    if (!written.insert(t.id).second) continue;
    const auto& labels = result.labels.at(t.id);
    ojson j;
    j["utterance_id"] = t.id;
    auto arr = ojson::array();
    for (Label l : labels) {
      arr.push_back(std::string(to_string(l)));
      ++counts[static_cast<std::size_t>(l)];
    }
    j["labels"] = arr;
    body << j.dump() << '\n';
  }
  write_file(o.out, body.str(), s);

  std::ostringstream report;
  for (const auto& m : file.malformed) {
    report << "line " << m.line << " " << m.utterance_id << ": malformed tree: " << m.message
           << "\n";
  }
  for (const auto& d : result.diagnostics) {
    report << "line " << d.line << " " << d.utterance_id << ": " << d.message << "\n";
  }
  if (!o.diagnostics.empty()) {
    write_file(o.diagnostics, report.str(), s);
  } else {
    *s.err << report.str();
  }
  s.counts["trees"] = file.trees.size();
  s.counts["malformed"] = file.malformed.size();
  s.counts["trace_sites"] = result.n_sites;
  s.counts["unknown_sites"] = result.n_unknown;
  s.counts["unmatched_traces"] = result.n_unmatched;
  s.counts["labels"] = label_counts_json(counts);
}

// ---- evaluate -------------------------------------------------------------

struct EvalOpts {
  std::string pred;
  std::string gold;
  std::string out;
  std::string overrides;
  std::string merge = "cross-clausal";
  std::vector<std::string> exclude;
  bool no_exclude = false;
};

void run_evaluate(const EvalOpts& o, Summary& s) {
  auto pred = read_label_jsonl(o.pred);
  auto gold = read_label_jsonl(o.gold);
  std::vector<TpOverride> overrides;
  if (!o.overrides.empty()) {
    auto in = open_input(o.overrides);
    overrides = read_overrides(in);
  }
  auto policy = o.merge == "none" ? MergePolicy::identity() : MergePolicy::cross_clausal_to_base();
  LabelSet excluded = default_excluded_labels();
  if (o.no_exclude) excluded.clear();
  if (!o.exclude.empty()) {
    excluded.clear();
    for (const auto& e : o.exclude) excluded.insert(parse_label(e));
  }
  auto report = score(pred, gold, policy, excluded, overrides);
  write_file(o.out, report_to_csv(report), s);
  s.counts["predicted_ids"] = pred.size();
  s.counts["gold_ids"] = gold.size();
  s.counts["overrides"] = overrides.size();
  s.counts["unused_overrides"] = report.unused_overrides;
  ojson f1 = ojson::object();
  for (const auto& [l, sc] : report.per_label) {
    f1[std::string(to_string(l))] = sc.f1 ? ojson(*sc.f1) : ojson("n/a");
  }
  s.counts["f1"] = f1;
}

// ---- stats ----------------------------------------------------------------

struct StatsOpts {
  std::string in;
  std::string detections;
  std::string out_dir;
  std::uint64_t seed = 0;
  StatsMeta meta;
  bool longitudinal = false;
  std::optional<int> totals_from;
  std::optional<int> totals_to;
  bool strict = false;
  DetectorConfig dc;
};

void run_stats(const StatsOpts& o, Summary& s) {
  StatsMeta meta = o.meta;
  meta.seed = o.seed;
  meta.spec.validate();
  BinnedCounts cells;
  cells.spec = meta.spec;
  std::vector<LabeledUtterance> kept;
  for_each_labeled(o.in, o.detections, o.strict, o.dc, s,
                   [&](const ParsedUtterance& rec, const LabelSet& labels) {
                     LabeledUtterance u{rec.meta.utterance_id, rec.meta.transcript_id,
                                        rec.meta.speaker_group, rec.meta.child_age_months, labels};
                     cells.add(u, meta.fold_other_child);
                     if (o.longitudinal) kept.push_back(std::move(u));
                   });

  std::filesystem::create_directories(o.out_dir);
  auto path = [&](const char* name) { return (std::filesystem::path(o.out_dir) / name).string(); };

  std::vector<RateTarget> targets;
  for (Label l : kAllLabels) targets.push_back(RateTarget::of(l));
  for (Family f : kAllFamilies) targets.push_back(RateTarget::of(f));
  targets.push_back(RateTarget::any());
  write_file(path("rates.csv"), rates_csv(rate_table(cells, targets, meta.z), meta), s);

  std::vector<LogRatioPoint> lr;
  for (Family f : kAllFamilies) {
    auto v = log_ratio_series(cells, f, meta.epsilon);
    lr.insert(lr.end(), v.begin(), v.end());
  }
  write_file(path("log_ratio.csv"), log_ratio_csv(lr, meta), s);
  write_file(path("subject_share.csv"), subject_share_csv(subject_share_table(cells), meta), s);

  std::vector<DeltaSubj> deltas;
  const std::pair<Family, Family> pairs[] = {{Family::MatrixQ, Family::EmbeddedQ},
                                             {Family::MatrixQ, Family::RC},
                                             {Family::EmbeddedQ, Family::RC}};
  for (SpeakerGroup g : {SpeakerGroup::Adult, SpeakerGroup::TargetChild}) {
    for (const auto& [a, b] : pairs) {
      deltas.push_back(delta_subj(cells, a, b, g, meta.min_count, meta.resamples, meta.seed));
    }
  }
  write_file(path("delta_subj.csv"), delta_subj_csv(deltas, meta), s);

  if (o.longitudinal) {
    std::optional<std::pair<int, int>> range;
    if (o.totals_from || o.totals_to) {
      range = std::pair<int, int>{o.totals_from.value_or(0), o.totals_to.value_or(1 << 30)};
    }
    auto rep = child_longitudinal_summary(kept, meta.fold_other_child, range);
    write_file(path("longitudinal.csv"), longitudinal_csv(rep, meta), s);
    write_file(path("longitudinal_totals.csv"), longitudinal_totals_csv(rep, meta), s);
    s.counts["first_child_fgd_month"] =
        rep.first_child_fgd_month ? ojson(*rep.first_child_fgd_month) : ojson(nullptr);
  }
  s.counts["cells"] = cells.cells.size();
  s.counts["dropped_no_age"] = cells.dropped_no_age;
  s.counts["dropped_out_of_range"] = cells.dropped_out_of_range;
  long qualifying = 0;
  for (const auto& d : deltas) qualifying += d.n_bins;
  s.counts["delta_bins"] = qualifying;
}

// ---- filter ---------------------------------------------------------------

struct FilterOpts {
  std::string in;
  std::string detections;
  std::string target;
  std::string mode = "targeted";
  std::string targeted_plan;
  std::optional<std::uint64_t> seed;
  double tolerance = 0.005;
  bool exclude_target = false;
  std::string plan_out;
  std::string plan;
  std::string out;
  std::string removed;
  std::string text;
  bool allow_missing = false;
  bool strict = false;
  DetectorConfig dc;
};

FilterPlan load_plan(const std::string& path) {
  auto in = open_input(path);
  return plan_from_json(nlohmann::json::parse(in));
}

void run_filter(const FilterOpts& o, Summary& s) {
  if (o.plan.empty() && o.target.empty()) {
    throw CLI::ValidationError("--target", "required unless --plan is given");
  }
  if (o.plan.empty() && o.mode == "control" && !o.seed) {
    throw CLI::ValidationError("--seed", "control mode needs a seed");
  }
  if (o.plan_out.empty() && o.out.empty()) {
    throw CLI::ValidationError("--out", "give --plan-out, --out or both");
  }

  FilterPlan plan;
  LabelMap labels;
  if (!o.plan.empty()) {
    plan = load_plan(o.plan);
    if (!o.detections.empty()) labels = read_label_jsonl(o.detections);
  } else {
    std::vector<CorpusEntry> entries;
    for_each_labeled(o.in, o.detections, o.strict, o.dc, s,
                     [&](const ParsedUtterance& rec, const LabelSet& ls) {
                       entries.push_back({rec.meta.utterance_id,
                                          static_cast<long>(rec.tokens.size()), ls});
                       if (!ls.empty()) labels[rec.meta.utterance_id] = ls;
                     });
    auto target = FilterTarget::parse(o.target);
    FilterPlan targeted = o.targeted_plan.empty() ? plan_targeted_filter(entries, target)
                                                  : load_plan(o.targeted_plan);
    plan = o.mode == "control"
               ? plan_control_filter(entries, targeted, *o.seed, o.tolerance, o.exclude_target)
               : targeted;
  }
  s.counts["mode"] = plan.mode;
  s.counts["removed_sentences"] = plan.removed_sentences;
  s.counts["removed_tokens"] = plan.removed_tokens;
  if (plan.mode == "control") s.counts["matched_tokens"] = plan.matched_tokens;
  if (!o.plan_out.empty()) write_file(o.plan_out, plan_to_json(plan).dump(2) + "\n", s);

  if (!o.out.empty()) {
    auto in = open_input(o.in);
    AtomicFile kept(o.out);
    std::optional<AtomicFile> removed;
    std::optional<AtomicFile> text;
    if (!o.removed.empty()) removed.emplace(o.removed);
    if (!o.text.empty()) text.emplace(o.text);
    ApplyOptions ao;
    ao.require_all_ids = !o.allow_missing;
    auto r = apply_filter(in, plan, kept.stream(), removed ? &removed->stream() : nullptr,
                          text ? &text->stream() : nullptr, &labels, ao);
    kept.commit();
    s.outputs.push_back(o.out);
    if (removed) {
      removed->commit();
      s.outputs.push_back(o.removed);
    }
    if (text) {
      text->commit();
      s.outputs.push_back(o.text);
    }
    s.counts["input_lines"] = r.input;
    s.counts["kept"] = r.kept;
    s.counts["removed"] = r.removed;
    s.counts["missing_ids"] = r.missing_ids.size();
  }
}

// ---- minimal pairs --------------------------------------------------------

struct GenOpts {
  std::string templates;
  std::string lexicon;
  std::string out;
  std::string requests;
  std::optional<std::uint64_t> limit;
  std::uint64_t seed = 0;
};

void run_minpairs_gen(const GenOpts& o, Summary& s) {
  auto templates = read_templates(o.templates);
  auto lexicon = read_lexicon(o.lexicon);
  auto items = expand_templates(templates, lexicon, o.limit, o.seed);
  std::ostringstream body;
  for (const auto& it : items) body << item_to_json(it).dump() << '\n';
  write_file(o.out, body.str(), s);
  auto requests = emit_scoring_requests(items);
  if (!o.requests.empty()) {
    std::ostringstream rb;
    for (const auto& r : requests) rb << request_to_json(r).dump() << '\n';
    write_file(o.requests, rb.str(), s);
  }
  s.counts["templates"] = templates.size();
  s.counts["items"] = items.size();
  s.counts["requests"] = requests.size();
}

struct ScoreOpts {
  std::string items;
  std::string scores;
  std::string out;
  std::string convention;
};

void run_minpairs_score(const ScoreOpts& o, Summary& s) {
  std::vector<MinimalPairItem> items;
  {
    auto in = open_input(o.items);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        items.push_back(item_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception& e) {
        throw std::invalid_argument("items line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  auto in = open_input(o.scores);
  auto scores = read_scores(in);
  auto report = score_accuracy(items, scores);
  write_file(o.out, accuracy_csv(report, o.convention), s);
  s.counts["items"] = items.size();
  s.counts["scores"] = scores.size();
  s.counts["missing_pairs"] = report.missing_pairs.size();
  s.counts["accuracy"] = report.overall.accuracy ? ojson(*report.overall.accuracy) : ojson("n/a");
}

// ---- validate -------------------------------------------------------------

struct ValidateOpts {
  std::string in;
  std::string report;
  bool strict = false;
};

int run_validate(const ValidateOpts& o, Summary& s) {
  auto in = open_input(o.in);
  CorpusReader reader(in, o.strict);
  while (reader.next()) {
  }
  std::ostringstream rep;
  for (const auto& d : reader.diagnostics()) {
    rep << "line " << d.line << (d.utterance_id.empty() ? "" : " " + d.utterance_id) << ": "
        << d.message << "\n";
  }
  if (!o.report.empty()) {
    write_file(o.report, rep.str(), s);
  } else {
    *s.err << rep.str();
  }
  s.counts["valid"] = reader.accepted();
  s.counts["invalid"] = reader.skipped();
  return reader.skipped() == 0 ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Filler-gap dependency detection and corpus toolkit", "fgd"};
  app.set_version_flag("--version", std::string(FGD_VERSION));
  app.set_config("--config", "", "TOML/INI file; sections named after subcommands");
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  DetectOpts det;
  auto* detect = app.add_subcommand("detect", "Run the construction detectors over a corpus");
  detect->add_option("--in", det.in, "Corpus JSONL")->required();
  detect->add_option("--out", det.out, "Detection JSONL")->required();
  detect->add_option("--jobs", det.jobs, "Worker threads")->check(CLI::Range(1, 256))
      ->capture_default_str();
  detect->add_flag("--strict", det.strict, "Stop at the first invalid record");
  add_detector_options(*detect, det.dc);

  GoldOpts gold;
  auto* goldc = app.add_subcommand("gold", "Infer gold labels from trace-annotated trees");
  goldc->add_option("--in", gold.in, "Bracketed-tree file")->required();
  goldc->add_option("--out", gold.out, "Gold label JSONL")->required();
  goldc->add_option("--diagnostics", gold.diagnostics, "Diagnostics report (default: stderr)");
  goldc->add_flag("--rc-traces", gold.options.rc_traces, "Also count relative-clause traces");
  goldc->add_option("--rc-pattern", gold.options.rc_trace_pattern,
                    "Substring identifying relative-clause trace kinds")
      ->capture_default_str();
  goldc->add_flag("--strict", gold.strict, "Stop at the first malformed tree");

  EvalOpts ev;
  auto* evalc = app.add_subcommand("evaluate", "Score detections against gold labels");
  evalc->add_option("--pred", ev.pred, "Detection JSONL")->required();
  evalc->add_option("--gold", ev.gold, "Gold label JSONL")->required();
  evalc->add_option("--out", ev.out, "Report CSV")->required();
  evalc->add_option("--overrides", ev.overrides, "Forced true-positive JSONL")
      ;
  evalc->add_option("--merge", ev.merge, "Label merge policy")
      ->check(CLI::IsMember({"cross-clausal", "none"}))
      ->capture_default_str();
  auto* excl = evalc->add_option("--exclude", ev.exclude, "Labels left out of scoring")
                   ->delimiter(',');
  evalc->add_flag("--no-exclude", ev.no_exclude, "Score every label")->excludes(excl);

  StatsOpts st;
  auto* stats = app.add_subcommand("stats", "Developmental rate and extraction-site tables");
  stats->add_option("--in", st.in, "Corpus JSONL")->required();
  stats->add_option("--detections", st.detections, "Detection JSONL (default: run detectors)")
      ;
  stats->add_option("--out-dir", st.out_dir, "Directory for the CSV tables")->required();
  stats->add_option("--seed", st.seed, "Bootstrap seed")->required();
  stats->add_option("--epsilon", st.meta.epsilon, "Log-ratio smoothing, per-1,000 units")
      ->check(CLI::Range(0.0, 1000.0))
      ->capture_default_str();
  stats->add_option("--z", st.meta.z, "Normal quantile for Wilson intervals")
      ->check(CLI::Range(0.0, 10.0))
      ->capture_default_str();
  stats->add_option("--bin-width", st.meta.spec.width_months, "Age bin width in months")
      ->check(CLI::Range(1, 120))
      ->capture_default_str();
  stats->add_option("--min-age", st.meta.spec.min_age, "Lowest age in months")
      ->check(CLI::Range(0.0, 1200.0))
      ->capture_default_str();
  stats->add_option("--max-age", st.meta.spec.max_age, "Age upper bound in months (exclusive)")
      ->check(CLI::Range(0.0, 1200.0))
      ->capture_default_str();
  stats->add_option("--min-count", st.meta.min_count, "Per-bin subj+obj threshold for delta")
      ->check(CLI::Range(1L, 1000000000L))
      ->capture_default_str();
  stats->add_option("--resamples", st.meta.resamples, "Bootstrap resamples")
      ->check(CLI::Range(1, 10000000))
      ->capture_default_str();
  stats->add_flag("--fold-other-child", st.meta.fold_other_child,
                  "Count other_child speech as adult input");
  stats->add_flag("--longitudinal", st.longitudinal, "Also write per-month tables");
  stats->add_option("--totals-from", st.totals_from, "First month of the label totals");
  stats->add_option("--totals-to", st.totals_to, "Last month of the label totals");
  stats->add_flag("--strict", st.strict, "Stop at the first invalid record");
  add_detector_options(*stats, st.dc);

  FilterOpts fo;
  auto* filter = app.add_subcommand("filter", "Plan and apply construction-targeted ablations");
  filter->add_option("--in", fo.in, "Corpus JSONL")->required();
  filter->add_option("--detections", fo.detections, "Detection JSONL (default: run detectors)")
      ;
  filter->add_option("--target", fo.target, "matrixQ, embeddedQ, RC or a label list");
  filter->add_option("--mode", fo.mode, "Plan mode")
      ->check(CLI::IsMember({"targeted", "control"}))
      ->capture_default_str();
  filter->add_option("--targeted-plan", fo.targeted_plan, "Targeted plan to match (control)")
      ;
  filter->add_option("--seed", fo.seed, "Control sampling seed");
  filter->add_option("--tolerance", fo.tolerance, "Allowed token mismatch, as a fraction")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  filter->add_flag("--exclude-target", fo.exclude_target,
                   "Draw the control only from non-target sentences");
  filter->add_option("--plan-out", fo.plan_out, "Write the plan JSON here");
  filter->add_option("--plan", fo.plan, "Apply an existing plan");
  filter->add_option("--out", fo.out, "Filtered corpus JSONL");
  filter->add_option("--removed", fo.removed, "Removed-utterance sidecar JSONL");
  filter->add_option("--text", fo.text, "Plain-text export, one sentence per line");
  filter->add_flag("--allow-missing", fo.allow_missing, "Tolerate plan ids absent from the corpus");
  filter->add_flag("--strict", fo.strict, "Stop at the first invalid record");
  add_detector_options(*filter, fo.dc);

  GenOpts gen;
  auto* mgen = app.add_subcommand("minpairs-gen", "Expand minimal-pair templates");
  mgen->add_option("--templates", gen.templates, "Template JSON")->required()
      ;
  mgen->add_option("--lexicon", gen.lexicon, "Lexicon JSON")->required();
  mgen->add_option("--out", gen.out, "Item JSONL")->required();
  mgen->add_option("--requests", gen.requests, "Scoring-request JSONL");
  mgen->add_option("--limit", gen.limit, "Items per template");
  mgen->add_option("--seed", gen.seed, "Sampling seed")->required();

  ScoreOpts sc;
  auto* mscore = app.add_subcommand("minpairs-score", "Accuracy from continuation log-probs");
  mscore->add_option("--items", sc.items, "Item JSONL")->required();
  mscore->add_option("--scores", sc.scores, "Score JSONL")->required();
  mscore->add_option("--out", sc.out, "Results CSV")->required();
  mscore->add_option("--convention", sc.convention,
                     "How the scorer aggregated token log-probs, e.g. sum or mean")
      ->required();

  ValidateOpts va;
  auto* validate = app.add_subcommand("validate", "Check a corpus file against the schema");
  validate->add_option("--in", va.in, "Corpus JSONL")->required();
  validate->add_option("--report", va.report, "Diagnostics report (default: stderr)");
  validate->add_flag("--strict", va.strict, "Stop at the first invalid record");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << FGD_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* shown = &app;
    for (const auto* sub : app.get_subcommands()) shown = sub;
    err << shown->help();
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  Summary s;
  s.err = &err;
  int status = 0;
  try {
    const auto name = sub->get_name();
    if (name == "detect") {
      run_detect(det, s);
    } else if (name == "gold") {
      run_gold(gold, s);
    } else if (name == "evaluate") {
      run_evaluate(ev, s);
    } else if (name == "stats") {
      run_stats(st, s);
    } else if (name == "filter") {
      run_filter(fo, s);
    } else if (name == "minpairs-gen") {
      run_minpairs_gen(gen, s);
    } else if (name == "minpairs-score") {
      run_minpairs_score(sc, s);
    } else {
      status = run_validate(va, s);
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  ojson summary;
  summary["tool"] = "fgd";
  summary["version"] = FGD_VERSION;
  summary["subcommand"] = sub->get_name();
  summary["status"] = status == 0 ? "ok" : "invalid";
  summary["config"] = effective_config(*sub);
  summary["counts"] = s.counts;
  summary["outputs"] = s.outputs;
  out << summary.dump(2) << "\n";
  return status;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace fgd::cli
