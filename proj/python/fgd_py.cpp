#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fgd/corpus.hpp"
#include "fgd/detectors.hpp"
#include "fgd/goldtraces.hpp"
#include "fgd/minpairs.hpp"
#include "fgd/parsetree.hpp"
#include "fgd/stats.hpp"

namespace py = pybind11;

namespace {

std::vector<std::string> names(const fgd::LabelSet& labels) {
  std::vector<std::string> out;
  for (auto l : labels) out.emplace_back(fgd::to_string(l));
  return out;
}

// Records and results cross the boundary as JSON text.
std::string detect_record(const std::string& record, const std::vector<std::string>& embedding_verbs) {
  auto utt = fgd::utterance_from_json(nlohmann::json::parse(record));
  auto problems = fgd::check_utterance(utt);
  if (!problems.empty()) throw std::invalid_argument(problems.front());
  fgd::EmbeddingVerbLexicon lex = embedding_verbs.empty()
                                      ? fgd::EmbeddingVerbLexicon()
                                      : fgd::EmbeddingVerbLexicon(std::set<std::string>(
                                            embedding_verbs.begin(), embedding_verbs.end()));
  return fgd::detections_to_json(utt.meta.utterance_id, fgd::detect_all(utt, lex)).dump();
}

std::vector<std::string> gold_labels(const std::string& tree, bool rc_traces) {
  fgd::GoldOptions opt;
  opt.rc_traces = rc_traces;
  std::vector<fgd::GoldTree> trees = {{"x", fgd::parse_bracketed(tree), 1}};
  return names(fgd::gold_label_corpus(trees, opt).labels.at("x"));
}

py::dict score_pairs(const std::string& items_jsonl, const std::string& scores_jsonl) {
  std::vector<fgd::MinimalPairItem> items;
  std::istringstream in(items_jsonl);
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    items.push_back(fgd::item_from_json(nlohmann::json::parse(line)));
  }
  std::istringstream sin(scores_jsonl);
  auto report = fgd::score_accuracy(items, fgd::read_scores(sin));
  auto row = [](const fgd::AccuracyRow& r) {
    py::dict d;
    d["construction"] = r.construction;
    d["site"] = r.site;
    d["n_pairs"] = r.n_pairs;
    d["n_correct"] = r.n_correct;
    d["accuracy"] = r.accuracy ? py::object(py::float_(*r.accuracy)) : py::object(py::none());
    return d;
  };
  py::list rows;
  for (const auto& r : report.rows) rows.append(row(r));
  py::dict out;
  out["rows"] = rows;
  out["overall"] = row(report.overall);
  out["missing_pairs"] = report.missing_pairs;
  return out;
}

}  // namespace

PYBIND11_MODULE(_fgd, m) {
  m.attr("__version__") = FGD_VERSION;
  py::register_exception<fgd::BracketParseError>(m, "BracketParseError", PyExc_ValueError);
  py::register_exception<fgd::CorpusError>(m, "CorpusError", PyExc_ValueError);

  m.def("labels", [] {
    std::vector<std::string> out;
    for (auto l : fgd::kAllLabels) out.emplace_back(fgd::to_string(l));
    return out;
  });
  m.def("family_of", [](const std::string& label) {
    return std::string(fgd::to_string(fgd::family_of(fgd::parse_label(label))));
  });
  m.def("normalize_tree",
        [](const std::string& text) { return fgd::serialize_bracketed(fgd::parse_bracketed(text)); });
  m.def("tree_leaves", [](const std::string& text) { return fgd::parse_bracketed(text).leaf_words(); });
  m.def("detect", &detect_record, py::arg("record"), py::arg("embedding_verbs") = std::vector<std::string>{});
  m.def("gold_labels", &gold_labels, py::arg("tree"), py::arg("rc_traces") = false);
  m.def(
      "wilson",
      [](long k, long n, double z) {
        auto w = fgd::wilson_interval(k, n, z);
        return std::make_pair(w.low, w.high);
      },
      py::arg("k"), py::arg("n"), py::arg("z") = 1.96);
  m.def("log_ratio", &fgd::log_ratio, py::arg("subj_rate"), py::arg("obj_rate"),
        py::arg("epsilon") = 0.5);
  m.def("score_pairs", &score_pairs, py::arg("items_jsonl"), py::arg("scores_jsonl"));
}
