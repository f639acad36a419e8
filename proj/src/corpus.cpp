#include "fgd/corpus.hpp"

#include <fstream>

namespace fgd {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_string()) throw std::invalid_argument(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

int require_int(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number_integer()) {
    throw std::invalid_argument(std::string("field '") + key + "' must be an integer");
  }
  return v.get<int>();
}

}  // namespace

ParsedUtterance utterance_from_json(const json& record) {
  if (!record.is_object()) throw std::invalid_argument("record is not a JSON object");
  ParsedUtterance utt;
  utt.meta.utterance_id = require_string(record, "utterance_id");
  utt.meta.corpus_id = require_string(record, "corpus_id");
  utt.meta.transcript_id = require_string(record, "transcript_id");
  const auto group = require_string(record, "speaker_group");
  auto g = speaker_group_from_string(group);
  if (!g) throw std::invalid_argument("unknown speaker_group '" + group + "'");
  utt.meta.speaker_group = *g;

  if (auto it = record.find("child_age_months"); it != record.end() && !it->is_null()) {
    if (!it->is_number()) throw std::invalid_argument("field 'child_age_months' must be a number or null");
    utt.meta.child_age_months = it->get<double>();
  }

  const json& tokens = require(record, "tokens");
  if (!tokens.is_array()) throw std::invalid_argument("field 'tokens' must be an array");
  for (const auto& t : tokens) {
    if (!t.is_object()) throw std::invalid_argument("token entries must be objects");
    Token tok;
    tok.index = require_int(t, "i");
    tok.text = require_string(t, "text");
    tok.lemma = require_string(t, "lemma");
    tok.pos = require_string(t, "pos");
    utt.tokens.push_back(std::move(tok));
  }

  const json& deps = require(record, "deps");
  if (!deps.is_array()) throw std::invalid_argument("field 'deps' must be an array");
  std::vector<DependencyEdge> edges;
  for (const auto& d : deps) {
    if (!d.is_object()) throw std::invalid_argument("dependency entries must be objects");
    edges.push_back({require_int(d, "d"), require_int(d, "h"), require_string(d, "rel")});
  }
  utt.dependency = DependencyGraph(std::move(edges));

  const auto tree = require_string(record, "tree");
  try {
    utt.constituency = parse_bracketed(tree);
  } catch (const BracketParseError& e) {
    throw std::invalid_argument(std::string("tree: ") + e.what());
  }
  return utt;
}

nlohmann::ordered_json utterance_to_json(const ParsedUtterance& utt) {
  nlohmann::ordered_json out;
  out["utterance_id"] = utt.meta.utterance_id;
  out["corpus_id"] = utt.meta.corpus_id;
  out["transcript_id"] = utt.meta.transcript_id;
  out["speaker_group"] = std::string(to_string(utt.meta.speaker_group));
  if (utt.meta.child_age_months) {
    out["child_age_months"] = *utt.meta.child_age_months;
  } else {
    out["child_age_months"] = nullptr;
  }
  auto tokens = nlohmann::ordered_json::array();
  for (const auto& t : utt.tokens) {
    tokens.push_back({{"i", t.index}, {"text", t.text}, {"lemma", t.lemma}, {"pos", t.pos}});
  }
  out["tokens"] = std::move(tokens);
  auto deps = nlohmann::ordered_json::array();
  for (const auto& e : utt.dependency.edges()) {
    deps.push_back({{"d", e.dependent}, {"h", e.head}, {"rel", e.relation}});
  }
  out["deps"] = std::move(deps);
  out["tree"] = serialize_bracketed(utt.constituency);
  return out;
}

CorpusReader::CorpusReader(std::istream& in, bool strict) : in_(in), strict_(strict) {}

void CorpusReader::reject(std::size_t line, const std::string& id, const std::string& message) {
  if (strict_) throw CorpusError(line, message);
  ++skipped_;
  diagnostics_.push_back({line, id, message});
}

std::optional<ParsedUtterance> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      reject(line_no_, "", std::string("invalid JSON: ") + e.what());
      continue;
    }
    std::string id;
    if (record.is_object()) {
      if (auto it = record.find("utterance_id"); it != record.end() && it->is_string()) {
        id = it->get<std::string>();
      }
    }
    ParsedUtterance utt;
    try {
      utt = utterance_from_json(record);
    } catch (const std::exception& e) {
      reject(line_no_, id, std::string("schema: ") + e.what());
      continue;
    }
    auto problems = check_utterance(utt);
    if (!seen_ids_.insert(utt.meta.utterance_id).second) {
      problems.push_back("duplicate utterance_id '" + utt.meta.utterance_id + "'");
    }
    if (!problems.empty()) {
      std::string msg = "invariant: " + problems.front();
      for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
      reject(line_no_, id, msg);
      continue;
    }
    last_line_ = line_no_;
    ++accepted_;
    return utt;
  }
  return std::nullopt;
}

CorpusReadResult read_corpus(std::istream& in, bool strict) {
  CorpusReader reader(in, strict);
  CorpusReadResult out;
  while (auto utt = reader.next()) out.records.push_back(std::move(*utt));
  out.diagnostics = reader.diagnostics();
  out.skipped = reader.skipped();
  return out;
}

CorpusReadResult read_corpus(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus '" + path + "'");
  return read_corpus(in, strict);
}

}  // namespace fgd
