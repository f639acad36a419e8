#include "fgd/io.hpp"

#include <cstdio>
#include <stdexcept>

#include <unistd.h>

#include <json.hpp>

namespace fgd {

AtomicFile::AtomicFile(std::string path) : path_(std::move(path)) {
  temp_ = path_ + ".tmp." + std::to_string(::getpid());
  out_.open(temp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot write " + temp_);
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::remove(temp_.c_str());
  }
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) throw std::runtime_error("write failed for " + path_);
  out_.close();
  if (std::rename(temp_.c_str(), path_.c_str()) != 0) {
    std::remove(temp_.c_str());
    throw std::runtime_error("cannot rename " + temp_ + " to " + path_);
  }
  committed_ = true;
}

LabelMap read_label_jsonl(std::istream& in) {
  LabelMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      auto id = j.at("utterance_id").get<std::string>();
      LabelSet set;
      for (const auto& l : j.at("labels")) set.insert(parse_label(l.get<std::string>()));
      if (!out.emplace(id, std::move(set)).second) {
        throw std::invalid_argument("duplicate utterance_id " + id);
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

LabelMap read_label_jsonl(const std::string& path) {
  auto in = open_input(path);
  return read_label_jsonl(in);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace fgd
