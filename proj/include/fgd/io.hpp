#pragma once

#include <fstream>
#include <iosfwd>
#include <string>

#include "fgd/label.hpp"

namespace fgd {

// Output file written to a sibling temporary and renamed into place on
// commit(). An uncommitted file is removed on destruction.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() { return out_; }
  const std::string& path() const { return path_; }
  void commit();

 private:
  std::string path_;
  std::string temp_;
  std::ofstream out_;
  bool committed_ = false;
};

// Reads {"utterance_id": str, "labels": [str], ...} lines, as written by
// detection and gold inference. Unknown label names and duplicate ids throw
// std::invalid_argument naming the line.
LabelMap read_label_jsonl(std::istream& in);
LabelMap read_label_jsonl(const std::string& path);

std::ifstream open_input(const std::string& path);

}  // namespace fgd
