#include "fgd/label.hpp"

#include <stdexcept>

namespace fgd {

namespace {

constexpr std::array<std::string_view, kLabelCount> kLabelNames = {
    "SMQ", "OMQ", "AMQ", "PMQ", "PlainMQ", "CC_SMQ", "CC_OMQ", "CC_AMQ", "SEQ",
    "OEQ", "AEQ", "PEQ", "SRC", "ORC",     "ARC",    "PRC",    "SRC_reduced", "ORC_reduced",
};

}  // namespace

std::string_view to_string(Label label) {
  return kLabelNames[static_cast<std::size_t>(label)];
}

std::optional<Label> label_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (kLabelNames[i] == text) return kAllLabels[i];
  }
  return std::nullopt;
}

Label parse_label(std::string_view text) {
  if (auto label = label_from_string(text)) return *label;
  throw std::invalid_argument("unknown label '" + std::string(text) + "'");
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::MatrixQ:
      return "matrixQ";
    case Family::EmbeddedQ:
      return "embeddedQ";
    case Family::RC:
      return "RC";
  }
  return "?";
}

std::optional<Family> family_from_string(std::string_view text) {
  if (text == "matrixQ") return Family::MatrixQ;
  if (text == "embeddedQ") return Family::EmbeddedQ;
  if (text == "RC") return Family::RC;
  return std::nullopt;
}

Family family_of(Label label) {
  switch (label) {
    case Label::SMQ:
    case Label::OMQ:
    case Label::AMQ:
    case Label::PMQ:
    case Label::PlainMQ:
    case Label::CC_SMQ:
    case Label::CC_OMQ:
    case Label::CC_AMQ:
      return Family::MatrixQ;
    case Label::SEQ:
    case Label::OEQ:
    case Label::AEQ:
    case Label::PEQ:
      return Family::EmbeddedQ;
    default:
      return Family::RC;
  }
}

bool is_cross_clausal(Label label) {
  return label == Label::CC_SMQ || label == Label::CC_OMQ || label == Label::CC_AMQ;
}

LabelSet family_labels(Family family) {
  LabelSet out;
  for (Label l : kAllLabels) {
    if (family_of(l) == family) out.insert(l);
  }
  return out;
}

LabelSet subject_labels(Family family) {
  switch (family) {
    case Family::MatrixQ:
      return {Label::SMQ, Label::CC_SMQ};
    case Family::EmbeddedQ:
      return {Label::SEQ};
    case Family::RC:
      return {Label::SRC};
  }
  return {};
}

LabelSet object_labels(Family family) {
  switch (family) {
    case Family::MatrixQ:
      return {Label::OMQ, Label::CC_OMQ};
    case Family::EmbeddedQ:
      return {Label::OEQ};
    case Family::RC:
      return {Label::ORC};
  }
  return {};
}

}  // namespace fgd
