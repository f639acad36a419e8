#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace fgd {

// Construction x extraction-site categories. Declaration order is the
// canonical output order everywhere labels are listed.
enum class Label {
  SMQ,
  OMQ,
  AMQ,
  PMQ,
  PlainMQ,
  CC_SMQ,
  CC_OMQ,
  CC_AMQ,
  SEQ,
  OEQ,
  AEQ,
  PEQ,
  SRC,
  ORC,
  ARC,
  PRC,
  SRC_reduced,
  ORC_reduced,
};

inline constexpr std::size_t kLabelCount = 18;

inline constexpr std::array<Label, kLabelCount> kAllLabels = {
    Label::SMQ,     Label::OMQ,    Label::AMQ,         Label::PMQ,
    Label::PlainMQ, Label::CC_SMQ, Label::CC_OMQ,      Label::CC_AMQ,
    Label::SEQ,     Label::OEQ,    Label::AEQ,         Label::PEQ,
    Label::SRC,     Label::ORC,    Label::ARC,         Label::PRC,
    Label::SRC_reduced, Label::ORC_reduced,
};

using LabelSet = std::set<Label>;
// Utterance id -> labels.
using LabelMap = std::map<std::string, LabelSet>;

std::string_view to_string(Label label);
std::optional<Label> label_from_string(std::string_view text);

// Throws std::invalid_argument on an unknown name.
Label parse_label(std::string_view text);

enum class Family { MatrixQ, EmbeddedQ, RC };

inline constexpr std::array<Family, 3> kAllFamilies = {Family::MatrixQ, Family::EmbeddedQ,
                                                       Family::RC};

std::string_view to_string(Family family);
std::optional<Family> family_from_string(std::string_view text);
Family family_of(Label label);

bool is_cross_clausal(Label label);

// Every label belonging to a construction family.
LabelSet family_labels(Family family);

// Subject/object label groups used by the extraction-site statistics. The
// matrix side folds in the cross-clausal variants.
LabelSet subject_labels(Family family);
LabelSet object_labels(Family family);

}  // namespace fgd
