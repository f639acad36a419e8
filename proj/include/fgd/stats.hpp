#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fgd/label.hpp"
#include "fgd/parsetree.hpp"

namespace fgd {

// Age bins [min_age + k*width, min_age + (k+1)*width) covering [min_age, max_age).
struct BinSpec {
  int width_months = 6;
  double min_age = 3;
  double max_age = 80;

  void validate() const;  // throws std::invalid_argument
  // Bin index of an age, or -1 outside [min_age, max_age).
  int bin_of(double age) const;
  int bin_count() const;
  double bin_low(int bin) const { return min_age + bin * width_months; }
  double bin_high(int bin) const { return min_age + (bin + 1) * width_months; }
};

struct LabeledUtterance {
  std::string utterance_id;
  std::string transcript_id;
  SpeakerGroup group = SpeakerGroup::Adult;
  std::optional<double> age_months;
  LabelSet labels;
};

struct CellKey {
  int bin = 0;
  SpeakerGroup group = SpeakerGroup::Adult;
  auto operator<=>(const CellKey&) const = default;
};

struct CellCounts {
  long n = 0;
  std::array<long, kLabelCount> label{};
  // Utterances carrying any label of the family, any subject label, any
  // object label.
  std::array<long, 3> family_any{};
  std::array<long, 3> family_subj{};
  std::array<long, 3> family_obj{};
  long any_fgd = 0;

  void add(const LabelSet& labels);
  void merge(const CellCounts& other);
  long count(Label l) const { return label[static_cast<std::size_t>(l)]; }
  bool operator==(const CellCounts&) const = default;
};

struct BinnedCounts {
  BinSpec spec;
  std::map<CellKey, CellCounts> cells;
  long dropped_no_age = 0;
  long dropped_out_of_range = 0;

  // other_child speech is counted as adult when fold_other_child is set.
  void add(const LabeledUtterance& utt, bool fold_other_child = false);
  void merge(const BinnedCounts& other);  // specs must agree
  bool operator==(const BinnedCounts& other) const;
};

BinnedCounts bin_utterances(const std::vector<LabeledUtterance>& corpus, const BinSpec& spec,
                            bool fold_other_child = false);

struct WilsonInterval {
  double low = 0;
  double high = 0;
};

// Throws std::invalid_argument unless n >= 1 and 0 <= k <= n.
WilsonInterval wilson_interval(long k, long n, double z = 1.96);

// What a rate row counts: one label, any label of a family, or any label.
struct RateTarget {
  enum class Kind { Label, Family, Any } kind = Kind::Any;
  Label label{};
  Family family{};

  static RateTarget of(Label l) { return {Kind::Label, l, {}}; }
  static RateTarget of(Family f) { return {Kind::Family, {}, f}; }
  static RateTarget any() { return {}; }
  std::string name() const;
  long count(const CellCounts& c) const;
};

struct RateEstimate {
  std::string target;
  int bin = 0;
  SpeakerGroup group{};
  long count = 0;
  long n = 0;
  double rate_per_1000 = 0;
  double wilson_low = 0;  // proportions in [0, 1]
  double wilson_high = 0;
};

std::vector<RateEstimate> rate_table(const BinnedCounts& cells,
                                     const std::vector<RateTarget>& targets, double z = 1.96);

double log_ratio(double subj_rate, double obj_rate, double epsilon = 0.5);

struct LogRatioPoint {
  Family construction{};
  int bin = 0;
  SpeakerGroup group{};
  long n = 0;
  double subj_rate = 0;
  double obj_rate = 0;
  double epsilon = 0;
  double value = 0;
};

std::vector<LogRatioPoint> log_ratio_series(const BinnedCounts& cells, Family family,
                                            double epsilon = 0.5);

struct SubjectShare {
  Family construction{};
  int bin = 0;
  SpeakerGroup group{};
  long count_subj = 0;
  long count_obj = 0;
  double p_subj = 0;
};

std::vector<SubjectShare> subject_share_table(const BinnedCounts& cells);

struct DeltaSubj {
  Family first{};
  Family second{};
  SpeakerGroup group{};
  int n_bins = 0;  // 0 = no qualifying bin; the other fields are then unset
  double mean = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::vector<int> bins;

  bool empty() const { return n_bins == 0; }
};

// Mean over bins where both families have subj+obj >= min_count of
// p_subj(first) - p_subj(second), with a percentile bootstrap over bins.
DeltaSubj delta_subj(const BinnedCounts& cells, Family first, Family second, SpeakerGroup group,
                     long min_count, int n_resamples, std::uint64_t seed,
                     double confidence = 0.95);

struct MonthRow {
  int month = 0;
  long n_adult = 0;
  long n_child = 0;
  long fgd_adult = 0;
  long fgd_child = 0;
  double rate_adult = 0;  // per 1,000; 0 when the stream is empty
  double rate_child = 0;
  std::optional<double> adult_child_ratio;  // undefined when the child rate is 0
};

struct LongitudinalReport {
  std::vector<MonthRow> months;
  std::optional<int> first_child_fgd_month;
  int totals_from = 0;
  int totals_to = 0;
  // Per-label absolute counts over months [totals_from, totals_to].
  std::array<long, kLabelCount> adult_totals{};
  std::array<long, kLabelCount> child_totals{};
};

// One target child's transcripts. Months are whole months (floor of age);
// utterances without an age are ignored. The totals range defaults to every
// observed month.
LongitudinalReport child_longitudinal_summary(const std::vector<LabeledUtterance>& utterances,
                                              bool fold_other_child = false,
                                              std::optional<std::pair<int, int>> totals_range = {});

// Run parameters echoed as the leading "#" comment of every stats CSV.
struct StatsMeta {
  BinSpec spec;
  double epsilon = 0.5;
  double z = 1.96;
  long min_count = 10;
  int resamples = 10000;
  std::uint64_t seed = 0;
  bool fold_other_child = false;
};

std::string stats_comment(const StatsMeta& meta);

std::string rates_csv(const std::vector<RateEstimate>& rows, const StatsMeta& meta);
std::string log_ratio_csv(const std::vector<LogRatioPoint>& rows, const StatsMeta& meta);
std::string subject_share_csv(const std::vector<SubjectShare>& rows, const StatsMeta& meta);
std::string delta_subj_csv(const std::vector<DeltaSubj>& rows, const StatsMeta& meta);
std::string longitudinal_csv(const LongitudinalReport& report, const StatsMeta& meta);
std::string longitudinal_totals_csv(const LongitudinalReport& report, const StatsMeta& meta);

}  // namespace fgd
