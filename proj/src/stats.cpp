#include "fgd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "format.hpp"
#include "random.hpp"

namespace fgd {

using detail::format_exact;
using detail::format_fixed;

void BinSpec::validate() const {
  if (width_months <= 0) throw std::invalid_argument("bin width must be positive");
  if (!std::isfinite(min_age) || !std::isfinite(max_age) || !(min_age < max_age)) {
    throw std::invalid_argument("bin range needs min_age < max_age");
  }
}

int BinSpec::bin_of(double age) const {
  if (!(age >= min_age) || !(age < max_age)) return -1;
  return static_cast<int>(std::floor((age - min_age) / width_months));
}

int BinSpec::bin_count() const {
  return static_cast<int>(std::ceil((max_age - min_age) / width_months));
}

void CellCounts::add(const LabelSet& labels) {
  ++n;
  for (Label l : labels) ++label[static_cast<std::size_t>(l)];
  if (!labels.empty()) ++any_fgd;
  for (Family f : kAllFamilies) {
    auto fi = static_cast<std::size_t>(f);
    auto hits = [&](const LabelSet& group) {
      return std::any_of(labels.begin(), labels.end(), [&](Label l) { return group.count(l) > 0; });
    };
    if (hits(family_labels(f))) ++family_any[fi];
    if (hits(subject_labels(f))) ++family_subj[fi];
    if (hits(object_labels(f))) ++family_obj[fi];
  }
}

void CellCounts::merge(const CellCounts& other) {
  n += other.n;
  any_fgd += other.any_fgd;
  for (std::size_t i = 0; i < kLabelCount; ++i) label[i] += other.label[i];
  for (std::size_t i = 0; i < 3; ++i) {
    family_any[i] += other.family_any[i];
    family_subj[i] += other.family_subj[i];
    family_obj[i] += other.family_obj[i];
  }
}

void BinnedCounts::add(const LabeledUtterance& utt, bool fold_other_child) {
  if (!utt.age_months) {
    ++dropped_no_age;
    return;
  }
  int bin = spec.bin_of(*utt.age_months);
  if (bin < 0) {
    ++dropped_out_of_range;
    return;
  }
  SpeakerGroup g = utt.group;
  if (fold_other_child && g == SpeakerGroup::OtherChild) g = SpeakerGroup::Adult;
  cells[CellKey{bin, g}].add(utt.labels);
}

void BinnedCounts::merge(const BinnedCounts& other) {
  if (other.spec.width_months != spec.width_months || other.spec.min_age != spec.min_age ||
      other.spec.max_age != spec.max_age) {
    throw std::invalid_argument("cannot merge counts binned with different specs");
  }
  for (const auto& [k, c] : other.cells) cells[k].merge(c);
  dropped_no_age += other.dropped_no_age;
  dropped_out_of_range += other.dropped_out_of_range;
}

bool BinnedCounts::operator==(const BinnedCounts& other) const {
  return cells == other.cells && dropped_no_age == other.dropped_no_age &&
         dropped_out_of_range == other.dropped_out_of_range;
}

BinnedCounts bin_utterances(const std::vector<LabeledUtterance>& corpus, const BinSpec& spec,
                            bool fold_other_child) {
  spec.validate();
  BinnedCounts out;
  out.spec = spec;
  for (const auto& u : corpus) out.add(u, fold_other_child);
  return out;
}

WilsonInterval wilson_interval(long k, long n, double z) {
  if (n < 1) throw std::invalid_argument("wilson_interval: n must be >= 1");
  if (k < 0 || k > n) throw std::invalid_argument("wilson_interval: need 0 <= k <= n");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // Clamp rounding spill at the boundaries so the bounds always bracket p.
  return {std::clamp(centre - half, 0.0, p), std::clamp(centre + half, p, 1.0)};
}

std::string RateTarget::name() const {
  switch (kind) {
    case Kind::Label:
      return std::string(to_string(label));
    case Kind::Family:
      return std::string(to_string(family));
    case Kind::Any:
      break;
  }
  return "any";
}

long RateTarget::count(const CellCounts& c) const {
  switch (kind) {
    case Kind::Label:
      return c.count(label);
    case Kind::Family:
      return c.family_any[static_cast<std::size_t>(family)];
    case Kind::Any:
      break;
  }
  return c.any_fgd;
}

std::vector<RateEstimate> rate_table(const BinnedCounts& cells,
                                     const std::vector<RateTarget>& targets, double z) {
  std::vector<RateEstimate> out;
  for (const auto& t : targets) {
    for (const auto& [key, c] : cells.cells) {
      if (c.n == 0) continue;
      RateEstimate r;
      r.target = t.name();
      r.bin = key.bin;
      r.group = key.group;
      r.count = t.count(c);
      r.n = c.n;
      r.rate_per_1000 = static_cast<double>(r.count) / static_cast<double>(r.n) * 1000.0;
      auto w = wilson_interval(r.count, r.n, z);
      r.wilson_low = w.low;
      r.wilson_high = w.high;
      out.push_back(std::move(r));
    }
  }
  return out;
}

double log_ratio(double subj_rate, double obj_rate, double epsilon) {
  return std::log((subj_rate + epsilon) / (obj_rate + epsilon));
}

std::vector<LogRatioPoint> log_ratio_series(const BinnedCounts& cells, Family family,
                                            double epsilon) {
  std::vector<LogRatioPoint> out;
  const auto fi = static_cast<std::size_t>(family);
  for (const auto& [key, c] : cells.cells) {
    if (c.n == 0) continue;
    LogRatioPoint p;
    p.construction = family;
    p.bin = key.bin;
    p.group = key.group;
    p.n = c.n;
    p.subj_rate = static_cast<double>(c.family_subj[fi]) / static_cast<double>(c.n) * 1000.0;
    p.obj_rate = static_cast<double>(c.family_obj[fi]) / static_cast<double>(c.n) * 1000.0;
    p.epsilon = epsilon;
    p.value = log_ratio(p.subj_rate, p.obj_rate, epsilon);
    out.push_back(p);
  }
  return out;
}

std::vector<SubjectShare> subject_share_table(const BinnedCounts& cells) {
  std::vector<SubjectShare> out;
  for (Family f : kAllFamilies) {
    const auto fi = static_cast<std::size_t>(f);
    for (const auto& [key, c] : cells.cells) {
      const long s = c.family_subj[fi];
      const long o = c.family_obj[fi];
      if (s + o == 0) continue;
      out.push_back({f, key.bin, key.group, s, o,
                     static_cast<double>(s) / static_cast<double>(s + o)});
    }
  }
  return out;
}

namespace {

// Linear interpolation between order statistics of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

DeltaSubj delta_subj(const BinnedCounts& cells, Family first, Family second, SpeakerGroup group,
                     long min_count, int n_resamples, std::uint64_t seed, double confidence) {
  if (n_resamples < 1) throw std::invalid_argument("delta_subj: n_resamples must be >= 1");
  if (!(confidence > 0 && confidence < 1)) {
    throw std::invalid_argument("delta_subj: confidence must lie in (0, 1)");
  }
  DeltaSubj d;
  d.first = first;
  d.second = second;
  d.group = group;
  const auto a = static_cast<std::size_t>(first);
  const auto b = static_cast<std::size_t>(second);
  std::vector<double> diffs;
  for (const auto& [key, c] : cells.cells) {
    if (key.group != group) continue;
    const long na = c.family_subj[a] + c.family_obj[a];
    const long nb = c.family_subj[b] + c.family_obj[b];
    if (na < min_count || nb < min_count || na == 0 || nb == 0) continue;
    const double pa = static_cast<double>(c.family_subj[a]) / static_cast<double>(na);
    const double pb = static_cast<double>(c.family_subj[b]) / static_cast<double>(nb);
    diffs.push_back(pa - pb);
    d.bins.push_back(key.bin);
  }
  if (diffs.empty()) return d;
  d.n_bins = static_cast<int>(diffs.size());
  double sum = 0;
  for (double x : diffs) sum += x;
  d.mean = sum / static_cast<double>(diffs.size());

  detail::Rng rng(seed);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(n_resamples));
  for (int r = 0; r < n_resamples; ++r) {
    double s = 0;
    for (std::size_t i = 0; i < diffs.size(); ++i) s += diffs[rng.below(diffs.size())];
    means.push_back(s / static_cast<double>(diffs.size()));
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - confidence) / 2.0;
  d.ci_low = quantile(means, alpha);
  d.ci_high = quantile(means, 1.0 - alpha);
  return d;
}

LongitudinalReport child_longitudinal_summary(const std::vector<LabeledUtterance>& utterances,
                                              bool fold_other_child,
                                              std::optional<std::pair<int, int>> totals_range) {
  struct Acc {
    long n[2] = {0, 0};
    long fgd[2] = {0, 0};
    std::array<long, kLabelCount> labels[2] = {{}, {}};
  };
  std::map<int, Acc> by_month;
  for (const auto& u : utterances) {
    if (!u.age_months || !(*u.age_months >= 0)) continue;
    int stream;
    if (u.group == SpeakerGroup::TargetChild) {
      stream = 1;
    } else if (u.group == SpeakerGroup::Adult ||
               (fold_other_child && u.group == SpeakerGroup::OtherChild)) {
      stream = 0;
    } else {
      continue;
    }
    auto& acc = by_month[static_cast<int>(std::floor(*u.age_months))];
    ++acc.n[stream];
    if (!u.labels.empty()) ++acc.fgd[stream];
    for (Label l : u.labels) ++acc.labels[stream][static_cast<std::size_t>(l)];
  }

  LongitudinalReport rep;
  if (by_month.empty()) return rep;
  rep.totals_from = totals_range ? totals_range->first : by_month.begin()->first;
  rep.totals_to = totals_range ? totals_range->second : by_month.rbegin()->first;
  for (const auto& [month, acc] : by_month) {
    MonthRow row;
    row.month = month;
    row.n_adult = acc.n[0];
    row.n_child = acc.n[1];
    row.fgd_adult = acc.fgd[0];
    row.fgd_child = acc.fgd[1];
    if (row.n_adult > 0) {
      row.rate_adult = static_cast<double>(row.fgd_adult) / static_cast<double>(row.n_adult) * 1000.0;
    }
    if (row.n_child > 0) {
      row.rate_child = static_cast<double>(row.fgd_child) / static_cast<double>(row.n_child) * 1000.0;
    }
    if (row.rate_child > 0) row.adult_child_ratio = row.rate_adult / row.rate_child;
    if (row.fgd_child > 0 && !rep.first_child_fgd_month) rep.first_child_fgd_month = month;
    if (month >= rep.totals_from && month <= rep.totals_to) {
      for (std::size_t i = 0; i < kLabelCount; ++i) {
        rep.adult_totals[i] += acc.labels[0][i];
        rep.child_totals[i] += acc.labels[1][i];
      }
    }
    rep.months.push_back(row);
  }
  return rep;
}

std::string stats_comment(const StatsMeta& m) {
  std::ostringstream out;
  out << "# fgd " << FGD_VERSION << " epsilon=" << format_exact(m.epsilon)
      << " z=" << format_exact(m.z) << " min_count=" << m.min_count
      << " resamples=" << m.resamples << " seed=" << m.seed
      << " bin_width=" << m.spec.width_months << " min_age=" << format_exact(m.spec.min_age)
      << " max_age=" << format_exact(m.spec.max_age) << " log=ln"
      << " adult_stream=" << (m.fold_other_child ? "adult+other_child" : "adult") << "\n";
  return out.str();
}

namespace {

std::string bin_cells(const BinSpec& spec, int bin) {
  return std::to_string(bin) + ',' + format_exact(spec.bin_low(bin)) + ',' +
         format_exact(spec.bin_high(bin));
}

}  // namespace

std::string rates_csv(const std::vector<RateEstimate>& rows, const StatsMeta& meta) {
  std::ostringstream out;
  out << stats_comment(meta);
  out << "target,bin,age_low,age_high,group,count,n,rate_per_1000,wilson_low_per_1000,"
         "wilson_high_per_1000\n";
  for (const auto& r : rows) {
    out << r.target << ',' << bin_cells(meta.spec, r.bin) << ',' << to_string(r.group) << ','
        << r.count << ',' << r.n << ',' << format_fixed(r.rate_per_1000, 6) << ','
        << format_fixed(1000 * r.wilson_low, 6) << ','
        << format_fixed(1000 * r.wilson_high, 6) << "\n";
  }
  return out.str();
}

std::string log_ratio_csv(const std::vector<LogRatioPoint>& rows, const StatsMeta& meta) {
  std::ostringstream out;
  out << stats_comment(meta);
  out << "construction,bin,age_low,age_high,group,n,subj_rate,obj_rate,epsilon,log_ratio\n";
  for (const auto& p : rows) {
    out << to_string(p.construction) << ',' << bin_cells(meta.spec, p.bin) << ','
        << to_string(p.group) << ',' << p.n << ',' << format_fixed(p.subj_rate, 6) << ','
        << format_fixed(p.obj_rate, 6) << ',' << format_exact(p.epsilon) << ','
        << format_fixed(p.value, 9) << "\n";
  }
  return out.str();
}

std::string subject_share_csv(const std::vector<SubjectShare>& rows, const StatsMeta& meta) {
  std::ostringstream out;
  out << stats_comment(meta);
  out << "construction,bin,age_low,age_high,group,count_subj,count_obj,p_subj\n";
  for (const auto& s : rows) {
    out << to_string(s.construction) << ',' << bin_cells(meta.spec, s.bin) << ','
        << to_string(s.group) << ',' << s.count_subj << ',' << s.count_obj << ','
        << format_fixed(s.p_subj, 9) << "\n";
  }
  return out.str();
}

std::string delta_subj_csv(const std::vector<DeltaSubj>& rows, const StatsMeta& meta) {
  std::ostringstream out;
  out << stats_comment(meta);
  out << "first,second,group,n_bins,mean,ci_low,ci_high\n";
  for (const auto& d : rows) {
    out << to_string(d.first) << ',' << to_string(d.second) << ',' << to_string(d.group) << ','
        << d.n_bins << ',';
    if (d.empty()) {
      out << "n/a,n/a,n/a\n";
    } else {
      out << format_fixed(d.mean, 9) << ',' << format_fixed(d.ci_low, 9) << ','
          << format_fixed(d.ci_high, 9) << "\n";
    }
  }
  return out.str();
}

std::string longitudinal_csv(const LongitudinalReport& rep, const StatsMeta& meta) {
  std::ostringstream out;
  out << stats_comment(meta);
  out << "# first_child_fgd_month="
      << (rep.first_child_fgd_month ? std::to_string(*rep.first_child_fgd_month) : "n/a") << "\n";
  out << "month,n_adult,n_child,fgd_adult,fgd_child,rate_adult,rate_child,adult_child_ratio\n";
  for (const auto& r : rep.months) {
    out << r.month << ',' << r.n_adult << ',' << r.n_child << ',' << r.fgd_adult << ','
        << r.fgd_child << ',' << format_fixed(r.rate_adult, 6) << ','
        << format_fixed(r.rate_child, 6) << ','
        << (r.adult_child_ratio ? format_fixed(*r.adult_child_ratio, 6) : "n/a") << "\n";
  }
  return out.str();
}

std::string longitudinal_totals_csv(const LongitudinalReport& rep, const StatsMeta& meta) {
  std::ostringstream out;
  out << stats_comment(meta);
  out << "label,month_from,month_to,adult_total,child_total\n";
  for (Label l : kAllLabels) {
    auto i = static_cast<std::size_t>(l);
    out << to_string(l) << ',' << rep.totals_from << ',' << rep.totals_to << ','
        << rep.adult_totals[i] << ',' << rep.child_totals[i] << "\n";
  }
  return out.str();
}

}  // namespace fgd
