#include "ctmix/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "ctmix/errors.hpp"
#include "ctmix/mathutil.hpp"

namespace ctmix {

double mixing_time(const std::function<double(double)>& profile, double a,
                   double t_hi, const BisectionOptions& opts) {
  if (!(a > 0.0) || !(a < 1.0))
    fail(Errc::invalid_threshold, "threshold must lie in (0, 1), got " + fmt17(a));
  if (!(t_hi > 0.0))
    fail(Errc::cap_too_small, "search cap must be positive, got " + fmt17(t_hi));
  if (profile(0.0) < a) return 0.0;
  if (profile(t_hi) >= a)
    fail(Errc::cap_too_small, "distance at cap " + fmt17(t_hi) + " is still >= " + fmt17(a));
  double lo = 0.0, hi = t_hi;
  const double width = opts.rel_tol * t_hi;
  while (hi - lo > width) {
    double mid = 0.5 * (lo + hi);
    if (profile(mid) < a)
      hi = mid;
    else
      lo = mid;
  }
  return lo;
}

double mixing_time(const WorstCaseEvaluator& eval, DistanceKind kind, double a,
                   double t_hi, const BisectionOptions& opts) {
  return mixing_time([&](double t) { return eval(t, kind); }, a, t_hi, opts);
}

double default_search_cap(double gap) {
  if (!(gap > 0.0)) fail(Errc::out_of_range, "gap must be positive");
  return 50.0 / gap;
}

const char* cutoff_tag_name(CutoffTag tag) noexcept {
  switch (tag) {
    case CutoffTag::cutoff_consistent: return "cutoff-consistent";
    case CutoffTag::precutoff_consistent: return "precutoff-consistent";
    case CutoffTag::neither: return "neither";
  }
  return "unknown";
}

namespace {

MixingReport member_report(const FamilyMember& member, const std::string& kind_label,
                           const CutoffOptions& opts, double t_hi) {
  MixingReport r;
  r.label = member.label;
  r.size = member.size;
  r.kind = kind_label;

  // One sorted threshold pass: the ratio epsilons (both tails), 1/4 for
  // condition (H). Descending thresholds give nondecreasing times; clip
  // residual bisection noise so reports honor t_mix monotonicity exactly.
  std::vector<double> want;
  for (double e : opts.eps) {
    want.push_back(e);
    want.push_back(1.0 - e);
  }
  want.push_back(0.25);
  std::sort(want.begin(), want.end());
  want.erase(std::unique(want.begin(), want.end()), want.end());
  std::reverse(want.begin(), want.end()); // descending

  std::vector<double> times(want.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    double t = mixing_time(member.profile, want[i], t_hi, opts.bisect);
    t = std::max(t, prev);
    times[i] = t;
    prev = t;
  }
  auto time_at = [&](double a) {
    auto it = std::find(want.begin(), want.end(), a);
    return times[static_cast<std::size_t>(it - want.begin())];
  };

  r.thresholds = want;
  r.t_mix = times;
  for (double e : opts.eps) {
    r.eps.push_back(e);
    double late = time_at(std::min(e, 1.0 - e));
    double early = time_at(std::max(e, 1.0 - e));
    // Ratio of the smaller-threshold (later) time over the larger-threshold
    // (earlier) time; >= 1 - 1e-9 by construction.
    r.ratio.push_back(early > 0.0 ? late / early : 1.0);
  }
  r.gap = member.gap;
  r.condition_h = member.gap > 0.0 ? time_at(0.25) * member.gap : 0.0;
  return r;
}

} // namespace

CutoffDiagnostics cutoff_diagnostics(const std::vector<FamilyMember>& members,
                                     const std::string& kind_label,
                                     const CutoffOptions& opts) {
  if (members.size() < 2)
    fail(Errc::at_least_two_sizes,
         "cutoff diagnostics need at least 2 sizes, got " + std::to_string(members.size()));
  if (!opts.t_hi.empty() && opts.t_hi.size() != members.size())
    fail(Errc::invalid_config, "t_hi override must match the member count");
  for (double e : opts.eps)
    if (!(e > 0.0) || !(e < 0.5))
      fail(Errc::invalid_threshold, "ratio epsilon must lie in (0, 0.5), got " + fmt17(e));

  CutoffDiagnostics diag;
  for (std::size_t i = 0; i < members.size(); ++i) {
    double cap = !opts.t_hi.empty() ? opts.t_hi[i]
                 : members[i].default_t_hi > 0.0
                     ? members[i].default_t_hi
                     : default_search_cap(members[i].gap);
    diag.reports.push_back(member_report(members[i], kind_label, opts, cap));
  }

  double worst_ratio = 0.0;
  for (double r : diag.reports.back().ratio) worst_ratio = std::max(worst_ratio, r);
  if (worst_ratio <= 1.0 + opts.cutoff_delta)
    diag.tag = CutoffTag::cutoff_consistent;
  else if (worst_ratio <= opts.precutoff_bound)
    diag.tag = CutoffTag::precutoff_consistent;
  else
    diag.tag = CutoffTag::neither;
  return diag;
}

CutoffDiagnostics cutoff_diagnostics(
    const std::vector<std::pair<double, ChainSpec>>& members, DistanceKind kind,
    const CutoffOptions& opts) {
  std::vector<FamilyMember> fam;
  std::vector<std::shared_ptr<WorstCaseEvaluator>> evals;
  for (const auto& [size, chain] : members) {
    auto eval = std::make_shared<WorstCaseEvaluator>(chain);
    double gap = spectral_gap(chain, eval->pi());
    FamilyMember m;
    m.size = size;
    m.label = std::to_string(static_cast<long long>(size));
    m.profile = [eval, kind](double t) { return (*eval)(t, kind); };
    m.gap = gap;
    fam.push_back(std::move(m));
  }
  return cutoff_diagnostics(fam, kind_name(kind), opts);
}

MixingReport mixing_report(const ChainSpec& chain, DistanceKind kind,
                           const CutoffOptions& opts, double t_hi) {
  for (double e : opts.eps)
    if (!(e > 0.0) || !(e < 0.5))
      fail(Errc::invalid_threshold, "ratio epsilon must lie in (0, 0.5), got " + fmt17(e));
  auto eval = std::make_shared<WorstCaseEvaluator>(chain);
  double gap = 0.0;
  try {
    gap = spectral_gap(chain, eval->pi());
  } catch (const Error&) {
    gap = 0.0; // no usable gap; the caller must supply the cap
  }
  if (!(t_hi > 0.0)) {
    if (!(gap > 0.0))
      fail(Errc::invalid_config, "chain has no spectral gap; pass an explicit search cap");
    t_hi = default_search_cap(gap);
  }
  FamilyMember m;
  m.size = chain.size();
  m.label = std::to_string(chain.size());
  m.profile = [eval, kind](double t) { return (*eval)(t, kind); };
  m.gap = gap;
  return member_report(m, kind_name(kind), opts, t_hi);
}

double condition_h(const ChainSpec& chain, double t_hi) {
  WorstCaseEvaluator eval(chain);
  double gap = spectral_gap(chain, eval.pi());
  double cap = t_hi > 0.0 ? t_hi : default_search_cap(gap);
  double t = mixing_time(eval, DistanceKind::total_variation, 0.25, cap);
  return t * gap;
}

nlohmann::ordered_json mixing_report_to_json(const MixingReport& report) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["label"] = report.label;
  doc["size"] = report.size;
  doc["kind"] = report.kind;
  auto tm = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.thresholds.size(); ++i)
    tm.push_back({{"threshold", report.thresholds[i]}, {"t_mix", report.t_mix[i]}});
  doc["mixing_times"] = std::move(tm);
  auto rt = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.eps.size(); ++i)
    rt.push_back({{"eps", report.eps[i]}, {"ratio", report.ratio[i]}});
  doc["ratios"] = std::move(rt);
  doc["gap"] = report.gap;
  doc["condition_h"] = report.condition_h;
  return doc;
}

nlohmann::ordered_json cutoff_to_json(const CutoffDiagnostics& diag) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["tag"] = cutoff_tag_name(diag.tag);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : diag.reports) arr.push_back(mixing_report_to_json(r));
  doc["reports"] = std::move(arr);
  return doc;
}

std::string ratio_table_csv(const CutoffDiagnostics& diag) {
  std::string out = "# kind=ratio_table\nsize,eps,ratio\n";
  for (const auto& r : diag.reports)
    for (std::size_t i = 0; i < r.eps.size(); ++i) {
      out += fmt17(r.size);
      out += ',';
      out += fmt17(r.eps[i]);
      out += ',';
      out += fmt17(r.ratio[i]);
      out += '\n';
    }
  return out;
}

} // namespace ctmix
