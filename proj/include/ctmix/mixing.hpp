#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctmix/chain.hpp"
#include "ctmix/metrics.hpp"

namespace ctmix {

struct BisectionOptions {
  double rel_tol = 1e-9; // final bracket width as a fraction of t_hi
};

// t_mix(a) = inf{t : d(t) < a} for a nonincreasing profile evaluated lazily.
// Bisection over [0, t_hi]; the left bracket edge is returned, which also
// resolves plateaus deterministically.
double mixing_time(const std::function<double(double)>& profile, double a,
                   double t_hi, const BisectionOptions& opts = {});
double mixing_time(const WorstCaseEvaluator& eval, DistanceKind kind, double a,
                   double t_hi, const BisectionOptions& opts = {});

// Default search cap: spectral decay puts every distance below any fixed
// threshold by 50/gap.
double default_search_cap(double gap);

struct MixingReport {
  std::string label;           // e.g. a size or a family parameter
  double size = 0.0;           // numeric size for ratio tables
  std::string kind;            // distance kind name
  std::vector<double> thresholds;
  std::vector<double> t_mix;   // same length as thresholds
  std::vector<double> eps;     // ratio-table epsilons
  std::vector<double> ratio;   // t_mix(eps)/t_mix(1-eps)
  double gap = 0.0;
  double condition_h = 0.0;    // t_mix(1/4) * gap
};

enum class CutoffTag { cutoff_consistent, precutoff_consistent, neither };
const char* cutoff_tag_name(CutoffTag tag) noexcept;

struct CutoffOptions {
  std::vector<double> eps = {0.1, 0.2, 0.3};
  double cutoff_delta = 0.1;     // cutoff-consistent iff ratios <= 1 + delta
  double precutoff_bound = 2.5;  // precutoff-consistent iff ratios <= bound
  std::vector<double> t_hi;      // per-member caps; empty = 50/gap each
  BisectionOptions bisect = {};
};

struct CutoffDiagnostics {
  std::vector<MixingReport> reports; // one per size, input order
  CutoffTag tag = CutoffTag::neither;
};

// A family member: a size label plus a lazily evaluated profile and the
// data needed for the report (gap may be 0 = unknown for synthetic profiles).
struct FamilyMember {
  double size = 0.0;
  std::string label;
  std::function<double(double)> profile;
  double gap = 0.0;
  double default_t_hi = 0.0;
};

CutoffDiagnostics cutoff_diagnostics(const std::vector<FamilyMember>& members,
                                     const std::string& kind_label,
                                     const CutoffOptions& opts = {});
// Convenience over chains: builds worst-case evaluators internally.
CutoffDiagnostics cutoff_diagnostics(
    const std::vector<std::pair<double, ChainSpec>>& members, DistanceKind kind,
    const CutoffOptions& opts = {});

// Single-chain report: thresholds from opts.eps (both tails) plus 1/4,
// the ratio table, condition (H). t_hi = 0 derives the search cap from the
// spectral gap; chains without one need an explicit cap.
MixingReport mixing_report(const ChainSpec& chain, DistanceKind kind,
                           const CutoffOptions& opts = {}, double t_hi = 0.0);

// Condition (H) product: t_mix(1/4) * gap for the TV profile.
double condition_h(const ChainSpec& chain, double t_hi = 0.0);

nlohmann::ordered_json mixing_report_to_json(const MixingReport& report);
nlohmann::ordered_json cutoff_to_json(const CutoffDiagnostics& diag);
std::string ratio_table_csv(const CutoffDiagnostics& diag);

} // namespace ctmix
