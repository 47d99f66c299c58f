#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctmix/chain.hpp"
#include "ctmix/chain_ops.hpp"
#include "ctmix/dist.hpp"

namespace ctmix {

enum class DistanceKind { total_variation, separation, hellinger, pairwise_tv };

const char* kind_name(DistanceKind kind) noexcept;
// Accepts both canonical names and the CLI short forms tv/sep/pairwise.
DistanceKind kind_from_name(const std::string& name);
double kind_max(DistanceKind kind) noexcept; // 1, or sqrt(2) for hellinger

double distance(const ProbDist& mu, const ProbDist& nu, DistanceKind kind);

// Worst-case reduction of a row-major transition matrix (m x m, rows are the
// time-t laws) against the stationary law: max over starts for tv/hellinger,
// the (x, y) extremum for separation and pairwise-tv.
double worst_case_from_matrix(const std::vector<double>& p, const ProbDist& pi,
                              DistanceKind kind);
// Per-start pointwise distances to pi from the same matrix.
std::vector<double> rows_from_matrix(const std::vector<double>& p, const ProbDist& pi,
                                     DistanceKind kind);

// Time-indexed distance-to-equilibrium curve. Construction enforces the type
// invariants: strictly increasing times, values in the kind's range (1e-12
// clamp) and nonincreasing within 1e-9.
struct DistanceProfile {
  DistanceKind kind = DistanceKind::total_variation;
  std::vector<double> times;
  std::vector<double> values;

  static DistanceProfile make(DistanceKind kind, std::vector<double> times,
                              std::vector<double> values);
};

// Evaluates worst-case-over-start distances at arbitrary times for one chain,
// caching the stationary law and generator. The stationary law may be
// supplied (family chains know theirs in closed form); otherwise the
// reversible log-tree derivation is tried first, falling back to the dense
// solve for non-reversible chains.
class WorstCaseEvaluator {
public:
  explicit WorstCaseEvaluator(const ChainSpec& chain,
                              std::optional<ProbDist> pi = std::nullopt,
                              ExpmOptions opts = {});

  double operator()(double t, DistanceKind kind) const;
  const ProbDist& pi() const { return pi_; }
  const ChainSpec& chain() const { return chain_; }

private:
  ChainSpec chain_;
  ProbDist pi_;
  ExpmOptions opts_;
};

struct ProfileOptions {
  bool parallel = true; // distribute grid times across threads
  ExpmOptions expm = {};
};

DistanceProfile worst_case_profile(const ChainSpec& chain, DistanceKind kind,
                                   const std::vector<double>& times,
                                   const ProfileOptions& opts = {});
DistanceProfile worst_case_profile(const WorstCaseEvaluator& eval, DistanceKind kind,
                                   const std::vector<double>& times,
                                   const ProfileOptions& opts = {});

// ||P_t f||_{l1(pi)} / ||f||_{l1(pi)} for a mean-zero f; d-bar(t) is the
// supremum of this ratio, attained on differences of scaled point masses.
double l1_contraction_ratio(const ChainSpec& chain, const ProbDist& pi,
                            const std::vector<double>& f, double t,
                            const ExpmOptions& opts = {});
bool l1_contraction_check(const ChainSpec& chain, const ProbDist& pi,
                          const std::vector<double>& f, double t, double dbar_t,
                          double slack = 1e-9);

std::string profile_to_csv(const DistanceProfile& profile);
DistanceProfile profile_from_csv(const std::string& text);
nlohmann::ordered_json profile_to_json(const DistanceProfile& profile);
DistanceProfile profile_from_json(const nlohmann::json& doc);

} // namespace ctmix
