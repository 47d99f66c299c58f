#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctmix/chain.hpp"

namespace ctmix {

enum class Inequality {
  tv_le_sep,
  sep_le_4tv_half,
  tv_le_hellinger,
  hellinger_le_sqrt_2tv,
  dbar_half_le_hellinger,
  hellinger_le_sqrt_2dbar,
  tv_le_dbar,
  dbar_le_2tv,
  hellinger_doubling,
  sep_submultiplicative,
  dbar_submultiplicative,
  l1_contraction,
  l1_attainment,
};

const char* inequality_name(Inequality id) noexcept;
Inequality inequality_from_name(const std::string& name);
const std::vector<Inequality>& all_inequalities();
double default_tolerance(Inequality id) noexcept;

struct SuiteConfig {
  std::uint64_t seed = 1;
  int chains = 100;
  int m_min = 3;
  int m_max = 12;
  int grid_points = 25;
  double grid_lo_factor = 0.01; // grid spans [lo/gap, hi/gap], log-spaced
  double grid_hi_factor = 20.0;
  double rate_lo = 0.5;
  double rate_hi = 2.0;
  std::map<std::string, double> tolerances; // by inequality name; overrides
  std::vector<Inequality> enabled;          // empty = all
  bool parallel = true;
  bool include_family = true; // append the segment-family chain as an instance
  int family_n = 16;
  double family_epsilon = 1e-6;

  void validate() const;
};

struct Witness {
  bool family = false;
  int chain_index = -1;
  std::uint64_t chain_seed = 0;
  int states = 0;
  double degree = 0.0;
  double t = 0.0;
  double s = 0.0;    // second time for submultiplicativity pairs
  int f_index = -1;  // which sampled test function (l1 contraction)
};

struct InequalityResult {
  Inequality id = Inequality::tv_le_sep;
  std::string name;
  std::int64_t instances = 0;
  double worst_margin = 0.0; // max over instances of lhs - rhs
  double tolerance = 0.0;
  bool pass = false;
  Witness witness; // instance attaining worst_margin
};

struct SuiteReport {
  std::uint64_t seed = 0;
  int chains = 0;
  bool include_family = false;
  double max_hellinger_seen = 0.0; // batch must probe d^H > 0.5 somewhere
  bool all_pass = false;
  std::vector<InequalityResult> results;
  std::vector<std::pair<int, std::string>> errors; // per-instance failures
};

// Evaluates every enabled inequality over `chains` seeded random reversible
// chains (plus the family instance), 25 log-spaced grid times per chain
// anchored to that chain's spectral gap. Deterministic given the config:
// per-chain RNG streams derive from the master seed, accumulators merge in
// index order, and instance errors are recorded without aborting the batch.
SuiteReport run_suite(const SuiteConfig& config);

// Recomputes the margin of a result's worst-case witness from scratch;
// reports are only trusted if this reproduces worst_margin to 1e-12.
double replay_margin(const SuiteConfig& config, const InequalityResult& result);

nlohmann::ordered_json suite_report_to_json(const SuiteReport& report);

struct WindowCheck {
  double t_n = 0.0;       // inf{t : marginal d^H(t) <= copies^{-3/7}}
  double t_hat_low = 0.0; // product-TV lower-envelope time at threshold 0.7
  double t_hat_high = 0.0; // product-TV upper-envelope time at threshold 0.3
  bool verdict = false;   // t_hat_low >= 0.95 t_n and t_hat_high <= 2.1 t_n
};

// The Hellinger two-sided mixing window for the n-fold product: the product
// TV profile is sandwiched between Hellinger-derived envelopes, whose mixing
// times must bracket [t_n, 2 t_n] up to 5% slack.
WindowCheck hellinger_window_check(const ChainSpec& chain, int copies);

} // namespace ctmix
