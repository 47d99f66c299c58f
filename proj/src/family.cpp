#include "ctmix/family.hpp"

#include <algorithm>
#include <cmath>

#include "ctmix/chain_ops.hpp"
#include "ctmix/errors.hpp"
#include "ctmix/kernels.hpp"
#include "ctmix/mathutil.hpp"

namespace ctmix {
namespace {

// Deterministic integer power; exact for powers of two (the canonical
// epsilon), and within a few ulp generally — std::pow is not bit-pinned
// across libms.
double pow_int(double base, int e) {
  double acc = 1.0, p = base;
  for (int k = e; k > 0; k >>= 1) {
    if (k & 1) acc *= p;
    p *= p;
  }
  return acc;
}

} // namespace

FamilyParams FamilyParams::with_default_epsilon(int n) {
  FamilyParams p;
  p.n = n;
  p.epsilon = n <= 10 ? std::ldexp(1.0, -n * n) : 1e-6;
  p.validate();
  return p;
}

void FamilyParams::validate() const {
  if (n < 2) fail(Errc::invalid_config, "family needs n >= 2, got " + std::to_string(n));
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    fail(Errc::epsilon_out_of_range,
         "epsilon must lie in (0, 1), got " + fmt17(epsilon));
}

FamilyChain build_family_chain(const FamilyParams& params) {
  params.validate();
  const int n = params.n;
  const double eps = params.epsilon;
  const int m = 2 * n + 1;

  const int a = 0, b = n, c = 2 * n;
  const double log_back_rate = std::log(static_cast<double>(n - 1)) + n * std::log(eps);
  const double derived_back_rate = (n - 1) * pow_int(eps, n);
  const bool back_edge_dropped = !(derived_back_rate > 0.0);
  const bool linear_pi_unsafe = 2.0 * n * std::log(eps) < std::log(1e-300);

  std::vector<RateEntry> entries;
  entries.reserve(static_cast<std::size_t>(2 * m));
  for (int i = 0; i < 2 * n; ++i) {
    // Forward along the segment: rate 1, except the red exit from B which
    // carries the 1/n jump probability.
    entries.push_back(RateEntry{i, i + 1, i == n ? 1.0 / n : 1.0});
    entries.push_back(RateEntry{i + 1, i, eps});
  }
  entries.push_back(RateEntry{b, c, 1.0 - 1.0 / n});
  if (!back_edge_dropped) entries.push_back(RateEntry{c, b, derived_back_rate});

  std::vector<std::string> labels(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) labels[static_cast<std::size_t>(i)] = "v" + std::to_string(i);
  labels[0] = "A";
  labels[static_cast<std::size_t>(b)] = "B";
  labels[static_cast<std::size_t>(c)] = "C";

  ChainSpec chain(m, std::move(entries), ChainSpec::Connectivity::require_irreducible,
                  std::move(labels));

  // Closed-form stationary law from the detailed-balance path products:
  // rho(v_i) = eps^{-i} up to B, then an extra 1/n from the B -> v_{n+1}
  // rate; independent of whether the green back edge was representable.
  std::vector<double> logw(static_cast<std::size_t>(m));
  const double leps = std::log(eps);
  for (int i = 0; i <= n; ++i) logw[static_cast<std::size_t>(i)] = -i * leps;
  for (int j = 1; j <= n; ++j)
    logw[static_cast<std::size_t>(n + j)] = -(n + j) * leps - std::log(static_cast<double>(n));
  ProbDist pi = ProbDist::from_log_weights(std::move(logw));

  return FamilyChain{std::move(chain), params,          a,
                     b,                c,               derived_back_rate,
                     log_back_rate,    back_edge_dropped, linear_pi_unsafe,
                     std::move(pi)};
}

HittingProfile hitting_profile(const FamilyParams& params,
                               const std::vector<double>& times) {
  FamilyChain fc = build_family_chain(params);
  HittingProfile hp;
  hp.times = times;
  hp.survival.resize(times.size());
  std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < times.size(); ++i) {
    try {
      hp.survival[i] = survival_probability(fc.chain, {fc.c}, fc.a, times[i]);
    } catch (...) {
#pragma omp critical(ctmix_hitting_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  WorstCaseEvaluator eval(fc.chain, fc.pi);
  hp.tv = worst_case_profile(eval, DistanceKind::total_variation, times);
  return hp;
}

double product_tv_approx_from_survival(double survival, int n) {
  if (!(survival >= 0.0) || !(survival <= 1.0))
    fail(Errc::out_of_range, "survival value " + fmt17(survival) + " outside [0, 1]");
  if (survival == 1.0) return 1.0;
  // 1 - (1 - survival)^n through the log domain.
  return -std::expm1(static_cast<double>(n) * std::log1p(-survival));
}

double product_tv_approx(const FamilyParams& params, double t) {
  FamilyChain fc = build_family_chain(params);
  return product_tv_approx_from_survival(
      survival_probability(fc.chain, {fc.c}, fc.a, t), params.n);
}

std::vector<ScaledRow> asymptotic_profile_check(const FamilyParams& params,
                                                const std::vector<double>& s_grid) {
  params.validate();
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > 0.0) || !(s_grid[i] <= 3.0))
      fail(Errc::out_of_range, "s must lie in (0, 3], got " + fmt17(s_grid[i]));
    if (i > 0 && !(s_grid[i] > s_grid[i - 1]))
      fail(Errc::invalid_config, "s grid must be strictly increasing");
  }
  FamilyChain fc = build_family_chain(params);
  WorstCaseEvaluator eval(fc.chain, fc.pi);
  const int n = params.n;
  std::vector<ScaledRow> rows(s_grid.size());
  std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    try {
      double t = s_grid[i] * n;
      ScaledRow r;
      r.s = s_grid[i];
      r.d_marginal = eval(t, DistanceKind::total_variation);
      double surv = survival_probability(fc.chain, {fc.c}, fc.a, t);
      r.n_survival = n * surv;
      r.product_tv = product_tv_approx_from_survival(surv, n);
      rows[i] = r;
    } catch (...) {
#pragma omp critical(ctmix_scaled_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return rows;
}

MinorizationResult separation_minorization_check(const FamilyParams& params,
                                                 const std::vector<double>& t_list) {
  params.validate();
  const int n = params.n;
  for (double t : t_list)
    if (!(t >= 0.5 * n) || !(t <= 3.0 * n))
      fail(Errc::time_out_of_window, "t = " + fmt17(t) + " outside [n/2, 3n] = [" +
                                         fmt17(0.5 * n) + ", " + fmt17(3.0 * n) + "]");
  FamilyChain fc = build_family_chain(params);
  const int m = fc.chain.size();

  MinorizationResult res;
  res.worst_log_margin = std::numeric_limits<double>::infinity();
  for (double t : t_list) {
    auto p = transition_matrix(fc.chain, t);
    // Minorization on the non-C block, compared in the log domain so
    // stationary masses near the underflow floor still participate.
    for (int x = 0; x < m; ++x) {
      if (x == fc.c) continue;
      for (int y = 0; y < m; ++y) {
        if (y == fc.c) continue;
        double entry = p[static_cast<std::size_t>(x) * m + y];
        double margin = entry > 0.0 ? std::log(entry) - fc.pi.log_value(y) : neg_inf;
        res.worst_log_margin = std::min(res.worst_log_margin, margin);
      }
    }
    // Reduced separation via the dominant state C, against worst-case TV.
    double min_ratio = std::numeric_limits<double>::infinity();
    double tv = 0.0;
    for (int x = 0; x < m; ++x) {
      min_ratio = std::min(min_ratio,
                           p[static_cast<std::size_t>(x) * m + fc.c] / fc.pi.value(fc.c));
      double acc = 0.0;
      for (int y = 0; y < m; ++y)
        acc += std::abs(p[static_cast<std::size_t>(x) * m + y] - fc.pi.value(y));
      tv = std::max(tv, 0.5 * acc);
    }
    double sep_reduced = clamp01(1.0 - min_ratio);
    res.sep_tv_max_diff = std::max(res.sep_tv_max_diff, std::abs(sep_reduced - tv));
  }
  res.ok = res.worst_log_margin >= 0.0 && res.sep_tv_max_diff <= 0.01;
  return res;
}

} // namespace ctmix
