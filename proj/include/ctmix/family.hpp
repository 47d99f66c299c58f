#pragma once

#include <vector>

#include "ctmix/chain.hpp"
#include "ctmix/dist.hpp"
#include "ctmix/metrics.hpp"

namespace ctmix {

// Segment chain on 2n+1 vertices A = v_0, ..., B = v_n, ..., C = v_{2n} with
// an extra (green) edge (B, C). Forward rates along the segment are 1 except
// B -> v_{n+1} = 1/n; the green rate B -> C is 1 - 1/n; every backward
// segment rate is epsilon; the green back rate C -> B is forced by detailed
// balance to (n-1) * epsilon^n.
struct FamilyParams {
  int n = 2;
  double epsilon = 0.0;

  // The canonical epsilon: 2^{-n^2} while the derived back rate
  // (n-1) * 2^{-n^3} stays representable (n <= 10), else 1e-6.
  static FamilyParams with_default_epsilon(int n);
  void validate() const;
};

struct FamilyChain {
  ChainSpec chain;
  FamilyParams params;
  int a = 0, b = 0, c = 0;      // state indices of A, B, C
  double derived_back_rate = 0; // (n-1) eps^n, 0 when it underflows
  double log_back_rate = 0;     // log((n-1) eps^n), always finite
  bool back_edge_dropped = false; // true when the rate underflowed to 0
  bool linear_pi_unsafe = false;  // stationary masses below ~1e-300 exist
  ProbDist pi;                  // closed-form stationary law (log-domain)
};

FamilyChain build_family_chain(const FamilyParams& params);

struct HittingProfile {
  std::vector<double> times;
  std::vector<double> survival; // P^A(tau_C > t)
  DistanceProfile tv;           // worst-case TV profile on the same grid
};

HittingProfile hitting_profile(const FamilyParams& params,
                               const std::vector<double>& times);

// 1 - [P^A(tau_C <= t)]^n: the product-TV approximation specific to this
// family (exact up to the o(1) hitting-time reduction).
double product_tv_approx(const FamilyParams& params, double t);
double product_tv_approx_from_survival(double survival, int n);

struct ScaledRow {
  double s = 0.0;
  double d_marginal = 0.0;   // d_n(s n)
  double n_survival = 0.0;   // n * P^A(tau > s n)
  double product_tv = 0.0;   // 1 - [P(tau <= s n)]^n
};

// Scaled profiles d_n(ns), n P(tau > ns), product TV approx on an s-grid in
// (0, 3]; assertion thresholds are the caller's business.
std::vector<ScaledRow> asymptotic_profile_check(const FamilyParams& params,
                                                const std::vector<double>& s_grid);

struct MinorizationResult {
  bool ok = false;
  double worst_log_margin = 0.0;   // min over x,y != C of log P_t(x,y) - log pi(y)
  double sep_tv_max_diff = 0.0;    // max over t of |d^s_reduced(t) - d(t)|
};

// Checks P_t(x, y) >= pi(y) for all x, y != C on each t in [n/2, 3n], and
// that the reduced separation 1 - min_x P_t(x, C)/pi(C) tracks TV within
// 0.01.
MinorizationResult separation_minorization_check(const FamilyParams& params,
                                                 const std::vector<double>& t_list);

} // namespace ctmix
