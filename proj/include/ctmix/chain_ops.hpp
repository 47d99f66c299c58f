#pragma once

#include <cstdint>
#include <vector>

#include "ctmix/chain.hpp"
#include "ctmix/dist.hpp"
#include "ctmix/kernels.hpp"

namespace ctmix {

enum class PiMode {
  linear_solve, // dense least-squares on pi Q = 0; any irreducible chain
  log_tree,     // detailed-balance ratio products along a spanning tree;
                // reversible chains only, exact for exponentially small masses
};

ProbDist stationary_distribution(const ChainSpec& chain,
                                 PiMode mode = PiMode::linear_solve);

struct BalanceReport {
  bool reversible = false;
  int worst_from = -1;
  int worst_to = -1;
  double worst_violation = 0.0; // relative flux asymmetry |a-b|/(a+b)
};

// Relative detailed-balance test: |pi(x)Q(x,y) - pi(y)Q(y,x)| <=
// tol * (pi(x)Q(x,y) + pi(y)Q(y,x)) on every edge; evaluated on log-fluxes
// when pi carries a log form, so fluxes far below DBL_MIN still compare.
BalanceReport check_detailed_balance(const ChainSpec& chain, const ProbDist& pi,
                                     double tol);

ProbDist transient_distribution(const ChainSpec& chain, int start, double t,
                                const ExpmOptions& opts = {});
ProbDist propagate(const ChainSpec& chain, const ProbDist& dist, double t,
                   const ExpmOptions& opts = {});

double survival_probability(const ChainSpec& chain,
                            const std::vector<int>& absorbing, int start,
                            double t, const ExpmOptions& opts = {});
// P(tau_absorbing > t) for every start simultaneously (absorbing entries 0).
std::vector<double> survival_all_starts(const ChainSpec& chain,
                                        const std::vector<int>& absorbing,
                                        double t, const ExpmOptions& opts = {});

// Smallest nonzero eigenvalue of -Q via the symmetrization
// S(x,y) = sqrt(Q(x,y) Q(y,x)) (= sqrt(pi(x)/pi(y)) Q(x,y) under detailed
// balance, but immune to overflowing pi ratios). Detailed balance is
// pre-checked at 1e-8.
double spectral_gap(const ChainSpec& chain, const ProbDist& pi);

struct RandomChainParams {
  std::uint64_t seed = 0;
  int states = 2;
  double average_degree = 2.0;
  double rate_lo = 0.5;
  double rate_hi = 2.0;
};

// Random connected graph (attachment tree + extra edges), symmetric edge
// weights w and vertex weights rho, Q(x,y) = w(x,y)/rho(x): reversible with
// stationary law proportional to rho. Bit-identical for identical params.
ChainSpec random_reversible_chain(const RandomChainParams& params);

} // namespace ctmix
