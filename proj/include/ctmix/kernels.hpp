#pragma once

#include <vector>

#include "ctmix/chain.hpp"
#include "ctmix/csr.hpp"

namespace ctmix {

struct ExpmOptions {
  double tail_tol = 1e-13;      // discarded Poisson tail mass per evaluation
  double segment_cap = 350.0;   // max uniformization product per segment
  double unif_product_cap = 1e7; // hard cap on unif_rate * t
  bool renormalize = false;     // rescale result to sum 1 (probability rows)
};

// y = exp(tA) v by uniformization. A is CSR with nonnegative off-diagonal
// entries and unif_rate >= max_i |A(i,i)|; signed v is fine, but the
// renormalize option assumes a nonnegative (probability) v. When unif_rate * t exceeds
// segment_cap the evaluation is split into equal segments applied in
// sequence, each with a proportionally tightened tail tolerance.
//
// The serial and OpenMP variants produce bit-identical results: every output
// entry is accumulated in the same (CSR row) order in both; the parallel
// version only distributes independent entries across threads.
std::vector<double> expm_action_serial(const CsrMatrix& a, double unif_rate,
                                       std::vector<double> v, double t,
                                       const ExpmOptions& opts = {});
std::vector<double> expm_action(const CsrMatrix& a, double unif_rate,
                                std::vector<double> v, double t,
                                const ExpmOptions& opts = {});

// Row-major m x m matrix of P_t = exp(tQ): row x holds the law at time t
// started from x. Rows are independent; the parallel variant distributes
// rows and is bitwise equal to the serial one.
std::vector<double> transition_matrix_serial(const ChainSpec& chain, double t,
                                             const ExpmOptions& opts = {});
std::vector<double> transition_matrix(const ChainSpec& chain, double t,
                                      const ExpmOptions& opts = {});

} // namespace ctmix
