// Compares the OpenMP kernels against their serial reference implementations:
// wall time, speedup, and bitwise agreement. Any byte of disagreement is a
// failure, not a statistic.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "ctmix/chain.hpp"
#include "ctmix/dist.hpp"
#include "ctmix/family.hpp"
#include "ctmix/kernels.hpp"
#include "ctmix/product.hpp"
#include "ctmix/suite.hpp"

using namespace ctmix;

namespace {

using clock_type = std::chrono::steady_clock;

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    auto t0 = clock_type::now();
    f();
    auto t1 = clock_type::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

int failures = 0;

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   %s\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "bitwise-identical" : "MISMATCH");
  if (!identical) ++failures;
}

} // namespace

int main() {
  // Transition matrix rows are distributed across threads; the family chain
  // at n = 96 gives 193 independent rows of real uniformization work.
  {
    FamilyChain fc = build_family_chain(FamilyParams::with_default_epsilon(96));
    std::vector<double> ps, pp;
    double ts = best_of(3, [&] { ps = transition_matrix_serial(fc.chain, 96.0); });
    double tp = best_of(3, [&] { pp = transition_matrix(fc.chain, 96.0); });
    report("transition_matrix n=96", ts, tp, bitwise_equal(ps, pp));
  }

  // expm_action switches to the parallel accumulation path at 512 states;
  // a 2^12-state tensor power exercises it on a single long evaluation.
  {
    ChainSpec base(2, {{0, 1, 1.5}, {1, 0, 1.0}});
    ChainSpec big = tensor_product({base, 12, 200000});
    CsrMatrix q = big.generator();
    std::vector<double> v(static_cast<std::size_t>(big.size()), 0.0);
    v[0] = 1.0;
    std::vector<double> ys, yp;
    double ts = best_of(5, [&] { ys = expm_action_serial(q, big.uniformization_rate(), v, 5.0); });
    double tp = best_of(5, [&] { yp = expm_action(q, big.uniformization_rate(), v, 5.0); });
    report("expm_action 4096 states", ts, tp, bitwise_equal(ys, yp));
  }

  // The suite batch distributes chains across threads and merges results in
  // index order, so the serialized report must not move by a byte.
  {
    SuiteConfig cfg;
    cfg.seed = 11;
    cfg.chains = 32;
    cfg.family_n = 8;
    std::string js, jp;
    cfg.parallel = false;
    double ts = best_of(1, [&] { js = suite_report_to_json(run_suite(cfg)).dump(2); });
    cfg.parallel = true;
    double tp = best_of(1, [&] { jp = suite_report_to_json(run_suite(cfg)).dump(2); });
    report("suite batch 32 chains", ts, tp, js == jp);
  }

  if (failures > 0) {
    std::printf("%d kernel(s) diverged from the serial reference\n", failures);
    return 1;
  }
  return 0;
}
