#include "ctmix/kernels.hpp"

#include <cmath>
#include <cstdint>

#include "ctmix/errors.hpp"
#include "ctmix/mathutil.hpp"

namespace ctmix {
namespace {

// Poisson term count guard: mean + 10 sigma + slack covers every tail
// tolerance down to ~1e-18 (10-sigma tail ~ 2e-22).
std::int64_t term_guard(double mu) {
  return static_cast<std::int64_t>(std::ceil(mu + 10.0 * std::sqrt(mu + 1.0) + 64.0));
}

// One uniformization segment: y = sum_k Pois(mu)(k) K^k x with
// K = I + A/unif_rate. Every y_i and every (Kx)_i is a fixed-order sum over
// the CSR row, so thread count cannot change a single bit of the result.
template <bool Par>
void unif_segment(const CsrMatrix& a, double unif_rate, double mu, double tail,
                  std::vector<double>& x, std::vector<double>& y,
                  std::vector<double>& kx) {
  const int n = a.n;
  const double w0 = std::exp(-mu);
  double w = w0;
  double cum = w0;
#pragma omp parallel for if (Par && n >= 512) schedule(static)
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = w0 * x[static_cast<std::size_t>(i)];

  const std::int64_t kmax = term_guard(mu);
  for (std::int64_t k = 1; k <= kmax && cum < 1.0 - tail; ++k) {
    w *= mu / static_cast<double>(k);
#pragma omp parallel for if (Par && n >= 512) schedule(static)
    for (int i = 0; i < n; ++i) {
      double acc = x[static_cast<std::size_t>(i)];
      const double inv = 1.0 / unif_rate;
      double row = 0.0;
      for (std::int64_t p = a.row_ptr[static_cast<std::size_t>(i)];
           p < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
        row += a.val[static_cast<std::size_t>(p)] * x[static_cast<std::size_t>(a.col[static_cast<std::size_t>(p)])];
      acc += inv * row;
      kx[static_cast<std::size_t>(i)] = acc;
      y[static_cast<std::size_t>(i)] += w * acc;
    }
    x.swap(kx);
    cum += w;
  }
  if (cum < 1.0 - tail)
    fail(Errc::numeric_failure,
         "uniformization did not reach tail tolerance (mu = " + fmt17(mu) + ")");
}

template <bool Par>
std::vector<double> expm_action_impl(const CsrMatrix& a, double unif_rate,
                                     std::vector<double> v, double t,
                                     const ExpmOptions& opts) {
  if (t < 0.0 || std::isnan(t))
    fail(Errc::negative_time, "time must be >= 0, got " + fmt17(t));
  if (a.n <= 0 || v.size() != static_cast<std::size_t>(a.n))
    fail(Errc::dimension_mismatch, "vector length " + std::to_string(v.size()) +
                                       " vs matrix size " + std::to_string(a.n));
  const double product = unif_rate * t;
  if (product > opts.unif_product_cap)
    fail(Errc::overflow_cap, "unif_rate * t = " + fmt17(product) +
                                 " exceeds cap " + fmt17(opts.unif_product_cap));
  if (product == 0.0) return v; // exp(0) = I, or A = 0

  const int segments =
      product <= opts.segment_cap
          ? 1
          : static_cast<int>(std::ceil(product / opts.segment_cap));
  const double tau = t / segments;
  const double mu = unif_rate * tau;
  const double tail = opts.tail_tol / segments;

  std::vector<double> y(v.size()), kx(v.size());
  for (int s = 0; s < segments; ++s) {
    unif_segment<Par>(a, unif_rate, mu, tail, v, y, kx);
    if (opts.renormalize) {
      // Exact arithmetic keeps entries >= 0; rounding can leave eps-scale
      // negatives that would break log-domain consumers. Clamp, then rescale.
      double sum = 0.0;
      for (double& e : y) {
        if (e < 0.0) e = 0.0;
        sum += e;
      }
      if (sum > 0.0)
        for (double& e : y) e /= sum;
    }
    v.swap(y);
  }
  return v;
}

template <bool Par>
std::vector<double> transition_matrix_impl(const ChainSpec& chain, double t,
                                           ExpmOptions opts) {
  opts.renormalize = true; // rows are probability laws
  const int m = chain.size();
  const CsrMatrix qt = chain.generator_transpose();
  const double unif = chain.uniformization_rate();
  std::vector<double> out(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
#pragma omp parallel for if (Par) schedule(dynamic)
  for (int x = 0; x < m; ++x) {
    std::vector<double> delta(static_cast<std::size_t>(m), 0.0);
    delta[static_cast<std::size_t>(x)] = 1.0;
    std::vector<double> row = expm_action_serial(qt, unif, std::move(delta), t, opts);
    for (int y = 0; y < m; ++y)
      out[static_cast<std::size_t>(x) * static_cast<std::size_t>(m) +
          static_cast<std::size_t>(y)] = row[static_cast<std::size_t>(y)];
  }
  return out;
}

} // namespace

std::vector<double> expm_action_serial(const CsrMatrix& a, double unif_rate,
                                       std::vector<double> v, double t,
                                       const ExpmOptions& opts) {
  return expm_action_impl<false>(a, unif_rate, std::move(v), t, opts);
}

std::vector<double> expm_action(const CsrMatrix& a, double unif_rate,
                                std::vector<double> v, double t,
                                const ExpmOptions& opts) {
  return expm_action_impl<true>(a, unif_rate, std::move(v), t, opts);
}

std::vector<double> transition_matrix_serial(const ChainSpec& chain, double t,
                                             const ExpmOptions& opts) {
  return transition_matrix_impl<false>(chain, t, opts);
}

std::vector<double> transition_matrix(const ChainSpec& chain, double t,
                                      const ExpmOptions& opts) {
  return transition_matrix_impl<true>(chain, t, opts);
}

} // namespace ctmix
