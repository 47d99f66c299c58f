#include "ctmix/product.hpp"

#include <cmath>
#include <string>

#include "ctmix/errors.hpp"
#include "ctmix/mathutil.hpp"

namespace ctmix {
namespace {

constexpr double sqrt2 = 1.4142135623730951;

void check_copies(std::int64_t copies) {
  if (copies < 1)
    fail(Errc::out_of_range, "copies must be >= 1, got " + std::to_string(copies));
}

} // namespace

double product_separation(double d_s, std::int64_t copies) {
  check_copies(copies);
  if (!(d_s >= 0.0) || !(d_s <= 1.0))
    fail(Errc::out_of_range, "separation value " + fmt17(d_s) + " outside [0, 1]");
  if (d_s == 1.0) return 1.0;
  // 1 - (1 - d)^n
  return -std::expm1(static_cast<double>(copies) * std::log1p(-d_s));
}

double product_hellinger(double d_h, std::int64_t copies) {
  check_copies(copies);
  if (!(d_h >= 0.0) || !(d_h <= sqrt2 + 1e-12))
    fail(Errc::out_of_range, "hellinger value " + fmt17(d_h) + " outside [0, sqrt(2)]");
  double u = 0.5 * d_h * d_h; // 1 - u = (1 - h^2/2), the per-copy BC affinity
  if (u >= 1.0) return sqrt2;
  // D^2/2 = 1 - (1 - u)^n  =>  D = sqrt(-2 expm1(n log1p(-u)))
  return std::sqrt(-2.0 * std::expm1(static_cast<double>(copies) * std::log1p(-u)));
}

TvBounds product_tv_bounds(double d_h_marginal, double d_tv_marginal,
                           std::int64_t copies) {
  check_copies(copies);
  if (!(d_tv_marginal >= 0.0) || !(d_tv_marginal <= 1.0))
    fail(Errc::out_of_range, "tv value " + fmt17(d_tv_marginal) + " outside [0, 1]");
  double dh = product_hellinger(d_h_marginal, copies);
  TvBounds b;
  b.upper = std::min(1.0, dh);
  b.lower = std::max(d_tv_marginal, 0.5 * dh * dh);
  b.lower = std::min(b.lower, b.upper); // guards eps-order crossings
  return b;
}

ChainSpec tensor_product(const ProductSpec& spec) {
  check_copies(spec.copies);
  if (spec.copies == 1) return spec.base;
  const int m = spec.base.size();
  double log_states = static_cast<double>(spec.copies) * std::log(static_cast<double>(m));
  if (log_states > std::log(static_cast<double>(spec.state_cap)) + 1e-12)
    fail(Errc::size_cap_exceeded,
         std::to_string(m) + "^" + std::to_string(spec.copies) +
             " states exceed the cap " + std::to_string(spec.state_cap));
  std::int64_t states = 1;
  for (std::int64_t i = 0; i < spec.copies; ++i) states *= m;

  // Tuple index: coordinate 0 most significant, stride m^(copies-1-i).
  std::vector<std::int64_t> stride(static_cast<std::size_t>(spec.copies));
  stride[static_cast<std::size_t>(spec.copies) - 1] = 1;
  for (std::int64_t i = spec.copies - 2; i >= 0; --i)
    stride[static_cast<std::size_t>(i)] = stride[static_cast<std::size_t>(i) + 1] * m;

  const auto& base_entries = spec.base.rate_entries();
  std::vector<RateEntry> entries;
  entries.reserve(static_cast<std::size_t>(states) * base_entries.size() *
                  static_cast<std::size_t>(spec.copies) / static_cast<std::size_t>(m));
  std::vector<std::string> labels(static_cast<std::size_t>(states));
  std::vector<int> digits(static_cast<std::size_t>(spec.copies), 0);
  for (std::int64_t u = 0; u < states; ++u) {
    std::string label;
    for (std::int64_t i = 0; i < spec.copies; ++i) {
      if (i) label += '|';
      label += spec.base.labels()[static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])];
    }
    labels[static_cast<std::size_t>(u)] = std::move(label);

    for (std::int64_t i = 0; i < spec.copies; ++i) {
      int d = digits[static_cast<std::size_t>(i)];
      for (const auto& e : base_entries) {
        if (e.from != d) continue;
        std::int64_t v = u + (e.to - d) * stride[static_cast<std::size_t>(i)];
        entries.push_back(RateEntry{static_cast<int>(u), static_cast<int>(v), e.rate});
      }
    }

    // next tuple (odometer increment, least significant coordinate last)
    for (std::int64_t i = spec.copies - 1; i >= 0; --i) {
      if (++digits[static_cast<std::size_t>(i)] < m) break;
      digits[static_cast<std::size_t>(i)] = 0;
    }
  }
  return ChainSpec(static_cast<int>(states), std::move(entries),
                   ChainSpec::Connectivity::require_irreducible, std::move(labels));
}

} // namespace ctmix
