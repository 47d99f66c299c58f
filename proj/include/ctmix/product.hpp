#pragma once

#include "ctmix/chain.hpp"

namespace ctmix {

// Exact n-fold product-chain distances from the marginal value. Both route
// through log1p/expm1 so marginal values of order 1/n (or far smaller) keep
// full relative precision up to n ~ 1e6.
double product_separation(double d_s, std::int64_t copies);
double product_hellinger(double d_h, std::int64_t copies);

struct TvBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Hellinger sandwich on the product TV: lower = max(marginal TV, (D^H)^2/2),
// upper = min(1, D^H), D^H the exact product Hellinger value.
TvBounds product_tv_bounds(double d_h_marginal, double d_tv_marginal,
                           std::int64_t copies);

struct ProductSpec {
  ChainSpec base;
  std::int64_t copies = 1;
  std::int64_t state_cap = 200000;
};

// Explicit tensor-power chain on tuple states (lexicographic index, first
// coordinate most significant): the brute-force oracle the exact formulas
// are verified against.
ChainSpec tensor_product(const ProductSpec& spec);

} // namespace ctmix
