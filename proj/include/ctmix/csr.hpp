#pragma once

#include <cstdint>
#include <vector>

namespace ctmix {

// Compressed sparse rows, diagonal entries included. Column indices within a
// row are strictly increasing; that ordering fixes the floating-point
// summation order everywhere the matrix is applied.
struct CsrMatrix {
  int n = 0;
  std::vector<std::int64_t> row_ptr; // size n + 1
  std::vector<int> col;
  std::vector<double> val;

  CsrMatrix transposed() const;
};

} // namespace ctmix
