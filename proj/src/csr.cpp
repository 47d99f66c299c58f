#include "ctmix/csr.hpp"

namespace ctmix {

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t;
  t.n = n;
  t.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  t.col.resize(col.size());
  t.val.resize(val.size());
  for (int c : col) ++t.row_ptr[static_cast<std::size_t>(c) + 1];
  for (int i = 0; i < n; ++i)
    t.row_ptr[static_cast<std::size_t>(i) + 1] += t.row_ptr[static_cast<std::size_t>(i)];
  std::vector<std::int64_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  // Row-major traversal emits each transposed row's columns in increasing
  // order automatically.
  for (int r = 0; r < n; ++r) {
    for (std::int64_t k = row_ptr[static_cast<std::size_t>(r)];
         k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      int c = col[static_cast<std::size_t>(k)];
      std::int64_t slot = next[static_cast<std::size_t>(c)]++;
      t.col[static_cast<std::size_t>(slot)] = r;
      t.val[static_cast<std::size_t>(slot)] = val[static_cast<std::size_t>(k)];
    }
  }
  return t;
}

} // namespace ctmix
