#pragma once

#include <string>
#include <vector>

#include "ctmix/csr.hpp"

namespace ctmix {

struct RateEntry {
  int from = 0;
  int to = 0;
  double rate = 0.0;
};

// Validated continuous-time chain on states {0, ..., m-1}: positive
// off-diagonal rates, implicit diagonal Q(i,i) = -sum_j Q(i,j). Construction
// rejects malformed entries; irreducibility is checked up front so later
// stages may assume it (opt out with Connectivity::allow_absorbing for
// chains used only through the absorbing-set interfaces).
class ChainSpec {
public:
  enum class Connectivity { require_irreducible, allow_absorbing };

  ChainSpec(int states, std::vector<RateEntry> entries,
            Connectivity conn = Connectivity::require_irreducible,
            std::vector<std::string> labels = {});

  int size() const { return states_; }
  const std::vector<std::string>& labels() const { return labels_; }
  // Sorted by (from, to); duplicates were rejected at construction.
  const std::vector<RateEntry>& rate_entries() const { return entries_; }

  double rate(int from, int to) const; // 0 when no edge; from != to required
  double exit_rate(int i) const { return exit_[static_cast<std::size_t>(i)]; }
  // Smallest valid uniformization constant: max_i exit_rate(i).
  double uniformization_rate() const { return unif_rate_; }
  double max_rate() const { return max_rate_; }

  bool irreducible() const { return irreducible_; }
  void require_irreducible_for(const char* op) const;

  CsrMatrix generator() const;           // Q, diagonal included
  CsrMatrix generator_transpose() const; // Q^T

private:
  int states_ = 0;
  std::vector<RateEntry> entries_;
  std::vector<std::string> labels_;
  std::vector<double> exit_;
  double unif_rate_ = 0.0;
  double max_rate_ = 0.0;
  bool irreducible_ = false;
};

} // namespace ctmix
