#pragma once

#include <span>
#include <vector>

namespace ctmix {

// Probability distribution over {0, ..., m-1}. Always carries a normalized
// linear form; when built from log-weights it additionally keeps exact log
// probabilities so that masses far below DBL_MIN stay usable (the linear
// entries then underflow to 0 but log_value() remains faithful).
class ProbDist {
public:
  // `values` must be nonnegative and sum to 1 within `sum_tol`; the stored
  // vector is renormalized to sum to exactly 1.
  static ProbDist linear(std::vector<double> values, double sum_tol = 1e-10);

  // Unnormalized log-weights; normalization happens in the log domain.
  static ProbDist from_log_weights(std::vector<double> log_weights);

  static ProbDist point_mass(int size, int at);

  int size() const { return static_cast<int>(p_.size()); }
  double value(int i) const { return p_[static_cast<std::size_t>(i)]; }
  double log_value(int i) const;
  std::span<const double> values() const { return p_; }
  bool has_log_form() const { return !logp_.empty(); }

private:
  ProbDist() = default;
  std::vector<double> p_;
  std::vector<double> logp_; // empty unless built from log-weights
};

} // namespace ctmix
