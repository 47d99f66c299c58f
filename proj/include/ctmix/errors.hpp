#pragma once

#include <stdexcept>
#include <string>

namespace ctmix {

enum class Errc {
  non_irreducible,
  inconsistent_ratios,
  dimension_mismatch,
  negative_time,
  overflow_cap,
  start_absorbed,
  empty_absorbing_set,
  not_reversible,
  degree_infeasible,
  zero_reference_mass,
  out_of_range,
  size_cap_exceeded,
  cap_too_small,
  invalid_threshold,
  at_least_two_sizes,
  not_mean_zero,
  time_out_of_window,
  epsilon_out_of_range,
  invalid_config,
  copies_too_small,
  invalid_distribution,
  parse_error,
  numeric_failure,
};

const char* errc_name(Errc c) noexcept;

// Single exception type for every contract violation the library detects.
// `code()` is stable; `what()` is a human-readable diagnostic prefixed with
// the code name.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
        code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& msg);

} // namespace ctmix
