#include "ctmix/errors.hpp"

namespace ctmix {

const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::non_irreducible: return "NonIrreducible";
    case Errc::inconsistent_ratios: return "InconsistentRatios";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::negative_time: return "NegativeTime";
    case Errc::overflow_cap: return "OverflowCap";
    case Errc::start_absorbed: return "StartAbsorbed";
    case Errc::empty_absorbing_set: return "EmptyAbsorbingSet";
    case Errc::not_reversible: return "NotReversible";
    case Errc::degree_infeasible: return "DegreeInfeasible";
    case Errc::zero_reference_mass: return "ZeroReferenceMass";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::size_cap_exceeded: return "SizeCapExceeded";
    case Errc::cap_too_small: return "CapTooSmall";
    case Errc::invalid_threshold: return "InvalidThreshold";
    case Errc::at_least_two_sizes: return "AtLeastTwoSizes";
    case Errc::not_mean_zero: return "NotMeanZero";
    case Errc::time_out_of_window: return "TimeOutOfWindow";
    case Errc::epsilon_out_of_range: return "EpsilonOutOfRange";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::copies_too_small: return "CopiesTooSmall";
    case Errc::invalid_distribution: return "InvalidDistribution";
    case Errc::parse_error: return "ParseError";
    case Errc::numeric_failure: return "NumericFailure";
  }
  return "UnknownError";
}

void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

} // namespace ctmix
