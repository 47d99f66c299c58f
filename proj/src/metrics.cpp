#include "ctmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "ctmix/errors.hpp"
#include "ctmix/kernels.hpp"
#include "ctmix/mathutil.hpp"

namespace ctmix {
namespace {

constexpr double sqrt2 = 1.4142135623730951;

// Stationary masses below this are treated as unresolvable when the
// corresponding transition entry underflows to zero: the ratio is then
// recovered from the reverse pair (reversibility) instead of being guessed.
constexpr double sep_pi_floor = 1e-9;

double tv_between(const double* mu, const double* nu, int m) {
  double acc = 0.0;
  for (int y = 0; y < m; ++y) acc += std::abs(mu[y] - nu[y]);
  return 0.5 * acc;
}

} // namespace

const char* kind_name(DistanceKind kind) noexcept {
  switch (kind) {
    case DistanceKind::total_variation: return "total_variation";
    case DistanceKind::separation: return "separation";
    case DistanceKind::hellinger: return "hellinger";
    case DistanceKind::pairwise_tv: return "pairwise_tv";
  }
  return "unknown";
}

DistanceKind kind_from_name(const std::string& name) {
  if (name == "total_variation" || name == "tv") return DistanceKind::total_variation;
  if (name == "separation" || name == "sep") return DistanceKind::separation;
  if (name == "hellinger") return DistanceKind::hellinger;
  if (name == "pairwise_tv" || name == "pairwise") return DistanceKind::pairwise_tv;
  fail(Errc::parse_error, "unknown distance kind \"" + name + "\"");
}

double kind_max(DistanceKind kind) noexcept {
  return kind == DistanceKind::hellinger ? sqrt2 : 1.0;
}

double distance(const ProbDist& mu, const ProbDist& nu, DistanceKind kind) {
  if (mu.size() != nu.size())
    fail(Errc::dimension_mismatch, "distributions of size " + std::to_string(mu.size()) +
                                       " and " + std::to_string(nu.size()));
  const int m = mu.size();
  switch (kind) {
    case DistanceKind::total_variation:
    case DistanceKind::pairwise_tv: {
      double acc = 0.0;
      for (int y = 0; y < m; ++y) acc += std::abs(mu.value(y) - nu.value(y));
      return 0.5 * acc;
    }
    case DistanceKind::separation: {
      double min_lr = neg_inf;
      bool first = true;
      for (int y = 0; y < m; ++y) {
        if (!nu.has_log_form() && nu.value(y) == 0.0)
          fail(Errc::zero_reference_mass,
               "reference distribution has zero mass at state " + std::to_string(y));
        double lr = mu.log_value(y) - nu.log_value(y); // -inf when mu(y) = 0
        if (first || lr < min_lr) {
          min_lr = lr;
          first = false;
        }
      }
      if (std::isinf(min_lr) && min_lr < 0) return 1.0;
      return -std::expm1(std::min(min_lr, 0.0));
    }
    case DistanceKind::hellinger: {
      // exp(log/2) keeps sqrt(mass) alive even when the linear mass
      // underflows (log-form distributions).
      double acc = 0.0;
      for (int y = 0; y < m; ++y) {
        double smu = mu.has_log_form() ? std::exp(0.5 * mu.log_value(y))
                                       : std::sqrt(mu.value(y));
        double snu = nu.has_log_form() ? std::exp(0.5 * nu.log_value(y))
                                       : std::sqrt(nu.value(y));
        double d = smu - snu;
        acc += d * d;
      }
      return std::sqrt(acc);
    }
  }
  fail(Errc::invalid_config, "unhandled distance kind");
}

DistanceProfile DistanceProfile::make(DistanceKind kind, std::vector<double> times,
                                      std::vector<double> values) {
  if (times.empty() || times.size() != values.size())
    fail(Errc::invalid_config, "profile needs matching nonempty times/values, got " +
                                   std::to_string(times.size()) + "/" +
                                   std::to_string(values.size()));
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0))
      fail(Errc::invalid_config, "times must be >= 0, got " + fmt17(times[i]));
    if (i > 0 && !(times[i] > times[i - 1]))
      fail(Errc::invalid_config, "times must be strictly increasing at index " +
                                     std::to_string(i));
  }
  const double hi = kind_max(kind);
  for (std::size_t i = 0; i < values.size(); ++i) {
    double v = values[i];
    if (!(v >= -1e-12) || !(v <= hi + 1e-12))
      fail(Errc::out_of_range, "profile value " + fmt17(v) + " outside [0, " +
                                   fmt17(hi) + "] at index " + std::to_string(i));
    values[i] = std::min(hi, std::max(0.0, v));
    if (i > 0 && values[i] > values[i - 1] + 1e-9)
      fail(Errc::numeric_failure,
           "profile increases by " + fmt17(values[i] - values[i - 1]) +
               " at index " + std::to_string(i) + "; distance profiles must be nonincreasing");
  }
  DistanceProfile p;
  p.kind = kind;
  p.times = std::move(times);
  p.values = std::move(values);
  return p;
}

WorstCaseEvaluator::WorstCaseEvaluator(const ChainSpec& chain,
                                       std::optional<ProbDist> pi, ExpmOptions opts)
    : chain_(chain),
      pi_(pi ? std::move(*pi) : [&chain]() -> ProbDist {
        // Reversible chains get the log-tree law (exact for tiny masses);
        // everything else falls back to the dense solve.
        try {
          return stationary_distribution(chain, PiMode::log_tree);
        } catch (const Error& e) {
          if (e.code() == Errc::inconsistent_ratios)
            return stationary_distribution(chain, PiMode::linear_solve);
          throw;
        }
      }()),
      opts_(opts) {
  if (pi_.size() != chain_.size())
    fail(Errc::dimension_mismatch, "stationary law size " + std::to_string(pi_.size()) +
                                       " vs chain size " + std::to_string(chain_.size()));
}

double worst_case_from_matrix(const std::vector<double>& p, const ProbDist& pi,
                              DistanceKind kind) {
  const int m = pi.size();
  if (p.size() != static_cast<std::size_t>(m) * m)
    fail(Errc::dimension_mismatch, "matrix of " + std::to_string(p.size()) +
                                       " entries vs " + std::to_string(m) + " states");
  switch (kind) {
    case DistanceKind::total_variation: {
      double worst = 0.0;
      for (int x = 0; x < m; ++x) {
        double acc = 0.0;
        for (int y = 0; y < m; ++y)
          acc += std::abs(p[static_cast<std::size_t>(x) * m + y] - pi.value(y));
        worst = std::max(worst, 0.5 * acc);
      }
      return clamp01(worst);
    }
    case DistanceKind::hellinger: {
      double worst = 0.0;
      for (int x = 0; x < m; ++x) {
        double acc = 0.0;
        for (int y = 0; y < m; ++y) {
          double d = std::sqrt(p[static_cast<std::size_t>(x) * m + y]) -
                     (pi.has_log_form() ? std::exp(0.5 * pi.log_value(y))
                                        : std::sqrt(pi.value(y)));
          acc += d * d;
        }
        worst = std::max(worst, std::sqrt(acc));
      }
      return std::min(worst, sqrt2);
    }
    case DistanceKind::separation: {
      // min over (x, y) of P_t(x,y)/pi(y) in the log domain. A transition
      // entry that truncated/underflowed to zero counts as ratio zero when
      // pi(y) is macroscopic; when pi(y) is itself below the floor the pair
      // is skipped — for reversible chains the (y, x) pair carries the same
      // ratio through representable numbers.
      double min_lr = 0.0;
      bool found = false;
      bool hit_zero = false;
      for (int x = 0; x < m && !hit_zero; ++x) {
        for (int y = 0; y < m; ++y) {
          double entry = p[static_cast<std::size_t>(x) * m + y];
          double lpi = pi.log_value(y);
          if (entry == 0.0) {
            if (pi.value(y) >= sep_pi_floor) {
              hit_zero = true;
              break;
            }
            continue;
          }
          double lr = std::log(entry) - lpi;
          if (!found || lr < min_lr) {
            min_lr = lr;
            found = true;
          }
        }
      }
      if (hit_zero) return 1.0;
      if (!found)
        fail(Errc::numeric_failure, "no representable transition/stationary ratio");
      return -std::expm1(std::min(min_lr, 0.0));
    }
    case DistanceKind::pairwise_tv: {
      double worst = 0.0;
      for (int x = 0; x < m; ++x)
        for (int y = x + 1; y < m; ++y)
          worst = std::max(worst, tv_between(&p[static_cast<std::size_t>(x) * m],
                                             &p[static_cast<std::size_t>(y) * m], m));
      return clamp01(worst);
    }
  }
  fail(Errc::invalid_config, "unhandled distance kind");
}

std::vector<double> rows_from_matrix(const std::vector<double>& p, const ProbDist& pi,
                                     DistanceKind kind) {
  const int m = pi.size();
  if (p.size() != static_cast<std::size_t>(m) * m)
    fail(Errc::dimension_mismatch, "matrix of " + std::to_string(p.size()) +
                                       " entries vs " + std::to_string(m) + " states");
  std::vector<double> rows(static_cast<std::size_t>(m));
  switch (kind) {
    case DistanceKind::total_variation:
    case DistanceKind::pairwise_tv:
      for (int x = 0; x < m; ++x) {
        double acc = 0.0;
        for (int y = 0; y < m; ++y)
          acc += std::abs(p[static_cast<std::size_t>(x) * m + y] - pi.value(y));
        rows[static_cast<std::size_t>(x)] = clamp01(0.5 * acc);
      }
      return rows;
    case DistanceKind::hellinger:
      for (int x = 0; x < m; ++x) {
        double acc = 0.0;
        for (int y = 0; y < m; ++y) {
          double d = std::sqrt(p[static_cast<std::size_t>(x) * m + y]) -
                     (pi.has_log_form() ? std::exp(0.5 * pi.log_value(y))
                                        : std::sqrt(pi.value(y)));
          acc += d * d;
        }
        rows[static_cast<std::size_t>(x)] = std::min(std::sqrt(acc), sqrt2);
      }
      return rows;
    default:
      fail(Errc::invalid_config, "per-start rows are defined for tv and hellinger only");
  }
}

double WorstCaseEvaluator::operator()(double t, DistanceKind kind) const {
  const std::vector<double> p = transition_matrix(chain_, t, opts_);
  return worst_case_from_matrix(p, pi_, kind);
}

namespace {

DistanceProfile profile_over(const WorstCaseEvaluator& eval, DistanceKind kind,
                             const std::vector<double>& times,
                             const ProfileOptions& opts) {
  std::vector<double> values(times.size());
  std::exception_ptr first_error = nullptr;
  std::size_t first_error_index = times.size();
#pragma omp parallel for if (opts.parallel) schedule(dynamic)
  for (std::size_t i = 0; i < times.size(); ++i) {
    try {
      values[i] = eval(times[i], kind);
    } catch (...) {
#pragma omp critical(ctmix_profile_error)
      {
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return DistanceProfile::make(kind, times, std::move(values));
}

} // namespace

DistanceProfile worst_case_profile(const ChainSpec& chain, DistanceKind kind,
                                   const std::vector<double>& times,
                                   const ProfileOptions& opts) {
  WorstCaseEvaluator eval(chain, std::nullopt, opts.expm);
  return profile_over(eval, kind, times, opts);
}

DistanceProfile worst_case_profile(const WorstCaseEvaluator& eval, DistanceKind kind,
                                   const std::vector<double>& times,
                                   const ProfileOptions& opts) {
  return profile_over(eval, kind, times, opts);
}

double l1_contraction_ratio(const ChainSpec& chain, const ProbDist& pi,
                            const std::vector<double>& f, double t,
                            const ExpmOptions& opts) {
  const int m = chain.size();
  if (static_cast<int>(f.size()) != m || pi.size() != m)
    fail(Errc::dimension_mismatch, "f/pi size vs " + std::to_string(m) + " states");
  double fmax = 0.0;
  for (double v : f) fmax = std::max(fmax, std::abs(v));
  if (fmax == 0.0) fail(Errc::not_mean_zero, "f is identically zero");
  double mean = 0.0, norm = 0.0;
  for (int x = 0; x < m; ++x) {
    mean += pi.value(x) * f[static_cast<std::size_t>(x)];
    norm += pi.value(x) * std::abs(f[static_cast<std::size_t>(x)]);
  }
  if (std::abs(mean) > 1e-10 * std::max(1.0, fmax))
    fail(Errc::not_mean_zero, "pi-mean of f is " + fmt17(mean));
  if (!(norm > 0.0))
    fail(Errc::not_mean_zero, "f vanishes on the support of pi");

  // (P_t f)(x) = sum_y P_t(x,y) f(y) = (e^{tQ} f)(x): one row-gather action.
  auto ptf = expm_action(chain.generator(), chain.uniformization_rate(), f, t, opts);
  double pnorm = 0.0;
  for (int x = 0; x < m; ++x) pnorm += pi.value(x) * std::abs(ptf[static_cast<std::size_t>(x)]);
  return pnorm / norm;
}

bool l1_contraction_check(const ChainSpec& chain, const ProbDist& pi,
                          const std::vector<double>& f, double t, double dbar_t,
                          double slack) {
  return l1_contraction_ratio(chain, pi, f, t) <= dbar_t + slack;
}

std::string profile_to_csv(const DistanceProfile& profile) {
  std::string out = "# kind=";
  out += kind_name(profile.kind);
  out += "\ntime,value\n";
  for (std::size_t i = 0; i < profile.times.size(); ++i) {
    out += fmt17(profile.times[i]);
    out += ',';
    out += fmt17(profile.values[i]);
    out += '\n';
  }
  return out;
}

DistanceProfile profile_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::optional<DistanceKind> kind;
  std::vector<double> times, values;
  std::size_t lineno = 0;
  bool saw_columns = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("kind=");
      if (pos != std::string::npos) kind = kind_from_name(line.substr(pos + 5));
      continue;
    }
    if (!saw_columns) {
      if (line != "time,value")
        fail(Errc::parse_error,
             "line " + std::to_string(lineno) + ": expected header \"time,value\"");
      saw_columns = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos)
      fail(Errc::parse_error, "line " + std::to_string(lineno) + ": expected time,value");
    char* end = nullptr;
    std::string ts = line.substr(0, comma), vs = line.substr(comma + 1);
    double t = std::strtod(ts.c_str(), &end);
    if (end == ts.c_str() || *end != '\0')
      fail(Errc::parse_error, "line " + std::to_string(lineno) + ": bad time \"" + ts + "\"");
    double v = std::strtod(vs.c_str(), &end);
    if (end == vs.c_str() || *end != '\0')
      fail(Errc::parse_error, "line " + std::to_string(lineno) + ": bad value \"" + vs + "\"");
    times.push_back(t);
    values.push_back(v);
  }
  if (!kind) fail(Errc::parse_error, "missing \"# kind=\" header");
  return DistanceProfile::make(*kind, std::move(times), std::move(values));
}

nlohmann::ordered_json profile_to_json(const DistanceProfile& profile) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["kind"] = kind_name(profile.kind);
  doc["times"] = profile.times;
  doc["values"] = profile.values;
  return doc;
}

DistanceProfile profile_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc.contains("times") ||
      !doc.contains("values"))
    fail(Errc::parse_error, "profile JSON needs kind/times/values");
  return DistanceProfile::make(kind_from_name(doc["kind"].get<std::string>()),
                               doc["times"].get<std::vector<double>>(),
                               doc["values"].get<std::vector<double>>());
}

} // namespace ctmix
