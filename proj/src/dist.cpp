#include "ctmix/dist.hpp"

#include <cmath>

#include "ctmix/errors.hpp"
#include "ctmix/mathutil.hpp"

namespace ctmix {

ProbDist ProbDist::linear(std::vector<double> values, double sum_tol) {
  if (values.empty())
    fail(Errc::invalid_distribution, "distribution must have at least one entry");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double v = values[i];
    if (!(v >= 0.0))
      fail(Errc::invalid_distribution,
           "entry " + std::to_string(i) + " is negative or NaN: " + fmt17(v));
    sum += v;
  }
  if (std::abs(sum - 1.0) > sum_tol)
    fail(Errc::invalid_distribution,
         "entries sum to " + fmt17(sum) + ", outside tolerance " + fmt17(sum_tol));
  for (double& v : values) v /= sum;
  ProbDist d;
  d.p_ = std::move(values);
  return d;
}

ProbDist ProbDist::from_log_weights(std::vector<double> log_weights) {
  if (log_weights.empty())
    fail(Errc::invalid_distribution, "distribution must have at least one entry");
  for (std::size_t i = 0; i < log_weights.size(); ++i)
    if (std::isnan(log_weights[i]) ||
        (std::isinf(log_weights[i]) && log_weights[i] > 0))
      fail(Errc::invalid_distribution,
           "log-weight " + std::to_string(i) + " is not a valid log mass");
  double lse = logsumexp(log_weights);
  if (!std::isfinite(lse))
    fail(Errc::invalid_distribution, "log-weights have no finite total mass");
  ProbDist d;
  d.logp_.resize(log_weights.size());
  d.p_.resize(log_weights.size());
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    d.logp_[i] = log_weights[i] - lse;
    d.p_[i] = std::exp(d.logp_[i]);
  }
  return d;
}

ProbDist ProbDist::point_mass(int size, int at) {
  if (size < 1 || at < 0 || at >= size)
    fail(Errc::invalid_distribution,
         "point mass at " + std::to_string(at) + " of " + std::to_string(size));
  ProbDist d;
  d.p_.assign(static_cast<std::size_t>(size), 0.0);
  d.p_[static_cast<std::size_t>(at)] = 1.0;
  return d;
}

double ProbDist::log_value(int i) const {
  if (!logp_.empty()) return logp_[static_cast<std::size_t>(i)];
  return std::log(p_[static_cast<std::size_t>(i)]);
}

} // namespace ctmix
