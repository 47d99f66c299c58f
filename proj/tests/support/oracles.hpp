#pragma once

// Closed-form oracles the library is tested against. Everything here is
// derived independently of the library kernels: no uniformization, no CSR,
// no shared reductions. Eigen is used only for the dense eigendecomposition
// routes, which exercise a completely different algorithm than the kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ctmix/chain.hpp"
#include "ctmix/dist.hpp"

namespace oracles {

// P(Erlang(k, rate) > t) = sum_{j<k} e^{-rt} (rt)^j / j!
// Term recurrence in the linear domain; valid while e^{-rt} is representable
// (rt <= ~700, far beyond anything the tests probe).
inline double erlang_tail(int k, double rate, double t) {
  if (t <= 0.0) return 1.0;
  const double x = rate * t;
  double term = std::exp(-x);
  double sum = term;
  for (int j = 1; j < k; ++j) {
    term *= x / j;
    sum += term;
  }
  return std::min(1.0, sum);
}

// Survival of the segment-family hitting time from A in the epsilon -> 0
// limit: n forward Exp(1) holds to B, one more hold at B, then either the
// direct jump to C (prob 1 - 1/n) or the long arc of n - 1 further holds
// (prob 1/n). tau ~ (1 - 1/n) Erlang(n+1, 1) + (1/n) Erlang(2n, 1).
inline double family_survival(int n, double t) {
  const double w = 1.0 / n;
  return (1.0 - w) * erlang_tail(n + 1, 1.0, t) + w * erlang_tail(2 * n, 1.0, t);
}

// Two-state chain with rates a: 0 -> 1 and b: 1 -> 0. Everything has
// closed form through s = a + b.
struct TwoState {
  double a = 1.0;
  double b = 1.0;

  double pi0() const { return b / (a + b); }
  double pi1() const { return a / (a + b); }
  double decay(double t) const { return std::exp(-(a + b) * t); }

  // P_t(x, y)
  double p(int x, int y, double t) const {
    const double e = decay(t);
    const double py = y == 0 ? pi0() : pi1();
    if (x == y) return py + (1.0 - py) * e;
    return py * (1.0 - e);
  }
  double tv_from(int x, double t) const {
    return (x == 0 ? pi1() : pi0()) * decay(t);
  }
  double worst_tv(double t) const { return std::max(pi0(), pi1()) * decay(t); }
  // min_{x,y} P_t(x,y)/pi(y) = 1 - e^{-(a+b)t}, attained on the off-diagonal.
  double separation(double t) const { return decay(t); }
  double hellinger_from(int x, double t) const {
    const double d0 = std::sqrt(p(x, 0, t)) - std::sqrt(pi0());
    const double d1 = std::sqrt(p(x, 1, t)) - std::sqrt(pi1());
    return std::sqrt(d0 * d0 + d1 * d1);
  }
  double worst_hellinger(double t) const {
    return std::max(hellinger_from(0, t), hellinger_from(1, t));
  }
};

inline Eigen::MatrixXd dense_generator(const ctmix::ChainSpec& chain) {
  const int m = chain.size();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
  for (const ctmix::RateEntry& e : chain.rate_entries()) {
    q(e.from, e.to) += e.rate;
    q(e.from, e.from) -= e.rate;
  }
  return q;
}

// Spectral gap from the plain (non-symmetrized) generator via the general
// eigensolver: -max Re(lambda) over the nonzero spectrum.
inline double gap_general_eigen(const ctmix::ChainSpec& chain) {
  const Eigen::MatrixXd q = dense_generator(chain);
  const Eigen::EigenSolver<Eigen::MatrixXd> es(q);
  std::vector<double> re(static_cast<std::size_t>(chain.size()));
  for (int i = 0; i < chain.size(); ++i) re[static_cast<std::size_t>(i)] = es.eigenvalues()(i).real();
  std::sort(re.begin(), re.end());
  return -re[re.size() - 2];
}

// Dense e^{tQ} through the symmetrized eigendecomposition: with
// S = D^{1/2} Q D^{-1/2} symmetric (D = diag(pi)), P_t = D^{-1/2} e^{tS} D^{1/2}.
// Valid for reversible chains whose pi has no underflowed mass.
inline Eigen::MatrixXd dense_transition(const ctmix::ChainSpec& chain,
                                        const ctmix::ProbDist& pi, double t) {
  const int m = chain.size();
  const Eigen::MatrixXd q = dense_generator(chain);
  Eigen::VectorXd sq(m);
  for (int i = 0; i < m; ++i) sq(i) = std::sqrt(pi.value(i));
  Eigen::MatrixXd s(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) s(i, j) = sq(i) * q(i, j) / sq(j);
  s = 0.5 * (s + s.transpose().eval()); // kill asymmetric rounding
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  Eigen::VectorXd ex = (t * es.eigenvalues().array()).exp();
  Eigen::MatrixXd ets = es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().transpose();
  Eigen::MatrixXd p(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) p(i, j) = ets(i, j) * sq(j) / sq(i);
  return p;
}

// Slow, direct distances between two explicit probability vectors.
inline double tv(const std::vector<double>& mu, const std::vector<double>& nu) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) acc += std::abs(mu[i] - nu[i]);
  return 0.5 * acc;
}

inline double hellinger(const std::vector<double>& mu, const std::vector<double>& nu) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double d = std::sqrt(mu[i]) - std::sqrt(nu[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline double separation(const std::vector<double>& mu, const std::vector<double>& nu) {
  double worst = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    worst = std::max(worst, 1.0 - mu[i] / nu[i]);
  return worst;
}

// Exact n-fold product distances computed the slow way, from the definitions
// rather than log1p/expm1: 1 - (1-d)^n by repeated multiplication, and the
// Hellinger product through the fidelity product.
inline double product_sep_slow(double d, std::int64_t n) {
  double keep = 1.0;
  for (std::int64_t i = 0; i < n; ++i) keep *= 1.0 - d;
  return 1.0 - keep;
}

inline double product_hellinger_slow(double h, std::int64_t n) {
  const double fid = 1.0 - 0.5 * h * h; // marginal Bhattacharyya coefficient
  double prod = 1.0;
  for (std::int64_t i = 0; i < n; ++i) prod *= fid;
  return std::sqrt(std::max(0.0, 2.0 * (1.0 - prod)));
}

// Pure-birth chain 0 -> 1 -> ... -> k (unit rates), so the hitting time of k
// from 0 is exactly Erlang(k, 1).
inline ctmix::ChainSpec pure_birth(int k) {
  std::vector<ctmix::RateEntry> entries;
  for (int i = 0; i < k; ++i) entries.push_back(ctmix::RateEntry{i, i + 1, 1.0});
  return ctmix::ChainSpec(k + 1, std::move(entries),
                          ctmix::ChainSpec::Connectivity::allow_absorbing);
}

} // namespace oracles
