#include "ctmix/chain_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <Eigen/Dense>

#include "ctmix/errors.hpp"
#include "ctmix/mathutil.hpp"
#include "ctmix/rng.hpp"

namespace ctmix {
namespace {

ProbDist stationary_linear(const ChainSpec& chain) {
  const int m = chain.size();
  // pi Q = 0 with sum(pi) = 1 as an overdetermined least-squares system on
  // Q^T pi = 0 plus the normalization row.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + 1, m);
  for (const auto& e : chain.rate_entries()) {
    a(e.to, e.from) += e.rate;
    a(e.from, e.from) -= e.rate;
  }
  for (int j = 0; j < m; ++j) a(m, j) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m + 1);
  b(m) = 1.0;
  Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);

  std::vector<double> values(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) values[static_cast<std::size_t>(i)] = std::max(0.0, pi(i));
  double sum = std::accumulate(values.begin(), values.end(), 0.0);
  if (!(sum > 0.0)) fail(Errc::numeric_failure, "stationary solve returned no mass");
  for (double& v : values) v /= sum;

  // Residual contract: max_y |sum_x pi(x) Q(x,y)| <= 1e-10 * max rate.
  std::vector<double> acc(static_cast<std::size_t>(m));
  for (int y = 0; y < m; ++y)
    acc[static_cast<std::size_t>(y)] = -values[static_cast<std::size_t>(y)] * chain.exit_rate(y);
  for (const auto& e : chain.rate_entries())
    acc[static_cast<std::size_t>(e.to)] += values[static_cast<std::size_t>(e.from)] * e.rate;
  double resid = 0.0;
  for (double v : acc) resid = std::max(resid, std::abs(v));
  if (resid > 1e-10 * chain.max_rate())
    fail(Errc::numeric_failure,
         "stationary residual " + fmt17(resid) + " exceeds 1e-10 * max rate");
  return ProbDist::linear(std::move(values), 1e-9);
}

ProbDist stationary_log_tree(const ChainSpec& chain) {
  const int m = chain.size();
  // Bidirectional adjacency with log detailed-balance ratios. Any one-sided
  // edge already rules out reversibility.
  struct Arc {
    int to;
    double log_ratio; // log Q(u,v) - log Q(v,u)
  };
  std::vector<std::vector<Arc>> adj(static_cast<std::size_t>(m));
  std::vector<std::pair<int, int>> undirected;
  for (const auto& e : chain.rate_entries()) {
    if (e.from > e.to) continue;
    double back = chain.rate(e.to, e.from);
    if (back == 0.0)
      fail(Errc::inconsistent_ratios,
           "edge (" + std::to_string(e.from) + ", " + std::to_string(e.to) +
               ") has no reverse rate; chain is not reversible");
    double lr = std::log(e.rate) - std::log(back);
    adj[static_cast<std::size_t>(e.from)].push_back({e.to, lr});
    adj[static_cast<std::size_t>(e.to)].push_back({e.from, -lr});
    undirected.emplace_back(e.from, e.to);
  }
  for (const auto& e : chain.rate_entries())
    if (e.from > e.to && chain.rate(e.to, e.from) == 0.0)
      fail(Errc::inconsistent_ratios,
           "edge (" + std::to_string(e.to) + ", " + std::to_string(e.from) +
               ") has no reverse rate; chain is not reversible");

  std::vector<double> logw(static_cast<std::size_t>(m), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(m), 0);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  while (!bfs.empty()) {
    int u = bfs.front();
    bfs.pop();
    for (const auto& arc : adj[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(arc.to)]) continue;
      seen[static_cast<std::size_t>(arc.to)] = 1;
      logw[static_cast<std::size_t>(arc.to)] = logw[static_cast<std::size_t>(u)] + arc.log_ratio;
      bfs.push(arc.to);
    }
  }
  for (char s : seen)
    if (!s)
      fail(Errc::inconsistent_ratios,
           "bidirectional edges do not connect the state space");

  // Cycle consistency on every non-tree edge: the path-product rule must be
  // single-valued to 1e-8 or the chain is not reversible.
  for (auto [u, v] : undirected) {
    double lr = std::log(chain.rate(u, v)) - std::log(chain.rate(v, u));
    double delta = logw[static_cast<std::size_t>(u)] + lr - logw[static_cast<std::size_t>(v)];
    if (std::abs(std::expm1(delta)) > 1e-8)
      fail(Errc::inconsistent_ratios,
           "cycle through edge (" + std::to_string(u) + ", " + std::to_string(v) +
               ") breaks detailed-balance consistency by " + fmt17(std::expm1(delta)));
  }
  return ProbDist::from_log_weights(std::move(logw));
}

} // namespace

ProbDist stationary_distribution(const ChainSpec& chain, PiMode mode) {
  chain.require_irreducible_for("stationary_distribution");
  return mode == PiMode::linear_solve ? stationary_linear(chain)
                                      : stationary_log_tree(chain);
}

BalanceReport check_detailed_balance(const ChainSpec& chain, const ProbDist& pi,
                                     double tol) {
  if (pi.size() != chain.size())
    fail(Errc::dimension_mismatch, "pi has " + std::to_string(pi.size()) +
                                       " entries for " + std::to_string(chain.size()) +
                                       " states");
  BalanceReport report;
  report.reversible = true;
  for (const auto& e : chain.rate_entries()) {
    if (e.from > e.to) continue; // one unordered pair per iteration
    double back = chain.rate(e.to, e.from);
    double violation;
    if (back == 0.0) {
      violation = 1.0; // one-sided flux
    } else {
      double la = pi.log_value(e.from) + std::log(e.rate);
      double lb = pi.log_value(e.to) + std::log(back);
      if (std::isinf(la) || std::isinf(lb)) {
        violation = (la == lb) ? 0.0 : 1.0; // a zero-mass endpoint kills one flux
      } else {
        // |a-b|/(a+b) = |tanh((la-lb)/2)|, overflow-free.
        violation = std::abs(std::tanh(0.5 * (la - lb)));
      }
    }
    if (violation > report.worst_violation) {
      report.worst_violation = violation;
      report.worst_from = e.from;
      report.worst_to = e.to;
    }
  }
  for (const auto& e : chain.rate_entries()) {
    if (e.from > e.to && chain.rate(e.to, e.from) == 0.0 &&
        1.0 > report.worst_violation) {
      report.worst_violation = 1.0;
      report.worst_from = e.to;
      report.worst_to = e.from;
    }
  }
  report.reversible = report.worst_violation <= tol;
  return report;
}

ProbDist transient_distribution(const ChainSpec& chain, int start, double t,
                                const ExpmOptions& opts) {
  const int m = chain.size();
  if (start < 0 || start >= m)
    fail(Errc::out_of_range, "start state " + std::to_string(start));
  ExpmOptions o = opts;
  o.renormalize = true;
  std::vector<double> v(static_cast<std::size_t>(m), 0.0);
  v[static_cast<std::size_t>(start)] = 1.0;
  auto row = expm_action(chain.generator_transpose(), chain.uniformization_rate(),
                         std::move(v), t, o);
  return ProbDist::linear(std::move(row), 1e-9);
}

ProbDist propagate(const ChainSpec& chain, const ProbDist& dist, double t,
                   const ExpmOptions& opts) {
  if (dist.size() != chain.size())
    fail(Errc::dimension_mismatch, "distribution has " + std::to_string(dist.size()) +
                                       " entries for " + std::to_string(chain.size()) +
                                       " states");
  ExpmOptions o = opts;
  o.renormalize = true;
  std::vector<double> v(dist.values().begin(), dist.values().end());
  auto row = expm_action(chain.generator_transpose(), chain.uniformization_rate(),
                         std::move(v), t, o);
  return ProbDist::linear(std::move(row), 1e-9);
}

std::vector<double> survival_all_starts(const ChainSpec& chain,
                                        const std::vector<int>& absorbing,
                                        double t, const ExpmOptions& opts) {
  const int m = chain.size();
  if (absorbing.empty()) fail(Errc::empty_absorbing_set, "absorbing set is empty");
  std::vector<char> is_abs(static_cast<std::size_t>(m), 0);
  for (int s : absorbing) {
    if (s < 0 || s >= m) fail(Errc::out_of_range, "absorbing state " + std::to_string(s));
    is_abs[static_cast<std::size_t>(s)] = 1;
  }
  std::vector<int> sub_of(static_cast<std::size_t>(m), -1);
  std::vector<int> full_of;
  for (int i = 0; i < m; ++i) {
    if (!is_abs[static_cast<std::size_t>(i)]) {
      sub_of[static_cast<std::size_t>(i)] = static_cast<int>(full_of.size());
      full_of.push_back(i);
    }
  }
  if (full_of.empty())
    fail(Errc::empty_absorbing_set, "every state is absorbing; no transient part");

  // Sub-generator on transient states: keep original diagonals (full exit
  // rates), drop columns into the absorbing set. Row sums become <= 0, which
  // is exactly the substochastic leak into the absorbing set.
  CsrMatrix sub;
  sub.n = static_cast<int>(full_of.size());
  sub.row_ptr.assign(static_cast<std::size_t>(sub.n) + 1, 0);
  const CsrMatrix q = chain.generator();
  for (int si = 0; si < sub.n; ++si) {
    int i = full_of[static_cast<std::size_t>(si)];
    for (std::int64_t p = q.row_ptr[static_cast<std::size_t>(i)];
         p < q.row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
      if (sub_of[static_cast<std::size_t>(q.col[static_cast<std::size_t>(p)])] >= 0)
        ++sub.row_ptr[static_cast<std::size_t>(si) + 1];
  }
  for (int si = 0; si < sub.n; ++si)
    sub.row_ptr[static_cast<std::size_t>(si) + 1] += sub.row_ptr[static_cast<std::size_t>(si)];
  sub.col.resize(static_cast<std::size_t>(sub.row_ptr.back()));
  sub.val.resize(static_cast<std::size_t>(sub.row_ptr.back()));
  for (int si = 0; si < sub.n; ++si) {
    int i = full_of[static_cast<std::size_t>(si)];
    std::int64_t slot = sub.row_ptr[static_cast<std::size_t>(si)];
    for (std::int64_t p = q.row_ptr[static_cast<std::size_t>(i)];
         p < q.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      int sj = sub_of[static_cast<std::size_t>(q.col[static_cast<std::size_t>(p)])];
      if (sj >= 0) {
        sub.col[static_cast<std::size_t>(slot)] = sj;
        sub.val[static_cast<std::size_t>(slot)] = q.val[static_cast<std::size_t>(p)];
        ++slot;
      }
    }
  }

  std::vector<double> ones(static_cast<std::size_t>(sub.n), 1.0);
  auto y = expm_action(sub, chain.uniformization_rate(), std::move(ones), t, opts);
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  for (int si = 0; si < sub.n; ++si)
    out[static_cast<std::size_t>(full_of[static_cast<std::size_t>(si)])] =
        clamp01(y[static_cast<std::size_t>(si)]);
  return out;
}

double survival_probability(const ChainSpec& chain, const std::vector<int>& absorbing,
                            int start, double t, const ExpmOptions& opts) {
  const int m = chain.size();
  if (start < 0 || start >= m) fail(Errc::out_of_range, "start state " + std::to_string(start));
  for (int s : absorbing)
    if (s == start) fail(Errc::start_absorbed, "start state " + std::to_string(start) +
                                                   " is in the absorbing set");
  auto all = survival_all_starts(chain, absorbing, t, opts);
  return all[static_cast<std::size_t>(start)];
}

double spectral_gap(const ChainSpec& chain, const ProbDist& pi) {
  chain.require_irreducible_for("spectral_gap");
  const int m = chain.size();
  auto balance = check_detailed_balance(chain, pi, 1e-8);
  if (!balance.reversible)
    fail(Errc::not_reversible,
         "detailed balance violated at edge (" + std::to_string(balance.worst_from) +
             ", " + std::to_string(balance.worst_to) + ") by relative flux " +
             fmt17(balance.worst_violation));

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
  for (const auto& e : chain.rate_entries()) {
    if (e.from > e.to) continue;
    double back = chain.rate(e.to, e.from); // > 0: balance check passed
    // Geometric mean in the log domain: sqrt(Q(x,y) Q(y,x)) without
    // overflow/underflow for rate ratios spanning hundreds of decades.
    double g = std::exp(0.5 * (std::log(e.rate) + std::log(back)));
    s(e.from, e.to) = g;
    s(e.to, e.from) = g;
  }
  for (int i = 0; i < m; ++i) s(i, i) = -chain.exit_rate(i);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    fail(Errc::numeric_failure, "symmetric eigensolver did not converge");
  const auto& ev = es.eigenvalues(); // ascending
  double top = ev(m - 1);
  double scale = std::max(1.0, chain.uniformization_rate());
  if (std::abs(top) > 1e-8 * scale)
    fail(Errc::numeric_failure,
         "largest eigenvalue " + fmt17(top) + " is not numerically zero");
  double gap = -ev(m - 2);
  if (!(gap > 0.0))
    fail(Errc::numeric_failure, "spectral gap is not positive: " + fmt17(gap));
  return gap;
}

ChainSpec random_reversible_chain(const RandomChainParams& params) {
  const int m = params.states;
  if (m < 2) fail(Errc::invalid_config, "need at least 2 states");
  if (!(params.rate_lo > 0.0) || params.rate_hi < params.rate_lo)
    fail(Errc::invalid_config, "rate range must satisfy 0 < lo <= hi");
  const auto max_edges = static_cast<std::int64_t>(m) * (m - 1) / 2;
  const auto edges = static_cast<std::int64_t>(std::llround(params.average_degree * m / 2.0));
  if (edges < m - 1 || edges > max_edges)
    fail(Errc::degree_infeasible,
         "average degree " + fmt17(params.average_degree) + " needs " +
             std::to_string(edges) + " edges outside [" + std::to_string(m - 1) +
             ", " + std::to_string(max_edges) + "]");

  Rng rng(params.seed);
  std::vector<std::pair<int, int>> edge_list;
  std::vector<char> in_tree(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0);
  for (int i = 1; i < m; ++i) {
    int parent = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
    edge_list.emplace_back(parent, i);
    in_tree[static_cast<std::size_t>(parent) * static_cast<std::size_t>(m) +
            static_cast<std::size_t>(i)] = 1;
  }
  std::vector<std::pair<int, int>> pool;
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v)
      if (!in_tree[static_cast<std::size_t>(u) * static_cast<std::size_t>(m) +
                   static_cast<std::size_t>(v)])
        pool.emplace_back(u, v);
  for (std::size_t i = pool.size(); i > 1; --i)
    std::swap(pool[i - 1], pool[rng.below(i)]);
  for (std::int64_t k = 0; k < edges - (m - 1); ++k)
    edge_list.push_back(pool[static_cast<std::size_t>(k)]);
  std::sort(edge_list.begin(), edge_list.end());

  std::vector<double> rho(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) rho[static_cast<std::size_t>(i)] = rng.uniform(params.rate_lo, params.rate_hi);

  std::vector<RateEntry> entries;
  entries.reserve(2 * edge_list.size());
  for (auto [u, v] : edge_list) {
    double w = rng.uniform(params.rate_lo, params.rate_hi);
    entries.push_back(RateEntry{u, v, w / rho[static_cast<std::size_t>(u)]});
    entries.push_back(RateEntry{v, u, w / rho[static_cast<std::size_t>(v)]});
  }
  return ChainSpec(m, std::move(entries));
}

} // namespace ctmix
