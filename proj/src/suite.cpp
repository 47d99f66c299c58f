#include "ctmix/suite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "ctmix/chain_ops.hpp"
#include "ctmix/errors.hpp"
#include "ctmix/family.hpp"
#include "ctmix/kernels.hpp"
#include "ctmix/mathutil.hpp"
#include "ctmix/metrics.hpp"
#include "ctmix/mixing.hpp"
#include "ctmix/product.hpp"
#include "ctmix/rng.hpp"

namespace ctmix {
namespace {

constexpr int n_ineq = 13;

struct IneqRow {
  Inequality id;
  const char* name;
  double tol;
};

// Table order must match the enum order (indexed by static_cast<int>(id)).
constexpr std::array<IneqRow, n_ineq> ineq_table = {{
    {Inequality::tv_le_sep, "tv_le_sep", 1e-9},
    {Inequality::sep_le_4tv_half, "sep_le_4tv_half", 1e-9},
    {Inequality::tv_le_hellinger, "tv_le_hellinger", 1e-12},
    {Inequality::hellinger_le_sqrt_2tv, "hellinger_le_sqrt_2tv", 1e-12},
    {Inequality::dbar_half_le_hellinger, "dbar_half_le_hellinger", 1e-12},
    {Inequality::hellinger_le_sqrt_2dbar, "hellinger_le_sqrt_2dbar", 1e-12},
    {Inequality::tv_le_dbar, "tv_le_dbar", 1e-9},
    {Inequality::dbar_le_2tv, "dbar_le_2tv", 1e-9},
    {Inequality::hellinger_doubling, "hellinger_doubling", 1e-9},
    {Inequality::sep_submultiplicative, "sep_submultiplicative", 1e-9},
    {Inequality::dbar_submultiplicative, "dbar_submultiplicative", 1e-9},
    {Inequality::l1_contraction, "l1_contraction", 1e-9},
    {Inequality::l1_attainment, "l1_attainment", 1e-6},
}};

// RNG stream index reserved for the family instance's test functions; random
// chains use their instance index, which stays far below this.
constexpr std::uint64_t family_stream = 0x66616d696c79ull;

// All four worst-case reductions plus the per-start rows at one time, from a
// single transition matrix. Everything downstream is a pure function of
// these fields, which is what makes report witnesses replayable bit-for-bit.
struct Reductions {
  double d = 0.0;
  double dh = 0.0;
  double ds = 0.0;
  double dbar = 0.0;
  std::vector<double> row_tv;
  std::vector<double> row_h;
};

Reductions reduce(const ChainSpec& chain, const ProbDist& pi, double t) {
  const std::vector<double> p = transition_matrix(chain, t);
  Reductions r;
  r.d = worst_case_from_matrix(p, pi, DistanceKind::total_variation);
  r.dh = worst_case_from_matrix(p, pi, DistanceKind::hellinger);
  r.ds = worst_case_from_matrix(p, pi, DistanceKind::separation);
  r.dbar = worst_case_from_matrix(p, pi, DistanceKind::pairwise_tv);
  r.row_tv = rows_from_matrix(p, pi, DistanceKind::total_variation);
  r.row_h = rows_from_matrix(p, pi, DistanceKind::hellinger);
  return r;
}

// Margin formulas (lhs - rhs of each inequality). Shared verbatim between
// the batch pass and witness replay so the two agree to the last bit.
double m_tv_le_sep(double d, double ds) { return d - ds; }
double m_sep_le_4tv_half(double ds, double d_half) { return ds - 4.0 * d_half; }
double m_tv_le_hellinger(const std::vector<double>& row_tv,
                         const std::vector<double>& row_h) {
  double worst = row_tv[0] - row_h[0];
  for (std::size_t x = 1; x < row_tv.size(); ++x)
    worst = std::max(worst, row_tv[x] - row_h[x]);
  return worst;
}
double m_hellinger_le_sqrt_2tv(const std::vector<double>& row_tv,
                               const std::vector<double>& row_h) {
  double worst = row_h[0] - std::sqrt(2.0 * row_tv[0]);
  for (std::size_t x = 1; x < row_tv.size(); ++x)
    worst = std::max(worst, row_h[x] - std::sqrt(2.0 * row_tv[x]));
  return worst;
}
double m_dbar_half_le_hellinger(double dbar, double dh) { return 0.5 * dbar - dh; }
double m_hellinger_le_sqrt_2dbar(double dh, double dbar) {
  return dh - std::sqrt(2.0 * dbar);
}
double m_tv_le_dbar(double d, double dbar) { return d - dbar; }
double m_dbar_le_2tv(double dbar, double d) { return dbar - 2.0 * d; }
double m_hellinger_doubling(double dh_2t, double dh_t) {
  return dh_2t - 7.0 * std::pow(dh_t, 1.25);
}
double m_submultiplicative(double v_sum, double v_a, double v_b) {
  return v_sum - v_a * v_b;
}
double m_l1_contraction(double ratio, double dbar) { return ratio - dbar; }
double m_l1_attainment(double dbar, double best_ratio) { return dbar - best_ratio; }

// max over pairs (u, v) of ||P_t f_uv||_{l1(pi)} / ||f_uv||_{l1(pi)} for the
// scaled point-mass differences f_uv = delta_u/pi(u) - delta_v/pi(v), whose
// norm is exactly 2. Computed through kernel actions, never through the
// transition matrix, so comparing it against dbar is a two-route check.
double max_pair_ratio(const ChainSpec& chain, const ProbDist& pi, double t) {
  const int m = chain.size();
  const CsrMatrix gen = chain.generator();
  std::vector<int> usable;
  std::vector<std::vector<double>> g;
  for (int u = 0; u < m; ++u) {
    const double pu = pi.value(u);
    if (!(pu > 0.0) || !std::isfinite(1.0 / pu)) continue; // scaled mass overflows
    std::vector<double> f(static_cast<std::size_t>(m), 0.0);
    f[static_cast<std::size_t>(u)] = 1.0 / pu;
    usable.push_back(u);
    g.push_back(expm_action(gen, chain.uniformization_rate(), f, t));
  }
  if (usable.size() < 2)
    fail(Errc::numeric_failure, "fewer than two states carry a representable 1/pi mass");
  double worst = 0.0;
  for (std::size_t a = 0; a < usable.size(); ++a) {
    for (std::size_t b = a + 1; b < usable.size(); ++b) {
      double acc = 0.0;
      for (int x = 0; x < m; ++x)
        acc += pi.value(x) * std::abs(g[a][static_cast<std::size_t>(x)] -
                                      g[b][static_cast<std::size_t>(x)]);
      worst = std::max(worst, 0.5 * acc);
    }
  }
  return worst;
}

// Evenly spread `count` indices over [0, points); collapses duplicates when
// the grid is shorter than the subset.
std::vector<int> index_subset(int points, int count) {
  std::vector<int> out;
  for (int j = 0; j < count; ++j) {
    int i = points == 1 ? 0
                        : static_cast<int>(std::llround(static_cast<double>(j) *
                                                        (points - 1) / (count - 1)));
    if (out.empty() || i != out.back()) out.push_back(i);
  }
  return out;
}

struct InstanceInputs {
  ChainSpec chain;
  ProbDist pi;
  Witness base; // t/s/f_index left at defaults
  std::vector<std::vector<double>> fs;
};

// pi-mean recentring via pairwise differences, f(z) = sum_w pi(w)(u(z)-u(w)):
// algebraically the same as u - <u>_pi but with the residual mean at relative
// (not absolute) rounding scale, which keeps ||P_t f||/||f|| honest even when
// pi is concentrated on one state and ||f||_{l1(pi)} is itself tiny.
std::vector<double> recentre(const std::vector<double>& u, const ProbDist& pi) {
  const int m = pi.size();
  std::vector<double> f(static_cast<std::size_t>(m));
  for (int z = 0; z < m; ++z) {
    double acc = 0.0;
    for (int w = 0; w < m; ++w)
      acc += pi.value(w) * (u[static_cast<std::size_t>(z)] - u[static_cast<std::size_t>(w)]);
    f[static_cast<std::size_t>(z)] = acc;
  }
  return f;
}

std::vector<std::vector<double>> draw_functions(Rng& gen, int m, const ProbDist& pi) {
  std::vector<std::vector<double>> fs;
  fs.reserve(3);
  for (int k = 0; k < 3; ++k) {
    std::vector<double> u(static_cast<std::size_t>(m));
    for (int x = 0; x < m; ++x) u[static_cast<std::size_t>(x)] = 2.0 * gen.uniform() - 1.0;
    fs.push_back(recentre(u, pi));
  }
  return fs;
}

InstanceInputs make_instance(const SuiteConfig& cfg, int idx) {
  if (cfg.include_family && idx == cfg.chains) {
    FamilyChain fc = build_family_chain(FamilyParams{cfg.family_n, cfg.family_epsilon});
    Witness w;
    w.family = true;
    w.chain_index = idx;
    w.chain_seed = 0;
    w.states = fc.chain.size();
    w.degree = 0.0;
    Rng gen = Rng::stream(cfg.seed, family_stream);
    auto fs = draw_functions(gen, fc.chain.size(), fc.pi);
    return InstanceInputs{std::move(fc.chain), std::move(fc.pi), w, std::move(fs)};
  }
  Rng gen = Rng::stream(cfg.seed, static_cast<std::uint64_t>(idx));
  const int span = cfg.m_max - cfg.m_min + 1;
  const int m = cfg.m_min + static_cast<int>(gen.below(static_cast<std::uint64_t>(span)));
  const double deg_lo = 2.0 * (m - 1) / m; // connected needs >= m-1 edges
  const double deg_hi = std::max(deg_lo, std::min(4.0, static_cast<double>(m - 1)));
  const double degree = gen.uniform(deg_lo, deg_hi);
  const std::uint64_t chain_seed = gen.next();

  RandomChainParams params;
  params.seed = chain_seed;
  params.states = m;
  params.average_degree = degree;
  params.rate_lo = cfg.rate_lo;
  params.rate_hi = cfg.rate_hi;
  ChainSpec chain = random_reversible_chain(params);
  ProbDist pi = stationary_distribution(chain, PiMode::log_tree);

  Witness w;
  w.family = false;
  w.chain_index = idx;
  w.chain_seed = chain_seed;
  w.states = m;
  w.degree = degree;
  auto fs = draw_functions(gen, m, pi);
  return InstanceInputs{std::move(chain), std::move(pi), w, std::move(fs)};
}

struct Entry {
  std::int64_t instances = 0;
  bool any = false;
  double margin = 0.0;
  Witness witness;
};
using Accum = std::array<Entry, n_ineq>;

void consider(Accum& acc, Inequality id, double margin, const Witness& w) {
  Entry& e = acc[static_cast<std::size_t>(id)];
  ++e.instances;
  if (!e.any || margin > e.margin) {
    e.any = true;
    e.margin = margin;
    e.witness = w;
  }
}

void eval_instance(const SuiteConfig& cfg, int idx, const std::array<bool, n_ineq>& on,
                   Accum& acc, double& max_h) {
  const InstanceInputs in = make_instance(cfg, idx);
  const double gap = spectral_gap(in.chain, in.pi);
  const std::vector<double> grid =
      logspace(cfg.grid_lo_factor / gap, cfg.grid_hi_factor / gap, cfg.grid_points);

  const auto enabled = [&](Inequality id) { return on[static_cast<std::size_t>(id)]; };
  std::vector<double> ds_at(grid.size()), dbar_at(grid.size());
  max_h = 0.0;

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const Reductions r = reduce(in.chain, in.pi, t);
    max_h = std::max(max_h, r.dh);
    ds_at[i] = r.ds;
    dbar_at[i] = r.dbar;

    Witness w = in.base;
    w.t = t;
    if (enabled(Inequality::tv_le_sep))
      consider(acc, Inequality::tv_le_sep, m_tv_le_sep(r.d, r.ds), w);
    if (enabled(Inequality::sep_le_4tv_half)) {
      const Reductions rh = reduce(in.chain, in.pi, 0.5 * t);
      consider(acc, Inequality::sep_le_4tv_half, m_sep_le_4tv_half(r.ds, rh.d), w);
    }
    if (enabled(Inequality::tv_le_hellinger))
      consider(acc, Inequality::tv_le_hellinger, m_tv_le_hellinger(r.row_tv, r.row_h), w);
    if (enabled(Inequality::hellinger_le_sqrt_2tv))
      consider(acc, Inequality::hellinger_le_sqrt_2tv,
               m_hellinger_le_sqrt_2tv(r.row_tv, r.row_h), w);
    if (enabled(Inequality::dbar_half_le_hellinger))
      consider(acc, Inequality::dbar_half_le_hellinger,
               m_dbar_half_le_hellinger(r.dbar, r.dh), w);
    if (enabled(Inequality::hellinger_le_sqrt_2dbar))
      consider(acc, Inequality::hellinger_le_sqrt_2dbar,
               m_hellinger_le_sqrt_2dbar(r.dh, r.dbar), w);
    if (enabled(Inequality::tv_le_dbar))
      consider(acc, Inequality::tv_le_dbar, m_tv_le_dbar(r.d, r.dbar), w);
    if (enabled(Inequality::dbar_le_2tv))
      consider(acc, Inequality::dbar_le_2tv, m_dbar_le_2tv(r.dbar, r.d), w);
    if (enabled(Inequality::hellinger_doubling)) {
      const Reductions r2 = reduce(in.chain, in.pi, 2.0 * t);
      consider(acc, Inequality::hellinger_doubling, m_hellinger_doubling(r2.dh, r.dh), w);
    }
  }

  if (enabled(Inequality::sep_submultiplicative) ||
      enabled(Inequality::dbar_submultiplicative)) {
    const std::vector<int> pick = index_subset(static_cast<int>(grid.size()), 7);
    for (std::size_t a = 0; a < pick.size(); ++a) {
      for (std::size_t b = a; b < pick.size(); ++b) {
        const int ia = pick[a], ib = pick[b];
        const Reductions rs = reduce(in.chain, in.pi, grid[static_cast<std::size_t>(ia)] +
                                                          grid[static_cast<std::size_t>(ib)]);
        Witness w = in.base;
        w.t = grid[static_cast<std::size_t>(ia)];
        w.s = grid[static_cast<std::size_t>(ib)];
        if (enabled(Inequality::sep_submultiplicative))
          consider(acc, Inequality::sep_submultiplicative,
                   m_submultiplicative(rs.ds, ds_at[static_cast<std::size_t>(ia)],
                                       ds_at[static_cast<std::size_t>(ib)]),
                   w);
        if (enabled(Inequality::dbar_submultiplicative))
          consider(acc, Inequality::dbar_submultiplicative,
                   m_submultiplicative(rs.dbar, dbar_at[static_cast<std::size_t>(ia)],
                                       dbar_at[static_cast<std::size_t>(ib)]),
                   w);
      }
    }
  }

  if (enabled(Inequality::l1_contraction) || enabled(Inequality::l1_attainment)) {
    const std::vector<int> pick = index_subset(static_cast<int>(grid.size()), 5);
    for (int i : pick) {
      const double t = grid[static_cast<std::size_t>(i)];
      if (enabled(Inequality::l1_contraction)) {
        for (int k = 0; k < static_cast<int>(in.fs.size()); ++k) {
          const double ratio =
              l1_contraction_ratio(in.chain, in.pi, in.fs[static_cast<std::size_t>(k)], t);
          Witness w = in.base;
          w.t = t;
          w.f_index = k;
          consider(acc, Inequality::l1_contraction,
                   m_l1_contraction(ratio, dbar_at[static_cast<std::size_t>(i)]), w);
        }
      }
      if (enabled(Inequality::l1_attainment)) {
        const double best = max_pair_ratio(in.chain, in.pi, t);
        Witness w = in.base;
        w.t = t;
        consider(acc, Inequality::l1_attainment,
                 m_l1_attainment(dbar_at[static_cast<std::size_t>(i)], best), w);
      }
    }
  }
}

double margin_at(Inequality id, const InstanceInputs& in, const Witness& w) {
  switch (id) {
    case Inequality::tv_le_sep: {
      const Reductions r = reduce(in.chain, in.pi, w.t);
      return m_tv_le_sep(r.d, r.ds);
    }
    case Inequality::sep_le_4tv_half: {
      const Reductions r = reduce(in.chain, in.pi, w.t);
      const Reductions rh = reduce(in.chain, in.pi, 0.5 * w.t);
      return m_sep_le_4tv_half(r.ds, rh.d);
    }
    case Inequality::tv_le_hellinger: {
      const Reductions r = reduce(in.chain, in.pi, w.t);
      return m_tv_le_hellinger(r.row_tv, r.row_h);
    }
    case Inequality::hellinger_le_sqrt_2tv: {
      const Reductions r = reduce(in.chain, in.pi, w.t);
      return m_hellinger_le_sqrt_2tv(r.row_tv, r.row_h);
    }
    case Inequality::dbar_half_le_hellinger: {
      const Reductions r = reduce(in.chain, in.pi, w.t);
      return m_dbar_half_le_hellinger(r.dbar, r.dh);
    }
    case Inequality::hellinger_le_sqrt_2dbar: {
      const Reductions r = reduce(in.chain, in.pi, w.t);
      return m_hellinger_le_sqrt_2dbar(r.dh, r.dbar);
    }
    case Inequality::tv_le_dbar: {
      const Reductions r = reduce(in.chain, in.pi, w.t);
      return m_tv_le_dbar(r.d, r.dbar);
    }
    case Inequality::dbar_le_2tv: {
      const Reductions r = reduce(in.chain, in.pi, w.t);
      return m_dbar_le_2tv(r.dbar, r.d);
    }
    case Inequality::hellinger_doubling: {
      const Reductions r = reduce(in.chain, in.pi, w.t);
      const Reductions r2 = reduce(in.chain, in.pi, 2.0 * w.t);
      return m_hellinger_doubling(r2.dh, r.dh);
    }
    case Inequality::sep_submultiplicative: {
      const Reductions rt = reduce(in.chain, in.pi, w.t);
      const Reductions rs = reduce(in.chain, in.pi, w.s);
      const Reductions rsum = reduce(in.chain, in.pi, w.t + w.s);
      return m_submultiplicative(rsum.ds, rt.ds, rs.ds);
    }
    case Inequality::dbar_submultiplicative: {
      const Reductions rt = reduce(in.chain, in.pi, w.t);
      const Reductions rs = reduce(in.chain, in.pi, w.s);
      const Reductions rsum = reduce(in.chain, in.pi, w.t + w.s);
      return m_submultiplicative(rsum.dbar, rt.dbar, rs.dbar);
    }
    case Inequality::l1_contraction: {
      if (w.f_index < 0 || w.f_index >= static_cast<int>(in.fs.size()))
        fail(Errc::out_of_range, "witness f_index " + std::to_string(w.f_index));
      const double ratio =
          l1_contraction_ratio(in.chain, in.pi, in.fs[static_cast<std::size_t>(w.f_index)], w.t);
      const Reductions r = reduce(in.chain, in.pi, w.t);
      return m_l1_contraction(ratio, r.dbar);
    }
    case Inequality::l1_attainment: {
      const Reductions r = reduce(in.chain, in.pi, w.t);
      return m_l1_attainment(r.dbar, max_pair_ratio(in.chain, in.pi, w.t));
    }
  }
  fail(Errc::invalid_config, "unhandled inequality");
}

double resolve_tolerance(const SuiteConfig& cfg, Inequality id) {
  auto it = cfg.tolerances.find(inequality_name(id));
  return it == cfg.tolerances.end() ? default_tolerance(id) : it->second;
}

// Bisection with a growing cap: callers here never know the mixing scale in
// advance, so CapTooSmall just doubles the horizon.
double mixing_time_retry(const std::function<double(double)>& profile, double a,
                         double cap, int doublings) {
  for (int attempt = 0;; ++attempt) {
    try {
      return mixing_time(profile, a, cap);
    } catch (const Error& e) {
      if (e.code() != Errc::cap_too_small || attempt >= doublings) throw;
      cap *= 2.0;
    }
  }
}

} // namespace

const char* inequality_name(Inequality id) noexcept {
  return ineq_table[static_cast<std::size_t>(id)].name;
}

Inequality inequality_from_name(const std::string& name) {
  for (const IneqRow& row : ineq_table)
    if (name == row.name) return row.id;
  fail(Errc::parse_error, "unknown inequality \"" + name + "\"");
}

const std::vector<Inequality>& all_inequalities() {
  static const std::vector<Inequality> ids = [] {
    std::vector<Inequality> v;
    v.reserve(n_ineq);
    for (const IneqRow& row : ineq_table) v.push_back(row.id);
    return v;
  }();
  return ids;
}

double default_tolerance(Inequality id) noexcept {
  return ineq_table[static_cast<std::size_t>(id)].tol;
}

void SuiteConfig::validate() const {
  if (chains < 1)
    fail(Errc::invalid_config, "chain count must be >= 1, got " + std::to_string(chains));
  if (m_min < 2 || m_max < m_min)
    fail(Errc::invalid_config, "state-count range [" + std::to_string(m_min) + ", " +
                                   std::to_string(m_max) + "] is infeasible");
  if (grid_points < 2)
    fail(Errc::invalid_config, "grid needs >= 2 points, got " + std::to_string(grid_points));
  if (!(grid_lo_factor > 0.0) || !(grid_hi_factor > grid_lo_factor))
    fail(Errc::invalid_config, "grid factors must satisfy 0 < lo < hi, got " +
                                   fmt17(grid_lo_factor) + ", " + fmt17(grid_hi_factor));
  if (!(rate_lo > 0.0) || !(rate_hi >= rate_lo) || !std::isfinite(rate_hi))
    fail(Errc::invalid_config,
         "rate range must satisfy 0 < lo <= hi, got " + fmt17(rate_lo) + ", " + fmt17(rate_hi));
  for (const auto& [name, tol] : tolerances) {
    inequality_from_name(name); // rejects unknown keys
    if (!(tol > 0.0))
      fail(Errc::invalid_config, "tolerance for " + name + " must be > 0, got " + fmt17(tol));
  }
  if (include_family) FamilyParams{family_n, family_epsilon}.validate();
}

SuiteReport run_suite(const SuiteConfig& config) {
  config.validate();
  std::array<bool, n_ineq> on{};
  if (config.enabled.empty()) {
    on.fill(true);
  } else {
    for (Inequality id : config.enabled) on[static_cast<std::size_t>(id)] = true;
  }

  const int total = config.chains + (config.include_family ? 1 : 0);
  std::vector<Accum> acc(static_cast<std::size_t>(total));
  std::vector<double> max_h(static_cast<std::size_t>(total), 0.0);
  std::vector<std::string> err_msg(static_cast<std::size_t>(total));
  std::vector<char> has_err(static_cast<std::size_t>(total), 0);

#pragma omp parallel for if (config.parallel) schedule(dynamic)
  for (int i = 0; i < total; ++i) {
    try {
      eval_instance(config, i, on, acc[static_cast<std::size_t>(i)],
                    max_h[static_cast<std::size_t>(i)]);
    } catch (const std::exception& e) {
      err_msg[static_cast<std::size_t>(i)] = e.what();
      has_err[static_cast<std::size_t>(i)] = 1;
    }
  }

  SuiteReport report;
  report.seed = config.seed;
  report.chains = config.chains;
  report.include_family = config.include_family;

  Accum merged;
  for (int i = 0; i < total; ++i) {
    if (has_err[static_cast<std::size_t>(i)]) {
      report.errors.emplace_back(i, err_msg[static_cast<std::size_t>(i)]);
      continue;
    }
    report.max_hellinger_seen = std::max(report.max_hellinger_seen,
                                         max_h[static_cast<std::size_t>(i)]);
    for (int k = 0; k < n_ineq; ++k) {
      const Entry& e = acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      Entry& m = merged[static_cast<std::size_t>(k)];
      m.instances += e.instances;
      if (e.any && (!m.any || e.margin > m.margin)) {
        m.any = true;
        m.margin = e.margin;
        m.witness = e.witness;
      }
    }
  }

  report.all_pass = report.errors.empty();
  for (Inequality id : all_inequalities()) {
    if (!on[static_cast<std::size_t>(id)]) continue;
    const Entry& m = merged[static_cast<std::size_t>(id)];
    InequalityResult res;
    res.id = id;
    res.name = inequality_name(id);
    res.instances = m.instances;
    res.tolerance = resolve_tolerance(config, id);
    res.worst_margin = m.any ? m.margin : 0.0;
    res.pass = m.any && m.margin <= res.tolerance;
    res.witness = m.witness;
    report.all_pass = report.all_pass && res.pass;
    report.results.push_back(std::move(res));
  }
  return report;
}

double replay_margin(const SuiteConfig& config, const InequalityResult& result) {
  config.validate();
  const Witness& w = result.witness;
  const int total = config.chains + (config.include_family ? 1 : 0);
  if (w.chain_index < 0 || w.chain_index >= total)
    fail(Errc::out_of_range, "witness chain index " + std::to_string(w.chain_index) +
                                 " outside this config's " + std::to_string(total) +
                                 " instances");
  const InstanceInputs in = make_instance(config, w.chain_index);
  if (in.base.family != w.family || in.base.chain_seed != w.chain_seed ||
      in.base.states != w.states)
    fail(Errc::invalid_config,
         "witness does not match the instance this config derives at index " +
             std::to_string(w.chain_index));
  return margin_at(result.id, in, w);
}

nlohmann::ordered_json suite_report_to_json(const SuiteReport& report) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["seed"] = report.seed;
  doc["chains"] = report.chains;
  doc["include_family"] = report.include_family;
  doc["max_hellinger_seen"] = report.max_hellinger_seen;
  doc["all_pass"] = report.all_pass;
  doc["results"] = nlohmann::ordered_json::array();
  for (const InequalityResult& res : report.results) {
    nlohmann::ordered_json r;
    r["inequality"] = res.name;
    r["instances"] = res.instances;
    r["worst_margin"] = res.worst_margin;
    r["tolerance"] = res.tolerance;
    r["pass"] = res.pass;
    nlohmann::ordered_json w;
    w["family"] = res.witness.family;
    w["chain_index"] = res.witness.chain_index;
    w["chain_seed"] = res.witness.chain_seed;
    w["states"] = res.witness.states;
    w["degree"] = res.witness.degree;
    w["t"] = res.witness.t;
    w["s"] = res.witness.s;
    w["f_index"] = res.witness.f_index;
    r["witness"] = std::move(w);
    doc["results"].push_back(std::move(r));
  }
  doc["errors"] = nlohmann::ordered_json::array();
  for (const auto& [index, message] : report.errors) {
    nlohmann::ordered_json e;
    e["chain_index"] = index;
    e["message"] = message;
    doc["errors"].push_back(std::move(e));
  }
  return doc;
}

WindowCheck hellinger_window_check(const ChainSpec& chain, int copies) {
  if (copies < 8)
    fail(Errc::copies_too_small,
         "product window check needs >= 8 copies, got " + std::to_string(copies));
  const WorstCaseEvaluator eval(chain);
  const ProbDist& pi = eval.pi();
  const std::int64_t n = copies;
  const double threshold = std::pow(static_cast<double>(copies), -3.0 / 7.0);

  const auto marginal_h = [&](double t) { return eval(t, DistanceKind::hellinger); };
  // One matrix per time point feeds both envelope ingredients.
  const auto bounds_at = [&](double t) {
    const std::vector<double> p = transition_matrix(chain, t);
    const double dh = worst_case_from_matrix(p, pi, DistanceKind::hellinger);
    const double dtv = worst_case_from_matrix(p, pi, DistanceKind::total_variation);
    return product_tv_bounds(dh, dtv, n);
  };
  const auto lower_env = [&](double t) { return bounds_at(t).lower; };
  const auto upper_env = [&](double t) { return bounds_at(t).upper; };

  WindowCheck out;
  const double cap0 = std::max(1.0, 8.0 / chain.uniformization_rate());
  out.t_n = mixing_time_retry(marginal_h, threshold, cap0, 48);
  const double cap1 = std::max(cap0, 4.0 * out.t_n);
  out.t_hat_low = mixing_time_retry(lower_env, 0.7, cap1, 48);
  out.t_hat_high = mixing_time_retry(upper_env, 0.3, cap1, 48);
  out.verdict = out.t_hat_low >= 0.95 * out.t_n && out.t_hat_high <= 2.1 * out.t_n;
  return out;
}

} // namespace ctmix
