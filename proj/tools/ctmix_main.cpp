// ctmix: distance-to-equilibrium profiles, product-chain composition, cutoff
// diagnostics, the segment family, and the inequality suite, behind one
// deterministic command-line front end. Identical invocations produce
// byte-identical outputs; OMP_NUM_THREADS sets the worker count.

#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ctmix/chain.hpp"
#include "ctmix/chain_io.hpp"
#include "ctmix/chain_ops.hpp"
#include "ctmix/errors.hpp"
#include "ctmix/family.hpp"
#include "ctmix/mathutil.hpp"
#include "ctmix/metrics.hpp"
#include "ctmix/mixing.hpp"
#include "ctmix/product.hpp"
#include "ctmix/suite.hpp"

namespace {

using nlohmann::ordered_json;

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  int points = 0;
};

// "LO:HI:POINTS", exactly two colons; malformed text is an argument error.
GridSpec parse_grid(const std::string& flag, const std::string& text) {
  auto bad = [&](const std::string& why) -> GridSpec {
    throw CLI::ValidationError(flag, "expected LO:HI:POINTS, got '" + text + "' (" + why + ")");
  };
  std::size_t c1 = text.find(':');
  std::size_t c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
  if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos)
    return bad("need exactly two colons");
  GridSpec g;
  try {
    std::size_t used = 0;
    std::string part = text.substr(0, c1);
    g.lo = std::stod(part, &used);
    if (used != part.size()) return bad("bad lo");
    part = text.substr(c1 + 1, c2 - c1 - 1);
    g.hi = std::stod(part, &used);
    if (used != part.size()) return bad("bad hi");
    part = text.substr(c2 + 1);
    g.points = std::stoi(part, &used);
    if (used != part.size()) return bad("bad points");
  } catch (const std::exception&) {
    return bad("not numeric");
  }
  if (g.points < 1) return bad("points must be >= 1");
  if (!(g.hi >= g.lo)) return bad("hi must be >= lo");
  return g;
}

std::vector<double> grid_times(const GridSpec& g, bool log_spaced, const std::string& flag) {
  if (log_spaced && !(g.lo > 0.0))
    throw CLI::ValidationError(flag, "--log needs lo > 0, got " + ctmix::fmt17(g.lo));
  return log_spaced ? ctmix::logspace(g.lo, g.hi, g.points)
                    : ctmix::linspace(g.lo, g.hi, g.points);
}

// Default time grid when --t is absent: log-spaced on [0.01, 20] / gap, the
// same span the suite uses. Chains without a spectral gap need an explicit --t.
std::vector<double> default_times(const ctmix::ChainSpec& chain, const ctmix::ProbDist& pi) {
  double gap = 0.0;
  try {
    gap = ctmix::spectral_gap(chain, pi);
  } catch (const ctmix::Error&) {
    ctmix::fail(ctmix::Errc::invalid_config,
                "no spectral gap available to anchor the default grid; pass --t LO:HI:POINTS");
  }
  return ctmix::logspace(0.01 / gap, 20.0 / gap, 25);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) ctmix::fail(ctmix::Errc::parse_error, "cannot open " + out_path + " for writing");
  out << text;
}

std::string dump(const ordered_json& doc) { return doc.dump(2) + "\n"; }

// ---- chain: stationary law, gap, reversibility verdict ----

int run_chain(const std::string& path, const std::string& format, const std::string& out_path) {
  ctmix::ChainSpec chain = ctmix::chain_from_json_file(path);
  ctmix::WorstCaseEvaluator eval(chain);
  const ctmix::ProbDist& pi = eval.pi();
  ctmix::BalanceReport balance = ctmix::check_detailed_balance(chain, pi, 1e-10);

  if (format == "csv") {
    std::string text = "# kind=stationary\nstate,label,pi\n";
    for (int i = 0; i < chain.size(); ++i) {
      text += std::to_string(i);
      text += ',';
      text += chain.labels()[static_cast<std::size_t>(i)];
      text += ',';
      text += ctmix::fmt17(pi.value(i));
      text += '\n';
    }
    emit(text, out_path);
    return 0;
  }

  ordered_json doc;
  doc["schema_version"] = 1;
  doc["states"] = chain.size();
  doc["labels"] = chain.labels();
  doc["reversible"] = balance.reversible;
  doc["worst_violation"] = balance.worst_violation;
  if (balance.reversible)
    doc["gap"] = ctmix::spectral_gap(chain, pi);
  else
    doc["gap"] = nullptr;
  auto arr = ordered_json::array();
  for (int i = 0; i < chain.size(); ++i) arr.push_back(pi.value(i));
  doc["pi"] = std::move(arr);
  emit(dump(doc), out_path);
  return 0;
}

// ---- profile: worst-case distance profile over a time grid ----

int run_profile(const std::string& path, const std::string& kind_text, const GridSpec& grid,
                bool grid_given, bool log_spaced, const std::string& format,
                const std::string& out_path) {
  ctmix::ChainSpec chain = ctmix::chain_from_json_file(path);
  ctmix::DistanceKind kind = ctmix::kind_from_name(kind_text);
  ctmix::WorstCaseEvaluator eval(chain);
  std::vector<double> times =
      grid_given ? grid_times(grid, log_spaced, "--t") : default_times(chain, eval.pi());
  ctmix::DistanceProfile profile = ctmix::worst_case_profile(eval, kind, times);
  emit(format == "json" ? dump(ctmix::profile_to_json(profile)) : ctmix::profile_to_csv(profile),
       out_path);
  return 0;
}

// ---- product: exact n-fold formulas, or the explicit tensor oracle ----

int run_product(const std::string& path, std::int64_t copies, const std::string& kind_text,
                const GridSpec& grid, bool grid_given, bool log_spaced, bool tensor,
                bool emit_chain, std::int64_t state_cap, const std::string& format,
                const std::string& out_path) {
  ctmix::ChainSpec base = ctmix::chain_from_json_file(path);
  ctmix::DistanceKind kind = ctmix::kind_from_name(kind_text);

  if (emit_chain || tensor) {
    ctmix::ProductSpec spec{base, copies, state_cap};
    ctmix::ChainSpec product = ctmix::tensor_product(spec);
    if (emit_chain) {
      emit(ctmix::chain_to_json(product).dump(2) + "\n", out_path);
      return 0;
    }
    ctmix::WorstCaseEvaluator eval(product);
    std::vector<double> times =
        grid_given ? grid_times(grid, log_spaced, "--t") : default_times(base, ctmix::WorstCaseEvaluator(base).pi());
    ctmix::DistanceProfile profile = ctmix::worst_case_profile(eval, kind, times);
    emit(format == "json" ? dump(ctmix::profile_to_json(profile)) : ctmix::profile_to_csv(profile),
         out_path);
    return 0;
  }

  if (kind == ctmix::DistanceKind::pairwise_tv)
    throw CLI::ValidationError("--kind", "pairwise has no product formula; use --tensor");

  ctmix::WorstCaseEvaluator eval(base);
  std::vector<double> times =
      grid_given ? grid_times(grid, log_spaced, "--t") : default_times(base, eval.pi());

  if (kind == ctmix::DistanceKind::total_variation) {
    // TV has no exact product formula; emit the Hellinger sandwich instead.
    std::string csv = "# kind=product_tv_bounds\ntime,lower,upper\n";
    ordered_json rows = ordered_json::array();
    for (double t : times) {
      double dh = eval(t, ctmix::DistanceKind::hellinger);
      double dtv = eval(t, ctmix::DistanceKind::total_variation);
      ctmix::TvBounds b = ctmix::product_tv_bounds(dh, dtv, copies);
      if (format == "json") {
        rows.push_back({{"time", t}, {"lower", b.lower}, {"upper", b.upper}});
      } else {
        csv += ctmix::fmt17(t);
        csv += ',';
        csv += ctmix::fmt17(b.lower);
        csv += ',';
        csv += ctmix::fmt17(b.upper);
        csv += '\n';
      }
    }
    if (format == "json") {
      ordered_json doc;
      doc["schema_version"] = 1;
      doc["kind"] = "product_tv_bounds";
      doc["copies"] = copies;
      doc["rows"] = std::move(rows);
      emit(dump(doc), out_path);
    } else {
      emit(csv, out_path);
    }
    return 0;
  }

  std::vector<double> values(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    double d = eval(times[i], kind);
    values[i] = kind == ctmix::DistanceKind::separation ? ctmix::product_separation(d, copies)
                                                        : ctmix::product_hellinger(d, copies);
  }
  ctmix::DistanceProfile profile = ctmix::DistanceProfile::make(kind, times, std::move(values));
  emit(format == "json" ? dump(ctmix::profile_to_json(profile)) : ctmix::profile_to_csv(profile),
       out_path);
  return 0;
}

// ---- mix: single-chain report, or cutoff diagnostics across family sizes ----

int run_mix(const std::string& path, const std::vector<int>& sizes, bool epsilon_given,
            double epsilon, const std::string& kind_text, const std::vector<double>& eps_list,
            double t_hi, const std::string& format, const std::string& out_path) {
  ctmix::DistanceKind kind = ctmix::kind_from_name(kind_text);
  ctmix::CutoffOptions opts;
  if (!eps_list.empty()) opts.eps = eps_list;

  if (!path.empty()) {
    ctmix::ChainSpec chain = ctmix::chain_from_json_file(path);
    ctmix::MixingReport report = ctmix::mixing_report(chain, kind, opts, t_hi);
    if (format == "csv") {
      ctmix::CutoffDiagnostics one;
      one.reports.push_back(report);
      emit(ctmix::ratio_table_csv(one), out_path);
    } else {
      emit(dump(ctmix::mixing_report_to_json(report)), out_path);
    }
    return 0;
  }

  // Family mode: one segment chain per size; the stationary law is the
  // closed form, and the bisection cap 8n covers the ~n mixing scale.
  std::vector<ctmix::FamilyMember> members;
  for (int n : sizes) {
    ctmix::FamilyParams params = epsilon_given ? ctmix::FamilyParams{n, epsilon}
                                               : ctmix::FamilyParams::with_default_epsilon(n);
    ctmix::FamilyChain fc = ctmix::build_family_chain(params);
    auto eval = std::make_shared<ctmix::WorstCaseEvaluator>(fc.chain, fc.pi);
    ctmix::FamilyMember m;
    m.size = n;
    m.label = std::to_string(n);
    m.profile = [eval, kind](double t) { return (*eval)(t, kind); };
    try {
      m.gap = ctmix::spectral_gap(fc.chain, fc.pi);
    } catch (const ctmix::Error&) {
      m.gap = 0.0; // dropped back edge: no reversible representation
    }
    m.default_t_hi = t_hi > 0.0 ? t_hi : 8.0 * n;
    members.push_back(std::move(m));
  }
  ctmix::CutoffDiagnostics diag = ctmix::cutoff_diagnostics(members, ctmix::kind_name(kind), opts);
  emit(format == "csv" ? ctmix::ratio_table_csv(diag) : dump(ctmix::cutoff_to_json(diag)),
       out_path);
  return 0;
}

// ---- family: chain spec + scaled profiles + check verdicts ----

int run_family(int n, bool epsilon_given, double epsilon, const GridSpec& s_grid,
               bool s_grid_given, bool minorization, const std::string& prefix) {
  ctmix::FamilyParams params =
      epsilon_given ? ctmix::FamilyParams{n, epsilon} : ctmix::FamilyParams::with_default_epsilon(n);
  params.validate();
  ctmix::FamilyChain fc = ctmix::build_family_chain(params);

  std::vector<double> s_values = s_grid_given ? grid_times(s_grid, false, "--s-grid")
                                              : ctmix::linspace(0.25, 3.0, 12);
  std::vector<ctmix::ScaledRow> rows = ctmix::asymptotic_profile_check(params, s_values);

  std::string chain_path = prefix + ".chain.json";
  std::string scaled_path = prefix + ".scaled.csv";
  std::string checks_path = prefix + ".checks.json";

  ctmix::write_chain_json(fc.chain, chain_path);

  std::string csv = "# kind=family_scaled\ns,d_marginal,n_survival,product_tv_approx\n";
  for (const auto& r : rows) {
    csv += ctmix::fmt17(r.s);
    csv += ',';
    csv += ctmix::fmt17(r.d_marginal);
    csv += ',';
    csv += ctmix::fmt17(r.n_survival);
    csv += ',';
    csv += ctmix::fmt17(r.product_tv);
    csv += '\n';
  }
  emit(csv, scaled_path);

  ordered_json checks;
  checks["schema_version"] = 1;
  checks["n"] = params.n;
  checks["epsilon"] = params.epsilon;
  checks["states"] = fc.chain.size();
  checks["back_edge_dropped"] = fc.back_edge_dropped;
  checks["derived_back_rate"] = fc.derived_back_rate;
  checks["log_back_rate"] = fc.log_back_rate;
  checks["linear_pi_unsafe"] = fc.linear_pi_unsafe;
  checks["pi_c"] = fc.pi.value(fc.c);
  if (fc.back_edge_dropped) {
    checks["balance"] = nullptr; // the kept edge set is one-sided by design
  } else {
    ctmix::BalanceReport balance = ctmix::check_detailed_balance(fc.chain, fc.pi, 1e-10);
    checks["balance"] = {{"reversible", balance.reversible},
                         {"worst_violation", balance.worst_violation}};
  }
  {
    double v = ctmix::product_tv_approx(params, 1.5 * params.n);
    const double reference = 0.63212055882855767; // 1 - e^{-1}
    checks["plateau"] = {{"s", 1.5},
                         {"product_tv_approx", v},
                         {"reference", reference},
                         {"abs_err", std::abs(v - reference)}};
  }
  if (minorization) {
    std::vector<double> t_list = {0.5 * params.n, 1.0 * params.n, 2.0 * params.n, 3.0 * params.n};
    ctmix::MinorizationResult mr = ctmix::separation_minorization_check(params, t_list);
    checks["minorization"] = {{"ok", mr.ok},
                              {"worst_log_margin", mr.worst_log_margin},
                              {"sep_tv_max_diff", mr.sep_tv_max_diff}};
  } else {
    checks["minorization"] = nullptr;
  }
  emit(dump(checks), checks_path);

  std::printf("wrote %s\nwrote %s\nwrote %s\n", chain_path.c_str(), scaled_path.c_str(),
              checks_path.c_str());
  return 0;
}

// ---- verify: the seeded inequality suite; exit 0 iff every check passes ----

int run_verify(std::uint64_t seed, int chains, const std::vector<std::string>& tol_kv,
               bool no_family, int family_n, double family_epsilon, bool serial,
               const std::string& out_path) {
  ctmix::SuiteConfig cfg;
  cfg.seed = seed;
  cfg.chains = chains;
  cfg.include_family = !no_family;
  cfg.family_n = family_n;
  cfg.family_epsilon = family_epsilon;
  cfg.parallel = !serial;
  for (const std::string& kv : tol_kv) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size())
      throw CLI::ValidationError("--tol", "expected KEY=VAL, got '" + kv + "'");
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(kv.substr(eq + 1), &used);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--tol", "bad value in '" + kv + "'");
    }
    if (used != kv.size() - eq - 1)
      throw CLI::ValidationError("--tol", "bad value in '" + kv + "'");
    cfg.tolerances[kv.substr(0, eq)] = value;
  }
  ctmix::SuiteReport report = ctmix::run_suite(cfg);
  emit(dump(ctmix::suite_report_to_json(report)), out_path);
  return report.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctmix: continuous-time Markov chain distance-to-equilibrium toolkit"};
  app.require_subcommand(1);
  app.footer("OMP_NUM_THREADS sets the default worker count for parallel kernels.");

  // Bad kind names are argument errors (exit 2), not computation errors.
  CLI::Validator kind_check(
      [](std::string& s) -> std::string {
        try {
          ctmix::kind_from_name(s);
          return {};
        } catch (const ctmix::Error& e) {
          return e.what();
        }
      },
      "KIND");

  std::string chain_path, kind_text = "tv", format, out_path, t_text, s_text;
  bool log_spaced = false, tensor = false, emit_chain = false, minorization = false;
  bool no_family = false, serial = false;
  std::int64_t copies = 1, state_cap = 200000;
  std::vector<int> sizes;
  int family_n = 0;
  double epsilon = 0.0, t_hi = 0.0;
  std::vector<double> eps_list;
  std::vector<std::string> tol_kv;
  std::uint64_t seed = 1;
  int chains = 100;
  int suite_family_n = 16;
  double suite_family_epsilon = 1e-6;

  auto* c_chain = app.add_subcommand("chain", "stationary law, spectral gap, reversibility");
  c_chain->add_option("--chain", chain_path, "chain spec JSON")->required();
  c_chain->add_option("--format", format, "json (default) or csv")
      ->check(CLI::IsMember({"csv", "json"}));
  c_chain->add_option("--out", out_path, "output path (default stdout)");

  auto* c_profile = app.add_subcommand("profile", "worst-case distance profile");
  c_profile->add_option("--chain", chain_path, "chain spec JSON")->required();
  c_profile->add_option("--kind", kind_text, "tv|sep|hellinger|pairwise (default tv)")
      ->check(kind_check);
  c_profile->add_option("--t", t_text, "time grid LO:HI:POINTS (default anchored to 1/gap)");
  c_profile->add_flag("--log", log_spaced, "log-spaced grid");
  c_profile->add_option("--format", format, "csv (default) or json")
      ->check(CLI::IsMember({"csv", "json"}));
  c_profile->add_option("--out", out_path, "output path (default stdout)");

  auto* c_product = app.add_subcommand("product", "n-fold product distances");
  c_product->add_option("--chain", chain_path, "marginal chain spec JSON")->required();
  c_product->add_option("--copies", copies, "number of factors")->required();
  c_product->add_option("--kind", kind_text, "tv|sep|hellinger (pairwise needs --tensor)")
      ->check(kind_check);
  c_product->add_option("--t", t_text, "time grid LO:HI:POINTS");
  c_product->add_flag("--log", log_spaced, "log-spaced grid");
  c_product->add_flag("--tensor", tensor, "evaluate on the explicit tensor chain");
  c_product->add_flag("--emit-chain", emit_chain, "emit the tensor chain spec JSON and stop");
  c_product->add_option("--state-cap", state_cap, "tensor state budget (default 200000)");
  c_product->add_option("--format", format, "csv (default) or json")
      ->check(CLI::IsMember({"csv", "json"}));
  c_product->add_option("--out", out_path, "output path (default stdout)");

  auto* c_mix = app.add_subcommand("mix", "mixing-time report / cutoff diagnostics");
  c_mix->add_option("--chain", chain_path, "single chain spec JSON");
  c_mix->add_option("--n", sizes, "family sizes, comma-separated")->delimiter(',');
  c_mix->add_option("--epsilon", epsilon, "family back-rate parameter");
  c_mix->add_option("--kind", kind_text, "tv|sep|hellinger|pairwise (default tv)")
      ->check(kind_check);
  c_mix->add_option("--eps", eps_list, "ratio thresholds in (0, 0.5)")->delimiter(',');
  c_mix->add_option("--t-hi", t_hi, "bisection cap override");
  c_mix->add_option("--format", format, "json (default) or csv ratio table")
      ->check(CLI::IsMember({"csv", "json"}));
  c_mix->add_option("--out", out_path, "output path (default stdout)");

  auto* c_family = app.add_subcommand("family", "segment-family chain, scaled profiles, checks");
  c_family->add_option("--n", family_n, "segment parameter n >= 2")->required();
  c_family->add_option("--epsilon", epsilon, "back rate (default 2^{-n^2}, 1e-6 for n > 10)");
  c_family->add_option("--s-grid", s_text, "scaled grid LO:HI:POINTS (default 0.25:3:12)");
  c_family->add_flag("--minorization", minorization, "run the separation minorization check");
  c_family->add_option("--out", out_path, "output prefix (default gn<N>)");

  auto* c_verify = app.add_subcommand("verify", "run the inequality suite");
  c_verify->add_option("--seed", seed, "master seed (default 1)");
  c_verify->add_option("--chains", chains, "random chains per batch (default 100)");
  c_verify->add_option("--tol", tol_kv, "per-inequality tolerance override KEY=VAL");
  c_verify->add_flag("--no-family", no_family, "skip the segment-family instance");
  c_verify->add_option("--family-n", suite_family_n, "family size (default 16)");
  c_verify->add_option("--family-epsilon", suite_family_epsilon, "family epsilon (default 1e-6)");
  c_verify->add_flag("--serial", serial, "disable the parallel batch path");
  c_verify->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);

    if (c_chain->parsed())
      return run_chain(chain_path, format.empty() ? "json" : format, out_path);

    if (c_profile->parsed()) {
      GridSpec grid;
      if (!t_text.empty()) grid = parse_grid("--t", t_text);
      return run_profile(chain_path, kind_text, grid, !t_text.empty(), log_spaced,
                         format.empty() ? "csv" : format, out_path);
    }

    if (c_product->parsed()) {
      GridSpec grid;
      if (!t_text.empty()) grid = parse_grid("--t", t_text);
      return run_product(chain_path, copies, kind_text, grid, !t_text.empty(), log_spaced,
                         tensor, emit_chain, state_cap, format.empty() ? "csv" : format,
                         out_path);
    }

    if (c_mix->parsed()) {
      if (chain_path.empty() == sizes.empty())
        throw CLI::ValidationError("mix", "pass exactly one of --chain or --n");
      return run_mix(chain_path, sizes, c_mix->count("--epsilon") > 0, epsilon, kind_text,
                     eps_list, t_hi, format.empty() ? "json" : format, out_path);
    }

    if (c_family->parsed()) {
      GridSpec grid;
      if (!s_text.empty()) grid = parse_grid("--s-grid", s_text);
      std::string prefix = out_path.empty() ? "gn" + std::to_string(family_n) : out_path;
      return run_family(family_n, c_family->count("--epsilon") > 0, epsilon, grid,
                        !s_text.empty(), minorization, prefix);
    }

    if (c_verify->parsed())
      return run_verify(seed, chains, tol_kv, no_family, suite_family_n, suite_family_epsilon,
                        serial, out_path);

    return 2; // unreachable: require_subcommand(1)
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ctmix::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
