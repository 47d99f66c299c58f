#include <doctest.h>

#include <cmath>

#include "ctmix/chain.hpp"
#include "ctmix/suite.hpp"
#include "support/checks.hpp"

using namespace ctmix;

TEST_CASE("inequality names round trip") {
  REQUIRE(all_inequalities().size() == 13);
  for (Inequality id : all_inequalities()) {
    CHECK(inequality_from_name(inequality_name(id)) == id);
    CHECK(default_tolerance(id) > 0.0);
  }
  CHECK_ERRC(inequality_from_name("triangle"), parse_error);
}

TEST_CASE("suite config validates") {
  SuiteConfig cfg;
  cfg.chains = 0;
  CHECK_ERRC(run_suite(cfg), invalid_config);
  cfg = {};
  cfg.m_min = 1;
  CHECK_ERRC(run_suite(cfg), invalid_config);
  cfg = {};
  cfg.m_min = 9;
  cfg.m_max = 5;
  CHECK_ERRC(run_suite(cfg), invalid_config);
  cfg = {};
  cfg.grid_points = 1;
  CHECK_ERRC(run_suite(cfg), invalid_config);
  cfg = {};
  cfg.grid_lo_factor = 5.0;
  cfg.grid_hi_factor = 1.0;
  CHECK_ERRC(run_suite(cfg), invalid_config);
  cfg = {};
  cfg.tolerances["no_such_inequality"] = 1e-9;
  CHECK_ERRC(run_suite(cfg), parse_error);
  cfg = {};
  cfg.tolerances["tv_le_dbar"] = -1.0;
  CHECK_ERRC(run_suite(cfg), invalid_config);
  cfg = {};
  cfg.family_n = 1;
  CHECK_ERRC(run_suite(cfg), invalid_config);
}

namespace {

SuiteConfig small_config() {
  SuiteConfig cfg;
  cfg.seed = 7;
  cfg.chains = 12;
  cfg.m_min = 3;
  cfg.m_max = 8;
  cfg.family_n = 8;
  return cfg;
}

} // namespace

TEST_CASE("suite batch passes, reproduces bitwise, and replays witnesses") {
  const SuiteConfig cfg = small_config();
  const SuiteReport a = run_suite(cfg);
  const SuiteReport b = run_suite(cfg);

  CHECK(a.errors.empty());
  CHECK(a.all_pass);
  CHECK(a.max_hellinger_seen > 0.5);
  REQUIRE(a.results.size() == 13);

  // bit-identical across runs, including every margin and witness
  CHECK(suite_report_to_json(a).dump() == suite_report_to_json(b).dump());

  // serial run agrees too
  SuiteConfig ser = cfg;
  ser.parallel = false;
  const SuiteReport c = run_suite(ser);
  CHECK(suite_report_to_json(a).dump() == suite_report_to_json(c).dump());

  for (const InequalityResult& r : a.results) {
    CHECK(r.instances > 0);
    CHECK(r.pass);
    CHECK(r.worst_margin <= r.tolerance);
    // the recorded worst witness reproduces its margin exactly
    CHECK(replay_margin(cfg, r) == r.worst_margin);
  }

  const auto doc = suite_report_to_json(a);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["seed"] == 7);
  CHECK(doc["all_pass"] == true);
  CHECK(doc["results"].size() == 13);
  CHECK(doc["results"][0].contains("witness"));
}

TEST_CASE("suite respects the enabled subset and tolerance overrides") {
  SuiteConfig cfg = small_config();
  cfg.chains = 4;
  cfg.enabled = {Inequality::tv_le_dbar, Inequality::hellinger_doubling};
  cfg.tolerances["tv_le_dbar"] = 1e-3;
  const SuiteReport rep = run_suite(cfg);
  REQUIRE(rep.results.size() == 2);
  CHECK(rep.results[0].id == Inequality::tv_le_dbar);
  CHECK(rep.results[0].tolerance == 1e-3);
  CHECK(rep.results[1].id == Inequality::hellinger_doubling);
  CHECK(rep.results[1].tolerance == default_tolerance(Inequality::hellinger_doubling));
  CHECK(rep.all_pass);
}

TEST_CASE("replay rejects foreign witnesses") {
  SuiteConfig cfg = small_config();
  cfg.chains = 3;
  const SuiteReport rep = run_suite(cfg);
  InequalityResult r = rep.results[0];
  r.witness.chain_index = 99;
  CHECK_ERRC(replay_margin(cfg, r), out_of_range);
  r = rep.results[0];
  r.witness.states += 1; // metadata no longer matches the derived instance
  CHECK_ERRC(replay_margin(cfg, r), invalid_config);
}

TEST_CASE("hellinger window brackets the product mixing time") {
  const ChainSpec c(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  const WindowCheck w = hellinger_window_check(c, 256);
  CHECK(w.verdict);
  CHECK(w.t_n > 0.0);
  CHECK(w.t_hat_low >= 0.95 * w.t_n);
  CHECK(w.t_hat_high <= 2.1 * w.t_n);
  // closed forms for the symmetric two-state marginal pin the three times
  CHECK(w.t_n == doctest::Approx(0.8426).epsilon(2e-3));
  CHECK(w.t_hat_low == doctest::Approx(0.8206).epsilon(2e-3));
  CHECK(w.t_hat_high == doctest::Approx(1.6360).epsilon(2e-3));

  CHECK_ERRC(hellinger_window_check(c, 4), copies_too_small);
}
