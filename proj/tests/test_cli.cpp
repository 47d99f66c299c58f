// End-to-end checks of the ctmix binary: exit codes, emitted file shapes,
// byte-identical reruns, and chain-spec round trips through the tool itself.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ctmix/chain_io.hpp"
#include "ctmix/metrics.hpp"

using namespace ctmix;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  fs::path dir = fs::temp_directory_path() / "ctmix_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CmdResult {
  int exit_code = -1;
  std::string out; // stdout and stderr combined
};

CmdResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path capture = work_dir() / ("capture" + std::to_string(counter++) + ".txt");
  std::string cmd = std::string("\"") + CTMIX_CLI_PATH + "\" " + args + " > \"" +
                    capture.string() + "\" 2>&1";
  int rc = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(capture);
  return r;
}

fs::path write_two_state() {
  fs::path path = work_dir() / "two-state.json";
  std::ofstream out(path, std::ios::binary);
  out << R"({"states": ["0", "1"], "rates": [[0, 1, 1.5], [1, 0, 1.0]]})" << "\n";
  return path;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

} // namespace

TEST_CASE("cli chain prints stationary law, gap, reversibility") {
  fs::path spec = write_two_state();
  CmdResult r = run_cli("chain --chain \"" + spec.string() + "\"");
  CHECK(r.exit_code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["states"] == 2);
  CHECK(doc["reversible"] == true);
  CHECK(doc["gap"].get<double>() == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(doc["pi"][0].get<double>() == doctest::Approx(0.4).epsilon(1e-12));

  CmdResult csv = run_cli("chain --chain \"" + spec.string() + "\" --format csv");
  CHECK(csv.exit_code == 0);
  CHECK(csv.out.rfind("# kind=stationary\nstate,label,pi\n", 0) == 0);
  CHECK(count_lines(csv.out) == 4);
}

TEST_CASE("cli profile emits the requested grid and matches the t=0 identity") {
  fs::path spec = write_two_state();
  fs::path out = work_dir() / "prof.csv";
  CmdResult r = run_cli("profile --chain \"" + spec.string() + "\" --kind tv --t 0:5:50 --out \"" +
                        out.string() + "\"");
  CHECK(r.exit_code == 0);

  DistanceProfile profile = profile_from_csv(slurp(out));
  CHECK(profile.kind == DistanceKind::total_variation);
  CHECK(profile.times.size() == 50);
  CHECK(profile.times.front() == 0.0);
  CHECK(profile.times.back() == 5.0);
  // d(0) = 1 - min pi = 0.6 for rates (1.5, 1.0).
  CHECK(profile.values.front() == doctest::Approx(0.6).epsilon(1e-9));

  CmdResult js = run_cli("profile --chain \"" + spec.string() +
                         "\" --kind hellinger --t 0.1:4:7 --log --format json");
  CHECK(js.exit_code == 0);
  DistanceProfile hp = profile_from_json(nlohmann::json::parse(js.out));
  CHECK(hp.kind == DistanceKind::hellinger);
  CHECK(hp.times.size() == 7);

  // Default grid: anchored to 1/gap, 25 log-spaced points.
  CmdResult dg = run_cli("profile --chain \"" + spec.string() + "\"");
  CHECK(dg.exit_code == 0);
  DistanceProfile dp = profile_from_csv(dg.out);
  CHECK(dp.times.size() == 25);
  CHECK(dp.times.front() == doctest::Approx(0.01 / 2.5).epsilon(1e-12));
  CHECK(dp.times.back() == doctest::Approx(20.0 / 2.5).epsilon(1e-12));
}

TEST_CASE("cli product routes: formulas, tv bounds, tensor oracle round trip") {
  fs::path spec = write_two_state();
  CmdResult sep = run_cli("product --chain \"" + spec.string() + "\" --copies 50 --kind sep --t 0.5:3:4");
  CHECK(sep.exit_code == 0);
  DistanceProfile sp = profile_from_csv(sep.out);
  CHECK(sp.kind == DistanceKind::separation);
  CHECK(sp.values.front() > sp.values.back());

  CmdResult tv = run_cli("product --chain \"" + spec.string() + "\" --copies 50 --kind tv --t 0.5:3:4");
  CHECK(tv.exit_code == 0);
  CHECK(tv.out.rfind("# kind=product_tv_bounds\ntime,lower,upper\n", 0) == 0);
  CHECK(count_lines(tv.out) == 6);

  fs::path tensor = work_dir() / "tensor3.json";
  CmdResult emit = run_cli("product --chain \"" + spec.string() + "\" --copies 3 --emit-chain --out \"" +
                           tensor.string() + "\"");
  CHECK(emit.exit_code == 0);
  ChainSpec t3 = chain_from_json_file(tensor.string());
  CHECK(t3.size() == 8);
  CHECK(t3.labels()[5] == "1|0|1");

  CmdResult chk = run_cli("chain --chain \"" + tensor.string() + "\"");
  CHECK(chk.exit_code == 0);
  auto doc = nlohmann::json::parse(chk.out);
  CHECK(doc["pi"][0].get<double>() == doctest::Approx(0.4 * 0.4 * 0.4).epsilon(1e-12));

  // pairwise kind needs the tensor route; without it this is an argument error.
  CHECK(run_cli("product --chain \"" + spec.string() + "\" --copies 3 --kind pairwise --t 1:2:2")
            .exit_code == 2);
}

TEST_CASE("cli mix reports and family diagnostics") {
  fs::path spec = write_two_state();
  CmdResult r = run_cli("mix --chain \"" + spec.string() + "\" --kind tv");
  CHECK(r.exit_code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["kind"] == "total_variation");
  CHECK(doc["gap"].get<double>() == doctest::Approx(2.5).epsilon(1e-12));
  // t_mix(0.1) = ln(0.6/0.1) / 2.5 for the two-state chain.
  double want = std::log(6.0) / 2.5;
  bool found = false;
  for (const auto& row : doc["mixing_times"])
    if (row["threshold"].get<double>() == 0.1) {
      CHECK(row["t_mix"].get<double>() == doctest::Approx(want).epsilon(1e-6));
      found = true;
    }
  CHECK(found);

  CmdResult fam = run_cli("mix --n 4,8 --format csv");
  CHECK(fam.exit_code == 0);
  CHECK(fam.out.rfind("# kind=ratio_table\nsize,eps,ratio\n", 0) == 0);
  CHECK(count_lines(fam.out) == 8);

  CmdResult js = run_cli("mix --n 4,8");
  CHECK(js.exit_code == 0);
  auto diag = nlohmann::json::parse(js.out);
  CHECK(diag["reports"].size() == 2);
  CHECK(diag.contains("tag"));
}

TEST_CASE("cli family emits chain, scaled csv, checks; chain round-trips") {
  fs::path prefix = work_dir() / "fam6";
  CmdResult r = run_cli("family --n 6 --out \"" + prefix.string() + "\"");
  CHECK(r.exit_code == 0);

  fs::path chain_path = prefix;
  chain_path += ".chain.json";
  ChainSpec chain = chain_from_json_file(chain_path.string());
  CHECK(chain.size() == 13);

  CmdResult round = run_cli("chain --chain \"" + chain_path.string() + "\"");
  CHECK(round.exit_code == 0);
  CHECK(nlohmann::json::parse(round.out)["reversible"] == true);

  fs::path scaled_path = prefix;
  scaled_path += ".scaled.csv";
  std::string csv = slurp(scaled_path);
  CHECK(csv.rfind("# kind=family_scaled\ns,d_marginal,n_survival,product_tv_approx\n", 0) == 0);
  CHECK(count_lines(csv) == 14); // header x2 + default 12-point s-grid

  fs::path checks_path = prefix;
  checks_path += ".checks.json";
  auto checks = nlohmann::json::parse(slurp(checks_path));
  CHECK(checks["n"] == 6);
  CHECK(checks["states"] == 13);
  CHECK(checks["back_edge_dropped"] == false);
  CHECK(checks["balance"]["reversible"] == true);
  CHECK(checks["plateau"]["reference"].get<double>() ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(checks["minorization"].is_null());

  // Minorization verdict for the canonical n=4 chain at t in {2,4,8,12}.
  fs::path p4 = work_dir() / "fam4";
  CmdResult m = run_cli("family --n 4 --minorization --out \"" + p4.string() + "\"");
  CHECK(m.exit_code == 0);
  fs::path c4 = p4;
  c4 += ".checks.json";
  auto mc = nlohmann::json::parse(slurp(c4));
  CHECK(mc["minorization"]["ok"] == true);
  CHECK(mc["minorization"]["worst_log_margin"].get<double>() >= 0.0);
}

TEST_CASE("cli verify is byte-identical across reruns and gates the exit code") {
  fs::path a = work_dir() / "verify_a.json";
  fs::path b = work_dir() / "verify_b.json";
  CmdResult r1 = run_cli("verify --seed 7 --chains 6 --family-n 8 --out \"" + a.string() + "\"");
  CmdResult r2 = run_cli("verify --seed 7 --chains 6 --family-n 8 --out \"" + b.string() + "\"");
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(a) == slurp(b));

  auto doc = nlohmann::json::parse(slurp(a));
  CHECK(doc["seed"] == 7);
  CHECK(doc["all_pass"] == true);
  CHECK(doc["results"].size() == 13);

  // Impossible tolerance on an equality-type check forces a failing report.
  CmdResult fail = run_cli("verify --seed 7 --chains 4 --family-n 8 --tol l1_attainment=1e-30");
  CHECK(fail.exit_code == 1);
  CHECK(nlohmann::json::parse(fail.out)["all_pass"] == false);
}

TEST_CASE("cli argument and computation errors use distinct exit codes") {
  fs::path spec = write_two_state();
  CHECK(run_cli("").exit_code == 2);                       // missing subcommand
  CHECK(run_cli("profile").exit_code == 2);                // missing --chain
  CHECK(run_cli("profile --chain nope.json").exit_code == 1);
  CHECK(run_cli("profile --chain \"" + spec.string() + "\" --t 0:5").exit_code == 2);
  CHECK(run_cli("profile --chain \"" + spec.string() + "\" --t 5:0:10").exit_code == 2);
  CHECK(run_cli("profile --chain \"" + spec.string() + "\" --t 0:5:10 --log").exit_code == 2);
  CHECK(run_cli("profile --chain \"" + spec.string() + "\" --kind bogus").exit_code == 2);
  CHECK(run_cli("mix --chain \"" + spec.string() + "\" --n 4").exit_code == 2);
  CHECK(run_cli("mix").exit_code == 2);
  CHECK(run_cli("family --n 1").exit_code == 1);           // library validation
  CHECK(run_cli("verify --chains 2 --tol nonsense").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);

  CmdResult usage = run_cli("profile --bogus 2");
  CHECK(usage.exit_code == 2);
  CHECK(usage.out.find("--help") != std::string::npos);
}
