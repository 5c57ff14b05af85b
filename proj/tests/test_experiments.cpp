#include <doctest.h>

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "pullbound/config.hpp"
#include "pullbound/drift.hpp"
#include "pullbound/experiments.hpp"
#include "pullbound/io.hpp"

using namespace pullbound;
namespace fs = std::filesystem;

namespace {

// Fresh directory per test case, removed on scope exit.
struct TempDir {
  fs::path dir;
  TempDir() {
    static int counter = 0;
    dir = fs::temp_directory_path() /
          ("pullbound_exp_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

std::string write_config(const TempDir& tmp, const std::string& name, const std::string& text) {
  const std::string path = tmp.file(name);
  write_text_file(path, text);
  return path;
}

int run(std::initializer_list<std::string> args) { return run_cli(std::vector<std::string>(args)); }

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("drift_from_config builds each family") {
  const Config cfg = Config::parse(
      "[a]\nfamily = ou\nlambda = 2.5\ndimension = 3\n"
      "[b]\nfamily = piecewise\nlambda_left = 20\nlambda_right = 1\n"
      "[c]\nfamily = expression\nsource = -x - x^3\n"
      "[d]\nfamily = radial\nsource = -2*r\ndimension = 2\n");

  const DriftSpec a = drift_from_config(cfg, "a");
  CHECK(a.dimension() == 3);
  const std::vector<double> x3{1.0, 0.0, 0.0};
  std::vector<double> out3(3);
  a.eval(x3, out3);
  CHECK(out3[0] == -2.5);

  const DriftSpec b = drift_from_config(cfg, "b");
  CHECK(b.dimension() == 1);
  CHECK(b.eval1(-0.5) == 10.0);
  CHECK(b.eval1(0.5) == -0.5);

  const DriftSpec c = drift_from_config(cfg, "c");
  CHECK(c.eval1(1.0) == -2.0);

  const DriftSpec d = drift_from_config(cfg, "d");
  CHECK(d.dimension() == 2);
  const std::vector<double> x2{3.0, 4.0};
  std::vector<double> out2(2);
  d.eval(x2, out2);
  CHECK(out2[0] == doctest::Approx(-6.0));
  CHECK(out2[1] == doctest::Approx(-8.0));
}

TEST_CASE("drift_from_config ou defaults to dimension 1") {
  const Config cfg = Config::parse("[drift]\nfamily = ou\nlambda = 1\n");
  CHECK(drift_from_config(cfg, "drift").dimension() == 1);
}

TEST_CASE("drift_from_config rejects unknown families") {
  const Config cfg = Config::parse("[drift]\nfamily = quadratic\n");
  CHECK_THROWS_WITH_AS(drift_from_config(cfg, "drift"),
                       "drift.family: unknown family 'quadratic'", ConfigError);
}

TEST_CASE("drift_from_config propagates missing keys as config errors") {
  const Config cfg = Config::parse("[drift]\nfamily = ou\n");
  CHECK_THROWS_AS(drift_from_config(cfg, "drift"), ConfigError);
}

TEST_CASE("drift_from_config wraps construction failures with the section name") {
  const Config cfg = Config::parse("[drift]\nfamily = expression\nsource = (x\n");
  try {
    drift_from_config(cfg, "drift");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.rfind("[drift] ", 0) == 0);
  }
}

TEST_CASE("run_cli rejects malformed command lines") {
  CHECK(run({}) == kExitConfig);
  CHECK(run({"fig-decay"}) == kExitConfig);
  CHECK(run({"no-such-command", "--config", "x.ini"}) == kExitConfig);
  CHECK(run({"fig-decay", "--config", "/nonexistent/dir/missing.ini"}) == kExitConfig);
}

TEST_CASE("run_cli --help exits cleanly") { CHECK(run({"--help"}) == kExitOk); }

TEST_CASE("fig-decay writes a deterministic rate table") {
  TempDir tmp;
  const std::string out = tmp.file("decay.csv");
  const std::string cfg = write_config(tmp, "decay.ini",
                                       "[rates]\n"
                                       "radii = 1.0\n"
                                       "n_grid = 801\n"
                                       "refinement = 1\n"
                                       "[output]\n"
                                       "path = " + out + "\n");

  REQUIRE(run({"fig-decay", "--config", cfg}) == kExitOk);
  const std::string text = read_text_file(out);
  const auto rows = lines_of(text);
  REQUIRE(rows.size() >= 3);
  CHECK(rows[0] == "# pullbound 0.1.0");
  CHECK(contains(text, "# experiment.kind = fig-decay"));
  CHECK(contains(text, "\nR,mu_kushner,mu_spectral,mu_asymptotic,status\n"));
  CHECK(rows.back().rfind("1,", 0) == 0);
  CHECK(contains(rows.back(), ",ok"));
  // Run environment must not leak into the artifact.
  CHECK_FALSE(contains(text, "workers"));
  CHECK_FALSE(contains(text, out));

  const std::string out2 = tmp.file("decay2.csv");
  REQUIRE(run({"fig-decay", "--config", cfg, "--out", out2}) == kExitOk);
  CHECK(read_text_file(out2) == text);
}

TEST_CASE("fig-decay Monte Carlo columns are worker-invariant") {
  TempDir tmp;
  const std::string out1 = tmp.file("w1.csv");
  const std::string out4 = tmp.file("w4.csv");
  const std::string cfg = write_config(tmp, "decay_mc.ini",
                                       "[rates]\n"
                                       "radii = 1.0\n"
                                       "n_grid = 401\n"
                                       "refinement = 1\n"
                                       "[mc]\n"
                                       "horizons = 0.5, 1.0\n"
                                       "n_paths = 400\n"
                                       "dt = 0.01\n"
                                       "seed = 7\n"
                                       "[output]\n"
                                       "path = " + out1 + "\n");

  REQUIRE(run({"fig-decay", "--config", cfg, "--workers", "1"}) == kExitOk);
  REQUIRE(run({"fig-decay", "--config", cfg, "--workers", "4", "--out", out4}) == kExitOk);
  const std::string text1 = read_text_file(out1);
  CHECK(read_text_file(out4) == text1);
  CHECK(contains(text1, "R,mu_kushner,mu_spectral,mu_asymptotic,mu_mc,mu_mc_stderr,status\n"));
  CHECK(contains(text1, "# mc.seed = 7"));
}

TEST_CASE("fig-decay rejects an empty radius list") {
  TempDir tmp;
  const std::string cfg = write_config(tmp, "bad.ini",
                                       "[rates]\n"
                                       "radii =\n"
                                       "[output]\n"
                                       "path = " + tmp.file("x.csv") + "\n");
  CHECK(run({"fig-decay", "--config", cfg}) == kExitConfig);
}

TEST_CASE("fig-counterexample sweeps pull strength and ends with the reflected row") {
  TempDir tmp;
  const std::string out = tmp.file("sweep.csv");
  const std::string cfg = write_config(tmp, "sweep.ini",
                                       "[sweep]\n"
                                       "lambdas = 1, 5\n"
                                       "[query]\n"
                                       "radius = 0.5\n"
                                       "horizon = 0.25\n"
                                       "[mc]\n"
                                       "n_paths = 300\n"
                                       "dt = 0.005\n"
                                       "seed = 11\n"
                                       "[output]\n"
                                       "path = " + out + "\n");

  REQUIRE(run({"fig-counterexample", "--config", cfg}) == kExitOk);
  const std::string text = read_text_file(out);
  CHECK(contains(text, "# experiment.kind = fig-counterexample"));
  CHECK(contains(text, "lambda,p_hat,ci_low,ci_high\n"));
  const auto rows = lines_of(text);
  REQUIRE(rows.size() >= 4);
  CHECK(rows[rows.size() - 3].rfind("1,", 0) == 0);
  CHECK(rows[rows.size() - 2].rfind("5,", 0) == 0);
  CHECK(rows.back().rfind("reflected,", 0) == 0);

  const std::string out2 = tmp.file("sweep2.csv");
  REQUIRE(run({"fig-counterexample", "--config", cfg, "--out", out2}) == kExitOk);
  CHECK(read_text_file(out2) == text);
}

TEST_CASE("coupling-demo refuses a dominance violation unless forced") {
  TempDir tmp;
  const std::string out = tmp.file("pair.csv");
  // The X drift pulls strictly less than the Y drift, so the premise fails.
  const std::string cfg = write_config(tmp, "pair.ini",
                                       "[drift_x]\nfamily = ou\nlambda = 1\n"
                                       "[drift_y]\nfamily = ou\nlambda = 2\n"
                                       "[query]\ncheck_radius = 1\nhorizon = 0.2\n"
                                       "[sim]\ndt = 0.01\neps = 0.5\nseed = 3\n"
                                       "[output]\npath = " + out + "\n");

  CHECK(run({"coupling-demo", "--config", cfg}) == kExitDominance);
  CHECK_FALSE(fs::exists(out));

  REQUIRE(run({"coupling-demo", "--config", cfg, "--force"}) == kExitOk);
  const std::string text = read_text_file(out);
  CHECK(contains(text, "# dominance.forced = true"));
  CHECK(contains(text, "t,x,y,tau,upsilon\n"));
}

TEST_CASE("coupling-demo writes one trajectory pair when dominance holds") {
  TempDir tmp;
  const std::string out = tmp.file("pair.csv");
  const std::string cfg = write_config(tmp, "pair.ini",
                                       "[drift_x]\nfamily = ou\nlambda = 2\n"
                                       "[drift_y]\nfamily = ou\nlambda = 1\n"
                                       "[query]\ncheck_radius = 1\nhorizon = 0.2\n"
                                       "[sim]\ndt = 0.01\neps = 0.5\nseed = 3\n"
                                       "[output]\npath = " + out + "\n");

  REQUIRE(run({"coupling-demo", "--config", cfg}) == kExitOk);
  const std::string text = read_text_file(out);
  CHECK(contains(text, "# experiment.kind = coupling-demo"));
  CHECK(contains(text, "# dominance.margin = 0"));
  CHECK_FALSE(contains(text, "dominance.forced"));
  const auto rows = lines_of(text);
  std::size_t header = 0;
  while (header < rows.size() && rows[header].rfind("#", 0) == 0) ++header;
  REQUIRE(rows[header] == "t,x,y,tau,upsilon");
  // Both copies start at the origin, which also counts as the first return.
  CHECK(rows[header + 1].rfind("0,0,0,0,", 0) == 0);
  CHECK(rows.size() - header - 1 == 21);  // horizon / dt + 1 sample rows
}

TEST_CASE("bound reports a non-contracting drift and stops") {
  TempDir tmp;
  const std::string out = tmp.file("bound.json");
  const std::string cfg = write_config(tmp, "bound.ini",
                                       "[drift]\nfamily = expression\nsource = x\n"
                                       "[query]\nradius = 1\nhorizon = 1\ncheck_radius = 1\n"
                                       "[contraction]\nn_samples = 64\n"
                                       "[output]\npath = " + out + "\n");

  CHECK(run({"bound", "--config", cfg}) == kExitDominance);
  const auto artifact = nlohmann::json::parse(read_text_file(out));
  CHECK(artifact["verdict"] == "violated");
  CHECK(artifact["contraction"]["lambda_hat"].get<double>() == doctest::Approx(-1.0));
  CHECK(artifact.contains("witness"));
  CHECK_FALSE(artifact.contains("bound"));
  CHECK_FALSE(artifact.contains("mc"));
}

TEST_CASE("bound maps a drift that never evaluates to a numeric failure") {
  TempDir tmp;
  const std::string cfg = write_config(tmp, "nan.ini",
                                       "[drift]\nfamily = expression\nsource = 1/(x-x)\n"
                                       "[query]\nradius = 1\nhorizon = 1\ncheck_radius = 1\n"
                                       "[output]\npath = " + tmp.file("nan.json") + "\n");
  CHECK(run({"bound", "--config", cfg}) == kExitNumeric);
}

TEST_CASE("bound emits the full artifact on a contracting drift") {
  TempDir tmp;
  const std::string out = tmp.file("bound.json");
  const std::string cfg = write_config(tmp, "bound.ini",
                                       "[drift]\nfamily = ou\nlambda = 2\n"
                                       "[query]\nradius = 3\nhorizon = 1\ncheck_radius = 2\n"
                                       "[contraction]\nn_samples = 64\nseed = 1\n"
                                       "[mc]\nn_paths = 500\ndt = 0.01\nseed = 5\n"
                                       "[output]\npath = " + out + "\n");

  REQUIRE(run({"bound", "--config", cfg}) == kExitOk);
  const auto artifact = nlohmann::json::parse(read_text_file(out));
  CHECK(artifact["version"] == "pullbound 0.1.0");
  CHECK(artifact["config"]["experiment.kind"] == "bound");
  // A linear pull has a constant negative slope, so the estimate is exact.
  CHECK(artifact["contraction"]["lambda_hat"].get<double>() == doctest::Approx(2.0));
  CHECK(artifact["dominance"]["verdict"] == "holds");
  const double p = artifact["bound"]["probability"].get<double>();
  CHECK(p > 0.0);
  CHECK(p <= 1.0);
  CHECK(artifact["mc"]["n_paths"].get<std::uint64_t>() == 500);
  const double p_hat = artifact["mc"]["p_hat"].get<double>();
  CHECK(p_hat >= 0.0);
  CHECK(p_hat <= 1.0);
  CHECK(artifact["mc"]["bridge_corrected"].get<bool>());
  CHECK(artifact["mc"]["dt_effective"].get<double>() > 0.0);

  const std::string out2 = tmp.file("bound2.json");
  REQUIRE(run({"bound", "--config", cfg, "--out", out2}) == kExitOk);
  CHECK(read_text_file(out2) == read_text_file(out));
}

TEST_CASE("trap-demo rejects drifts that are not planar radial traps") {
  TempDir tmp;
  const std::string tail =
      "[trap]\nbeam_radius = 1\n"
      "[query]\nradius = 2\nhorizon = 0.1\n"
      "[sim]\ndt = 0.01\nn_display = 2\nseed = 1\n"
      "[output]\npath = " + tmp.file("trap.csv") + "\n";

  const std::string not_radial =
      write_config(tmp, "a.ini", "[drift]\nfamily = ou\nlambda = 1\ndimension = 2\n" + tail);
  CHECK(run({"trap-demo", "--config", not_radial}) == kExitConfig);

  const std::string wrong_dim = write_config(
      tmp, "b.ini", "[drift]\nfamily = radial\nsource = -r\ndimension = 3\n" + tail);
  CHECK(run({"trap-demo", "--config", wrong_dim}) == kExitConfig);

  // Pull that persists outside the beam contradicts the trap geometry.
  const std::string unbounded = write_config(
      tmp, "c.ini", "[drift]\nfamily = radial\nsource = -r\ndimension = 2\n" + tail);
  CHECK(run({"trap-demo", "--config", unbounded}) == kExitConfig);
}

TEST_CASE("trap-demo writes per-path rows with exit flags") {
  TempDir tmp;
  const std::string out = tmp.file("trap.csv");
  const std::string cfg = write_config(
      tmp, "trap.ini",
      "[drift]\nfamily = radial\nsource = -r*max(0, 1 - r^2)\ndimension = 2\n"
      "[trap]\nbeam_radius = 1\n"
      "[query]\nradius = 2\nhorizon = 0.1\n"
      "[sim]\ndt = 0.01\nn_display = 2\nseed = 1\n"
      "[output]\npath = " + out + "\n");

  REQUIRE(run({"trap-demo", "--config", cfg}) == kExitOk);
  const std::string text = read_text_file(out);
  CHECK(contains(text, "# experiment.kind = trap-demo"));
  const auto rows = lines_of(text);
  std::size_t header = 0;
  while (header < rows.size() && rows[header].rfind("#", 0) == 0) ++header;
  REQUIRE(rows[header] == "path,t,x1,x2,exit");
  CHECK(rows[header + 1].rfind("0,0,0,0,", 0) == 0);
  // Two displayed paths, eleven grid points each.
  CHECK(rows.size() - header - 1 == 22);
  std::size_t from_path_one = 0;
  for (std::size_t i = header + 1; i < rows.size(); ++i) {
    if (rows[i].rfind("1,", 0) == 0) ++from_path_one;
  }
  CHECK(from_path_one == 11);
}

TEST_CASE("trap-demo rejects a non-positive display count") {
  TempDir tmp;
  const std::string cfg = write_config(
      tmp, "trap.ini",
      "[drift]\nfamily = radial\nsource = -r*max(0, 1 - r^2)\ndimension = 2\n"
      "[trap]\nbeam_radius = 1\n"
      "[query]\nradius = 2\n"
      "[sim]\nn_display = 0\n"
      "[output]\npath = " + tmp.file("t.csv") + "\n");
  CHECK(run({"trap-demo", "--config", cfg}) == kExitConfig);
}

TEST_CASE("seed override replaces every configured seed") {
  TempDir tmp;
  const std::string out_a = tmp.file("a.csv");
  const std::string out_b = tmp.file("b.csv");
  // Different configured seeds; the override must make the runs agree.
  const std::string head =
      "[sweep]\nlambdas = 1\n"
      "[query]\nradius = 0.5\nhorizon = 0.1\n";
  const std::string cfg_a = write_config(tmp, "a.ini", head +
                                         "[mc]\nn_paths = 200\ndt = 0.01\nseed = 1\n"
                                         "[output]\npath = " + out_a + "\n");
  const std::string cfg_b = write_config(tmp, "b.ini", head +
                                         "[mc]\nn_paths = 200\ndt = 0.01\nseed = 2\n"
                                         "[output]\npath = " + out_b + "\n");

  REQUIRE(run({"fig-counterexample", "--config", cfg_a, "--seed", "9"}) == kExitOk);
  REQUIRE(run({"fig-counterexample", "--config", cfg_b, "--seed", "9"}) == kExitOk);
  CHECK(read_text_file(out_a) == read_text_file(out_b));
  CHECK(contains(read_text_file(out_a), "# mc.seed = 9"));
}
