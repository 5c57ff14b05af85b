#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "pullbound/estimator.hpp"
#include "pullbound/sim.hpp"

using namespace pullbound;

namespace {

const double kRoot2 = 1.4142135623730951;

void check_equal(const ContainmentEstimate& a, const ContainmentEstimate& b) {
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.ci_low == b.ci_low);
  CHECK(a.ci_high == b.ci_high);
  CHECK(a.n_paths == b.n_paths);
  CHECK(a.n_exit == b.n_exit);
  CHECK(a.n_exit_grid == b.n_exit_grid);
  CHECK(a.n_overflow == b.n_overflow);
  CHECK(a.bridge_corrected == b.bridge_corrected);
}

}  // namespace

TEST_CASE("Wilson interval frozen values") {
  const WilsonInterval w0 = wilson_interval(0, 100, kZ95);
  CHECK(w0.low == 0.0);
  CHECK(w0.high == doctest::Approx(0.03699349820698568).epsilon(1e-12));

  const WilsonInterval w100 = wilson_interval(100, 100, kZ95);
  CHECK(w100.low == doctest::Approx(0.9630065017930143).epsilon(1e-12));
  CHECK(w100.high == doctest::Approx(1.0).epsilon(1e-12));

  const WilsonInterval w50 = wilson_interval(50, 100, kZ95);
  CHECK(w50.low == doctest::Approx(0.4038315303659956).epsilon(1e-12));
  CHECK(w50.high == doctest::Approx(0.5961684696340044).epsilon(1e-12));

  const WilsonInterval w11 = wilson_interval(1, 1, kZ95);
  CHECK(w11.low == doctest::Approx(0.20654931437723745).epsilon(1e-12));
  CHECK(w11.high == doctest::Approx(1.0).epsilon(1e-12));

  const WilsonInterval w01 = wilson_interval(0, 1, kZ95);
  CHECK(w01.low == 0.0);
  CHECK(w01.high == doctest::Approx(0.7934506856227626).epsilon(1e-12));

  const double z99 = 2.5758293035489004;
  const WilsonInterval w99 = wilson_interval(7, 50, z99);
  CHECK(w99.low == doctest::Approx(0.05614371860633746).epsilon(1e-12));
  CHECK(w99.high == doctest::Approx(0.30820578743035465).epsilon(1e-12));

  const WilsonInterval wbig = wilson_interval(9500, 10000, kZ95);
  CHECK(wbig.low == doctest::Approx(0.9455528841569758).epsilon(1e-12));
  CHECK(wbig.high == doctest::Approx(0.9541015173094152).epsilon(1e-12));
}

TEST_CASE("Wilson interval rejects degenerate inputs") {
  CHECK_THROWS_AS(wilson_interval(0, 0, kZ95), std::invalid_argument);
  CHECK_THROWS_AS(wilson_interval(2, 1, kZ95), std::invalid_argument);
}

TEST_CASE("an unreachable radius is never exited") {
  const DriftSpec f = DriftSpec::ou(1.0);
  const std::vector<double> x0 = {0.0};
  const ContainmentEstimate est =
      containment_probability(f, NoiseSpec{kRoot2}, x0, 100.0, 1.0, 200, 0.01, 7);
  CHECK(est.p_hat == 1.0);
  CHECK(est.n_exit == 0);
  CHECK(est.n_exit_grid == 0);
  CHECK(est.n_overflow == 0);
  CHECK(est.n_paths == 200);
  CHECK(est.ci_high == doctest::Approx(1.0));
  CHECK(est.ci_low < 1.0);
}

TEST_CASE("a hairline radius is exited immediately") {
  const DriftSpec f = DriftSpec::ou(1.0);
  const std::vector<double> x0 = {0.0};
  const ContainmentEstimate est =
      containment_probability(f, NoiseSpec{kRoot2}, x0, 1e-9, 1.0, 200, 0.01, 7);
  CHECK(est.p_hat == 0.0);
  CHECK(est.n_exit == 200);
  CHECK(est.ci_low == 0.0);
}

TEST_CASE("estimates are independent of the worker count") {
  const DriftSpec f = DriftSpec::ou(1.0);
  const std::vector<double> x0 = {0.0};
  EstimatorOptions serial;
  serial.bridge = true;
  serial.workers = 1;
  EstimatorOptions pooled = serial;
  pooled.workers = 4;

  const ContainmentEstimate a =
      containment_probability(f, NoiseSpec{kRoot2}, x0, 2.0, 1.0, 2000, 0.01, 99, serial);
  const ContainmentEstimate b =
      containment_probability(f, NoiseSpec{kRoot2}, x0, 2.0, 1.0, 2000, 0.01, 99, pooled);
  check_equal(a, b);
  CHECK(a.n_exit > 0);
  CHECK(a.n_exit < 2000);
}

TEST_CASE("the streamed kernel reproduces materialized trajectories") {
  const DriftSpec f = DriftSpec::ou(1.0);
  const NoiseSpec noise{kRoot2};
  const std::vector<double> x0 = {0.0};
  const double radius = 1.5;
  const double horizon = 1.0;
  const double dt = 0.01;
  const std::uint64_t seed = 31337;
  const std::uint64_t n = 50;

  EstimatorOptions opts;
  opts.bridge = true;
  opts.workers = 1;
  const ContainmentEstimate est =
      containment_probability(f, noise, x0, radius, horizon, n, dt, seed, opts);

  std::uint64_t exits = 0;
  std::uint64_t grid_exits = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const RngStream stream(seed, i);
    const Trajectory traj = euler_maruyama(f, noise, x0, horizon, dt, stream);
    if (first_exit(traj, radius).time) ++grid_exits;
    if (first_exit(traj, radius, {true, noise.sigma}, &stream).time) ++exits;
  }
  CHECK(est.n_exit == exits);
  CHECK(est.n_exit_grid == grid_exits);
  CHECK(est.p_hat == doctest::Approx(1.0 - static_cast<double>(exits) / n).epsilon(1e-15));
}

TEST_CASE("bridge detection only adds exits") {
  const DriftSpec f = DriftSpec::ou(1.0);
  const std::vector<double> x0 = {0.0};
  EstimatorOptions plain;
  plain.workers = 1;
  EstimatorOptions bridged = plain;
  bridged.bridge = true;

  const ContainmentEstimate a =
      containment_probability(f, NoiseSpec{kRoot2}, x0, 1.5, 1.0, 2000, 0.01, 5, plain);
  const ContainmentEstimate b =
      containment_probability(f, NoiseSpec{kRoot2}, x0, 1.5, 1.0, 2000, 0.01, 5, bridged);

  CHECK_FALSE(a.bridge_corrected);
  CHECK(b.bridge_corrected);
  CHECK(a.n_exit == a.n_exit_grid);
  CHECK(b.n_exit_grid == a.n_exit_grid);
  CHECK(b.n_exit > b.n_exit_grid);
  CHECK(b.p_hat < a.p_hat);
}

TEST_CASE("containment is monotone in radius and horizon on shared paths") {
  const DriftSpec f = DriftSpec::ou(1.0);
  const std::vector<double> x0 = {0.0};
  EstimatorOptions opts;
  opts.bridge = true;
  opts.workers = 1;
  const NoiseSpec noise{kRoot2};

  const auto narrow = containment_probability(f, noise, x0, 1.5, 1.0, 1000, 0.01, 12, opts);
  const auto wide = containment_probability(f, noise, x0, 2.0, 1.0, 1000, 0.01, 12, opts);
  CHECK(narrow.p_hat <= wide.p_hat);

  const auto brief = containment_probability(f, noise, x0, 1.5, 0.5, 1000, 0.01, 12, opts);
  const auto lasting = containment_probability(f, noise, x0, 1.5, 1.5, 1000, 0.01, 12, opts);
  CHECK(lasting.p_hat <= brief.p_hat);
  CHECK(lasting.n_exit >= brief.n_exit);
}

TEST_CASE("overflowing paths count as exits") {
  const DriftSpec f = DriftSpec::expression("x^3");
  const std::vector<double> x0 = {2.0};
  EstimatorOptions opts;
  opts.workers = 1;
  const ContainmentEstimate est =
      containment_probability(f, NoiseSpec{1e-12}, x0, 1e200, 5.0, 3, 0.5, 1, opts);
  CHECK(est.n_overflow == 3);
  CHECK(est.n_exit == 3);
  CHECK(est.p_hat == 0.0);
}

TEST_CASE("containment records serialize with their settings") {
  const DriftSpec f = DriftSpec::ou(2.0);
  const std::vector<double> x0 = {0.0};
  const ContainmentRecord rec =
      containment_record(f, NoiseSpec{1.0}, x0, 1.0, 0.5, 100, 0.01, 42);
  CHECK(rec.sigma == 1.0);
  CHECK(rec.radius == 1.0);
  CHECK(rec.horizon == 0.5);
  CHECK(rec.dt_requested == 0.01);
  CHECK(rec.dt_effective == 0.01);
  CHECK(rec.n_paths == 100);
  CHECK(rec.seed == 42);
  CHECK(!rec.drift.empty());

  const auto j = nlohmann::json::parse(to_json(rec));
  CHECK(j.contains("drift"));
  CHECK(j.contains("p_hat"));
  CHECK(j.contains("ci_low"));
  CHECK(j.contains("bridge_corrected"));
  CHECK(j["n_paths"] == 100);
}

TEST_CASE("decay fit recovers a plausible rate with error bars") {
  const DriftSpec f = DriftSpec::ou(1.0);
  const std::vector<double> x0 = {0.0};
  const std::vector<double> horizons = {1.0, 2.0, 3.0};
  EstimatorOptions opts;
  opts.workers = 1;

  const DecayFit fit =
      fit_decay_rate(f, NoiseSpec{kRoot2}, x0, 2.0, horizons, 4000, 0.01, 2020, opts);
  CHECK_FALSE(fit.lower_bound_only);
  CHECK(fit.rate.method == "mc-fit");
  REQUIRE(fit.per_horizon.size() == 3);
  REQUIRE(fit.rate.stderr_est.has_value());
  CHECK(*fit.rate.stderr_est > 0.0);
  CHECK(fit.horizons == horizons);
  CHECK(fit.dt_effective == 0.01);
  // The interval eigenvalue at this radius is 0.243; a coarse grid without
  // the crossing correction biases the fit low, never by half.
  CHECK(fit.rate.mu > 0.12);
  CHECK(fit.rate.mu < 0.35);
  CHECK(fit.per_horizon[0].p_hat >= fit.per_horizon[1].p_hat);
  CHECK(fit.per_horizon[1].p_hat >= fit.per_horizon[2].p_hat);

  const DecayFit again =
      fit_decay_rate(f, NoiseSpec{kRoot2}, x0, 2.0, horizons, 4000, 0.01, 2020, opts);
  CHECK(again.rate.mu == fit.rate.mu);
}

TEST_CASE("a single horizon still yields a rate") {
  const DriftSpec f = DriftSpec::ou(1.0);
  const std::vector<double> x0 = {0.0};
  const std::vector<double> horizons = {2.0};
  EstimatorOptions opts;
  opts.workers = 1;
  const DecayFit fit =
      fit_decay_rate(f, NoiseSpec{kRoot2}, x0, 2.0, horizons, 2000, 0.01, 4, opts);
  CHECK_FALSE(fit.lower_bound_only);
  REQUIRE(fit.per_horizon.size() == 1);
  CHECK(fit.rate.mu ==
        doctest::Approx(-std::log(fit.per_horizon[0].p_hat) / 2.0).epsilon(1e-12));
  CHECK(fit.rate.stderr_est.has_value());
}

TEST_CASE("horizons with no survivors degrade to a certified lower bound") {
  const DriftSpec f = DriftSpec::ou(1.0);
  const std::vector<double> x0 = {0.0};
  const std::vector<double> horizons = {1.0, 2.0};
  EstimatorOptions opts;
  opts.workers = 1;
  const DecayFit fit =
      fit_decay_rate(f, NoiseSpec{kRoot2}, x0, 0.05, horizons, 100, 1e-3, 8, opts);
  CHECK(fit.lower_bound_only);
  CHECK(fit.rate.mu > 0.0);
  CHECK_FALSE(fit.rate.stderr_est.has_value());
  // The floor is the Wilson-certified rate at the emptiest horizon.
  const double expected =
      std::max(-std::log(wilson_interval(0, 100, kZ95).high) / 1.0,
               -std::log(wilson_interval(0, 100, kZ95).high) / 2.0);
  CHECK(fit.rate.mu == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("the sweep shares paths across pulls and answers deterministically") {
  const std::vector<double> lambdas = {1.0, 5.0};
  EstimatorOptions opts;
  opts.workers = 1;
  const SweepResult sweep = counterexample_sweep(lambdas, 0.5, 0.5, 2000, 1e-3, 1234, opts);
  REQUIRE(sweep.points.size() == 2);
  CHECK(sweep.points[0].lambda == 1.0);
  CHECK(sweep.points[1].lambda == 5.0);
  CHECK(sweep.points[0].estimate.n_paths == 2000);
  CHECK(sweep.reflected.n_paths == 2000);
  // The stiffest pull here still clears the requested step.
  CHECK(sweep.points[0].dt_effective == 1e-3);
  CHECK(sweep.points[1].dt_effective == 1e-3);

  const SweepResult again = counterexample_sweep(lambdas, 0.5, 0.5, 2000, 1e-3, 1234, opts);
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    check_equal(sweep.points[i].estimate, again.points[i].estimate);
  }
  check_equal(sweep.reflected, again.reflected);
}

TEST_CASE("sweep validates the pull range") {
  EstimatorOptions opts;
  opts.workers = 1;
  const std::vector<double> bad = {0.5};
  CHECK_THROWS_AS(counterexample_sweep(bad, 0.5, 0.5, 10, 1e-3, 1, opts),
                  std::invalid_argument);
  const std::vector<double> none = {};
  CHECK_THROWS_AS(counterexample_sweep(none, 0.5, 0.5, 10, 1e-3, 1, opts),
                  std::invalid_argument);
}

TEST_CASE("pooled standard error") {
  ContainmentEstimate a;
  a.p_hat = 0.5;
  a.n_paths = 100;
  ContainmentEstimate b;
  b.p_hat = 0.2;
  b.n_paths = 400;
  const double expected = std::sqrt(0.5 * 0.5 / 100.0 + 0.2 * 0.8 / 400.0);
  CHECK(pooled_stderr(a, b) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("estimator validates its inputs") {
  const DriftSpec f = DriftSpec::ou(1.0);
  const std::vector<double> x0 = {0.0};
  const std::vector<double> x0_bad = {0.0, 0.0};
  CHECK_THROWS_AS(
      containment_probability(f, NoiseSpec{1.0}, x0_bad, 1.0, 1.0, 10, 0.01, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(containment_probability(f, NoiseSpec{1.0}, x0, -1.0, 1.0, 10, 0.01, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(containment_probability(f, NoiseSpec{1.0}, x0, 1.0, 1.0, 0, 0.01, 1),
                  std::invalid_argument);

  EstimatorOptions bad_bridge;
  bad_bridge.bridge = true;
  const DriftSpec f2 = DriftSpec::ou(1.0, 2);
  const std::vector<double> y0 = {0.0, 0.0};
  CHECK_THROWS_AS(
      containment_probability(f2, NoiseSpec{1.0}, y0, 1.0, 1.0, 10, 0.01, 1, bad_bridge),
      std::invalid_argument);

  EstimatorOptions bad_rotated;
  bad_rotated.rotated = true;
  CHECK_THROWS_AS(
      containment_probability(f, NoiseSpec{1.0}, x0, 1.0, 1.0, 10, 0.01, 1, bad_rotated),
      std::invalid_argument);
}
