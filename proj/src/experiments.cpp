#include "pullbound/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "pullbound/dominance.hpp"
#include "pullbound/estimator.hpp"
#include "pullbound/io.hpp"
#include "pullbound/sim.hpp"
#include "pullbound/spectral.hpp"
#include "pullbound/version.hpp"

namespace pullbound {
namespace {

// Resolved settings stamped into artifacts. Worker counts and output paths
// are deliberately excluded: they do not influence the numbers.
class MetaRows {
 public:
  void add(std::string key, std::string value) {
    rows_.emplace_back(std::move(key), std::move(value));
  }
  void add_double(std::string key, double v) { add(std::move(key), format_double(v)); }
  void add_u64(std::string key, std::uint64_t v) { add(std::move(key), format_u64(v)); }
  void add_int(std::string key, int v) { add(std::move(key), std::to_string(v)); }
  void add_bool(std::string key, bool v) { add(std::move(key), v ? "true" : "false"); }
  void add_list(std::string key, std::span<const double> values) {
    std::string joined;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) joined += ", ";
      joined += format_double(values[i]);
    }
    add(std::move(key), std::move(joined));
  }

  std::string render() const {
    auto sorted = rows_;
    std::sort(sorted.begin(), sorted.end());
    std::string out = std::string("# ") + kVersion + "\n";
    for (const auto& [k, v] : sorted) out += "# " + k + " = " + v + "\n";
    return out;
  }

  nlohmann::json json() const {
    nlohmann::json j;
    for (const auto& [k, v] : rows_) j[k] = v;
    return j;
  }

 private:
  std::vector<std::pair<std::string, std::string>> rows_;
};

std::string resolve_out(const Config& cfg, const CliOverrides& ov) {
  if (ov.out) return *ov.out;
  return cfg.get_string("output", "path");
}

// Status cells share the row with comma-separated numbers.
std::string sanitize_cell(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

RateMethod parse_method(const std::string& name) {
  if (name == "kushner") return RateMethod::kushner;
  if (name == "spectral") return RateMethod::spectral;
  if (name == "asymptotic") return RateMethod::asymptotic;
  throw ConfigError("rates.method: expected kushner, spectral, or asymptotic, got '" + name + "'");
}

// Containment of the distance Z = Y - X between two independent copies of
// the same SDE, both started at the origin. Copy X reads gaussians
// 2dk .. 2dk+d-1 at step k and copy Y the next d, so the pair is a
// deterministic function of (seed, path) and worker counts cannot matter.
struct DistanceResult {
  ContainmentEstimate estimate;
  double dt_effective = 0.0;
};

DistanceResult distance_containment(const DriftSpec& drift, const NoiseSpec& noise, double radius,
                                    double horizon, std::uint64_t n_paths, double dt,
                                    std::uint64_t seed, int workers, bool bridge) {
  validate(noise);
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("radius must be positive and finite");
  }
  if (n_paths == 0) throw std::invalid_argument("n_paths must be positive");
  const int d = drift.dimension();
  if (bridge && d != 1) throw std::invalid_argument("bridge correction needs dimension 1");
  const double dte = effective_dt(dt, drift);
  const std::uint64_t n_steps = step_count(horizon, dte);
  const double scale = noise.sigma * std::sqrt(dte);
  const double sigma_z = std::sqrt(2.0) * noise.sigma;
  const double denom = sigma_z * sigma_z * dte;

  struct Counts {
    std::uint64_t corrected = 0, grid = 0, overflow = 0;
  };
  const auto one_path = [&](std::uint64_t path) {
    RngStream stream(seed, path);
    NormalCursor cursor(stream);
    std::vector<double> x(d, 0.0), y(d, 0.0), fx(d), fy(d);
    Counts c;
    double prev_gap = radius;
    bool corrected_hit = false;
    for (std::uint64_t k = 1; k <= n_steps; ++k) {
      drift.eval(x, fx);
      drift.eval(y, fy);
      for (int i = 0; i < d; ++i) x[i] += fx[i] * dte + scale * cursor.next();
      for (int i = 0; i < d; ++i) y[i] += fy[i] * dte + scale * cursor.next();
      double z2 = 0.0;
      bool finite = true;
      for (int i = 0; i < d; ++i) {
        const double zi = y[i] - x[i];
        z2 += zi * zi;
        finite = finite && std::isfinite(x[i]) && std::isfinite(y[i]);
      }
      if (!finite) {
        c.overflow = 1;
        c.grid = 1;
        c.corrected = 1;
        return c;
      }
      const double gap = radius - std::sqrt(z2);
      if (gap < 0.0) {
        c.grid = 1;
        c.corrected = 1;
        return c;
      }
      if (bridge && !corrected_hit) {
        const double p = std::exp(-2.0 * prev_gap * gap / denom);
        if (stream.uniform(k - 1) < p) {
          corrected_hit = true;
          c.corrected = 1;
        }
      }
      prev_gap = gap;
    }
    return c;
  };

  std::uint64_t n_corrected = 0, n_grid = 0, n_overflow = 0;
  int n_workers = workers;
#ifdef _OPENMP
  if (n_workers <= 0) n_workers = omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(n_workers) \
    reduction(+ : n_corrected, n_grid, n_overflow) if (n_workers > 1)
#endif
  for (long long i = 0; i < static_cast<long long>(n_paths); ++i) {
    const Counts c = one_path(static_cast<std::uint64_t>(i));
    n_corrected += c.corrected;
    n_grid += c.grid;
    n_overflow += c.overflow;
  }

  DistanceResult out;
  out.dt_effective = dte;
  out.estimate.n_paths = n_paths;
  out.estimate.n_exit = bridge ? n_corrected : n_grid;
  out.estimate.n_exit_grid = n_grid;
  out.estimate.n_overflow = n_overflow;
  out.estimate.bridge_corrected = bridge;
  const std::uint64_t contained = n_paths - out.estimate.n_exit;
  out.estimate.p_hat = static_cast<double>(contained) / static_cast<double>(n_paths);
  const auto ci = wilson_interval(contained, n_paths, kZ95);
  out.estimate.ci_low = ci.low;
  out.estimate.ci_high = ci.high;
  return out;
}

}  // namespace

DriftSpec drift_from_config(const Config& cfg, const std::string& section) {
  const auto family = cfg.get_string(section, "family");
  try {
    if (family == "ou") {
      return DriftSpec::ou(cfg.get_double(section, "lambda"),
                           cfg.get_int(section, "dimension", 1));
    }
    if (family == "piecewise") {
      return DriftSpec::piecewise(cfg.get_double(section, "lambda_left"),
                                  cfg.get_double(section, "lambda_right"));
    }
    if (family == "expression") {
      return DriftSpec::expression(cfg.get_string(section, "source"));
    }
    if (family == "radial") {
      return DriftSpec::radial(cfg.get_string(section, "source"),
                               cfg.get_int(section, "dimension"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("[" + section + "] " + e.what());
  }
  throw ConfigError(section + ".family: unknown family '" + family + "'");
}

int cmd_fig_decay(const Config& cfg, const CliOverrides& ov) {
  return guarded([&]() -> int {
    const auto radii = cfg.get_doubles("rates", "radii");
    if (radii.empty()) throw ConfigError("rates.radii: needs at least one radius");
    SpectralConfig scfg;
    scfg.n_grid = cfg.get_int("rates", "n_grid", scfg.n_grid);
    scfg.refinement = cfg.get_int("rates", "refinement", scfg.refinement);
    const bool with_mc = cfg.has("mc", "horizons") && cfg.has("mc", "n_paths");

    MetaRows meta;
    meta.add("experiment.kind", "fig-decay");
    meta.add_list("rates.radii", radii);
    meta.add_int("rates.n_grid", scfg.n_grid);
    meta.add_int("rates.refinement", scfg.refinement);

    std::vector<double> horizons;
    std::uint64_t n_paths = 0, seed = 0;
    double dt = 1e-3;
    bool bridge = true;
    EstimatorOptions eopts;
    if (with_mc) {
      horizons = cfg.get_doubles("mc", "horizons");
      n_paths = cfg.get_u64("mc", "n_paths");
      dt = cfg.get_double("mc", "dt", dt);
      bridge = cfg.get_bool("mc", "bridge", bridge);
      seed = ov.seed ? *ov.seed : cfg.get_u64("mc", "seed", 0);
      eopts.bridge = bridge;
      eopts.workers = ov.workers ? *ov.workers : cfg.get_int("mc", "workers", 0);
      meta.add_list("mc.horizons", horizons);
      meta.add_u64("mc.n_paths", n_paths);
      meta.add_double("mc.dt", dt);
      meta.add_bool("mc.bridge", bridge);
      meta.add_u64("mc.seed", seed);
    }
    const std::string out_path = resolve_out(cfg, ov);

    const auto rows = rate_table(radii, scfg);
    std::string csv = meta.render();
    csv += with_mc ? "R,mu_kushner,mu_spectral,mu_asymptotic,mu_mc,mu_mc_stderr,status\n"
                   : "R,mu_kushner,mu_spectral,mu_asymptotic,status\n";

    // The reference process is the normalized one: unit pull, noise sqrt(2).
    const DriftSpec reference = DriftSpec::ou(1.0);
    const NoiseSpec reference_noise{std::sqrt(2.0)};
    const std::vector<double> origin{0.0};
    for (const auto& row : rows) {
      std::string status = row.spectral_ok ? "ok" : sanitize_cell(row.spectral_error);
      std::string line = format_double(row.radius) + "," + format_double(row.mu_kushner) + "," +
                         format_double(row.mu_spectral) + "," + format_double(row.mu_asymptotic);
      if (with_mc) {
        const DecayFit fit = fit_decay_rate(reference, reference_noise, origin, row.radius,
                                            horizons, n_paths, dt, seed, eopts);
        line += "," + format_double(fit.rate.mu) + "," +
                format_double(fit.rate.stderr_est.value_or(
                    std::numeric_limits<double>::quiet_NaN()));
        if (fit.lower_bound_only && status == "ok") status = "mc-lower-bound";
      }
      csv += line + "," + status + "\n";
    }
    write_text_file(out_path, csv);
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
  });
}

int cmd_fig_counterexample(const Config& cfg, const CliOverrides& ov) {
  return guarded([&]() -> int {
    const auto lambdas = cfg.get_doubles("sweep", "lambdas");
    const double radius = cfg.get_double("query", "radius", 0.5);
    const double horizon = cfg.get_double("query", "horizon", 1.0);
    const auto n_paths = cfg.get_u64("mc", "n_paths", 200000);
    const double dt = cfg.get_double("mc", "dt", 1e-4);
    const bool bridge = cfg.get_bool("mc", "bridge", true);
    const std::uint64_t seed = ov.seed ? *ov.seed : cfg.get_u64("mc", "seed", 0);
    EstimatorOptions eopts;
    eopts.bridge = bridge;
    eopts.workers = ov.workers ? *ov.workers : cfg.get_int("mc", "workers", 0);
    const std::string out_path = resolve_out(cfg, ov);

    MetaRows meta;
    meta.add("experiment.kind", "fig-counterexample");
    meta.add_list("sweep.lambdas", lambdas);
    meta.add_double("query.radius", radius);
    meta.add_double("query.horizon", horizon);
    meta.add_u64("mc.n_paths", n_paths);
    meta.add_double("mc.dt", dt);
    meta.add_bool("mc.bridge", bridge);
    meta.add_u64("mc.seed", seed);

    const SweepResult sweep =
        counterexample_sweep(lambdas, radius, horizon, n_paths, dt, seed, eopts);

    std::string csv = meta.render();
    csv += "lambda,p_hat,ci_low,ci_high\n";
    for (const auto& point : sweep.points) {
      csv += format_double(point.lambda) + "," + format_double(point.estimate.p_hat) + "," +
             format_double(point.estimate.ci_low) + "," + format_double(point.estimate.ci_high) +
             "\n";
    }
    csv += std::string("reflected,") + format_double(sweep.reflected.p_hat) + "," +
           format_double(sweep.reflected.ci_low) + "," + format_double(sweep.reflected.ci_high) +
           "\n";
    write_text_file(out_path, csv);
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
  });
}

int cmd_coupling_demo(const Config& cfg, const CliOverrides& ov) {
  return guarded([&]() -> int {
    const DriftSpec f = drift_from_config(cfg, "drift_x");
    const DriftSpec g = drift_from_config(cfg, "drift_y");
    if (f.dimension() != 1 || g.dimension() != 1) {
      throw ConfigError("coupling demo needs one-dimensional drifts");
    }
    const double check_radius = cfg.get_double("query", "check_radius");
    const double horizon = cfg.get_double("query", "horizon", 1.0);
    const double dt = cfg.get_double("sim", "dt", 1e-3);
    const double eps = cfg.get_double("sim", "eps", 0.5);
    const std::uint64_t seed = ov.seed ? *ov.seed : cfg.get_u64("sim", "seed", 0);
    const int n_grid = cfg.get_int("dominance", "n_grid", 2001);
    const std::string out_path = resolve_out(cfg, ov);

    const DominanceReport report = check_dominance_1d(f, g, check_radius, n_grid);
    if (report.verdict == Verdict::violated && !ov.force) {
      std::cerr << "dominance check failed: margin " << format_double(report.margin) << " at x = "
                << format_double(report.witnesses.front().x[0])
                << " (pass --force to simulate anyway)\n";
      return kExitDominance;
    }

    MetaRows meta;
    meta.add("experiment.kind", "coupling-demo");
    meta.add("drift_x.describe", f.describe());
    meta.add("drift_y.describe", g.describe());
    meta.add_double("query.check_radius", check_radius);
    meta.add_double("query.horizon", horizon);
    meta.add_double("sim.dt", dt);
    meta.add_double("sim.eps", eps);
    meta.add_u64("sim.seed", seed);
    meta.add_int("dominance.n_grid", n_grid);
    meta.add_double("dominance.margin", report.margin);
    if (report.verdict == Verdict::violated) meta.add_bool("dominance.forced", true);

    const RngStream stream(seed, 0);
    const CoupledPair pair = simulate_coupled_1d(f, g, dt, horizon, check_radius, stream);
    meta.add_double("sim.dt_effective", pair.x.dt);
    const HittingTimes ht = hitting_times(pair.y, eps);

    std::string csv = meta.render();
    csv += "t,x,y,tau,upsilon\n";
    const std::size_t n = pair.x.n_points();
    for (std::size_t i = 0; i < n; ++i) {
      csv += format_double(pair.x.time_at(i)) + "," + format_double(pair.x.states[i]) + "," +
             format_double(pair.y.states[i]) + ",";
      if (i < ht.tau.size()) csv += format_double(ht.tau[i]);
      csv += ",";
      if (i < ht.upsilon.size()) csv += format_double(ht.upsilon[i]);
      csv += "\n";
    }
    write_text_file(out_path, csv);
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
  });
}

int cmd_bound(const Config& cfg, const CliOverrides& ov) {
  return guarded([&]() -> int {
    const DriftSpec drift = drift_from_config(cfg, "drift");
    const NoiseSpec noise{cfg.get_double("noise", "sigma", 1.0)};
    validate(noise);
    const double radius = cfg.get_double("query", "radius");
    const double horizon = cfg.get_double("query", "horizon");
    const double box = cfg.get_double("query", "check_radius");
    if (!(radius > 0.0)) throw ConfigError("query.radius: must be positive");

    const int n_samples = cfg.get_int("contraction", "n_samples", 256);
    const double fd_step = cfg.get_double("contraction", "fd_step", 1e-5);
    const std::uint64_t cseed = ov.seed ? *ov.seed : cfg.get_u64("contraction", "seed", 0);
    DominanceOptions dopts;
    dopts.n_grid = cfg.get_int("dominance", "n_grid", dopts.n_grid);
    dopts.n_radial = cfg.get_int("dominance", "n_radial", dopts.n_radial);
    dopts.n_sphere = cfg.get_int("dominance", "n_sphere", dopts.n_sphere);
    dopts.seed = ov.seed ? *ov.seed : cfg.get_u64("dominance", "seed", 0);
    const RateMethod method = parse_method(cfg.get_string("rates", "method", "asymptotic"));
    SpectralConfig scfg;
    scfg.n_grid = cfg.get_int("rates", "n_grid", scfg.n_grid);
    scfg.refinement = cfg.get_int("rates", "refinement", scfg.refinement);
    const auto n_paths = cfg.get_u64("mc", "n_paths", 20000);
    const double dt = cfg.get_double("mc", "dt", 1e-3);
    const bool bridge = cfg.get_bool("mc", "bridge", drift.dimension() == 1);
    const std::uint64_t mseed = ov.seed ? *ov.seed : cfg.get_u64("mc", "seed", 0);
    const int workers = ov.workers ? *ov.workers : cfg.get_int("mc", "workers", 0);
    const std::string out_path = resolve_out(cfg, ov);

    MetaRows meta;
    meta.add("experiment.kind", "bound");
    meta.add("drift.describe", drift.describe());
    meta.add_double("noise.sigma", noise.sigma);
    meta.add_double("query.radius", radius);
    meta.add_double("query.horizon", horizon);
    meta.add_double("query.check_radius", box);
    meta.add_int("contraction.n_samples", n_samples);
    meta.add_double("contraction.fd_step", fd_step);
    meta.add_u64("contraction.seed", cseed);
    meta.add_int("dominance.n_grid", dopts.n_grid);
    meta.add_int("dominance.n_radial", dopts.n_radial);
    meta.add_int("dominance.n_sphere", dopts.n_sphere);
    meta.add_u64("dominance.seed", dopts.seed);
    meta.add("rates.method", rate_method_name(method));
    meta.add_u64("mc.n_paths", n_paths);
    meta.add_double("mc.dt", dt);
    meta.add_bool("mc.bridge", bridge);
    meta.add_u64("mc.seed", mseed);

    nlohmann::json artifact;
    artifact["version"] = kVersion;
    artifact["config"] = meta.json();

    const ContractionEstimate est = contraction_rate(drift, box, n_samples, fd_step, cseed);
    artifact["contraction"] = nlohmann::json::parse(to_json(est));

    if (!(est.lambda_hat > 0.0)) {
      artifact["verdict"] = "violated";
      artifact["witness"] = est.min_witness;
      write_text_file(out_path, artifact.dump(2) + "\n");
      std::cerr << "drift is not contracting on the sampled box (lambda_hat = "
                << format_double(est.lambda_hat) << "); no bound emitted\n";
      std::cout << "wrote " << out_path << "\n";
      return kExitDominance;
    }

    const DominanceReport report = check_ou_dominance(drift, est.lambda_hat, box, dopts);
    artifact["dominance"] = nlohmann::json::parse(to_json(report));
    if (report.verdict == Verdict::violated && !ov.force) {
      artifact["verdict"] = "violated";
      write_text_file(out_path, artifact.dump(2) + "\n");
      std::cerr << "reference dominance check failed at the estimated contraction rate "
                << "(margin " << format_double(report.margin)
                << "); no bound emitted (pass --force to continue)\n";
      std::cout << "wrote " << out_path << "\n";
      return kExitDominance;
    }

    const OuReferenceBound bound =
        contraction_to_ou_bound(est.lambda_hat, noise, radius, horizon, method, scfg);
    artifact["bound"] = nlohmann::json::parse(to_json(bound));

    const DistanceResult mc = distance_containment(drift, noise, radius, horizon, n_paths, dt,
                                                   mseed, workers, bridge);
    artifact["mc"] = {{"p_hat", mc.estimate.p_hat},
                      {"ci_low", mc.estimate.ci_low},
                      {"ci_high", mc.estimate.ci_high},
                      {"n_paths", mc.estimate.n_paths},
                      {"n_exit", mc.estimate.n_exit},
                      {"n_exit_grid", mc.estimate.n_exit_grid},
                      {"n_overflow", mc.estimate.n_overflow},
                      {"bridge_corrected", mc.estimate.bridge_corrected},
                      {"dt_effective", mc.dt_effective}};
    write_text_file(out_path, artifact.dump(2) + "\n");
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
  });
}

int cmd_trap_demo(const Config& cfg, const CliOverrides& ov) {
  return guarded([&]() -> int {
    const DriftSpec drift = drift_from_config(cfg, "drift");
    if (drift.family() != DriftFamily::radial || drift.dimension() != 2) {
      throw ConfigError("trap demo needs a radial drift with dimension = 2");
    }
    const double beam = cfg.get_double("trap", "beam_radius");
    if (!(beam > 0.0)) throw ConfigError("trap.beam_radius: must be positive");
    // The trapping force must vanish outside the beam.
    std::vector<double> probe(2), force(2);
    for (int i = 1; i <= 16; ++i) {
      probe[0] = beam * (1.0 + static_cast<double>(i) / 16.0);
      probe[1] = 0.0;
      drift.eval(probe, force);
      if (std::abs(force[0]) > 1e-9 || std::abs(force[1]) > 1e-9) {
        throw ConfigError("drift.source: trap force must vanish for r > trap.beam_radius (found " +
                          format_double(force[0]) + " at r = " + format_double(probe[0]) + ")");
      }
    }
    const NoiseSpec noise{cfg.get_double("noise", "sigma", 1.0)};
    validate(noise);
    const double radius = cfg.get_double("query", "radius");
    const double horizon = cfg.get_double("query", "horizon", 1.0);
    const double dt = cfg.get_double("sim", "dt", 1e-3);
    const std::uint64_t seed = ov.seed ? *ov.seed : cfg.get_u64("sim", "seed", 0);
    const int n_display = cfg.get_int("sim", "n_display", 8);
    if (n_display < 1) throw ConfigError("sim.n_display: must be positive");
    const std::string out_path = resolve_out(cfg, ov);

    MetaRows meta;
    meta.add("experiment.kind", "trap-demo");
    meta.add("drift.describe", drift.describe());
    meta.add_double("trap.beam_radius", beam);
    meta.add_double("noise.sigma", noise.sigma);
    meta.add_double("query.radius", radius);
    meta.add_double("query.horizon", horizon);
    meta.add_double("sim.dt", dt);
    meta.add_u64("sim.seed", seed);
    meta.add_int("sim.n_display", n_display);

    std::string csv = meta.render();
    csv += "path,t,x1,x2,exit\n";
    const std::vector<double> origin{0.0, 0.0};
    for (int p = 0; p < n_display; ++p) {
      const RngStream stream(seed, static_cast<std::uint64_t>(p));
      const Trajectory traj = euler_maruyama(drift, noise, origin, horizon, dt, stream);
      const ExitResult exit = first_exit(traj, radius);
      std::size_t exit_index = traj.n_points();  // past the end: no exit row
      if (exit.time) {
        exit_index = static_cast<std::size_t>(std::llround(*exit.time / traj.dt));
      }
      for (std::size_t i = 0; i < traj.n_points(); ++i) {
        const auto state = traj.state_at(i);
        csv += std::to_string(p) + "," + format_double(traj.time_at(i)) + "," +
               format_double(state[0]) + "," + format_double(state[1]) + "," +
               (i == exit_index ? "1" : "0") + "\n";
      }
    }
    write_text_file(out_path, csv);
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
  });
}

}  // namespace pullbound

// CLI surface. Kept in the library so tests can drive subcommands in-process.
#include <CLI11.hpp>

namespace pullbound {

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"containment probability bounds for stochastic differential equations"};
  app.require_subcommand(1);

  std::string config_path;
  CliOverrides ov;
  std::optional<std::string> out_opt;
  std::optional<std::uint64_t> seed_opt;
  std::optional<int> workers_opt;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fig-decay", "decay-rate table for the reference process, optionally with a Monte Carlo fit"},
      {"fig-counterexample", "containment vs one-sided pull strengthening, with reflected limit"},
      {"coupling-demo", "one coupled trajectory pair with hitting-time markers"},
      {"bound", "contraction-based containment bound with Monte Carlo cross-check"},
      {"trap-demo", "two-dimensional trap trajectories with exit flags"},
  };
  for (const auto& [name, desc] : commands) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "config file path")->required();
    sub->add_option("--out", out_opt, "override output.path");
    sub->add_option("--seed", seed_opt, "override every seed the command reads");
    sub->add_option("--workers", workers_opt, "worker count (1 = serial reference)");
    sub->add_flag("--force", ov.force, "proceed past a dominance refusal");
  }

  std::vector<const char*> argv;
  argv.push_back("pullbound");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  ov.out = out_opt;
  ov.seed = seed_opt;
  ov.workers = workers_opt;

  Config cfg;
  try {
    cfg = Config::load(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (app.got_subcommand("fig-decay")) return cmd_fig_decay(cfg, ov);
  if (app.got_subcommand("fig-counterexample")) return cmd_fig_counterexample(cfg, ov);
  if (app.got_subcommand("coupling-demo")) return cmd_coupling_demo(cfg, ov);
  if (app.got_subcommand("bound")) return cmd_bound(cfg, ov);
  if (app.got_subcommand("trap-demo")) return cmd_trap_demo(cfg, ov);
  return kExitConfig;
}

}  // namespace pullbound
