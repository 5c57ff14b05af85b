#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pullbound/drift.hpp"
#include "pullbound/spectral.hpp"

namespace pullbound {

// Numerical verification of symmetric pull dominance between drifts. A drift
// f dominates g when f pulls inward at least as hard as g against both g(x)
// and the mirrored -g(-x); dominance transfers containment bounds from the
// g-process down to the f-process. Checks run on finite grids and report the
// minimum slack; a positive margin on a grid is evidence, not proof, except
// for linear and piecewise-linear families, where the slack is piecewise
// linear and the grid minimum (endpoints and 0 included) is exact.

enum class Verdict { holds, violated };

struct Witness {
  std::vector<double> x;
  double slack = 0.0;
};

struct DominanceReport {
  Verdict verdict = Verdict::violated;
  double margin = 0.0;  // minimum slack over the grid; negative iff violated
  std::vector<Witness> witnesses;  // global minimum first, then violations
  std::string grid;
};

// Dimension 1: f(x) <= min(g(x), -g(-x)) on [0,K] and
// f(x) >= max(g(x), -g(-x)) on [-K,0], each checked on a uniform half-grid
// of n_grid points with endpoints and 0 included.
DominanceReport check_dominance_1d(const DriftSpec& f, const DriftSpec& g, double box_halfwidth,
                                   int n_grid = 2001);

// Dimension d >= 2: sup_theta f(r theta)^T theta <= inf_theta g(r theta)^T
// theta over a radial grid on (0,K]. The sup and inf are approximated by
// n_sphere low-discrepancy directions (deterministic given seed, shared
// across radii).
DominanceReport check_dominance_nd(const DriftSpec& f, const DriftSpec& g, double box_halfwidth,
                                   int n_radial = 256, int n_sphere = 512,
                                   std::uint64_t seed = 0);

struct DominanceOptions {
  int n_grid = 2001;
  int n_radial = 256;
  int n_sphere = 512;
  std::uint64_t seed = 0;
};

// Specialization with the reference drift -lambda x; dispatches on dimension.
DominanceReport check_ou_dominance(const DriftSpec& f, double lambda, double box_halfwidth,
                                   const DominanceOptions& opts = {});

std::string to_json(const DominanceReport& report);

// Contraction-rate estimation: the largest eigenvalue of the symmetric part
// of the Jacobian, sampled over the box [-K,K]^d, negated. The Jacobian comes
// from central finite differences with step fd_step * max(1, |x|). The box
// center is always the first sample; the rest are low-discrepancy points.
struct ContractionEstimate {
  double lambda_hat = 0.0;  // positive iff every sampled point contracts
  int n_samples = 0;        // requested sample count
  int n_skipped = 0;        // samples dropped on non-finite evaluation
  double fd_step = 0.0;
  double box_halfwidth = 0.0;  // domain of validity of the estimate
  std::vector<double> min_witness;  // sample with the least-negative eigenvalue
};

ContractionEstimate contraction_rate(const DriftSpec& f, double box_halfwidth, int n_samples,
                                     double fd_step = 1e-5, std::uint64_t seed = 0);

std::string to_json(const ContractionEstimate& estimate);

// Containment bound for the distance between two independent copies of a
// lambda-contracting system: Z = Y - X follows a drift radially dominated by
// -lambda z under noise sqrt(2) sigma, so an Ornstein-Uhlenbeck reference
// bound applies at the normalized radius R sqrt(lambda) / (sqrt(2) sigma).
struct ProvenanceStep {
  int step = 0;
  std::string claim;
  std::string anchor;
};

struct OuReferenceBound {
  double probability = 0.0;  // lower bound on P(sup |Z_t| <= R up to T)
  double mu = 0.0;           // reference decay rate after rescaling
  double radius_normalized = 0.0;
  double lambda = 0.0;
  double sigma_z = 0.0;  // sqrt(2) * sigma
  RateMethod method = RateMethod::kushner;
  std::optional<double> mu_stderr;
  std::vector<ProvenanceStep> provenance;
};

OuReferenceBound contraction_to_ou_bound(double lambda, const NoiseSpec& noise, double radius,
                                         double horizon, RateMethod method,
                                         const SpectralConfig& cfg = {});

std::string to_json(const OuReferenceBound& bound);

}  // namespace pullbound
