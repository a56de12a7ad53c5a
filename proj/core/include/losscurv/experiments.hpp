#ifndef LOSSCURV_EXPERIMENTS_HPP_
#define LOSSCURV_EXPERIMENTS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "losscurv/field.hpp"
#include "losscurv/linalg.hpp"

namespace losscurv {

// Desk-scale experiment drivers: perturbation robustness of near-minima,
// Ornstein-Uhlenbeck escape efficiency, minibatch curvature aggregation and
// the saddle-surface grid. Work items (directions, paths) draw from
// per-item streams SplitMix64(seed + index) and are reduced in index order,
// so every report is deterministic for a fixed seed and thread count
// independent.

enum class PerturbationMode { kUnitSphere, kGaussian };

struct PerturbationConfig {
  double epsilon = 0.01;  // radius (unit-sphere) or per-coordinate sigma
  int n_directions = 1000;
  PerturbationMode mode = PerturbationMode::kUnitSphere;
  double slack = -1.0;    // violation slack; < 0 selects the default 10*eps
  std::uint64_t seed = 0;
  int threads = 1;
  // Bound uses the dense Hessian by default; set > 0 to use the stochastic
  // tr(H^2) estimator with that many probes instead (large q).
  int trace_probes = 0;
};

struct PerturbationReport {
  double epsilon = 0.0;
  int n_directions = 0;
  std::uint64_t seed = 0;
  std::string mode;
  std::vector<double> deltas;  // squared loss changes; NaN where evaluation failed
  double bound = 0.0;          // eps^4/4 * tr(H^2)
  double trace_h2 = 0.0;
  int violations = 0;
  double mean_delta = 0.0;
  double max_delta = 0.0;
  double grad_norm = 0.0;      // gradient norm at the base point
  int failures = 0;
};

// Squared loss deltas |f(x + p) - f(x)|^2 for perturbations p. Unit-sphere
// mode uses p = eps * d with d uniform on the sphere and counts violations
// of delta <= bound * (1 + slack); Gaussian mode uses pointwise
// N(0, eps^2) noise and counts violations against the per-draw bound
// (||p||^4/4) tr(H^2) (1 + 10 ||p||), since the draw norm varies.
PerturbationReport perturbation_sweep(const ScalarField& field,
                                      std::span<const double> x_min,
                                      const PerturbationConfig& config);

struct EscapeConfig {
  double t = 0.01;
  double dt = 1e-3;
  int n_paths = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct EscapeReport {
  double t = 0.0;
  double dt = 0.0;
  int n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<double> per_path_escape;  // f(x_t) - f(0) per path
  double empirical_escape = 0.0;        // mean over paths
  double std_error = 0.0;
  double predicted = 0.0;               // (t/2) tr(H^2)
  double rel_error = 0.0;
  bool clamped = false;                 // sqrt_psd clamped tiny negatives
};

// Euler-Maruyama simulation of dx = -H x dt + H^(1/2) dW from x_0 = 0 on
// the quadratic surrogate f = 1/2 x' H x. Requires h PSD (clamped through
// sqrt_psd), dt <= 0.1 / lambda_max and t an integer multiple of dt.
EscapeReport ou_escape(const SymMatrix& h, const EscapeConfig& config);

struct MinibatchReport {
  int k = 0;
  std::vector<double> per_batch_traces;
  std::vector<double> per_batch_sc;  // critical-point curvature per batch
  SymMatrix full_hessian;
  double full_trace = 0.0;
  double full_sc = 0.0;
  double mean_batch_trace = 0.0;
  double mean_batch_sc = 0.0;
  double trace_gap = 0.0;  // |full_trace - mean(batch traces)|; ~0 always
  double sc_gap = 0.0;     // |full_sc - mean(batch sc)|; can be large
};

// Aggregates per-batch Hessians: the full Hessian is their mean, traces are
// linear (trace_gap vanishes) while the critical-point curvature is not.
MinibatchReport minibatch_analysis(const std::vector<SymMatrix>& batch_hessians);

struct GridAxis {
  double min = 0.0;
  double max = 1.0;
  int count = 2;  // >= 2
};

struct SaddleGridRecord {
  double u, v, f, trace_h, sc;
};

struct SaddleGridResult {
  double c = 0.0;
  GridAxis u_axis, v_axis;
  std::vector<SaddleGridRecord> records;  // row-major, u outer, v inner
};

// Field value, Hessian trace and full scalar curvature of the saddle field
// on a rectangular grid.
SaddleGridResult saddle_grid(double c, const GridAxis& u_axis,
                             const GridAxis& v_axis);

}  // namespace losscurv

#endif  // LOSSCURV_EXPERIMENTS_HPP_
