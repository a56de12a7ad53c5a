#ifndef LOSSCURV_ESTIMATORS_HPP_
#define LOSSCURV_ESTIMATORS_HPP_

#include <cstdint>
#include <span>

#include "losscurv/field.hpp"
#include "losscurv/linalg.hpp"

namespace losscurv {

// Matrix-free stochastic estimators for tr(H) and tr(H^2). Probes are
// Rademacher vectors (lower variance than Gaussian, exact for scalar
// matrices); probe i draws from the stream SplitMix64(seed + i), so results
// are bit-identical for a fixed (x, n_probes, seed) regardless of thread
// count.

struct TraceEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(n); 0 when n == 1
  int n_probes = 0;
  std::uint64_t seed = 0;
};

// Hutchinson estimator of tr(H(x)): mean of v^T (H v) over probes.
TraceEstimate hutchinson_trace(const ScalarField& field,
                               std::span<const double> x, int n_probes,
                               std::uint64_t seed, int threads = 1);

// Estimator of tr(H(x)^2): mean of ||H v||^2 over probes
// (E[v^T H^2 v] = tr(H^2) for Rademacher probes).
TraceEstimate trace_h2_estimate(const ScalarField& field,
                                std::span<const double> x, int n_probes,
                                std::uint64_t seed, int threads = 1);

struct ScMinEstimate {
  double sc = 0.0;  // trace.mean^2 - trace2.mean (plug-in; biased upward
                    // by Var[trace.mean], both components reported)
  TraceEstimate trace_est;
  TraceEstimate trace2_est;
  double grad_norm = 0.0;
  bool near_critical = false;  // grad_norm <= 1e-8 (1 + |f|)
};

// Critical-point scalar curvature from the two trace estimates. Both
// estimates share the same probe streams, so each HVP is paid for once and
// trace_est matches hutchinson_trace(field, x, n, seed) bit for bit.
ScMinEstimate sc_min_estimate(const ScalarField& field,
                              std::span<const double> x_min, int n_probes,
                              std::uint64_t seed, int threads = 1);

// (tr(h)^2 - tr(h^2)) / tr(h)^2; equals (q-1)/q for h = lambda I_q and
// tends to 1 as q grows. Throws DegenerateTrace when tr(h) == 0.
double overparam_ratio(const SymMatrix& h);

}  // namespace losscurv

#endif  // LOSSCURV_ESTIMATORS_HPP_
