#include "losscurv/estimators.hpp"

#include <cmath>

#include "losscurv/errors.hpp"
#include "losscurv/rng.hpp"
#include "parallel_for.hpp"

namespace losscurv {

namespace {

Vec rademacher_probe(std::uint64_t seed, std::uint64_t index, int q) {
  SplitMix64 rng = substream(seed, index);
  Vec v(static_cast<std::size_t>(q));
  for (auto& vi : v) vi = rng.rademacher();
  return v;
}

TraceEstimate reduce(const std::vector<double>& samples, std::uint64_t seed) {
  TraceEstimate est;
  est.n_probes = static_cast<int>(samples.size());
  est.seed = seed;
  double sum = 0.0;
  for (double s : samples) sum += s;
  est.mean = sum / est.n_probes;
  if (est.n_probes > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - est.mean) * (s - est.mean);
    est.std_error = std::sqrt(ss / (est.n_probes - 1.0) / est.n_probes);
  }
  return est;
}

struct ProbeSamples {
  std::vector<double> vhv;     // v^T H v
  std::vector<double> hv_sq;   // ||H v||^2
};

ProbeSamples run_probes(const ScalarField& field, std::span<const double> x,
                        int n_probes, std::uint64_t seed, int threads) {
  if (n_probes < 1) throw InvalidInput("estimators: n_probes must be >= 1");
  const int q = field.dim();
  ProbeSamples samples;
  samples.vhv.resize(static_cast<std::size_t>(n_probes));
  samples.hv_sq.resize(static_cast<std::size_t>(n_probes));
  detail::parallel_for(n_probes, threads, [&](int i) {
    const Vec v = rademacher_probe(seed, static_cast<std::uint64_t>(i), q);
    const Vec hv = field.hvp(x, v);
    samples.vhv[static_cast<std::size_t>(i)] = dot(v, hv);
    samples.hv_sq[static_cast<std::size_t>(i)] = dot(hv, hv);
  });
  return samples;
}

}  // namespace

TraceEstimate hutchinson_trace(const ScalarField& field,
                               std::span<const double> x, int n_probes,
                               std::uint64_t seed, int threads) {
  return reduce(run_probes(field, x, n_probes, seed, threads).vhv, seed);
}

TraceEstimate trace_h2_estimate(const ScalarField& field,
                                std::span<const double> x, int n_probes,
                                std::uint64_t seed, int threads) {
  return reduce(run_probes(field, x, n_probes, seed, threads).hv_sq, seed);
}

ScMinEstimate sc_min_estimate(const ScalarField& field,
                              std::span<const double> x_min, int n_probes,
                              std::uint64_t seed, int threads) {
  const ProbeSamples samples = run_probes(field, x_min, n_probes, seed, threads);
  ScMinEstimate out;
  out.trace_est = reduce(samples.vhv, seed);
  out.trace2_est = reduce(samples.hv_sq, seed);
  out.sc = out.trace_est.mean * out.trace_est.mean - out.trace2_est.mean;
  out.grad_norm = norm2(field.gradient(x_min));
  out.near_critical =
      out.grad_norm <= 1e-8 * (1.0 + std::abs(field.value(x_min)));
  return out;
}

double overparam_ratio(const SymMatrix& h) {
  if (!h.finite()) throw InvalidInput("overparam_ratio: non-finite entries");
  const double trace = h.trace();
  if (trace == 0.0)
    throw DegenerateTrace("overparam_ratio: tr(h) == 0");
  const double trace_sq = h.sum_sq();
  return (trace * trace - trace_sq) / (trace * trace);
}

}  // namespace losscurv
