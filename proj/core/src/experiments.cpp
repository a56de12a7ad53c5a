#include "losscurv/experiments.hpp"

#include <cmath>
#include <limits>

#include "losscurv/errors.hpp"
#include "losscurv/estimators.hpp"
#include "losscurv/geometry.hpp"
#include "losscurv/rng.hpp"
#include "parallel_for.hpp"

namespace losscurv {

PerturbationReport perturbation_sweep(const ScalarField& field,
                                      std::span<const double> x_min,
                                      const PerturbationConfig& config) {
  if (!(config.epsilon > 0.0))
    throw InvalidInput("perturbation_sweep: epsilon must be > 0");
  if (config.n_directions < 1)
    throw InvalidInput("perturbation_sweep: n_directions must be >= 1");
  const int q = field.dim();
  const double eps = config.epsilon;
  const double slack = config.slack >= 0.0 ? config.slack : 10.0 * eps;

  PerturbationReport report;
  report.epsilon = eps;
  report.n_directions = config.n_directions;
  report.seed = config.seed;
  report.mode =
      config.mode == PerturbationMode::kUnitSphere ? "unit-sphere" : "gaussian";
  report.grad_norm = norm2(field.gradient(x_min));

  if (config.trace_probes > 0) {
    report.trace_h2 =
        trace_h2_estimate(field, x_min, config.trace_probes, config.seed,
                          config.threads)
            .mean;
  } else {
    report.trace_h2 = field.hessian(x_min).sum_sq();
  }
  report.bound = 0.25 * eps * eps * eps * eps * report.trace_h2;

  const double f0 = field.value(x_min);
  const std::size_t nq = static_cast<std::size_t>(q);
  report.deltas.assign(static_cast<std::size_t>(config.n_directions),
                       std::numeric_limits<double>::quiet_NaN());
  std::vector<double> norms(report.deltas.size(), 0.0);

  detail::parallel_for(config.n_directions, config.threads, [&](int d) {
    SplitMix64 rng = substream(config.seed, static_cast<std::uint64_t>(d));
    Vec p(nq);
    if (config.mode == PerturbationMode::kUnitSphere) {
      const Vec dir = sample_unit_sphere(rng, q);
      for (std::size_t i = 0; i < nq; ++i) p[i] = eps * dir[i];
    } else {
      for (std::size_t i = 0; i < nq; ++i) p[i] = eps * rng.normal();
    }
    Vec point(x_min.begin(), x_min.end());
    for (std::size_t i = 0; i < nq; ++i) point[i] += p[i];
    double fp;
    try {
      fp = field.value(point);
    } catch (const Error&) {
      return;  // leaves delta as NaN; counted as a failure below
    }
    if (!std::isfinite(fp)) return;
    const double diff = fp - f0;
    report.deltas[static_cast<std::size_t>(d)] = diff * diff;
    norms[static_cast<std::size_t>(d)] = norm2(p);
  });

  double sum = 0.0;
  int ok = 0;
  for (std::size_t d = 0; d < report.deltas.size(); ++d) {
    const double delta = report.deltas[d];
    if (!std::isfinite(delta)) {
      ++report.failures;
      continue;
    }
    ++ok;
    sum += delta;
    report.max_delta = std::max(report.max_delta, delta);
    double limit;
    if (config.mode == PerturbationMode::kUnitSphere) {
      limit = report.bound * (1.0 + slack);
    } else {
      const double pn = norms[d];
      limit = 0.25 * pn * pn * pn * pn * report.trace_h2 * (1.0 + 10.0 * pn);
    }
    if (delta > limit) ++report.violations;
  }
  report.mean_delta = ok > 0 ? sum / ok : 0.0;
  return report;
}

//--------------------------------------------------------------------------
// Ornstein-Uhlenbeck escape

EscapeReport ou_escape(const SymMatrix& h, const EscapeConfig& config) {
  if (!(config.dt > 0.0)) throw InvalidInput("ou_escape: dt must be > 0");
  if (!(config.t >= 0.0)) throw InvalidInput("ou_escape: t must be >= 0");
  if (config.n_paths < 1) throw InvalidInput("ou_escape: n_paths must be >= 1");

  const long long n_steps = std::llround(config.t / config.dt);
  if (std::abs(n_steps * config.dt - config.t) >
      1e-9 * std::max(config.t, config.dt))
    throw InvalidInput("ou_escape: t must be an integer multiple of dt");

  const PsdSqrtResult sqrt_h = sqrt_psd(h);
  const EigenDecomposition dec = eig_sym(h);
  const double lambda_max = dec.eigenvalues.back();
  if (lambda_max > 0.0 && config.dt > 0.1 / lambda_max)
    throw InvalidInput("ou_escape: dt exceeds the stability bound 0.1/lambda_max");

  const int q = h.dim();
  const std::size_t nq = static_cast<std::size_t>(q);
  const double sqrt_dt = std::sqrt(config.dt);
  const double blow_up = 1e12 * (1.0 + h.sum_sq());

  std::vector<double> escapes(static_cast<std::size_t>(config.n_paths), 0.0);
  std::vector<char> unstable(static_cast<std::size_t>(config.n_paths), 0);

  detail::parallel_for(config.n_paths, config.threads, [&](int p) {
    SplitMix64 rng = substream(config.seed, static_cast<std::uint64_t>(p));
    Vec x(nq, 0.0), noise(nq), hx(nq);
    for (long long s = 0; s < n_steps; ++s) {
      hx = h.multiply(x);
      for (std::size_t i = 0; i < nq; ++i) noise[i] = rng.normal();
      const Vec diffusion = sqrt_h.root.multiply(noise);
      for (std::size_t i = 0; i < nq; ++i)
        x[i] += -hx[i] * config.dt + sqrt_dt * diffusion[i];
      if (dot(x, x) > blow_up) {
        unstable[static_cast<std::size_t>(p)] = 1;
        return;
      }
    }
    escapes[static_cast<std::size_t>(p)] = 0.5 * dot(x, h.multiply(x));
  });

  for (char flag : unstable)
    if (flag)
      throw IntegrationUnstable("ou_escape: a path diverged; reduce dt");

  EscapeReport report;
  report.t = config.t;
  report.dt = config.dt;
  report.n_paths = config.n_paths;
  report.seed = config.seed;
  report.clamped = sqrt_h.clamped;
  report.per_path_escape = std::move(escapes);
  const auto& escapes_ref = report.per_path_escape;

  double sum = 0.0;
  for (double e : escapes_ref) sum += e;
  report.empirical_escape = sum / config.n_paths;
  if (config.n_paths > 1) {
    double ss = 0.0;
    for (double e : escapes_ref)
      ss += (e - report.empirical_escape) * (e - report.empirical_escape);
    report.std_error =
        std::sqrt(ss / (config.n_paths - 1.0) / config.n_paths);
  }
  report.predicted = 0.5 * config.t * h.sum_sq();
  report.rel_error =
      std::abs(report.empirical_escape - report.predicted) /
      std::max(std::abs(report.predicted), 1e-300);
  if (report.predicted == 0.0 && report.empirical_escape == 0.0)
    report.rel_error = 0.0;
  return report;
}

//--------------------------------------------------------------------------
// Minibatch curvature

MinibatchReport minibatch_analysis(
    const std::vector<SymMatrix>& batch_hessians) {
  const int k = static_cast<int>(batch_hessians.size());
  if (k < 2) throw InvalidInput("minibatch_analysis: need k >= 2 batches");
  const int q = batch_hessians.front().dim();
  for (const auto& h : batch_hessians)
    if (h.dim() != q)
      throw InvalidInput("minibatch_analysis: Hessian dimensions differ");

  MinibatchReport report;
  report.k = k;
  SymMatrix full(q);
  for (const auto& h : batch_hessians) {
    report.per_batch_traces.push_back(h.trace());
    report.per_batch_sc.push_back(scalar_curvature_at_min(h));
    full = full.plus(h);
  }
  report.full_hessian = full.scaled(1.0 / k);
  report.full_trace = report.full_hessian.trace();
  report.full_sc = scalar_curvature_at_min(report.full_hessian);

  double trace_sum = 0.0, sc_sum = 0.0;
  for (int b = 0; b < k; ++b) {
    trace_sum += report.per_batch_traces[static_cast<std::size_t>(b)];
    sc_sum += report.per_batch_sc[static_cast<std::size_t>(b)];
  }
  report.mean_batch_trace = trace_sum / k;
  report.mean_batch_sc = sc_sum / k;
  report.trace_gap = std::abs(report.full_trace - report.mean_batch_trace);
  report.sc_gap = std::abs(report.full_sc - report.mean_batch_sc);
  return report;
}

//--------------------------------------------------------------------------
// Saddle grid

SaddleGridResult saddle_grid(double c, const GridAxis& u_axis,
                             const GridAxis& v_axis) {
  if (!(c > 0.0)) throw InvalidInput("saddle_grid: c must be > 0");
  if (u_axis.count < 2 || v_axis.count < 2)
    throw InvalidInput("saddle_grid: resolution must be >= 2 per axis");

  SaddleGridResult out;
  out.c = c;
  out.u_axis = u_axis;
  out.v_axis = v_axis;
  out.records.reserve(static_cast<std::size_t>(u_axis.count) * v_axis.count);

  const double du = (u_axis.max - u_axis.min) / (u_axis.count - 1);
  const double dv = (v_axis.max - v_axis.min) / (v_axis.count - 1);
  for (int iu = 0; iu < u_axis.count; ++iu) {
    const double u = u_axis.min + iu * du;
    for (int iv = 0; iv < v_axis.count; ++iv) {
      const double v = v_axis.min + iv * dv;
      const SaddleAnalytics an = saddle_analytics(u, v, c);
      const double f = std::exp(-c * u) * std::sin(u) * std::sin(v);
      out.records.push_back({u, v, f, an.trace, an.scalar_curvature});
    }
  }
  return out;
}

}  // namespace losscurv
