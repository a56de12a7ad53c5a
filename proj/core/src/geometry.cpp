#include "losscurv/geometry.hpp"

#include <cmath>
#include <numbers>

#include "losscurv/errors.hpp"
#include "losscurv/rng.hpp"
#include "parallel_for.hpp"

namespace losscurv {

namespace {

// Gradient and Hessian of the field at one point, shared by the tensor
// routines below.
struct LocalJet {
  Vec grad;
  SymMatrix hess;
  double beta;
  Vec h_grad;  // H grad
};

LocalJet local_jet(const ScalarField& field, std::span<const double> x) {
  LocalJet jet;
  jet.grad = field.gradient(x);
  if (!all_finite(jet.grad))
    throw EvaluationFailure("geometry: non-finite gradient");
  jet.hess = field.hessian(x);
  if (!jet.hess.finite())
    throw EvaluationFailure("geometry: non-finite Hessian");
  jet.beta = 1.0 / (1.0 + dot(jet.grad, jet.grad));
  jet.h_grad = jet.hess.multiply(jet.grad);
  return jet;
}

}  // namespace

MetricAtPoint metric_at(const ScalarField& field, std::span<const double> x) {
  const Vec grad = field.gradient(x);
  if (!all_finite(grad)) throw EvaluationFailure("metric_at: non-finite gradient");
  const int q = field.dim();
  const double grad_sq = dot(grad, grad);

  MetricAtPoint m;
  m.point.assign(x.begin(), x.end());
  m.grad = grad;
  m.det_g = 1.0 + grad_sq;
  m.beta = 1.0 / m.det_g;
  m.g = SymMatrix::identity(q).plus(SymMatrix::outer(grad));
  m.g_inv = SymMatrix::identity(q).plus(SymMatrix::outer(grad, -m.beta));
  return m;
}

ChristoffelTensor::ChristoffelTensor(int dim)
    : dim_(dim),
      data_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {
  if (dim < 1) throw InvalidInput("ChristoffelTensor: dim must be >= 1");
}

ChristoffelTensor christoffel_at(const ScalarField& field,
                                 std::span<const double> x) {
  const LocalJet jet = local_jet(field, x);
  const int q = field.dim();
  ChristoffelTensor gamma(q);
  for (int i = 0; i < q; ++i) {
    const double bi = jet.beta * jet.grad[static_cast<std::size_t>(i)];
    for (int k = 0; k < q; ++k)
      for (int l = k; l < q; ++l) gamma.set(i, k, l, bi * jet.hess(k, l));
  }
  return gamma;
}

Vec christoffel_contraction(const ScalarField& field,
                            std::span<const double> x) {
  const LocalJet jet = local_jet(field, x);
  Vec out(jet.h_grad);
  for (auto& v : out) v *= jet.beta;
  return out;
}

RiemannTensor::RiemannTensor(int dim)
    : dim_(dim),
      data_(static_cast<std::size_t>(dim) * dim * dim * dim, 0.0) {
  if (dim < 1) throw InvalidInput("RiemannTensor: dim must be >= 1");
}

RiemannTensor riemann_at(const ScalarField& field, std::span<const double> x) {
  const LocalJet jet = local_jet(field, x);
  const int q = field.dim();
  const double b = jet.beta;
  const double b2 = b * b;
  RiemannTensor r(q);
  for (int i = 0; i < q; ++i) {
    const double gi = jet.grad[static_cast<std::size_t>(i)];
    for (int j = 0; j < q; ++j)
      for (int k = 0; k < q; ++k)
        for (int m = 0; m < q; ++m) {
          const double gauss =
              jet.hess(i, k) * jet.hess(j, m) - jet.hess(i, m) * jet.hess(j, k);
          const double tangent =
              jet.h_grad[static_cast<std::size_t>(k)] * jet.hess(j, m) -
              jet.h_grad[static_cast<std::size_t>(m)] * jet.hess(j, k);
          r.set(i, j, k, m, b * gauss - b2 * gi * tangent);
        }
  }
  return r;
}

SymMatrix ricci_at(const ScalarField& field, std::span<const double> x) {
  const LocalJet jet = local_jet(field, x);
  const int q = field.dim();
  const double trace_h = jet.hess.trace();
  const double ghg = dot(jet.grad, jet.h_grad);
  const SymMatrix h_sq = jet.hess.square();
  const double b = jet.beta, b2 = b * b;

  SymMatrix ricci(q);
  for (int a = 0; a < q; ++a)
    for (int c = a; c < q; ++c) {
      const double value =
          b * (trace_h * jet.hess(a, c) - h_sq(a, c)) -
          b2 * (ghg * jet.hess(a, c) -
                jet.h_grad[static_cast<std::size_t>(a)] *
                    jet.h_grad[static_cast<std::size_t>(c)]);
      ricci.set(a, c, value);
    }
  return ricci;
}

CurvatureReport scalar_curvature_at(const ScalarField& field,
                                    std::span<const double> x) {
  const LocalJet jet = local_jet(field, x);
  const double f0 = field.value(x);
  const MatrixNorms norms = matrix_norms(jet.hess);

  CurvatureReport report;
  report.point.assign(x.begin(), x.end());
  report.beta = jet.beta;
  report.grad_norm = norm2(jet.grad);
  report.trace_h = norms.trace;
  report.trace_h2 = norms.trace_sq;
  report.nuclear_h = norms.nuclear;
  report.frobenius_h = norms.frobenius;

  const double ghg = dot(jet.grad, jet.h_grad);
  const double g_h2_g = dot(jet.h_grad, jet.h_grad);
  report.scalar_curvature =
      jet.beta * (norms.trace * norms.trace - norms.trace_sq) +
      2.0 * jet.beta * jet.beta * (g_h2_g - norms.trace * ghg);
  report.at_critical_point =
      report.grad_norm <= 1e-8 * (1.0 + std::abs(f0));
  report.smoothness_warning = !field.capabilities().smooth;
  return report;
}

double scalar_curvature_at_min(const SymMatrix& h) {
  const double trace = h.trace();
  return trace * trace - h.sum_sq();
}

NormIdentity norm_identity_at_min(const SymMatrix& h) {
  const MatrixNorms norms = matrix_norms(h);
  const EigenDecomposition dec = eig_sym(h);
  NormIdentity out;
  out.sc = norms.trace * norms.trace - norms.trace_sq;
  out.norm_expression =
      norms.nuclear * norms.nuclear - norms.frobenius * norms.frobenius;
  out.min_eigenvalue = dec.eigenvalues.front();
  out.applicable = out.min_eigenvalue >= -1e-10 * (1.0 + norms.frobenius);
  return out;
}

//--------------------------------------------------------------------------
// Geodesics

namespace {

constexpr int kGeodesicSteps = 512;
constexpr int kRenormInterval = 32;

double g_norm(const ScalarField& field, std::span<const double> pos,
              std::span<const double> vel) {
  const Vec grad = field.gradient(pos);
  const double gv = dot(grad, vel);
  return std::sqrt(dot(vel, vel) + gv * gv);
}

// x'' = -beta (x'^T H x') grad f.
void geodesic_acceleration(const ScalarField& field,
                           std::span<const double> pos,
                           std::span<const double> vel, Vec& acc) {
  const Vec grad = field.gradient(pos);
  const Vec hv = field.hvp(pos, vel);
  const double beta = 1.0 / (1.0 + dot(grad, grad));
  const double coeff = -beta * dot(vel, hv);
  acc.resize(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) acc[i] = coeff * grad[i];
}

}  // namespace

Vec g_normalize(const MetricAtPoint& metric, std::span<const double> v) {
  const double gv = dot(metric.grad, v);
  const double n = std::sqrt(dot(v, v) + gv * gv);
  if (!(n > 0.0) || !std::isfinite(n))
    throw InvalidInput("g_normalize: zero or non-finite vector");
  Vec out(v.begin(), v.end());
  for (auto& vi : out) vi /= n;
  return out;
}

Vec exp_map(const ScalarField& field, std::span<const double> x,
            std::span<const double> v, double r) {
  const int q = field.dim();
  if (static_cast<int>(x.size()) != q || static_cast<int>(v.size()) != q)
    throw InvalidInput("exp_map: dimension mismatch");
  if (!(r >= 0.0) || !std::isfinite(r))
    throw InvalidInput("exp_map: arc length must be finite and >= 0");
  if (r == 0.0) return Vec(x.begin(), x.end());

  Vec pos(x.begin(), x.end());
  Vec vel(v.begin(), v.end());
  {
    const double gn = g_norm(field, pos, vel);
    if (std::abs(gn - 1.0) > 1e-6)
      throw InvalidInput("exp_map: initial velocity must have unit g-norm");
  }

  const double h = r / kGeodesicSteps;
  if (!(h > 0.0)) throw GeodesicFailure("exp_map: step underflow");

  const std::size_t n = static_cast<std::size_t>(q);
  Vec k1(n), k2(n), k3(n), k4(n);   // accelerations
  Vec p1(n), p2(n), p3(n);          // staged positions
  Vec v1(n), v2(n), v3(n);          // staged velocities

  for (int step = 0; step < kGeodesicSteps; ++step) try {
    geodesic_acceleration(field, pos, vel, k1);
    for (std::size_t i = 0; i < n; ++i) {
      p1[i] = pos[i] + 0.5 * h * vel[i];
      v1[i] = vel[i] + 0.5 * h * k1[i];
    }
    geodesic_acceleration(field, p1, v1, k2);
    for (std::size_t i = 0; i < n; ++i) {
      p2[i] = pos[i] + 0.5 * h * v1[i];
      v2[i] = vel[i] + 0.5 * h * k2[i];
    }
    geodesic_acceleration(field, p2, v2, k3);
    for (std::size_t i = 0; i < n; ++i) {
      p3[i] = pos[i] + h * v2[i];
      v3[i] = vel[i] + h * k3[i];
    }
    geodesic_acceleration(field, p3, v3, k4);
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] += h / 6.0 * (vel[i] + 2.0 * v1[i] + 2.0 * v2[i] + v3[i]);
      vel[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (!all_finite(pos) || !all_finite(vel))
      throw GeodesicFailure("exp_map: non-finite state during integration");
    if ((step + 1) % kRenormInterval == 0) {
      const double gn = g_norm(field, pos, vel);
      if (!(gn > 0.0)) throw GeodesicFailure("exp_map: degenerate velocity");
      for (auto& vi : vel) vi /= gn;
    }
  } catch (const EvaluationFailure& e) {
    throw GeodesicFailure(std::string("exp_map: field evaluation failed: ") +
                          e.what());
  }
  return pos;
}

//--------------------------------------------------------------------------
// Geodesic ball volume

double euclidean_ball_volume(int q, double r) {
  if (q < 1) throw InvalidInput("euclidean_ball_volume: q must be >= 1");
  return std::pow(std::numbers::pi, 0.5 * q) /
         std::tgamma(0.5 * q + 1.0) * std::pow(r, q);
}

namespace {

double unit_sphere_area(int q) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * q) / std::tgamma(0.5 * q);
}

// sqrt(det g) |det J_exp| at w = t * theta (theta has unit g-norm at x).
// The Jacobian is taken by forward differences of the exponential map.
double radial_density(const ScalarField& field, const MetricAtPoint& metric,
                      std::span<const double> theta, double t, double delta) {
  const int q = field.dim();
  const std::size_t n = static_cast<std::size_t>(q);
  Vec w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = t * theta[i];

  auto exp_of = [&](std::span<const double> u) {
    const double gu = dot(metric.grad, u);
    const double s = std::sqrt(dot(u, u) + gu * gu);
    Vec dir(u.begin(), u.end());
    for (auto& d : dir) d /= s;
    return exp_map(field, metric.point, dir, s);
  };

  const Vec base = exp_of(w);
  Matrix jac(q, q);
  Vec wj(w);
  for (int j = 0; j < q; ++j) {
    wj[static_cast<std::size_t>(j)] += delta;
    const Vec pushed = exp_of(wj);
    wj[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j)];
    for (int i = 0; i < q; ++i)
      jac(i, j) = (pushed[static_cast<std::size_t>(i)] -
                   base[static_cast<std::size_t>(i)]) /
                  delta;
  }
  const Vec grad_y = field.gradient(base);
  return std::sqrt(1.0 + dot(grad_y, grad_y)) * std::abs(jac.det());
}

// Composite Simpson of sqrt(det g)|det J| t^(q-1) over t in [0, r].
double radial_integral(const ScalarField& field, const MetricAtPoint& metric,
                       std::span<const double> theta, double r,
                       const QuadratureSpec& quad) {
  const int q = field.dim();
  const int m = quad.radial_intervals;
  const double dt = r / m;
  double sum = 0.0;
  for (int j = 0; j <= m; ++j) {
    const double t = j * dt;
    double value;
    if (j == 0) {
      // J_exp(0) = I; the polar factor kills the node unless q == 1.
      value = q == 1 ? std::sqrt(metric.det_g) : 0.0;
    } else {
      value = radial_density(field, metric, theta, t, quad.jacobian_step) *
              std::pow(t, q - 1);
    }
    const double weight = (j == 0 || j == m) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    sum += weight * value;
  }
  return sum * dt / 3.0;
}

}  // namespace

BallVolume geodesic_ball_volume(const ScalarField& field,
                                std::span<const double> x, double r,
                                const QuadratureSpec& quad) {
  const int q = field.dim();
  if (!(r >= 0.0)) throw InvalidInput("geodesic_ball_volume: r must be >= 0");
  if (quad.radial_intervals < 2 || quad.radial_intervals % 2 != 0)
    throw InvalidInput("geodesic_ball_volume: radial_intervals must be even and >= 2");

  BallVolume out;
  if (r == 0.0) return out;

  const MetricAtPoint metric = metric_at(field, x);
  const EigenDecomposition g_eig = eig_sym(metric.g);
  // g^(-1/2), used to map Euclidean sphere directions to g-unit directions.
  SymMatrix inv_sqrt_g(q);
  for (int i = 0; i < q; ++i)
    for (int j = i; j < q; ++j) {
      double s = 0.0;
      for (int k = 0; k < q; ++k)
        s += g_eig.eigenvectors(i, k) *
             (1.0 / std::sqrt(g_eig.eigenvalues[static_cast<std::size_t>(k)])) *
             g_eig.eigenvectors(j, k);
      inv_sqrt_g.set(i, j, s);
    }
  const double det_factor = 1.0 / std::sqrt(metric.det_g);

  int n_dirs = quad.n_directions > 0 ? quad.n_directions
                                     : (q == 2 ? 256 : 4096);
  if (q == 1) n_dirs = 2;
  out.n_directions = n_dirs;

  std::vector<double> integrals(static_cast<std::size_t>(n_dirs), 0.0);
  detail::parallel_for(n_dirs, quad.threads, [&](int d) {
    Vec xi(static_cast<std::size_t>(q), 0.0);
    if (q == 1) {
      xi[0] = d == 0 ? 1.0 : -1.0;
    } else if (q == 2) {
      const double phi =
          2.0 * std::numbers::pi * (d + 0.5) / static_cast<double>(n_dirs);
      xi[0] = std::cos(phi);
      xi[1] = std::sin(phi);
    } else {
      SplitMix64 rng = substream(quad.seed, static_cast<std::uint64_t>(d));
      xi = sample_unit_sphere(rng, q);
    }
    const Vec theta = inv_sqrt_g.multiply(xi);
    integrals[static_cast<std::size_t>(d)] =
        radial_integral(field, metric, theta, r, quad);
  });

  if (q == 1) {
    out.volume = det_factor * (integrals[0] + integrals[1]);
  } else if (q == 2) {
    double sum = 0.0;
    for (double v : integrals) sum += v;
    out.volume = det_factor * 2.0 * std::numbers::pi * sum / n_dirs;
  } else {
    double sum = 0.0;
    for (double v : integrals) sum += v;
    const double mean = sum / n_dirs;
    double var = 0.0;
    for (double v : integrals) var += (v - mean) * (v - mean);
    var /= (n_dirs > 1 ? (n_dirs - 1.0) * n_dirs : 1.0);
    const double area = unit_sphere_area(q);
    out.volume = det_factor * area * mean;
    out.std_error = det_factor * area * std::sqrt(var);
  }
  return out;
}

DeficitFit volume_deficit_coefficient(const ScalarField& field,
                                      std::span<const double> x,
                                      std::span<const double> radii,
                                      const QuadratureSpec& quad) {
  if (radii.size() < 3)
    throw InvalidInput("volume_deficit_coefficient: need at least 3 radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0))
      throw InvalidInput("volume_deficit_coefficient: radii must be positive");
    if (i > 0 && radii[i] <= radii[i - 1])
      throw InvalidInput("volume_deficit_coefficient: radii must be ascending");
  }

  const int q = field.dim();
  DeficitFit fit;
  fit.radii.assign(radii.begin(), radii.end());
  for (double r : radii) {
    const BallVolume bv = geodesic_ball_volume(field, x, r, quad);
    fit.volumes.push_back(bv.volume);
    fit.std_errors.push_back(bv.std_error);
    fit.ratios.push_back(bv.volume / euclidean_ball_volume(q, r));
  }

  // Least squares for ratio = 1 - k r^2, weighted by 1/r^4 so every radius
  // contributes equally on the coefficient scale. The expansion is an
  // r -> 0 statement; unweighted residuals would hand most of the weight to
  // the largest radius, where the truncated model is worst.
  double k_sum = 0.0;
  for (std::size_t i = 0; i < fit.radii.size(); ++i) {
    const double r_sq = fit.radii[i] * fit.radii[i];
    k_sum += (1.0 - fit.ratios[i]) / r_sq;
  }
  fit.coefficient = k_sum / static_cast<double>(fit.radii.size());
  fit.sc_estimate = 6.0 * (q + 2.0) * fit.coefficient;
  for (std::size_t i = 0; i < fit.radii.size(); ++i) {
    const double model = 1.0 - fit.coefficient * fit.radii[i] * fit.radii[i];
    fit.max_residual = std::max(fit.max_residual,
                                std::abs(fit.ratios[i] - model));
  }
  fit.fit_warning = fit.max_residual > 1e-3;
  return fit;
}

SymMatrix reparam_hessian(const Matrix& jac_phi,
                          const std::vector<SymMatrix>& hess_phi_components,
                          std::span<const double> grad_f,
                          const SymMatrix& hess_f) {
  const int q_out = hess_f.dim();
  const int q_in = jac_phi.cols();
  if (jac_phi.rows() != q_out)
    throw InvalidInput("reparam_hessian: Jacobian rows must match hess_f dim");
  if (static_cast<int>(grad_f.size()) != q_out)
    throw InvalidInput("reparam_hessian: grad_f dimension mismatch");
  if (static_cast<int>(hess_phi_components.size()) != q_out)
    throw InvalidInput("reparam_hessian: need one Hessian per phi component");
  for (const auto& hk : hess_phi_components)
    if (hk.dim() != q_in)
      throw InvalidInput("reparam_hessian: phi-component Hessian dim mismatch");

  SymMatrix out = hess_f.congruence(jac_phi);
  for (int k = 0; k < q_out; ++k) {
    const double gk = grad_f[static_cast<std::size_t>(k)];
    if (gk == 0.0) continue;
    out = out.plus(hess_phi_components[static_cast<std::size_t>(k)].scaled(gk));
  }
  return out;
}

}  // namespace losscurv
