// Acceptance suite: one criterion per check, one pass/fail line each.
// Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "losscurv/errors.hpp"
#include "losscurv/estimators.hpp"
#include "losscurv/experiments.hpp"
#include "losscurv/field.hpp"
#include "losscurv/geometry.hpp"
#include "losscurv/linalg.hpp"
#include "losscurv/nn.hpp"
#include "losscurv/rng.hpp"
#include "oracles.hpp"

using namespace losscurv;

namespace {

struct Criterion {
  int id;
  std::string name;
  std::function<bool(std::string&)> run;
  double time_limit_s;  // 0 = no limit
};

std::unique_ptr<ScalarField> quadratic_of(const SymMatrix& a) {
  QuadraticFieldParams p;
  p.a = a;
  return make_quadratic_field(p);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

//--------------------------------------------------------------------------
// 1. Paraboloid closed form on a 21x21 grid, max abs error <= 1e-8.

bool criterion_paraboloid_grid(std::string& detail) {
  const auto field = quadratic_of(SymMatrix::identity(2));
  double max_err = 0.0;
  for (int iu = 0; iu < 21; ++iu)
    for (int iv = 0; iv < 21; ++iv) {
      const double u = -2.0 + 4.0 * iu / 20.0;
      const double v = -2.0 + 4.0 * iv / 20.0;
      const Vec x{u, v};
      const double r_sq = u * u + v * v;
      const double expected = 2.0 / ((1.0 + r_sq) * (1.0 + r_sq));
      const double sc = scalar_curvature_at(*field, x).scalar_curvature;
      max_err = std::max(max_err, std::abs(sc - expected));
    }
  detail = "max|Sc - 2/(1+r^2)^2| = " + fmt(max_err);
  return max_err <= 1e-8;
}

//--------------------------------------------------------------------------
// 2. Critical-point identity vs nuclear/Frobenius norms, PSD vs indefinite.

bool criterion_norm_identity(std::string& detail) {
  SplitMix64 rng(20240001);
  double worst_rel = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int q = 2 + static_cast<int>(rng.below(49));  // q <= 50
    const SymMatrix h = testing::random_psd(rng, q);
    const NormIdentity check = norm_identity_at_min(h);
    if (!check.applicable) {
      detail = "PSD matrix reported inapplicable";
      return false;
    }
    const double rel = std::abs(check.sc - check.norm_expression) /
                       std::max(1.0, std::abs(check.sc));
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-9) {
      detail = "PSD identity violated: rel = " + fmt(rel);
      return false;
    }
  }
  for (int rep = 0; rep < 100; ++rep) {
    const int q = 2 + static_cast<int>(rng.below(49));
    // Force at least one decisively negative eigenvalue.
    const Matrix rot = testing::random_rotation(rng, q);
    Vec lambda(static_cast<std::size_t>(q));
    for (auto& l : lambda) l = 0.1 + 2.9 * rng.uniform01();
    lambda[0] = -(0.1 + 2.9 * rng.uniform01());
    SymMatrix h(q);
    for (int i = 0; i < q; ++i)
      for (int j = i; j < q; ++j) {
        double s = 0.0;
        for (int k = 0; k < q; ++k)
          s += rot(i, k) * lambda[static_cast<std::size_t>(k)] * rot(j, k);
        h.set(i, j, s);
      }
    const NormIdentity check = norm_identity_at_min(h);
    if (check.applicable) {
      detail = "indefinite matrix reported applicable";
      return false;
    }
  }
  detail = "worst PSD rel err = " + fmt(worst_rel) +
           "; 100 indefinite all flagged inapplicable";
  return true;
}

//--------------------------------------------------------------------------
// 3. Tensor validation on 200 random (field, point, q in {2,3,4}) samples.

bool criterion_tensor_validation(std::string& detail) {
  SplitMix64 rng(20240003);
  double worst_gamma = 0.0, worst_sym = 0.0, worst_contract = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int q = 2 + rep % 3;
    std::unique_ptr<ScalarField> field;
    if (q == 2 && rep % 4 == 0)
      field = make_saddle_field({.c = 0.05 + rng.uniform01()});
    else
      field = testing::random_quadratic_field(rng, q);
    const Vec x = testing::random_point(rng, q);

    // Christoffels against the metric-derivative oracle.
    const ChristoffelTensor gamma = christoffel_at(*field, x);
    const ChristoffelTensor gamma_fd = testing::fd_christoffel(*field, x);
    for (int i = 0; i < q; ++i)
      for (int k = 0; k < q; ++k)
        for (int l = 0; l < q; ++l)
          worst_gamma = std::max(
              worst_gamma, std::abs(gamma(i, k, l) - gamma_fd(i, k, l)));

    // Riemann symmetries on the raw and lowered tensor.
    const RiemannTensor r = riemann_at(*field, x);
    const MetricAtPoint metric = metric_at(*field, x);
    const auto lower = [&](int i, int j, int k, int m) {
      double s = 0.0;
      for (int a = 0; a < q; ++a) s += metric.g(i, a) * r(a, j, k, m);
      return s;
    };
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j)
        for (int k = 0; k < q; ++k)
          for (int m = 0; m < q; ++m) {
            worst_sym = std::max(worst_sym,
                                 std::abs(r(i, j, k, m) + r(i, j, m, k)));
            worst_sym = std::max(
                worst_sym, std::abs(lower(i, j, k, m) - lower(k, m, i, j)));
            worst_sym =
                std::max(worst_sym, std::abs(lower(i, j, k, m) +
                                             lower(i, k, m, j) +
                                             lower(i, m, j, k)));
          }

    // Ricci contraction chain.
    const SymMatrix ricci = ricci_at(*field, x);
    double contracted = 0.0;
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) contracted += metric.g_inv(a, b) * ricci(a, b);
    const double sc = scalar_curvature_at(*field, x).scalar_curvature;
    worst_contract =
        std::max(worst_contract,
                 std::abs(contracted - sc) / (1.0 + std::abs(sc)));
  }
  detail = "max: christoffel-vs-oracle " + fmt(worst_gamma) +
           ", symmetry " + fmt(worst_sym) + ", contraction " +
           fmt(worst_contract);
  return worst_gamma <= 1e-5 && worst_sym <= 1e-9 && worst_contract <= 1e-9;
}

//--------------------------------------------------------------------------
// 4. Volume deficit fit within 5% for the paraboloid and diag(1,2).

bool criterion_volume_deficit(std::string& detail) {
  const Vec radii{0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  QuadratureSpec quad;  // defaults: 256 directions, 16 radial intervals
  const auto check = [&](const SymMatrix& a, double expected, double& got) {
    const auto field = quadratic_of(a);
    const Vec x(static_cast<std::size_t>(a.dim()), 0.0);
    const DeficitFit fit = volume_deficit_coefficient(*field, x, radii, quad);
    got = fit.sc_estimate;
    return std::abs(fit.sc_estimate - expected) <= 0.05 * expected;
  };
  double sc_par = 0.0, sc_diag = 0.0;
  const bool ok_par = check(SymMatrix::identity(2), 2.0, sc_par);
  const Vec d{1.0, 2.0};
  const bool ok_diag = check(SymMatrix::diagonal(d), 4.0, sc_diag);
  detail = "paraboloid " + fmt(sc_par) + " (exact 2), diag(1,2) " +
           fmt(sc_diag) + " (exact 4)";
  return ok_par && ok_diag;
}

//--------------------------------------------------------------------------
// 5. Perturbation bound: zero violations; q=1 equality to 1e-12 relative.

bool criterion_perturbation_bound(std::string& detail) {
  SplitMix64 rng(20240005);
  int total_violations = 0;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    for (int q : {2, 3, 5}) {
      const SymMatrix a = testing::random_psd(rng, q);
      const auto field = quadratic_of(a);
      const Vec x(static_cast<std::size_t>(q), 0.0);
      PerturbationConfig cfg;
      cfg.epsilon = eps;
      cfg.n_directions = 1000;
      cfg.seed = 20240005;
      const PerturbationReport report = perturbation_sweep(*field, x, cfg);
      total_violations += report.violations;
    }
  }

  // q = 1 equality case: every unit direction saturates the bound.
  const double lambda = 1.7;
  const Vec dl{lambda};
  const auto field1 = quadratic_of(SymMatrix::diagonal(dl));
  const Vec x1{0.0};
  PerturbationConfig cfg1;
  cfg1.epsilon = 0.01;
  cfg1.n_directions = 64;
  cfg1.seed = 3;
  const PerturbationReport rep1 = perturbation_sweep(*field1, x1, cfg1);
  double worst_rel = 0.0;
  for (double delta : rep1.deltas)
    worst_rel = std::max(worst_rel,
                         std::abs(delta - rep1.bound) / rep1.bound);
  detail = "violations " + std::to_string(total_violations) +
           " in 9000 directions; q=1 equality rel err " +
           fmt(worst_rel);
  return total_violations == 0 && worst_rel <= 1e-12;
}

//--------------------------------------------------------------------------
// 6. OU escape efficiency for diag(1,2).

bool criterion_escape(std::string& detail) {
  const Vec d{1.0, 2.0};
  const SymMatrix h = SymMatrix::diagonal(d);
  EscapeConfig cfg;
  cfg.t = 0.005;
  cfg.dt = 5e-4;
  cfg.n_paths = 100000;
  cfg.seed = 21;
  const EscapeReport report = ou_escape(h, cfg);
  const double exact = testing::ou_exact_escape(h, cfg.t);
  const double sigmas =
      std::abs(report.empirical_escape - exact) / report.std_error;
  detail = "rel_error vs (t/2)tr(H^2) = " + fmt(report.rel_error) +
           ", " + fmt(sigmas) + " sigma from the exact OU moment";
  return report.rel_error <= 0.05 && sigmas <= 3.0;
}

//--------------------------------------------------------------------------
// 7. Minibatch: exact trace linearity, sc_gap == 2 for the counterexample.

bool criterion_minibatch(std::string& detail) {
  const Vec d1{2.0, 0.0}, d2{0.0, 2.0};
  const MinibatchReport counter = minibatch_analysis(
      {SymMatrix::diagonal(d1), SymMatrix::diagonal(d2)});
  if (counter.sc_gap != 2.0) {
    detail = "counterexample sc_gap = " + fmt(counter.sc_gap);
    return false;
  }
  if (counter.trace_gap != 0.0) {
    detail = "counterexample trace_gap nonzero";
    return false;
  }
  SplitMix64 rng(20240007);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 2 + static_cast<int>(rng.below(6));
    const int q = 2 + static_cast<int>(rng.below(4));
    std::vector<SymMatrix> batches;
    for (int b = 0; b < k; ++b)
      batches.push_back(testing::random_symmetric(rng, q, 2.0));
    const MinibatchReport report = minibatch_analysis(batches);
    worst = std::max(worst, report.trace_gap /
                                (1.0 + std::abs(report.full_trace)));
  }
  detail = "sc_gap == 2 exactly; worst trace_gap (scaled) = " +
           fmt(worst);
  return worst <= 1e-10;
}

//--------------------------------------------------------------------------
// 8. Over-parameterized limit: exact (q-1)/q, monotone toward 1.

bool criterion_overparam(std::string& detail) {
  double prev = 0.0;
  for (int q : {2, 10, 100, 1000}) {
    for (double lambda : {1.0, 0.7}) {
      const double ratio =
          overparam_ratio(SymMatrix::identity(q).scaled(lambda));
      if (ratio != (q - 1.0) / q) {
        detail = "q=" + std::to_string(q) + " ratio not exact";
        return false;
      }
    }
    const double ratio = overparam_ratio(SymMatrix::identity(q));
    if (!(ratio > prev) || !(ratio < 1.0)) {
      detail = "monotonicity broken at q=" + std::to_string(q);
      return false;
    }
    prev = ratio;
  }
  detail = "exact (q-1)/q for q in {2,10,100,1000}, strictly increasing";
  return true;
}

//--------------------------------------------------------------------------
// 9. Reparametrization: rotation invariance, scaling consistency.

bool criterion_reparam(std::string& detail) {
  SplitMix64 rng(20240009);
  double worst_rot = 0.0, worst_scale = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int q = 2 + static_cast<int>(rng.below(9));
    const SymMatrix h = testing::random_psd(rng, q);
    const Vec grad(static_cast<std::size_t>(q), 0.0);
    const std::vector<SymMatrix> no_curvature(static_cast<std::size_t>(q),
                                              SymMatrix(q));

    const Matrix rot = testing::random_rotation(rng, q);
    const SymMatrix rotated = reparam_hessian(rot, no_curvature, grad, h);
    const double sc = scalar_curvature_at_min(h);
    const double sc_rot = scalar_curvature_at_min(rotated);
    worst_rot = std::max(worst_rot,
                         std::abs(sc - sc_rot) / (1.0 + std::abs(sc)));

    const double alpha = 0.5 + 2.0 * rng.uniform01();
    Matrix scale(q, q);
    for (int i = 0; i < q; ++i) scale(i, i) = alpha;
    const SymMatrix via_reparam = reparam_hessian(scale, no_curvature, grad, h);
    // J^T H J assembled by hand as the independent route.
    SymMatrix direct(q);
    for (int i = 0; i < q; ++i)
      for (int j = i; j < q; ++j) {
        double s = 0.0;
        for (int a = 0; a < q; ++a)
          for (int b = 0; b < q; ++b)
            s += scale(a, i) * h(a, b) * scale(b, j);
        direct.set(i, j, s);
      }
    const double sc_a = scalar_curvature_at_min(via_reparam);
    const double sc_b = scalar_curvature_at_min(direct);
    worst_scale = std::max(worst_scale,
                           std::abs(sc_a - sc_b) / (1.0 + std::abs(sc_a)));
  }
  detail = "worst rotation drift " + fmt(worst_rot) +
           ", worst scaling mismatch " + fmt(worst_scale);
  return worst_rot <= 1e-10 && worst_scale <= 1e-10;
}

//--------------------------------------------------------------------------
// 10. Trained-model ordering: lower Sc -> lower mean perturbation delta.

bool criterion_fig3_ordering(std::string& detail) {
  const MlpSpec spec = make_mlp_spec({1, 16, 8, 1}, Activation::kTanh);
  const Dataset data = make_sine_dataset(70, 0.05, 1234);
  const auto field = make_mlp_loss_field(spec, data);

  auto train_one = [&](std::uint64_t seed) {
    TrainConfig cfg;
    cfg.steps = 4000;
    cfg.learning_rate = 1e-2;
    cfg.seed = seed;
    return train(spec, data, cfg);
  };

  int qualifying = 0, ordered = 0, attempts = 0;
  while (qualifying < 5 && attempts < 10) {
    const int pair = attempts++;
    const TrainResult a = train_one(1000 + 2 * pair);
    const TrainResult b = train_one(1001 + 2 * pair);
    const double sc_a = scalar_curvature_at(*field, a.params).scalar_curvature;
    const double sc_b = scalar_curvature_at(*field, b.params).scalar_curvature;
    if (std::abs(sc_a - sc_b) <
        0.2 * std::max(std::abs(sc_a), std::abs(sc_b)))
      continue;  // curvatures too close to rank

    PerturbationConfig pc;
    pc.epsilon = 0.1;  // pointwise N(0, 0.1^2)
    pc.mode = PerturbationMode::kGaussian;
    pc.n_directions = 500;
    pc.seed = 777;  // common random numbers across the pair
    const double delta_a = perturbation_sweep(*field, a.params, pc).mean_delta;
    const double delta_b = perturbation_sweep(*field, b.params, pc).mean_delta;
    ++qualifying;
    if ((sc_a < sc_b) == (delta_a < delta_b)) ++ordered;
  }
  detail = std::to_string(ordered) + " of " + std::to_string(qualifying) +
           " qualifying pairs ordered (" + std::to_string(attempts) +
           " pairs trained)";
  return qualifying >= 5 && ordered >= 4;
}

//--------------------------------------------------------------------------
// 11. Estimator calibration on diag(1..8) and a rotated copy.

bool criterion_estimators(std::string& detail) {
  Vec d(8);
  for (int i = 0; i < 8; ++i) d[static_cast<std::size_t>(i)] = i + 1.0;
  const SymMatrix diag = SymMatrix::diagonal(d);
  const auto field = quadratic_of(diag);
  const Vec x(8, 0.0);

  // Rademacher probes are exact on diagonal matrices: the 3-sigma window
  // collapses to equality.
  for (int s = 0; s < 50; ++s) {
    const std::uint64_t seed = 1000003ULL * (s + 1);
    const TraceEstimate tr = hutchinson_trace(*field, x, 10000, seed);
    const TraceEstimate tr2 = trace_h2_estimate(*field, x, 10000, seed);
    if (std::abs(tr.mean - 36.0) > 3.0 * tr.std_error ||
        std::abs(tr2.mean - 204.0) > 3.0 * tr2.std_error) {
      detail = "seed " + std::to_string(seed) + " outside 3 sigma";
      return false;
    }
  }

  // Rotated copy: genuinely stochastic; quadrupling probes must shrink the
  // standard error by at least 1.6x.
  SplitMix64 rng(20240011);
  const Matrix rot = testing::random_rotation(rng, 8);
  const auto rotated_field = quadratic_of(diag.congruence(rot));
  int shrink_ok = 0;
  double min_ratio = 1e300;
  for (int rep = 0; rep < 10; ++rep) {
    const std::uint64_t seed = 7000003ULL * (rep + 1);
    const TraceEstimate small = hutchinson_trace(*rotated_field, x, 2500, seed);
    const TraceEstimate big = hutchinson_trace(*rotated_field, x, 10000, seed);
    const double ratio = small.std_error / big.std_error;
    min_ratio = std::min(min_ratio, ratio);
    if (ratio >= 1.6) ++shrink_ok;
  }
  detail = "diag exact across 50 seeds; shrink ratio >= 1.6 in " +
           std::to_string(shrink_ok) + "/10 (min " +
           fmt(min_ratio) + ")";
  return shrink_ok == 10;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "paraboloid closed form (max err <= 1e-8, < 1 s)",
       criterion_paraboloid_grid, 1.0},
      {2, "critical-point identity: PSD within 1e-9, indefinite flagged",
       criterion_norm_identity, 0.0},
      {3, "tensor validation vs oracles on 200 samples (< 30 s)",
       criterion_tensor_validation, 30.0},
      {4, "geodesic-ball volume deficit within 5% (< 2 min)",
       criterion_volume_deficit, 120.0},
      {5, "perturbation bound: zero violations, q=1 equality",
       criterion_perturbation_bound, 0.0},
      {6, "OU escape efficiency within 5% and 3 sigma (< 1 min)",
       criterion_escape, 60.0},
      {7, "minibatch trace linearity and curvature counterexample",
       criterion_minibatch, 0.0},
      {8, "over-parameterized ratio exact and monotone", criterion_overparam,
       0.0},
      {9, "reparametrization: rotation-invariant, scaling-consistent",
       criterion_reparam, 0.0},
      {10, "trained-model robustness ordering (< 10 min)",
       criterion_fig3_ordering, 600.0},
      {11, "estimator calibration and 1/sqrt(n) scaling",
       criterion_estimators, 0.0},
  };

  int failures = 0;
  for (auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
      ok = false;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (criterion.time_limit_s > 0.0 && elapsed > criterion.time_limit_s) {
      ok = false;
      detail += " [over time limit]";
    }
    std::printf("[%s] criterion %2d: %s -- %s (%.2f s)\n", ok ? "PASS" : "FAIL",
                criterion.id, criterion.name.c_str(), detail.c_str(), elapsed);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
