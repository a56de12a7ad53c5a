#include "losscurv/field.hpp"

#include <cmath>
#include <limits>

#include "losscurv/errors.hpp"

namespace losscurv {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
const double kGradStep = std::cbrt(kEps);       // ~6.06e-6
const double kHessStep = std::sqrt(std::sqrt(kEps));  // ~1.22e-4

double checked_value(const ScalarField& field, std::span<const double> x) {
  const double f = field.value(x);
  if (!std::isfinite(f)) throw EvaluationFailure("field value is non-finite");
  return f;
}

}  // namespace

ScalarField::ScalarField(int dim, FieldCapabilities caps)
    : dim_(dim), caps_(caps) {
  if (dim < 1) throw InvalidInput("ScalarField: dim must be >= 1");
}

void ScalarField::check_point(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw InvalidInput("ScalarField: point has wrong dimension");
}

Vec ScalarField::gradient(std::span<const double> x) const {
  return finite_diff_gradient(*this, x);
}

SymMatrix ScalarField::hessian(std::span<const double> x) const {
  check_point(x);
  if (!caps_.exact_grad) return finite_diff_hessian(*this, x);
  // Differentiate the exact gradient column by column, then symmetrize.
  const int q = dim_;
  Vec xp(x.begin(), x.end());
  Matrix cols(q, q);
  for (int i = 0; i < q; ++i) {
    const double h = kGradStep * std::max(1.0, std::abs(x[i]));
    const double xi = xp[static_cast<std::size_t>(i)];
    xp[static_cast<std::size_t>(i)] = xi + h;
    const Vec gp = gradient(xp);
    xp[static_cast<std::size_t>(i)] = xi - h;
    const Vec gm = gradient(xp);
    xp[static_cast<std::size_t>(i)] = xi;
    for (int j = 0; j < q; ++j)
      cols(j, i) = (gp[static_cast<std::size_t>(j)] -
                    gm[static_cast<std::size_t>(j)]) /
                   (2.0 * h);
  }
  SymMatrix hess(q);
  for (int i = 0; i < q; ++i)
    for (int j = i; j < q; ++j) hess.set(i, j, 0.5 * (cols(i, j) + cols(j, i)));
  if (!hess.finite())
    throw EvaluationFailure("hessian: non-finite finite-difference result");
  return hess;
}

Vec ScalarField::hvp(std::span<const double> x,
                     std::span<const double> v) const {
  check_point(x);
  if (static_cast<int>(v.size()) != dim_)
    throw InvalidInput("hvp: vector has wrong dimension");
  const double vnorm = norm2(v);
  const double h = 1e-5 * (1.0 + norm2(x)) / (vnorm + 1e-300);
  const std::size_t q = static_cast<std::size_t>(dim_);
  Vec xp(q), xm(q);
  for (std::size_t i = 0; i < q; ++i) {
    xp[i] = x[i] + h * v[i];
    xm[i] = x[i] - h * v[i];
  }
  const Vec gp = gradient(xp);
  const Vec gm = gradient(xm);
  Vec out(q);
  for (std::size_t i = 0; i < q; ++i) out[i] = (gp[i] - gm[i]) / (2.0 * h);
  if (!all_finite(out)) throw EvaluationFailure("hvp: non-finite result");
  return out;
}

//--------------------------------------------------------------------------
// Finite-difference oracles

Vec finite_diff_gradient(const ScalarField& field, std::span<const double> x,
                         double h) {
  const int q = field.dim();
  if (static_cast<int>(x.size()) != q)
    throw InvalidInput("finite_diff_gradient: point dimension mismatch");
  Vec xp(x.begin(), x.end());
  Vec g(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    const double hi =
        h > 0.0 ? h : kGradStep * std::max(1.0, std::abs(x[i]));
    const double xi = xp[static_cast<std::size_t>(i)];
    xp[static_cast<std::size_t>(i)] = xi + hi;
    const double fp = checked_value(field, xp);
    xp[static_cast<std::size_t>(i)] = xi - hi;
    const double fm = checked_value(field, xp);
    xp[static_cast<std::size_t>(i)] = xi;
    g[static_cast<std::size_t>(i)] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

SymMatrix finite_diff_hessian(const ScalarField& field,
                              std::span<const double> x, double h) {
  const int q = field.dim();
  if (static_cast<int>(x.size()) != q)
    throw InvalidInput("finite_diff_hessian: point dimension mismatch");
  Vec xp(x.begin(), x.end());
  auto step = [&](int i) {
    return h > 0.0 ? h : kHessStep * std::max(1.0, std::abs(x[i]));
  };
  const double f0 = checked_value(field, xp);
  SymMatrix hess(q);
  for (int i = 0; i < q; ++i) {
    const double hi = step(i);
    const double xi = xp[static_cast<std::size_t>(i)];
    xp[static_cast<std::size_t>(i)] = xi + hi;
    const double fp = checked_value(field, xp);
    xp[static_cast<std::size_t>(i)] = xi - hi;
    const double fm = checked_value(field, xp);
    xp[static_cast<std::size_t>(i)] = xi;
    hess.set(i, i, (fp - 2.0 * f0 + fm) / (hi * hi));
    for (int j = i + 1; j < q; ++j) {
      const double hj = step(j);
      const double xj = xp[static_cast<std::size_t>(j)];
      xp[static_cast<std::size_t>(i)] = xi + hi;
      xp[static_cast<std::size_t>(j)] = xj + hj;
      const double fpp = checked_value(field, xp);
      xp[static_cast<std::size_t>(j)] = xj - hj;
      const double fpm = checked_value(field, xp);
      xp[static_cast<std::size_t>(i)] = xi - hi;
      xp[static_cast<std::size_t>(j)] = xj + hj;
      const double fmp = checked_value(field, xp);
      xp[static_cast<std::size_t>(j)] = xj - hj;
      const double fmm = checked_value(field, xp);
      xp[static_cast<std::size_t>(i)] = xi;
      xp[static_cast<std::size_t>(j)] = xj;
      hess.set(i, j, (fpp - fpm - fmp + fmm) / (4.0 * hi * hj));
    }
  }
  return hess;
}

//--------------------------------------------------------------------------
// Built-in fields

namespace {

class ConstantField final : public ScalarField {
 public:
  ConstantField(int dim, double value)
      : ScalarField(dim, {.exact_grad = true,
                          .exact_hess = true,
                          .exact_hvp = true}),
        value_(value) {}

  double value(std::span<const double> x) const override {
    check_point(x);
    return value_;
  }
  Vec gradient(std::span<const double> x) const override {
    check_point(x);
    return Vec(static_cast<std::size_t>(dim()), 0.0);
  }
  SymMatrix hessian(std::span<const double> x) const override {
    check_point(x);
    return SymMatrix(dim());
  }
  Vec hvp(std::span<const double> x, std::span<const double>) const override {
    check_point(x);
    return Vec(static_cast<std::size_t>(dim()), 0.0);
  }

 private:
  double value_;
};

// Shared partial derivatives of exp(-c u) sin(u) sin(v).
struct SaddleJet {
  double f, fu, fv, fuu, fuv, fvv;
};

SaddleJet saddle_jet(double u, double v, double c) {
  const double e = std::exp(-c * u);
  const double su = std::sin(u), cu = std::cos(u);
  const double sv = std::sin(v), cv = std::cos(v);
  SaddleJet jet{};
  jet.f = e * su * sv;
  jet.fu = e * (cu - c * su) * sv;
  jet.fv = e * su * cv;
  jet.fuu = e * ((c * c - 1.0) * su - 2.0 * c * cu) * sv;
  jet.fuv = e * (cu - c * su) * cv;
  jet.fvv = -e * su * sv;
  return jet;
}

class SaddleField final : public ScalarField {
 public:
  explicit SaddleField(double c)
      : ScalarField(2, {.exact_grad = true,
                        .exact_hess = true,
                        .exact_hvp = true}),
        c_(c) {}

  double value(std::span<const double> x) const override {
    check_point(x);
    return std::exp(-c_ * x[0]) * std::sin(x[0]) * std::sin(x[1]);
  }
  Vec gradient(std::span<const double> x) const override {
    check_point(x);
    const SaddleJet jet = saddle_jet(x[0], x[1], c_);
    return {jet.fu, jet.fv};
  }
  SymMatrix hessian(std::span<const double> x) const override {
    check_point(x);
    const SaddleJet jet = saddle_jet(x[0], x[1], c_);
    SymMatrix h(2);
    h.set(0, 0, jet.fuu);
    h.set(0, 1, jet.fuv);
    h.set(1, 1, jet.fvv);
    return h;
  }
  Vec hvp(std::span<const double> x, std::span<const double> v) const override {
    return hessian(x).multiply(v);
  }

 private:
  double c_;
};

class QuadraticField final : public ScalarField {
 public:
  QuadraticField(SymMatrix a, Vec center)
      : ScalarField(a.dim(), {.exact_grad = true,
                              .exact_hess = true,
                              .exact_hvp = true}),
        a_(std::move(a)),
        center_(std::move(center)) {}

  double value(std::span<const double> x) const override {
    const Vec d = displacement(x);
    return 0.5 * dot(d, a_.multiply(d));
  }
  Vec gradient(std::span<const double> x) const override {
    return a_.multiply(displacement(x));
  }
  SymMatrix hessian(std::span<const double> x) const override {
    check_point(x);
    return a_;
  }
  Vec hvp(std::span<const double> x, std::span<const double> v) const override {
    check_point(x);
    return a_.multiply(v);
  }

 private:
  Vec displacement(std::span<const double> x) const {
    check_point(x);
    Vec d(x.begin(), x.end());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= center_[i];
    return d;
  }
  SymMatrix a_;
  Vec center_;
};

}  // namespace

std::unique_ptr<ScalarField> make_constant_field(const ConstantFieldParams& p) {
  if (p.dim < 1) throw InvalidInput("make_constant_field: dim must be >= 1");
  return std::make_unique<ConstantField>(p.dim, p.value);
}

std::unique_ptr<ScalarField> make_saddle_field(const SaddleFieldParams& p) {
  if (!(p.c > 0.0)) throw InvalidInput("make_saddle_field: c must be > 0");
  return std::make_unique<SaddleField>(p.c);
}

std::unique_ptr<ScalarField> make_quadratic_field(
    const QuadraticFieldParams& p) {
  if (!p.a.finite())
    throw InvalidInput("make_quadratic_field: non-finite matrix");
  Vec center = p.center;
  if (center.empty()) center.assign(static_cast<std::size_t>(p.a.dim()), 0.0);
  if (static_cast<int>(center.size()) != p.a.dim())
    throw InvalidInput("make_quadratic_field: center dimension mismatch");
  return std::make_unique<QuadraticField>(p.a, std::move(center));
}

SaddleAnalytics saddle_analytics(double u, double v, double c) {
  if (!(c > 0.0)) throw InvalidInput("saddle_analytics: c must be > 0");
  const SaddleJet jet = saddle_jet(u, v, c);

  SaddleAnalytics out{};
  out.trace = jet.fuu + jet.fvv;

  // Scalar curvature from the closed-form derivatives:
  //   Sc = beta (tr H)^2 - beta tr(H^2)
  //        + 2 beta^2 (||H grad||^2 - tr(H) grad' H grad)
  const double beta = 1.0 / (1.0 + jet.fu * jet.fu + jet.fv * jet.fv);
  const double trace_h2 =
      jet.fuu * jet.fuu + 2.0 * jet.fuv * jet.fuv + jet.fvv * jet.fvv;
  const double hg_u = jet.fuu * jet.fu + jet.fuv * jet.fv;
  const double hg_v = jet.fuv * jet.fu + jet.fvv * jet.fv;
  const double hg_sq = hg_u * hg_u + hg_v * hg_v;
  const double ghg = jet.fu * hg_u + jet.fv * hg_v;
  out.scalar_curvature = beta * (out.trace * out.trace - trace_h2) +
                         2.0 * beta * beta * (hg_sq - out.trace * ghg);
  return out;
}

}  // namespace losscurv
