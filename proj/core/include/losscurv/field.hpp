#ifndef LOSSCURV_FIELD_HPP_
#define LOSSCURV_FIELD_HPP_

#include <memory>
#include <span>

#include "losscurv/linalg.hpp"

namespace losscurv {

struct FieldCapabilities {
  bool exact_grad = false;
  bool exact_hess = false;
  bool exact_hvp = false;
  bool smooth = true;  // false for fields with kinks (relu activations)
};

// A q-dimensional differentiable scalar function exposing value, gradient,
// Hessian and Hessian-vector products. Derived classes override whatever
// they can evaluate exactly; the base class fills the rest in with central
// finite differences. Oracles are immutable after construction and
// evaluation is reentrant.
class ScalarField {
 public:
  explicit ScalarField(int dim, FieldCapabilities caps = {});
  virtual ~ScalarField() = default;

  int dim() const { return dim_; }
  const FieldCapabilities& capabilities() const { return caps_; }

  virtual double value(std::span<const double> x) const = 0;

  // Default: central differences of value().
  virtual Vec gradient(std::span<const double> x) const;

  // Default: central differences of gradient() when the gradient is exact,
  // otherwise symmetrized second differences of value().
  virtual SymMatrix hessian(std::span<const double> x) const;

  // Default: (grad(x + h v) - grad(x - h v)) / (2h) with
  // h = 1e-5 (1 + ||x||) / (||v|| + tiny); one difference axis instead of
  // q^2 evaluations.
  virtual Vec hvp(std::span<const double> x, std::span<const double> v) const;

 protected:
  void check_point(std::span<const double> x) const;

 private:
  int dim_;
  FieldCapabilities caps_;
};

// f(x) = constant; gradient and Hessian vanish identically.
struct ConstantFieldParams {
  int dim = 1;
  double value = 0.0;
};
std::unique_ptr<ScalarField> make_constant_field(const ConstantFieldParams& p);

// f(u, v) = exp(-c u) sin(u) sin(v), the two-parameter surface whose trace
// flattens as u grows while saddles keep the scalar curvature negative.
struct SaddleFieldParams {
  double c = 0.1;  // positive decay constant
};
std::unique_ptr<ScalarField> make_saddle_field(const SaddleFieldParams& p);

// f(x) = 1/2 (x - center)^T a (x - center): constant Hessian a, gradient
// a (x - center), minimum at center when a is PSD.
struct QuadraticFieldParams {
  SymMatrix a;
  Vec center;  // empty means the origin
};
std::unique_ptr<ScalarField> make_quadratic_field(const QuadraticFieldParams& p);

// Central-difference gradient; h <= 0 selects the per-coordinate step
// eps^(1/3) * max(1, |x_i|). Throws EvaluationFailure on non-finite values.
Vec finite_diff_gradient(const ScalarField& field, std::span<const double> x,
                         double h = 0.0);

// Symmetrized central second differences; h <= 0 selects
// eps^(1/4) * max(1, |x_i|) per coordinate.
SymMatrix finite_diff_hessian(const ScalarField& field,
                              std::span<const double> x, double h = 0.0);

struct SaddleAnalytics {
  double trace;             // trace of the Hessian at (u, v)
  double scalar_curvature;  // intrinsic scalar curvature at (u, v)
};

// Closed forms for the saddle field, derived independently of the
// ScalarField evaluators:
//   trace(u,v) = exp(-c u) ((c^2 - 2) sin u - 2 c cos u) sin v
// and the scalar curvature assembled from the analytic first and second
// derivatives. Serves as a cross-check for the geometry pipeline.
SaddleAnalytics saddle_analytics(double u, double v, double c);

}  // namespace losscurv

#endif  // LOSSCURV_FIELD_HPP_
