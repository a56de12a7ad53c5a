#ifndef LOSSCURV_GEOMETRY_HPP_
#define LOSSCURV_GEOMETRY_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "losscurv/field.hpp"
#include "losscurv/linalg.hpp"

namespace losscurv {

// Intrinsic geometry of the graph hypersurface {(x, f(x))}, carried by the
// pullback metric g = I + grad f grad f^T on the parameter space. All
// routines are pure functions of (field, point).

struct MetricAtPoint {
  Vec point;
  Vec grad;
  SymMatrix g;       // I + grad grad^T
  SymMatrix g_inv;   // I - beta grad grad^T (Sherman-Morrison)
  double beta;       // 1 / (1 + ||grad||^2)
  double det_g;      // 1 + ||grad||^2
};

MetricAtPoint metric_at(const ScalarField& field, std::span<const double> x);

// Gamma^i_{kl} = beta f_{,i} f_{,kl}; symmetric in the two lower indices.
class ChristoffelTensor {
 public:
  explicit ChristoffelTensor(int dim);
  int dim() const { return dim_; }
  double operator()(int i, int k, int l) const { return data_[idx(i, k, l)]; }
  void set(int i, int k, int l, double value) {
    data_[idx(i, k, l)] = value;
    data_[idx(i, l, k)] = value;
  }

 private:
  std::size_t idx(int i, int k, int l) const {
    return (static_cast<std::size_t>(i) * dim_ + k) * dim_ + l;
  }
  int dim_;
  std::vector<double> data_;
};

ChristoffelTensor christoffel_at(const ScalarField& field,
                                 std::span<const double> x);

// Gamma^i_{ki} for each k; equals beta (H grad f)_k and d_k ln sqrt(det g).
Vec christoffel_contraction(const ScalarField& field, std::span<const double> x);

// R^i_{jkm}, antisymmetric in the last two slots. Index convention fixed by
// the tensor symmetries together with the Ricci/scalar contraction chain.
class RiemannTensor {
 public:
  explicit RiemannTensor(int dim);
  int dim() const { return dim_; }
  double operator()(int i, int j, int k, int m) const {
    return data_[idx(i, j, k, m)];
  }
  void set(int i, int j, int k, int m, double value) {
    data_[idx(i, j, k, m)] = value;
  }

 private:
  std::size_t idx(int i, int j, int k, int m) const {
    return ((static_cast<std::size_t>(i) * dim_ + j) * dim_ + k) * dim_ + m;
  }
  int dim_;
  std::vector<double> data_;
};

// R^i_{jkm} = beta (f_{,ik} f_{,jm} - f_{,im} f_{,jk})
//             - beta^2 f_{,i} f_{,r} (f_{,rk} f_{,jm} - f_{,rm} f_{,jk}).
RiemannTensor riemann_at(const ScalarField& field, std::span<const double> x);

// R_ab = beta (tr(H) H_ab - (H^2)_ab)
//        - beta^2 ((grad' H grad) H_ab - (H grad)_a (H grad)_b).
SymMatrix ricci_at(const ScalarField& field, std::span<const double> x);

struct CurvatureReport {
  Vec point;
  double beta = 0.0;
  double grad_norm = 0.0;
  double trace_h = 0.0;
  double trace_h2 = 0.0;
  double nuclear_h = 0.0;
  double frobenius_h = 0.0;
  double scalar_curvature = 0.0;
  bool at_critical_point = false;   // ||grad|| <= 1e-8 (1 + |f|)
  bool smoothness_warning = false;  // field is not C^2 (relu activations)
};

// Full scalar curvature
//   Sc = beta (tr(H)^2 - tr(H^2)) + 2 beta^2 grad' (H^2 - tr(H) H) grad,
// reducing to tr(H)^2 - tr(H^2) at critical points.
CurvatureReport scalar_curvature_at(const ScalarField& field,
                                    std::span<const double> x);

// Critical-point scalar curvature tr(h)^2 - tr(h^2) for a caller-supplied
// Hessian (the caller asserts grad f = 0).
double scalar_curvature_at_min(const SymMatrix& h);

struct NormIdentity {
  double sc;                 // tr(h)^2 - tr(h^2), always valid
  double norm_expression;    // ||h||_*^2 - ||h||_F^2
  bool applicable;           // true only when h is PSD; the two agree then
  double min_eigenvalue;
};

// The nuclear/Frobenius rewriting of the critical-point curvature holds for
// PSD Hessians only; `applicable` reports whether it applies here.
NormIdentity norm_identity_at_min(const SymMatrix& h);

// Geodesic exponential map: integrates x'' = -beta (x'^T H x') grad f from
// (x, v) for arc length r with classical fixed-step RK4 (512 steps), the
// velocity renormalized in g-norm every 32 steps. v must have unit g-norm.
Vec exp_map(const ScalarField& field, std::span<const double> x,
            std::span<const double> v, double r);

// Scales v to unit g-norm at x.
Vec g_normalize(const MetricAtPoint& metric, std::span<const double> v);

struct QuadratureSpec {
  int n_directions = 0;      // 0 = default: 256 when q == 2, 4096 otherwise
  int radial_intervals = 16; // even; composite-Simpson intervals in t
  double jacobian_step = 1e-5;  // forward-difference step for J_exp
  std::uint64_t seed = 0;    // direction sampling for q >= 3
  int threads = 1;
};

struct BallVolume {
  double volume = 0.0;
  double std_error = 0.0;  // Monte Carlo directions only; 0 for the grid
  int n_directions = 0;
};

// Riemannian volume of the geodesic ball B_g(x, r) in geodesic polar
// coordinates: directions are g-normalized, the radial factor is
// sqrt(det g) |det J_exp| t^(q-1) with the exponential-map Jacobian taken
// by forward differences. Deterministic for a fixed QuadratureSpec.
BallVolume geodesic_ball_volume(const ScalarField& field,
                                std::span<const double> x, double r,
                                const QuadratureSpec& quadrature);

// Volume of the Euclidean ball of radius r in dimension q.
double euclidean_ball_volume(int q, double r);

struct DeficitFit {
  double sc_estimate = 0.0;     // 6 (q + 2) k
  double coefficient = 0.0;     // fitted k in ratio = 1 - k r^2
  double max_residual = 0.0;    // worst |ratio - model| over the radii
  bool fit_warning = false;     // residual above threshold
  std::vector<double> radii;
  std::vector<double> volumes;      // vol(B_g(r))
  std::vector<double> ratios;       // vol(B_g(r)) / vol(B_e(r))
  std::vector<double> std_errors;   // per-radius Monte Carlo errors
};

// Least-squares fit of vol(B_g(r))/vol(B_e(r)) = 1 - k r^2 over the given
// radii (>= 3, ascending, positive); the scalar curvature estimate is
// 6 (q + 2) k. Sets fit_warning when max_residual > 1e-3.
DeficitFit volume_deficit_coefficient(const ScalarField& field,
                                      std::span<const double> x,
                                      std::span<const double> radii,
                                      const QuadratureSpec& quadrature);

// Hessian of f(phi(.)) from the chain rule:
//   H(f о phi) = J(phi)^T H(f) J(phi) + sum_k (grad f)_k H^k(phi).
// jac_phi(k, i) = d phi^k / d x_i; hess_phi_components holds one SymMatrix
// per output coordinate of phi. At a minimum the second term vanishes and
// the result is J^T H J.
SymMatrix reparam_hessian(const Matrix& jac_phi,
                          const std::vector<SymMatrix>& hess_phi_components,
                          std::span<const double> grad_f,
                          const SymMatrix& hess_f);

}  // namespace losscurv

#endif  // LOSSCURV_GEOMETRY_HPP_
