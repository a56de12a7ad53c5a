#include "losscurv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "losscurv/errors.hpp"

namespace losscurv {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const double> a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

//--------------------------------------------------------------------------
// Matrix

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows),
      cols_(cols),
      data_(static_cast<std::size_t>(rows) * cols, fill) {
  if (rows < 0 || cols < 0) throw InvalidInput("Matrix: negative dimension");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vec Matrix::multiply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cols_)
    throw InvalidInput("Matrix::multiply: dimension mismatch");
  Vec y(static_cast<std::size_t>(rows_), 0.0);
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += data_[idx(i, j)] * x[j];
    y[static_cast<std::size_t>(i)] = s;
  }
  return y;
}

Vec Matrix::multiply_transposed(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != rows_)
    throw InvalidInput("Matrix::multiply_transposed: dimension mismatch");
  Vec y(static_cast<std::size_t>(cols_), 0.0);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j)
      y[static_cast<std::size_t>(j)] += data_[idx(i, j)] * x[i];
  return y;
}

double Matrix::det() const {
  if (rows_ != cols_) throw InvalidInput("Matrix::det: non-square matrix");
  const int n = rows_;
  std::vector<double> lu(data_);
  auto at = [&](int i, int j) -> double& {
    return lu[static_cast<std::size_t>(i) * n + j];
  };
  double d = 1.0;
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(at(i, k)) > std::abs(at(pivot, k))) pivot = i;
    if (at(pivot, k) == 0.0) return 0.0;
    if (pivot != k) {
      for (int j = 0; j < n; ++j) std::swap(at(pivot, j), at(k, j));
      d = -d;
    }
    d *= at(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double f = at(i, k) / at(k, k);
      for (int j = k + 1; j < n; ++j) at(i, j) -= f * at(k, j);
    }
  }
  return d;
}

//--------------------------------------------------------------------------
// SymMatrix

SymMatrix::SymMatrix(int dim, double fill)
    : dim_(dim), data_(static_cast<std::size_t>(dim) * dim, fill) {
  if (dim < 1) throw InvalidInput("SymMatrix: dim must be >= 1");
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
  SymMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m.set(i, i, d[static_cast<std::size_t>(i)]);
  return m;
}

SymMatrix SymMatrix::outer(std::span<const double> v, double scale) {
  SymMatrix m(static_cast<int>(v.size()));
  for (int i = 0; i < m.dim(); ++i)
    for (int j = i; j < m.dim(); ++j) m.set(i, j, scale * v[i] * v[j]);
  return m;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (int i = 0; i < dim_; ++i) t += data_[idx(i, i)];
  return t;
}

double SymMatrix::sum_sq() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return s;
}

bool SymMatrix::finite() const { return all_finite(data_); }

Vec SymMatrix::multiply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw InvalidInput("SymMatrix::multiply: dimension mismatch");
  Vec y(static_cast<std::size_t>(dim_), 0.0);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += data_[idx(i, j)] * x[j];
    y[static_cast<std::size_t>(i)] = s;
  }
  return y;
}

SymMatrix SymMatrix::scaled(double s) const {
  SymMatrix m(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) m.set(i, j, s * (*this)(i, j));
  return m;
}

SymMatrix SymMatrix::plus(const SymMatrix& other) const {
  if (other.dim_ != dim_) throw InvalidInput("SymMatrix::plus: dim mismatch");
  SymMatrix m(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) m.set(i, j, (*this)(i, j) + other(i, j));
  return m;
}

SymMatrix SymMatrix::square() const {
  SymMatrix m(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) s += (*this)(i, k) * (*this)(k, j);
      m.set(i, j, s);
    }
  return m;
}

SymMatrix SymMatrix::congruence(const Matrix& j) const {
  if (j.rows() != dim_)
    throw InvalidInput("SymMatrix::congruence: dimension mismatch");
  const int n = j.cols();
  // tmp = A J
  Matrix tmp(dim_, n);
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) s += (*this)(r, k) * j(k, c);
      tmp(r, c) = s;
    }
  SymMatrix out(n);
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) s += j(k, r) * tmp(k, c);
      out.set(r, c, s);
    }
  return out;
}

//--------------------------------------------------------------------------
// Jacobi eigensolver

namespace {

double off_diagonal_sq(const SymMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i + 1; j < a.dim(); ++j) s += 2.0 * a(i, j) * a(i, j);
  return s;
}

}  // namespace

EigenDecomposition eig_sym(const SymMatrix& a) {
  if (!a.finite()) throw InvalidInput("eig_sym: non-finite entries");
  const int n = a.dim();
  SymMatrix work = a;
  Matrix v = Matrix::identity(n);

  const double fro = std::sqrt(a.sum_sq());
  const double tol_sq = 1e-24 * fro * fro;  // (1e-12 * ||A||_F)^2
  const int max_sweeps = 64;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_sq(work) <= tol_sq) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = work(p, q);
        if (apq == 0.0) continue;
        // Stable rotation (Golub & Van Loan 8.4).
        const double theta = (work(q, q) - work(p, p)) / (2.0 * apq);
        const double t =
            (theta >= 0.0 ? 1.0 : -1.0) /
            (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        const double app = work(p, p), aqq = work(q, q);
        work.set(p, p, app - t * apq);
        work.set(q, q, aqq + t * apq);
        work.set(p, q, 0.0);
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = work(k, p), akq = work(k, q);
          work.set(k, p, c * akp - s * akq);
          work.set(k, q, s * akp + c * akq);
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  // Sort ascending, stable over ties so results are deterministic.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return work(i, i) < work(j, j); });

  EigenDecomposition dec;
  dec.eigenvalues.resize(static_cast<std::size_t>(n));
  dec.eigenvectors = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    dec.eigenvalues[static_cast<std::size_t>(k)] = work(order[k], order[k]);
    for (int i = 0; i < n; ++i) dec.eigenvectors(i, k) = v(i, order[k]);
  }
  return dec;
}

MatrixNorms matrix_norms(const SymMatrix& a) {
  if (!a.finite()) throw InvalidInput("matrix_norms: non-finite entries");
  MatrixNorms norms{};
  norms.trace = a.trace();
  norms.trace_sq = a.sum_sq();
  norms.frobenius = std::sqrt(norms.trace_sq);
  const EigenDecomposition dec = eig_sym(a);
  double nuc = 0.0;
  for (double lambda : dec.eigenvalues) nuc += std::abs(lambda);
  norms.nuclear = nuc;
  return norms;
}

PsdSqrtResult sqrt_psd(const SymMatrix& a, double tol_scale) {
  const EigenDecomposition dec = eig_sym(a);
  const int n = a.dim();
  const double tol_psd = tol_scale * std::sqrt(a.sum_sq());
  const double min_eig = dec.eigenvalues.front();
  if (min_eig < -tol_psd)
    throw NotPositiveSemidefinite("sqrt_psd: eigenvalue below -tolerance",
                                  min_eig);

  Vec roots(static_cast<std::size_t>(n));
  bool clamped = false;
  for (int k = 0; k < n; ++k) {
    double lambda = dec.eigenvalues[static_cast<std::size_t>(k)];
    if (lambda < 0.0) {
      lambda = 0.0;
      clamped = true;
    }
    roots[static_cast<std::size_t>(k)] = std::sqrt(lambda);
  }

  SymMatrix root(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += dec.eigenvectors(i, k) * roots[static_cast<std::size_t>(k)] *
             dec.eigenvectors(j, k);
      root.set(i, j, s);
    }
  return {root, clamped, min_eig};
}

}  // namespace losscurv
