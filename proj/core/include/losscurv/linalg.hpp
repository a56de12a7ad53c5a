#ifndef LOSSCURV_LINALG_HPP_
#define LOSSCURV_LINALG_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace losscurv {

using Vec = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
bool all_finite(std::span<const double> a);

// Dense rectangular matrix, row-major. Used for Jacobians, eigenvector
// tables and datasets; SymMatrix below is the workhorse for Hessians.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);
  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[idx(i, j)]; }
  double operator()(int i, int j) const { return data_[idx(i, j)]; }

  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * cols_,
            static_cast<std::size_t>(cols_)};
  }

  Vec multiply(std::span<const double> x) const;            // A x
  Vec multiply_transposed(std::span<const double> x) const;  // A^T x

  // Determinant by LU with partial pivoting; square matrices only.
  double det() const;

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * cols_ + j;
  }
  int rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// Dense symmetric matrix. Both triangles are stored and kept equal bit-for-
// bit: set() writes the mirrored entry, so entries(i,j) == entries(j,i)
// holds exactly at all times.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim, double fill = 0.0);
  static SymMatrix identity(int dim);
  static SymMatrix diagonal(std::span<const double> d);
  // v v^T scaled, optionally added onto an existing matrix.
  static SymMatrix outer(std::span<const double> v, double scale = 1.0);

  int dim() const { return dim_; }

  double operator()(int i, int j) const { return data_[idx(i, j)]; }
  void set(int i, int j, double value) {
    data_[idx(i, j)] = value;
    data_[idx(j, i)] = value;
  }
  void add(int i, int j, double value) { set(i, j, data_[idx(i, j)] + value); }

  double trace() const;
  // Sum of squared entries; equals trace(A^2) for symmetric A.
  double sum_sq() const;
  bool finite() const;

  Vec multiply(std::span<const double> x) const;  // A x
  SymMatrix scaled(double s) const;
  SymMatrix plus(const SymMatrix& other) const;
  // A*A (symmetric for symmetric A).
  SymMatrix square() const;
  // Congruence J^T A J for rectangular J (rows = dim, cols free).
  SymMatrix congruence(const Matrix& j) const;

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * dim_ + j;
  }
  int dim_ = 0;
  std::vector<double> data_;
};

// Eigendecomposition of a symmetric matrix. Eigenvalues ascending;
// eigenvectors(i, k) is component i of the unit eigenvector for
// eigenvalues[k], so A = V diag(lambda) V^T.
struct EigenDecomposition {
  Vec eigenvalues;
  Matrix eigenvectors;
};

// Cyclic Jacobi rotations; converges when the off-diagonal Frobenius norm
// drops below 1e-12 * ||A||_F. Throws InvalidInput on non-finite entries.
EigenDecomposition eig_sym(const SymMatrix& a);

struct MatrixNorms {
  double nuclear;    // sum |lambda_i|
  double frobenius;  // sqrt(sum lambda_i^2)
  double trace;      // sum lambda_i
  double trace_sq;   // trace(A^2) = sum lambda_i^2
};

// trace and trace_sq come straight off the entries (exact for integer
// matrices); nuclear requires the eigenvalues.
MatrixNorms matrix_norms(const SymMatrix& a);

struct PsdSqrtResult {
  SymMatrix root;          // R with R*R ~= a (negatives clamped to zero)
  bool clamped;            // true if any eigenvalue was clamped
  double min_eigenvalue;   // smallest eigenvalue of a
};

// PSD square root via eigendecomposition. Eigenvalues in
// [-tol_psd, 0) with tol_psd = tol_scale * ||a||_F are treated as round-off
// and clamped to zero; anything below -tol_psd throws
// NotPositiveSemidefinite carrying the most negative eigenvalue.
PsdSqrtResult sqrt_psd(const SymMatrix& a, double tol_scale = 1e-10);

}  // namespace losscurv

#endif  // LOSSCURV_LINALG_HPP_
