#pragma once

#include "cpext/linalg.hpp"

#include <cstdint>
#include <random>

namespace cpext {

/// Deterministic random source for generators, witness search and the
/// property suite. All randomized entry points take an explicit seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t raw() { return eng_(); }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return std::uniform_int_distribution<int>(lo, hi)(eng_);
  }

  Complex gaussian() {
    std::normal_distribution<double> n(0.0, 1.0);
    return Complex(n(eng_), n(eng_));
  }

  CMatrix gaussian_matrix(int rows, int cols) {
    CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) m(i, j) = gaussian();
    }
    return m;
  }

  CVector unit_vector(int dim) {
    CVector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = gaussian();
    return v / v.norm();
  }

  /// Haar-distributed unitary via QR of a Ginibre matrix.
  CMatrix unitary(int n) {
    if (n == 0) return CMatrix(0, 0);
    Eigen::HouseholderQR<CMatrix> qr(gaussian_matrix(n, n));
    CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
      const Complex d = r(i, i);
      q.col(i) *= (std::abs(d) > 0.0) ? d / std::abs(d) : 1.0;
    }
    return q;
  }

  /// Random PSD matrix of the given rank, spectrum in (0, 1].
  CMatrix psd(int n, int rank) {
    if (rank <= 0) return CMatrix::Zero(n, n);
    CMatrix u = unitary(n);
    CMatrix m = CMatrix::Zero(n, n);
    double top = 0.0;
    RVector lam(rank);
    for (int i = 0; i < rank; ++i) {
      lam(i) = uniform(0.05, 1.0);
      top = std::max(top, lam(i));
    }
    for (int i = 0; i < rank; ++i) {
      m += (lam(i) / top) * u.col(i) * u.col(i).adjoint();
    }
    return m;
  }

  /// Invertible PSD contraction with norm exactly 1 when norm_one is set.
  CMatrix psd_invertible(int n, bool norm_one = false) {
    CMatrix u = unitary(n);
    CMatrix m = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      double lam = uniform(0.1, 1.0);
      if (norm_one && i == 0) lam = 1.0;
      m += lam * u.col(i) * u.col(i).adjoint();
    }
    return m;
  }

  CMatrix projection(int n, int rank) {
    CMatrix u = unitary(n);
    CMatrix p = CMatrix::Zero(n, n);
    for (int i = 0; i < rank; ++i) p += u.col(i) * u.col(i).adjoint();
    return p;
  }

  /// Invertible matrix with condition number bounded by roughly 1/floor.
  CMatrix invertible(int n, double floor = 0.2) {
    CMatrix a = unitary(n);
    CMatrix b = unitary(n);
    RVector s(n);
    for (int i = 0; i < n; ++i) s(i) = uniform(floor, 1.0);
    return a * s.asDiagonal() * b;
  }

  /// Isometry C^cols -> C^rows (requires rows >= cols).
  CMatrix isometry(int rows, int cols) { return unitary(rows).leftCols(cols); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace cpext
