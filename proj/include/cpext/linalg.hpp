#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace cpext {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

enum class ErrorCode {
  NonHermitian,
  NotPsd,
  RangeMismatch,
  KernelMismatch,
  OrderViolation,
  BadScalar,
  NotInvertible,
  DimMismatch,
  AlgebraMismatch,
  UnitNotInvertible,
  NotCp,
  OffDiagonalLeak,
  NotContractive,
  NotUnital,
  ZeroMap,
  NotPure,
  NotDominated,
  ReconstructionFailure,
  InvalidSpec,
  InfeasibleParams,
  NotCommutativeAlgebra,
  ModelMismatch,
  ParseError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Relative cutoffs used by every tolerance-aware decision in the toolkit.
/// eig_cut drives PSD/rank decisions on eigenvalues, inv_cut drives
/// invertibility/rank decisions on singular values, eq_tol is the Frobenius
/// tolerance for operator and map equality, and sym_tol bounds the allowed
/// Hermiticity defect.
struct Tolerances {
  double eig_cut = 1e-9;
  double inv_cut = 1e-8;
  double eq_tol = 1e-8;
  double sym_tol = 1e-10;

  void validate() const;
};

namespace linalg {

double fro(const CMatrix& m);

bool finite(const CMatrix& m);

CMatrix hermitize(const CMatrix& m);

bool is_hermitian(const CMatrix& m, const Tolerances& tol);

/// Relative Frobenius comparison: ||a - b|| <= eq_tol * max(1, ||a||, ||b||).
bool approx_equal(const CMatrix& a, const CMatrix& b, const Tolerances& tol);

/// Eigenvalues of a Hermitian matrix, ascending. Throws NonHermitian.
RVector hermitian_eigenvalues(const CMatrix& m, const Tolerances& tol);

struct PsdReport {
  bool psd = false;
  double min_eig = 0.0;
};

/// PSD test at relative eigenvalue cutoff; also reports the smallest
/// eigenvalue for diagnostics.
PsdReport psd_check(const CMatrix& m, const Tolerances& tol);

/// PSD square root. Eigenvalues in [-eig_cut*scale, 0] are clamped to zero;
/// anything more negative raises NotPsd.
CMatrix psd_sqrt(const CMatrix& m, const Tolerances& tol);

/// Inverse of the PSD square root on the range of m (pseudo-inverse on the
/// kernel). Throws NotPsd.
CMatrix psd_inv_sqrt(const CMatrix& m, const Tolerances& tol);

struct RangeBasis {
  CMatrix basis;  // dim x rank, orthonormal columns
  int rank = 0;
};

/// Orthonormal basis of the numerical range (column space) at singular-value
/// cutoff inv_cut * sigma_max.
RangeBasis range_basis(const CMatrix& m, const Tolerances& tol);

/// Orthonormal basis of the numerical kernel (right null space).
CMatrix kernel_basis(const CMatrix& m, const Tolerances& tol);

/// Moore-Penrose pseudo-inverse at rank cutoff inv_cut * sigma_max.
CMatrix pinv(const CMatrix& m, const Tolerances& tol);

bool is_invertible(const CMatrix& m, const Tolerances& tol);

/// Invertible C with A = B*C, for square A, B with equal numerical range and
/// kernel. C acts as pinv(B)*A on the co-kernel and as the identity on
/// ker(A). Throws RangeMismatch / KernelMismatch.
CMatrix invertible_factor(const CMatrix& a, const CMatrix& b, const Tolerances& tol);

/// Invertible Y with P - t*Q = Y*PY for 0 <= Q <= P and t in (0,1).
/// Factors (P - tQ)^{1/2} = P^{1/2} Y through invertible_factor.
CMatrix douglas_complete(const CMatrix& p, const CMatrix& q, double t, const Tolerances& tol);

struct ConjugacyReport {
  bool conjugate = false;
  CMatrix y;  // invertible with T*P^{1/2} = P^{1/2}*Y, set when conjugate
};

/// Checks ran(T*P^{1/2}) = ran(P^{1/2}) for invertible T and PSD P, returning
/// the invertible factor when the ranges agree. Requires the containment
/// ran(T*P^{1/2}) in ran(P^{1/2}) as a precondition.
ConjugacyReport range_conjugacy_check(const CMatrix& t, const CMatrix& p, const Tolerances& tol);

}  // namespace linalg
}  // namespace cpext
