#include "cpext/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace cpext {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::RangeMismatch: return "RangeMismatch";
    case ErrorCode::KernelMismatch: return "KernelMismatch";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::BadScalar: return "BadScalar";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::AlgebraMismatch: return "AlgebraMismatch";
    case ErrorCode::UnitNotInvertible: return "UnitNotInvertible";
    case ErrorCode::NotCp: return "NotCp";
    case ErrorCode::OffDiagonalLeak: return "OffDiagonalLeak";
    case ErrorCode::NotContractive: return "NotContractive";
    case ErrorCode::NotUnital: return "NotUnital";
    case ErrorCode::ZeroMap: return "ZeroMap";
    case ErrorCode::NotPure: return "NotPure";
    case ErrorCode::NotDominated: return "NotDominated";
    case ErrorCode::ReconstructionFailure: return "ReconstructionFailure";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InfeasibleParams: return "InfeasibleParams";
    case ErrorCode::NotCommutativeAlgebra: return "NotCommutativeAlgebra";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "UnknownError";
}

void Tolerances::validate() const {
  auto ok = [](double v) { return v > 0.0 && v < 1.0; };
  if (!ok(eig_cut) || !ok(inv_cut) || !ok(eq_tol) || !ok(sym_tol)) {
    throw Error(ErrorCode::InvalidSpec, "tolerances must lie strictly in (0,1)");
  }
}

namespace linalg {

double fro(const CMatrix& m) { return m.norm(); }

bool finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Complex& z = m(i, j);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
  }
  return true;
}

CMatrix hermitize(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

bool is_hermitian(const CMatrix& m, const Tolerances& tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).norm() <= tol.sym_tol * std::max(1.0, m.norm());
}

bool approx_equal(const CMatrix& a, const CMatrix& b, const Tolerances& tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const double scale = std::max({1.0, a.norm(), b.norm()});
  return (a - b).norm() <= tol.eq_tol * scale;
}

RVector hermitian_eigenvalues(const CMatrix& m, const Tolerances& tol) {
  if (!is_hermitian(m, tol)) {
    throw Error(ErrorCode::NonHermitian, "matrix exceeds the Hermiticity tolerance");
  }
  if (m.rows() == 0) return RVector(0);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

PsdReport psd_check(const CMatrix& m, const Tolerances& tol) {
  RVector ev = hermitian_eigenvalues(m, tol);
  if (ev.size() == 0) return {true, 0.0};
  const double lmin = ev.minCoeff();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return {lmin >= -tol.eig_cut * scale, lmin};
}

namespace {

// Shared eigen-based PSD functional calculus. Eigenvalues inside the cutoff
// band [-eig_cut*scale, eig_cut*scale] are treated as exactly zero (a square
// root would otherwise amplify rounding noise into spurious rank); more
// negative input raises NotPsd.
template <typename F>
CMatrix psd_calculus(const CMatrix& m, const Tolerances& tol, F&& f) {
  if (!is_hermitian(m, tol)) {
    throw Error(ErrorCode::NonHermitian, "matrix exceeds the Hermiticity tolerance");
  }
  if (m.rows() == 0) return m;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(m));
  RVector ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  RVector mapped(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    double v = ev(i);
    if (v < -tol.eig_cut * scale) {
      throw Error(ErrorCode::NotPsd, "eigenvalue " + std::to_string(v) + " below PSD cutoff");
    }
    mapped(i) = (std::abs(v) <= tol.eig_cut * scale) ? 0.0 : f(v);
  }
  return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

CMatrix psd_sqrt(const CMatrix& m, const Tolerances& tol) {
  return psd_calculus(m, tol, [](double v) { return std::sqrt(v); });
}

CMatrix psd_inv_sqrt(const CMatrix& m, const Tolerances& tol) {
  // Rank decision on eigenvalues of the PSD input, relative to the largest.
  double lmax = 0.0;
  {
    RVector ev = hermitian_eigenvalues(m, tol);
    if (ev.size() > 0) lmax = std::max(0.0, ev.maxCoeff());
  }
  const double cut = tol.inv_cut * lmax;
  return psd_calculus(m, tol, [cut](double v) { return v > cut ? 1.0 / std::sqrt(v) : 0.0; });
}

RangeBasis range_basis(const CMatrix& m, const Tolerances& tol) {
  if (m.rows() == 0 || m.cols() == 0) return {CMatrix::Zero(m.rows(), 0), 0};
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU);
  const RVector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol.inv_cut * smax && sv(i) > 0.0) ++rank;
  }
  return {svd.matrixU().leftCols(rank), rank};
}

CMatrix kernel_basis(const CMatrix& m, const Tolerances& tol) {
  if (m.cols() == 0) return CMatrix::Zero(0, 0);
  if (m.rows() == 0) return CMatrix::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol.inv_cut * smax && sv(i) > 0.0) ++rank;
  }
  return svd.matrixV().rightCols(m.cols() - rank);
}

CMatrix pinv(const CMatrix& m, const Tolerances& tol) {
  if (m.rows() == 0 || m.cols() == 0) return CMatrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  RVector inv = RVector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol.inv_cut * smax && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

bool is_invertible(const CMatrix& m, const Tolerances& tol) {
  if (m.rows() != m.cols()) return false;
  if (m.rows() == 0) return true;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const RVector& sv = svd.singularValues();
  const double smax = sv(0);
  if (!(smax > 0.0)) return false;
  return sv(sv.size() - 1) > tol.inv_cut * smax;
}

namespace {

// ||(I - QQ*) X|| for an orthonormal basis Q: how far the columns of X stick
// out of span(Q).
double out_of_span(const CMatrix& q, const CMatrix& x) {
  if (x.cols() == 0) return 0.0;
  return (x - q * (q.adjoint() * x)).norm();
}

}  // namespace

CMatrix invertible_factor(const CMatrix& a, const CMatrix& b, const Tolerances& tol) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw Error(ErrorCode::DimMismatch, "invertible_factor needs square matrices of equal size");
  }
  const double scale = std::max({1.0, a.norm(), b.norm()});
  const double gate = std::sqrt(tol.eq_tol) * scale;

  RangeBasis ra = range_basis(a, tol);
  RangeBasis rb = range_basis(b, tol);
  if (ra.rank != rb.rank || out_of_span(rb.basis, ra.basis) > gate ||
      out_of_span(ra.basis, rb.basis) > gate) {
    throw Error(ErrorCode::RangeMismatch, "ran(A) != ran(B) at tolerance");
  }
  RangeBasis ca = range_basis(a.adjoint(), tol);  // (ker A)^perp
  RangeBasis cb = range_basis(b.adjoint(), tol);
  if (ca.rank != cb.rank || out_of_span(cb.basis, ca.basis) > gate ||
      out_of_span(ca.basis, cb.basis) > gate) {
    throw Error(ErrorCode::KernelMismatch, "ker(A) != ker(B) at tolerance");
  }

  const CMatrix bp = pinv(b, tol);
  const CMatrix c = bp * a + (CMatrix::Identity(a.cols(), a.cols()) - bp * b);
  if (!is_invertible(c, tol)) {
    throw Error(ErrorCode::NotInvertible, "computed factor is singular");
  }
  return c;
}

CMatrix douglas_complete(const CMatrix& p, const CMatrix& q, double t, const Tolerances& tol) {
  if (!(t > 0.0 && t < 1.0)) {
    throw Error(ErrorCode::BadScalar, "t must lie in (0,1)");
  }
  if (p.rows() != q.rows() || p.cols() != q.cols()) {
    throw Error(ErrorCode::DimMismatch, "P and Q must have equal dimensions");
  }
  if (!psd_check(q, tol).psd) {
    throw Error(ErrorCode::OrderViolation, "Q is not PSD");
  }
  if (!psd_check(p - q, tol).psd) {
    throw Error(ErrorCode::OrderViolation, "Q exceeds P in the operator order");
  }
  const CMatrix root = psd_sqrt(p - t * q, tol);
  const CMatrix proot = psd_sqrt(p, tol);
  return invertible_factor(root, proot, tol);
}

ConjugacyReport range_conjugacy_check(const CMatrix& t, const CMatrix& p, const Tolerances& tol) {
  if (t.rows() != t.cols() || p.rows() != p.cols() || t.rows() != p.rows()) {
    throw Error(ErrorCode::DimMismatch, "T and P must be square of equal size");
  }
  if (!is_invertible(t, tol)) {
    throw Error(ErrorCode::NotInvertible, "T is singular at tolerance");
  }
  const CMatrix proot = psd_sqrt(p, tol);
  const CMatrix lhs = t.adjoint() * proot;
  RangeBasis rl = range_basis(lhs, tol);
  RangeBasis rp = range_basis(proot, tol);
  const double gate = std::sqrt(tol.eq_tol) * std::max(1.0, proot.norm());
  if (out_of_span(rp.basis, rl.basis) > gate) {
    throw Error(ErrorCode::OrderViolation,
                "ran(T*P^{1/2}) is not contained in ran(P^{1/2}); no beta with T*PT <= beta P");
  }
  if (rl.rank != rp.rank) return {false, CMatrix()};
  return {true, invertible_factor(lhs, proot, tol)};
}

}  // namespace linalg
}  // namespace cpext
