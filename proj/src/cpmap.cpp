#include "cpext/cpmap.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace cpext {

using linalg::fro;

int AlgebraSpec::total_dim() const {
  int s = 0;
  for (int n : blocks) s += n * n;
  return s;
}

bool AlgebraSpec::commutative() const {
  return std::all_of(blocks.begin(), blocks.end(), [](int n) { return n == 1; });
}

void AlgebraSpec::validate() const {
  if (blocks.empty()) throw Error(ErrorCode::InvalidSpec, "algebra needs at least one block");
  for (int n : blocks) {
    if (n < 1) throw Error(ErrorCode::InvalidSpec, "block sizes must be positive");
  }
}

AlgElement AlgElement::zero(const AlgebraSpec& alg) {
  AlgElement a;
  for (int n : alg.blocks) a.blocks.push_back(CMatrix::Zero(n, n));
  return a;
}

AlgElement AlgElement::identity(const AlgebraSpec& alg) {
  AlgElement a;
  for (int n : alg.blocks) a.blocks.push_back(CMatrix::Identity(n, n));
  return a;
}

AlgElement AlgElement::matrix_unit(const AlgebraSpec& alg, int block, int p, int q) {
  AlgElement a = zero(alg);
  a.blocks[static_cast<size_t>(block)](p, q) = 1.0;
  return a;
}

AlgElement AlgElement::adjoint() const {
  AlgElement a;
  for (const CMatrix& b : blocks) a.blocks.push_back(b.adjoint());
  return a;
}

CpMap CpMap::zero(const AlgebraSpec& alg, int hdim) {
  CpMap m;
  m.algebra = alg;
  m.hdim = hdim;
  for (int n : alg.blocks) m.choi.push_back(CMatrix::Zero(n * hdim, n * hdim));
  return m;
}

CpMap CpMap::identity_map(int n) {
  CpMap m = zero(AlgebraSpec{{n}}, n);
  // Choi of the identity channel: sum_{p,q} E_pq (x) E_pq.
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      m.choi[0](p * n + p, q * n + q) = 1.0;
    }
  }
  return m;
}

void CpMap::validate() const {
  algebra.validate();
  if (hdim < 0) throw Error(ErrorCode::InvalidSpec, "hdim must be non-negative");
  if (static_cast<int>(choi.size()) != algebra.num_blocks()) {
    throw Error(ErrorCode::DimMismatch, "one Choi block per algebra block required");
  }
  for (int i = 0; i < algebra.num_blocks(); ++i) {
    const int m = algebra.block_size(i) * hdim;
    if (choi[static_cast<size_t>(i)].rows() != m || choi[static_cast<size_t>(i)].cols() != m) {
      throw Error(ErrorCode::DimMismatch, "Choi block " + std::to_string(i) + " has wrong shape");
    }
    if (!linalg::finite(choi[static_cast<size_t>(i)])) {
      throw Error(ErrorCode::InvalidSpec, "Choi entries must be finite");
    }
  }
}

CMatrix CpMap::choi_sub(int block, int p, int q) const {
  return choi[static_cast<size_t>(block)].block(p * hdim, q * hdim, hdim, hdim);
}

CpMap& CpMap::operator+=(const CpMap& other) {
  if (!(algebra == other.algebra) || hdim != other.hdim) {
    throw Error(ErrorCode::DimMismatch, "cannot add maps with different shapes");
  }
  for (size_t i = 0; i < choi.size(); ++i) choi[i] += other.choi[i];
  return *this;
}

CpMap operator*(double t, CpMap m) {
  for (CMatrix& c : m.choi) c *= t;
  return m;
}

const char* unit_tag_name(UnitTag tag) {
  switch (tag) {
    case UnitTag::Zero: return "zero";
    case UnitTag::Projection: return "projection";
    case UnitTag::Invertible: return "invertible";
    case UnitTag::GeneralPsd: return "general_psd";
  }
  return "unknown";
}

CMatrix apply(const CpMap& phi, const AlgElement& a) {
  if (static_cast<int>(a.blocks.size()) != phi.algebra.num_blocks()) {
    throw Error(ErrorCode::DimMismatch, "element does not match the algebra");
  }
  CMatrix out = CMatrix::Zero(phi.hdim, phi.hdim);
  for (int i = 0; i < phi.algebra.num_blocks(); ++i) {
    const int n = phi.algebra.block_size(i);
    const CMatrix& ai = a.blocks[static_cast<size_t>(i)];
    if (ai.rows() != n || ai.cols() != n) {
      throw Error(ErrorCode::DimMismatch, "element block " + std::to_string(i) + " has wrong shape");
    }
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        const Complex c = ai(p, q);
        if (c != Complex(0.0, 0.0)) out += c * phi.choi_sub(i, p, q);
      }
    }
  }
  return out;
}

CMatrix unit_image(const CpMap& phi) {
  CMatrix u = CMatrix::Zero(phi.hdim, phi.hdim);
  for (int i = 0; i < phi.algebra.num_blocks(); ++i) {
    for (int p = 0; p < phi.algebra.block_size(i); ++p) u += phi.choi_sub(i, p, p);
  }
  return u;
}

CpMap from_kraus(const AlgebraSpec& alg, int hdim,
                 const std::vector<std::vector<CMatrix>>& kraus) {
  alg.validate();
  if (static_cast<int>(kraus.size()) != alg.num_blocks()) {
    throw Error(ErrorCode::DimMismatch, "one Kraus list per algebra block required");
  }
  CpMap m = CpMap::zero(alg, hdim);
  for (int i = 0; i < alg.num_blocks(); ++i) {
    const int n = alg.block_size(i);
    for (const CMatrix& k : kraus[static_cast<size_t>(i)]) {
      if (k.rows() != n || k.cols() != hdim) {
        throw Error(ErrorCode::DimMismatch, "Kraus operator must be n_i x d");
      }
      // Choi block += w w* with w[(p,u)] = conj(K[p,u]).
      CVector w(n * hdim);
      for (int p = 0; p < n; ++p) {
        for (int u = 0; u < hdim; ++u) w(p * hdim + u) = std::conj(k(p, u));
      }
      m.choi[static_cast<size_t>(i)] += w * w.adjoint();
    }
  }
  return m;
}

std::vector<std::vector<CMatrix>> kraus_of(const CpMap& phi, const Tolerances& tol) {
  std::vector<std::vector<CMatrix>> out(static_cast<size_t>(phi.algebra.num_blocks()));
  for (int i = 0; i < phi.algebra.num_blocks(); ++i) {
    const CMatrix& c = phi.choi[static_cast<size_t>(i)];
    if (!linalg::is_hermitian(c, tol)) {
      throw Error(ErrorCode::NonHermitian, "Choi block " + std::to_string(i) + " is not Hermitian");
    }
    if (c.rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(linalg::hermitize(c));
    const RVector& ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    const int n = phi.algebra.block_size(i);
    // Descending eigenvalue order; Eigen returns ascending.
    for (Eigen::Index s = ev.size() - 1; s >= 0; --s) {
      const double lam = ev(s);
      if (lam < -tol.eig_cut * scale) {
        throw Error(ErrorCode::NotPsd, "Choi block " + std::to_string(i) + " is not PSD");
      }
      if (lam <= tol.eig_cut * scale) continue;
      CVector v = es.eigenvectors().col(s);
      // Phase fix: first component of non-negligible magnitude made real
      // positive, so certificates do not depend on eigen-solver phases.
      const double vmax = v.cwiseAbs().maxCoeff();
      for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
        if (std::abs(v(idx)) > 1e-12 * vmax) {
          v *= std::conj(v(idx)) / std::abs(v(idx));
          break;
        }
      }
      CMatrix k(n, phi.hdim);
      const double root = std::sqrt(lam);
      for (int p = 0; p < n; ++p) {
        for (int u = 0; u < phi.hdim; ++u) k(p, u) = root * std::conj(v(p * phi.hdim + u));
      }
      out[static_cast<size_t>(i)].push_back(std::move(k));
    }
  }
  return out;
}

bool is_projection_matrix(const CMatrix& p, const Tolerances& tol) {
  if (!linalg::is_hermitian(p, tol)) return false;
  RVector ev = linalg::hermitian_eigenvalues(p, tol);
  const double gate = tol.eq_tol * std::max(1.0, ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::min(std::abs(ev(i)), std::abs(ev(i) - 1.0)) > gate) return false;
  }
  return true;
}

UnitClass classify_unit(const CMatrix& p, const Tolerances& tol) {
  UnitClass u;
  u.p = p;
  RVector ev = linalg::hermitian_eigenvalues(p, tol);
  const double lmax = ev.size() ? ev.maxCoeff() : 0.0;
  if (lmax <= tol.eig_cut) {
    u.tag = UnitTag::Zero;
  } else if (ev.minCoeff() > tol.inv_cut * lmax) {
    u.tag = UnitTag::Invertible;
  } else if (is_projection_matrix(p, tol)) {
    u.tag = UnitTag::Projection;
  } else {
    u.tag = UnitTag::GeneralPsd;
  }
  return u;
}

VerifyReport verify(const CpMap& phi, const Tolerances& tol) {
  phi.validate();
  VerifyReport r;
  r.choi_hermitian = true;
  r.is_cp = true;
  r.min_choi_eig = 0.0;
  for (const CMatrix& c : phi.choi) {
    if (!linalg::is_hermitian(c, tol)) {
      r.choi_hermitian = false;
      r.is_cp = false;
      continue;
    }
    linalg::PsdReport pr = linalg::psd_check(c, tol);
    r.min_choi_eig = std::min(r.min_choi_eig, pr.min_eig);
    if (!pr.psd) r.is_cp = false;
  }
  const CMatrix p = linalg::hermitize(unit_image(phi));
  r.unit = classify_unit(p, tol);
  RVector ev = linalg::hermitian_eigenvalues(p, tol);
  r.norm = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  r.is_contractive =
      linalg::psd_check(CMatrix::Identity(phi.hdim, phi.hdim) - p, tol).psd;
  r.is_unital = linalg::approx_equal(p, CMatrix::Identity(phi.hdim, phi.hdim), tol);
  return r;
}

bool cp_order(const CpMap& psi, const CpMap& phi, const Tolerances& tol) {
  if (!(psi.algebra == phi.algebra) || psi.hdim != phi.hdim) {
    throw Error(ErrorCode::DimMismatch, "cp_order needs maps with identical shape");
  }
  for (size_t i = 0; i < phi.choi.size(); ++i) {
    if (!linalg::psd_check(phi.choi[i] - psi.choi[i], tol).psd) return false;
  }
  return true;
}

CpMap adjoin(const CpMap& phi, const CMatrix& t) {
  if (t.rows() != phi.hdim || t.cols() != phi.hdim) {
    throw Error(ErrorCode::DimMismatch, "Ad_T needs a d x d conjugator");
  }
  CpMap out = phi;
  for (int i = 0; i < phi.algebra.num_blocks(); ++i) {
    const int n = phi.algebra.block_size(i);
    CMatrix big = CMatrix::Zero(n * phi.hdim, n * phi.hdim);
    for (int p = 0; p < n; ++p) big.block(p * phi.hdim, p * phi.hdim, phi.hdim, phi.hdim) = t;
    out.choi[static_cast<size_t>(i)] = big.adjoint() * phi.choi[static_cast<size_t>(i)] * big;
  }
  return out;
}

CpMap hat(const CpMap& phi, const Tolerances& tol) {
  const CMatrix p = linalg::hermitize(unit_image(phi));
  if (!linalg::is_invertible(p, tol)) {
    throw Error(ErrorCode::UnitNotInvertible, "Phi(1) is singular at tolerance");
  }
  return adjoin(phi, linalg::psd_inv_sqrt(p, tol));
}

CpMap direct_sum(const CpMap& a, const CpMap& b) {
  if (!(a.algebra == b.algebra)) {
    throw Error(ErrorCode::AlgebraMismatch, "direct sum needs a common algebra");
  }
  CpMap out = CpMap::zero(a.algebra, a.hdim + b.hdim);
  for (int i = 0; i < a.algebra.num_blocks(); ++i) {
    const int n = a.algebra.block_size(i);
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        CMatrix sub = CMatrix::Zero(out.hdim, out.hdim);
        sub.topLeftCorner(a.hdim, a.hdim) = a.choi_sub(i, p, q);
        sub.bottomRightCorner(b.hdim, b.hdim) = b.choi_sub(i, p, q);
        out.choi[static_cast<size_t>(i)].block(p * out.hdim, q * out.hdim, out.hdim, out.hdim) =
            sub;
      }
    }
  }
  return out;
}

Compression compress_to_range(const CpMap& phi, const Tolerances& tol) {
  VerifyReport vr = verify(phi, tol);
  if (!vr.is_cp) throw Error(ErrorCode::NotCp, "compress_to_range needs a CP map");
  const CMatrix p = linalg::hermitize(unit_image(phi));
  linalg::RangeBasis rb = linalg::range_basis(p, tol);
  Compression out;
  out.range_basis = rb.basis;
  out.kernel_basis = linalg::kernel_basis(p, tol);
  out.compressed = CpMap::zero(phi.algebra, rb.rank);
  const double scale = std::max(1.0, p.norm());
  for (int i = 0; i < phi.algebra.num_blocks(); ++i) {
    const int n = phi.algebra.block_size(i);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const CMatrix sub = phi.choi_sub(i, a, b);
        const CMatrix off = out.range_basis.adjoint() * sub * out.kernel_basis;
        const CMatrix corner = out.kernel_basis.adjoint() * sub * out.kernel_basis;
        if (off.norm() > tol.eq_tol * scale || corner.norm() > tol.eq_tol * scale) {
          throw Error(ErrorCode::OffDiagonalLeak,
                      "map does not vanish on the kernel of its unit image");
        }
        out.compressed.choi[static_cast<size_t>(i)].block(a * rb.rank, b * rb.rank, rb.rank,
                                                          rb.rank) =
            out.range_basis.adjoint() * sub * out.range_basis;
      }
    }
  }
  return out;
}

bool is_homomorphism(const CpMap& phi, const Tolerances& tol) {
  // Multiplicativity on matrix-unit generators. Units from distinct blocks
  // multiply to zero; within a block E_pq E_rs = delta_qr E_ps.
  struct Gen {
    int block, p, q;
    CMatrix image;
  };
  std::vector<Gen> gens;
  double scale = 1.0;
  for (int i = 0; i < phi.algebra.num_blocks(); ++i) {
    const int n = phi.algebra.block_size(i);
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        Gen g{i, p, q, phi.choi_sub(i, p, q)};
        scale = std::max(scale, g.image.norm());
        gens.push_back(std::move(g));
      }
    }
  }
  const double gate = tol.eq_tol * scale * scale;
  for (const Gen& a : gens) {
    // *-preservation: Phi(E_pq)* = Phi(E_qp).
    if ((a.image.adjoint() - phi.choi_sub(a.block, a.q, a.p)).norm() > gate) return false;
    for (const Gen& b : gens) {
      CMatrix product = CMatrix::Zero(phi.hdim, phi.hdim);
      if (a.block == b.block && a.q == b.p) product = phi.choi_sub(a.block, a.p, b.q);
      if ((a.image * b.image - product).norm() > gate) return false;
    }
  }
  return true;
}

bool maps_equal(const CpMap& a, const CpMap& b, const Tolerances& tol) {
  if (!(a.algebra == b.algebra) || a.hdim != b.hdim) return false;
  for (size_t i = 0; i < a.choi.size(); ++i) {
    if (!linalg::approx_equal(a.choi[i], b.choi[i], tol)) return false;
  }
  return true;
}

}  // namespace cpext
