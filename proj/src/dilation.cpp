#include "cpext/dilation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace cpext {

int Dilation::block_offset(int i) const {
  int off = 0;
  for (int j = 0; j < i; ++j) off += algebra.block_size(j) * mult[static_cast<size_t>(j)];
  return off;
}

Dilation minimal_dilation(const CpMap& phi, const Tolerances& tol) {
  VerifyReport vr = verify(phi, tol);
  if (!vr.is_cp) throw Error(ErrorCode::NotCp, "minimal_dilation needs a CP map");

  Dilation dil;
  dil.algebra = phi.algebra;
  dil.hdim = phi.hdim;
  dil.kraus = kraus_of(phi, tol);
  dil.kdim = 0;
  for (int i = 0; i < phi.algebra.num_blocks(); ++i) {
    const int r = static_cast<int>(dil.kraus[static_cast<size_t>(i)].size());
    dil.mult.push_back(r);
    dil.kdim += phi.algebra.block_size(i) * r;
  }
  // V[(p,s), u] = K_{i,s}[p, u] within block i.
  dil.v = CMatrix::Zero(dil.kdim, dil.hdim);
  for (int i = 0; i < phi.algebra.num_blocks(); ++i) {
    const int n = phi.algebra.block_size(i);
    const int r = dil.mult[static_cast<size_t>(i)];
    const int off = dil.block_offset(i);
    for (int s = 0; s < r; ++s) {
      const CMatrix& k = dil.kraus[static_cast<size_t>(i)][static_cast<size_t>(s)];
      for (int p = 0; p < n; ++p) {
        for (int u = 0; u < dil.hdim; ++u) dil.v(off + p * r + s, u) = k(p, u);
      }
    }
  }
  return dil;
}

CMatrix representation_apply(const Dilation& dil, const AlgElement& a) {
  CMatrix out = CMatrix::Zero(dil.kdim, dil.kdim);
  for (int i = 0; i < dil.algebra.num_blocks(); ++i) {
    const int n = dil.algebra.block_size(i);
    const int r = dil.mult[static_cast<size_t>(i)];
    const int off = dil.block_offset(i);
    const CMatrix& ai = a.blocks[static_cast<size_t>(i)];
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        for (int s = 0; s < r; ++s) out(off + p * r + s, off + q * r + s) = ai(p, q);
      }
    }
  }
  return out;
}

CMatrix commutant_expand(const Dilation& dil, const CommutantElement& e) {
  CMatrix out = CMatrix::Zero(dil.kdim, dil.kdim);
  for (int i = 0; i < dil.algebra.num_blocks(); ++i) {
    const int n = dil.algebra.block_size(i);
    const int r = dil.mult[static_cast<size_t>(i)];
    const int off = dil.block_offset(i);
    const CMatrix& m = e.blocks[static_cast<size_t>(i)];
    for (int p = 0; p < n; ++p) out.block(off + p * r, off + p * r, r, r) = m;
  }
  return out;
}

std::vector<CommutantElement> commutant_basis(const Dilation& dil) {
  std::vector<CommutantElement> basis;
  for (int i = 0; i < dil.algebra.num_blocks(); ++i) {
    const int n = dil.algebra.block_size(i);
    const int r = dil.mult[static_cast<size_t>(i)];
    for (int s = 0; s < r; ++s) {
      for (int t = 0; t < r; ++t) {
        CommutantElement e;
        for (int j = 0; j < dil.algebra.num_blocks(); ++j) {
          e.blocks.push_back(CMatrix::Zero(dil.mult[static_cast<size_t>(j)],
                                           dil.mult[static_cast<size_t>(j)]));
        }
        // I_{n_i} (x) E_st has trace norm sqrt(n_i); normalize.
        e.blocks[static_cast<size_t>(i)](s, t) = 1.0 / std::sqrt(static_cast<double>(n));
        basis.push_back(std::move(e));
      }
    }
  }
  return basis;
}

namespace {

// W_i: columns w_s with Choi block i = sum_s w_s w_s*, w_s the conjugated
// row-major vectorization of Kraus operator s scaled by sqrt(eigenvalue).
CMatrix kraus_columns(const Dilation& dil, int i) {
  const int n = dil.algebra.block_size(i);
  const int r = dil.mult[static_cast<size_t>(i)];
  CMatrix w(n * dil.hdim, r);
  for (int s = 0; s < r; ++s) {
    const CMatrix& k = dil.kraus[static_cast<size_t>(i)][static_cast<size_t>(s)];
    for (int p = 0; p < n; ++p) {
      for (int u = 0; u < dil.hdim; ++u) w(p * dil.hdim + u, s) = std::conj(k(p, u));
    }
  }
  return w;
}

}  // namespace

CpMap commutant_compress(const Dilation& dil, const CommutantElement& d) {
  CpMap out = CpMap::zero(dil.algebra, dil.hdim);
  for (int i = 0; i < dil.algebra.num_blocks(); ++i) {
    const CMatrix w = kraus_columns(dil, i);
    out.choi[static_cast<size_t>(i)] = w * d.blocks[static_cast<size_t>(i)] * w.adjoint();
  }
  return out;
}

bool is_pure(const CpMap& phi, const Tolerances& tol) {
  Dilation dil = minimal_dilation(phi, tol);
  int nonzero_blocks = 0;
  int rank = 0;
  for (int r : dil.mult) {
    if (r > 0) {
      ++nonzero_blocks;
      rank = r;
    }
  }
  if (nonzero_blocks == 0) throw Error(ErrorCode::ZeroMap, "purity is undefined for the zero map");
  return nonzero_blocks == 1 && rank == 1;
}

CommutantElement rn_derivative(const CpMap& psi, const CpMap& phi, const Tolerances& tol) {
  if (!cp_order(psi, phi, tol)) {
    throw Error(ErrorCode::NotDominated, "Psi is not cp-dominated by Phi");
  }
  Dilation dil = minimal_dilation(phi, tol);
  CommutantElement d;
  for (int i = 0; i < dil.algebra.num_blocks(); ++i) {
    const CMatrix w = kraus_columns(dil, i);
    // Choi(Psi)_i = W M W*; the least-squares coordinates are
    // M = W^+ Choi(Psi)_i (W^+)* since the columns of W are orthogonal.
    const CMatrix wp = linalg::pinv(w, tol);
    CMatrix m = wp * psi.choi[static_cast<size_t>(i)] * wp.adjoint();
    d.blocks.push_back(linalg::hermitize(m));
  }
  // Validate: reconstruction, positivity, contraction.
  CpMap rec = commutant_compress(dil, d);
  if (!maps_equal(rec, psi, tol)) {
    throw Error(ErrorCode::ReconstructionFailure,
                "least-squares derivative does not reproduce Psi at tolerance");
  }
  for (const CMatrix& m : d.blocks) {
    if (m.rows() == 0) continue;
    RVector ev = linalg::hermitian_eigenvalues(m, tol);
    if (ev.minCoeff() < -tol.eig_cut * std::max(1.0, ev.cwiseAbs().maxCoeff()) ||
        ev.maxCoeff() > 1.0 + tol.eq_tol) {
      throw Error(ErrorCode::ReconstructionFailure,
                  "derivative is not a positive contraction at tolerance");
    }
  }
  return d;
}

CMatrix dilation_range(const Dilation& dil, int block, const Tolerances& tol) {
  int nonzero_blocks = 0;
  for (int r : dil.mult) nonzero_blocks += (r > 0) ? 1 : 0;
  if (nonzero_blocks != 1 || dil.mult[static_cast<size_t>(block)] != 1) {
    throw Error(ErrorCode::NotPure, "dilation_range needs a pure map supported on the block");
  }
  const CMatrix& k = dil.kraus[static_cast<size_t>(block)][0];
  return linalg::range_basis(k, tol).basis;
}

}  // namespace cpext
