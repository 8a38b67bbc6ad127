#include "cpext/convexity.hpp"

#include "cpext/dilation.hpp"
#include "cpext/rand.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cpext {

namespace {

// a |-> T* Phi(a) T for rectangular T (hdim x m).
CpMap conjugate_rect(const CpMap& phi, const CMatrix& t) {
  const int m = static_cast<int>(t.cols());
  CpMap out = CpMap::zero(phi.algebra, m);
  for (int i = 0; i < phi.algebra.num_blocks(); ++i) {
    const int n = phi.algebra.block_size(i);
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        out.choi[static_cast<size_t>(i)].block(p * m, q * m, m, m) =
            t.adjoint() * phi.choi_sub(i, p, q) * t;
      }
    }
  }
  return out;
}

struct UnitEigen {
  CMatrix vectors;  // d x rank, orthonormal
  RVector values;   // descending, positive part only
};

UnitEigen psd_rank_factor(const CMatrix& p, const Tolerances& tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(linalg::hermitize(p));
  const RVector& ev = es.eigenvalues();
  const double lmax = ev.size() ? std::max(0.0, ev.maxCoeff()) : 0.0;
  UnitEigen out;
  std::vector<int> keep;
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i) {
    if (ev(i) > tol.inv_cut * lmax && ev(i) > 0.0) keep.push_back(static_cast<int>(i));
  }
  out.vectors = CMatrix(p.rows(), static_cast<Eigen::Index>(keep.size()));
  out.values = RVector(static_cast<Eigen::Index>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    out.vectors.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
    out.values(static_cast<Eigen::Index>(k)) = ev(keep[k]);
  }
  return out;
}

void self_check_unit(const CpMap& map, const CMatrix& unit, const Tolerances& tol,
                     const char* kind) {
  VerifyReport vr = verify(map, tol);
  if (!vr.is_cp) {
    throw Error(ErrorCode::InvalidSpec, std::string(kind) + " generator emitted a non-CP map");
  }
  if (!linalg::approx_equal(linalg::hermitize(unit_image(map)), linalg::hermitize(unit), tol)) {
    throw Error(ErrorCode::InvalidSpec,
                std::string(kind) + " generator emitted the wrong unit image");
  }
}

}  // namespace

CombinationValidation validate(const CombinationSpec& spec, CombinationClass cls,
                               const Tolerances& tol) {
  CombinationValidation out;
  const int d = static_cast<int>(spec.p.rows());
  if (spec.p.cols() != d) {
    out.why = "P must be square";
    return out;
  }
  if (spec.terms.empty()) {
    out.why = "no terms";
    return out;
  }
  CMatrix sum = CMatrix::Zero(d, d);
  for (const CombinationTerm& term : spec.terms) {
    if (term.t.rows() != d || term.t.cols() != d || term.map.hdim != d) {
      out.why = "term dimensions do not match P";
      return out;
    }
    sum += term.t.adjoint() * spec.p * term.t;
    if (spec.proper && !linalg::is_invertible(term.t, tol)) {
      out.why = "combination claims properness but a coefficient is singular";
      return out;
    }
    VerifyReport vr = verify(term.map, tol);
    if (!vr.is_cp) {
      out.why = "a term is not completely positive";
      return out;
    }
    if (cls == CombinationClass::FixedUnit) {
      if (!linalg::approx_equal(linalg::hermitize(unit_image(term.map)),
                                linalg::hermitize(spec.p), tol)) {
        out.why = "a term leaves CP^(P)";
        return out;
      }
    } else if (!vr.is_contractive) {
      out.why = "a term is not contractive";
      return out;
    }
  }
  out.residual = (sum - spec.p).norm();
  if (out.residual > tol.eq_tol * std::max(1.0, spec.p.norm())) {
    out.why = "coefficient identity sum T*PT = P fails";
    return out;
  }
  out.valid = true;
  return out;
}

CpMap combine(const CombinationSpec& spec, CombinationClass cls, const Tolerances& tol) {
  CombinationValidation v = validate(spec, cls, tol);
  if (!v.valid) throw Error(ErrorCode::InvalidSpec, v.why);
  CpMap out = CpMap::zero(spec.terms.front().map.algebra, spec.terms.front().map.hdim);
  for (const CombinationTerm& term : spec.terms) out += adjoin(term.map, term.t);
  return out;
}

CombinationSpec km_reduce_ccp(const CpMap& phi, const Tolerances& tol) {
  VerifyReport vr = verify(phi, tol);
  if (!vr.is_cp) throw Error(ErrorCode::NotCp, "km_reduce_ccp needs a CP map");
  if (!vr.is_contractive) throw Error(ErrorCode::NotContractive, "km_reduce_ccp needs a CCP map");

  const int d = phi.hdim;
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix p = linalg::hermitize(unit_image(phi));

  CombinationSpec spec;
  spec.p = id;

  if (vr.unit.tag == UnitTag::Zero) {
    const double c = 1.0 / std::sqrt(2.0);
    spec.terms.push_back({c * id, CpMap::zero(phi.algebra, d)});
    spec.terms.push_back({c * id, CpMap::zero(phi.algebra, d)});
    spec.proper = true;
    return spec;
  }

  if (vr.unit.tag == UnitTag::Invertible) {
    spec.terms.push_back({linalg::psd_sqrt(p, tol), hat(phi, tol)});
    CMatrix t2 = linalg::psd_sqrt(id - p, tol);
    if (t2.norm() > tol.eq_tol * d) {
      spec.terms.push_back({std::move(t2), CpMap::zero(phi.algebra, d)});
    }
  } else {
    Compression comp = compress_to_range(phi, tol);
    const CMatrix& c0 = comp.range_basis;
    const CMatrix kk = comp.kernel_basis * comp.kernel_basis.adjoint();
    const CMatrix p0 = linalg::hermitize(c0.adjoint() * p * c0);
    const int r = static_cast<int>(c0.cols());
    const CMatrix id0 = CMatrix::Identity(r, r);
    const double c = 1.0 / std::sqrt(2.0);
    CpMap term1 = conjugate_rect(hat(comp.compressed, tol), c0.adjoint());
    spec.terms.push_back({c0 * linalg::psd_sqrt(p0, tol) * c0.adjoint() + c * kk, std::move(term1)});
    spec.terms.push_back(
        {c0 * linalg::psd_sqrt(id0 - p0, tol) * c0.adjoint() + c * kk, CpMap::zero(phi.algebra, d)});
  }
  spec.proper = std::all_of(spec.terms.begin(), spec.terms.end(), [&](const CombinationTerm& t) {
    return linalg::is_invertible(t.t, tol);
  });
  return spec;
}

CMatrix complete_contraction(const CMatrix& p, const CMatrix& x, double t, const Tolerances& tol) {
  if (!linalg::is_invertible(x, tol)) {
    throw Error(ErrorCode::OrderViolation, "X must be invertible");
  }
  const CMatrix q = linalg::hermitize(x.adjoint() * p * x);
  return linalg::douglas_complete(p, q, t, tol);
}

const char* gen_kind_name(GenKind kind) {
  switch (kind) {
    case GenKind::RandomCpP: return "random_cp_p";
    case GenKind::Pure: return "pure";
    case GenKind::PureStateTimesP: return "pure_state_times_P";
    case GenKind::NestedExtreme: return "nested_extreme";
    case GenKind::NonExtremeMixture: return "non_extreme_mixture";
    case GenKind::Homomorphism: return "homomorphism";
  }
  return "unknown";
}

GenKind parse_gen_kind(const std::string& name) {
  for (GenKind k : {GenKind::RandomCpP, GenKind::Pure, GenKind::PureStateTimesP,
                    GenKind::NestedExtreme, GenKind::NonExtremeMixture, GenKind::Homomorphism}) {
    if (name == gen_kind_name(k)) return k;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown generator kind '" + name + "'");
}

namespace {

CpMap gen_random_cp_p(const AlgebraSpec& alg, int d, const CMatrix& p, Rng& rng,
                      const Tolerances& tol) {
  // Random Kraus data, then a conjugation steering the unit image onto P.
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<std::vector<CMatrix>> kraus(static_cast<size_t>(alg.num_blocks()));
    int rows = 0;
    for (int i = 0; i < alg.num_blocks(); ++i) {
      const int count = rng.uniform_int(1, 2);
      for (int s = 0; s < count; ++s) {
        kraus[static_cast<size_t>(i)].push_back(rng.gaussian_matrix(alg.block_size(i), d));
        rows += alg.block_size(i);
      }
    }
    while (rows < d) {
      kraus[0].push_back(rng.gaussian_matrix(alg.block_size(0), d));
      rows += alg.block_size(0);
    }
    CpMap raw = from_kraus(alg, d, kraus);
    const CMatrix s = linalg::hermitize(unit_image(raw));
    if (!linalg::is_invertible(s, tol)) continue;
    const CMatrix x = linalg::psd_inv_sqrt(s, tol) * linalg::psd_sqrt(p, tol);
    CpMap out = adjoin(raw, x);
    self_check_unit(out, p, tol, "random_cp_p");
    return out;
  }
  throw Error(ErrorCode::InfeasibleParams, "random_cp_p could not reach an invertible raw unit");
}

CpMap gen_pure(const AlgebraSpec& alg, int d, const CMatrix& p, Rng& rng, const Tolerances& tol) {
  UnitEigen ue = psd_rank_factor(p, tol);
  const int r = static_cast<int>(ue.values.size());
  if (r == 0) throw Error(ErrorCode::InfeasibleParams, "pure generator needs a nonzero unit");
  std::vector<int> feasible;
  for (int i = 0; i < alg.num_blocks(); ++i) {
    if (alg.block_size(i) >= r) feasible.push_back(i);
  }
  if (feasible.empty()) {
    throw Error(ErrorCode::InfeasibleParams, "no block is large enough for rank(P)");
  }
  const int block = feasible[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(feasible.size()) - 1))];
  // K = W M with M*M = P; a single Kraus operator makes the map pure.
  CMatrix m = ue.values.cwiseSqrt().asDiagonal() * ue.vectors.adjoint();
  CMatrix k = rng.isometry(alg.block_size(block), r) * m;
  std::vector<std::vector<CMatrix>> kraus(static_cast<size_t>(alg.num_blocks()));
  kraus[static_cast<size_t>(block)].push_back(std::move(k));
  CpMap out = from_kraus(alg, d, kraus);
  self_check_unit(out, p, tol, "pure");
  if (!is_pure(out, tol)) throw Error(ErrorCode::InvalidSpec, "pure generator emitted an impure map");
  return out;
}

CpMap state_times_p(const AlgebraSpec& alg, int d, const CMatrix& p, int block, const CVector& z,
                    const Tolerances& tol) {
  // Phi(a) = <z, a_block z> P via rank-one Kraus operators z (sqrt(l_m) q_m)*.
  UnitEigen ue = psd_rank_factor(p, tol);
  std::vector<std::vector<CMatrix>> kraus(static_cast<size_t>(alg.num_blocks()));
  for (Eigen::Index m = 0; m < ue.values.size(); ++m) {
    CMatrix k = z * (std::sqrt(ue.values(m)) * ue.vectors.col(m)).adjoint();
    kraus[static_cast<size_t>(block)].push_back(std::move(k));
  }
  return from_kraus(alg, d, kraus);
}

CpMap gen_pure_state_times_p(const AlgebraSpec& alg, int d, const CMatrix& p, Rng& rng,
                             const Tolerances& tol) {
  const int block = rng.uniform_int(0, alg.num_blocks() - 1);
  const CVector z = rng.unit_vector(alg.block_size(block));
  CpMap out = state_times_p(alg, d, p, block, z, tol);
  self_check_unit(out, p, tol, "pure_state_times_P");
  return out;
}

CpMap gen_nested_extreme(const AlgebraSpec& alg, int d, const CMatrix& p, Rng& rng,
                         const Tolerances& tol) {
  UnitEigen ue = psd_rank_factor(p, tol);
  const int r = static_cast<int>(ue.values.size());
  if (r == 0) return CpMap::zero(alg, d);

  // Sample groups on distinct blocks, each carrying a chain of summand
  // dimensions bounded by the block size; dimension-one chains make any
  // remainder feasible.
  std::vector<int> order(static_cast<size_t>(alg.num_blocks()));
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
  }
  struct Chain {
    int block;
    std::vector<int> dims;
  };
  std::vector<Chain> chains;
  int remaining = r;
  for (size_t idx = 0; idx < order.size() && remaining > 0; ++idx) {
    const bool last = (idx + 1 == order.size());
    Chain chain{order[idx], {}};
    bool more = true;
    while (remaining > 0 && more) {
      const int m = rng.uniform_int(1, std::min(alg.block_size(chain.block), remaining));
      chain.dims.push_back(m);
      remaining -= m;
      more = last || rng.uniform(0.0, 1.0) < 0.6;
    }
    if (!chain.dims.empty()) chains.push_back(std::move(chain));
  }

  // Diagonal model on coordinate slots, then conjugation by S with
  // S* diag(I_r, 0) S = P.
  CpMap diag = CpMap::zero(alg, d);
  int offset = 0;
  for (const Chain& chain : chains) {
    const int n = alg.block_size(chain.block);
    CMatrix flag = rng.unitary(n);
    for (int m : chain.dims) {
      const CMatrix v = flag.leftCols(m) * rng.unitary(m);  // range = first m flag columns
      for (int pr = 0; pr < n; ++pr) {
        for (int qc = 0; qc < n; ++qc) {
          CMatrix unit = CMatrix::Zero(n, n);
          unit(pr, qc) = 1.0;
          diag.choi[static_cast<size_t>(chain.block)]
              .block(pr * d + offset, qc * d + offset, m, m) = v.adjoint() * unit * v;
        }
      }
      offset += m;
    }
  }

  CMatrix s(d, d);
  s.topRows(r) = rng.unitary(r) * ue.values.cwiseSqrt().asDiagonal() * ue.vectors.adjoint();
  if (d > r) {
    s.bottomRows(d - r) = linalg::kernel_basis(linalg::hermitize(p), tol).adjoint();
  }
  CpMap out = adjoin(diag, s);
  self_check_unit(out, p, tol, "nested_extreme");
  return out;
}

CpMap gen_non_extreme_mixture(const AlgebraSpec& alg, int d, const CMatrix& p, Rng& rng,
                              const Tolerances& tol) {
  if (linalg::hermitize(p).norm() <= tol.eig_cut) {
    throw Error(ErrorCode::InfeasibleParams, "CP^(0) is a singleton");
  }
  if (alg.num_blocks() == 1 && alg.block_size(0) == 1) {
    throw Error(ErrorCode::InfeasibleParams, "state space of C is a single point");
  }
  CpMap phi1, phi2;
  if (alg.num_blocks() >= 2) {
    const int b1 = rng.uniform_int(0, alg.num_blocks() - 1);
    int b2 = rng.uniform_int(0, alg.num_blocks() - 2);
    if (b2 >= b1) ++b2;
    phi1 = state_times_p(alg, d, p, b1, rng.unit_vector(alg.block_size(b1)), tol);
    phi2 = state_times_p(alg, d, p, b2, rng.unit_vector(alg.block_size(b2)), tol);
  } else {
    const int n = alg.block_size(0);
    CMatrix frame = rng.unitary(n);
    phi1 = state_times_p(alg, d, p, 0, frame.col(0), tol);
    phi2 = state_times_p(alg, d, p, 0, frame.col(1), tol);
  }
  if (maps_equal(phi1, phi2, tol)) {
    throw Error(ErrorCode::InvalidSpec, "mixture components coincide");
  }
  const double t = rng.uniform(0.3, 0.7);
  CpMap out = t * phi1 + (1.0 - t) * phi2;
  self_check_unit(out, p, tol, "non_extreme_mixture");
  return out;
}

CpMap gen_homomorphism(const AlgebraSpec& alg, int d, const CMatrix& p, Rng& rng,
                       const Tolerances& tol) {
  if (!alg.commutative()) {
    throw Error(ErrorCode::NotCommutativeAlgebra, "homomorphism generator needs C(Omega)");
  }
  if (!is_projection_matrix(linalg::hermitize(p), tol)) {
    throw Error(ErrorCode::InfeasibleParams, "a *-homomorphism has a projection unit");
  }
  UnitEigen ue = psd_rank_factor(p, tol);
  const int r = static_cast<int>(ue.values.size());
  CpMap out = CpMap::zero(alg, d);
  if (r == 0) return out;

  // Split an orthonormal frame of ran P into groups attached to distinct
  // points of Omega.
  CMatrix frame = ue.vectors * rng.unitary(r);
  std::vector<int> order(static_cast<size_t>(alg.num_blocks()));
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
  }
  int used = 0;
  for (size_t idx = 0; idx < order.size() && used < r; ++idx) {
    const bool last = (idx + 1 == order.size());
    const int take = last ? (r - used) : rng.uniform_int(1, r - used);
    const CMatrix cols = frame.middleCols(used, take);
    out.choi[static_cast<size_t>(order[idx])] = cols * cols.adjoint();
    used += take;
  }
  self_check_unit(out, p, tol, "homomorphism");
  if (!is_homomorphism(out, tol)) {
    throw Error(ErrorCode::InvalidSpec, "homomorphism generator emitted a non-multiplicative map");
  }
  return out;
}

}  // namespace

CpMap gen(GenKind kind, const AlgebraSpec& alg, int hdim, const CMatrix& unit, uint64_t seed,
          const Tolerances& tol) {
  alg.validate();
  if (unit.rows() != hdim || unit.cols() != hdim) {
    throw Error(ErrorCode::DimMismatch, "unit P must be hdim x hdim");
  }
  if (!linalg::psd_check(linalg::hermitize(unit), tol).psd) {
    throw Error(ErrorCode::NotPsd, "unit P must be PSD");
  }
  Rng rng(seed);
  switch (kind) {
    case GenKind::RandomCpP: return gen_random_cp_p(alg, hdim, unit, rng, tol);
    case GenKind::Pure: return gen_pure(alg, hdim, unit, rng, tol);
    case GenKind::PureStateTimesP: return gen_pure_state_times_p(alg, hdim, unit, rng, tol);
    case GenKind::NestedExtreme: return gen_nested_extreme(alg, hdim, unit, rng, tol);
    case GenKind::NonExtremeMixture: return gen_non_extreme_mixture(alg, hdim, unit, rng, tol);
    case GenKind::Homomorphism: return gen_homomorphism(alg, hdim, unit, rng, tol);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown generator kind");
}

CombinationSpec decompose_ccp_proper(const CpMap& phi, uint64_t seed, const Tolerances& tol) {
  VerifyReport vr = verify(phi, tol);
  if (!vr.is_cp) throw Error(ErrorCode::NotCp, "decompose_ccp_proper needs a CP map");
  if (!vr.is_contractive) {
    throw Error(ErrorCode::NotContractive, "decompose_ccp_proper needs a CCP map");
  }
  const int d = phi.hdim;
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix p = linalg::hermitize(unit_image(phi));

  Dilation dil = minimal_dilation(phi, tol);
  Rng rng(seed);
  CommutantElement dmat;
  double opnorm = 0.0;
  for (int i = 0; i < dil.algebra.num_blocks(); ++i) {
    const int r = dil.mult[static_cast<size_t>(i)];
    CMatrix m = linalg::hermitize(rng.gaussian_matrix(r, r));
    if (r > 0) {
      RVector ev = linalg::hermitian_eigenvalues(m, tol);
      if (ev.size() > 0) opnorm = std::max(opnorm, ev.cwiseAbs().maxCoeff());
    }
    dmat.blocks.push_back(std::move(m));
  }
  for (size_t i = 0; i < dmat.blocks.size(); ++i) {
    const Eigen::Index r = dmat.blocks[i].rows();
    // Spectrum in [1/4, 3/4]: both Psi and Phi - Psi keep a P-sized margin.
    dmat.blocks[i] = 0.5 * CMatrix::Identity(r, r) +
                     (opnorm > 1e-12 ? CMatrix(dmat.blocks[i] / (4.0 * opnorm))
                                     : CMatrix::Zero(r, r));
  }
  CpMap psi1 = commutant_compress(dil, dmat);
  CpMap psi2 = phi + (-1.0) * psi1;

  const CMatrix slack = 0.5 * (id - p);
  CombinationSpec spec;
  spec.p = id;
  for (const CpMap* part : {&psi1, &psi2}) {
    const CMatrix tcoeff = linalg::psd_sqrt(
        linalg::hermitize(unit_image(*part)) + slack, tol);
    spec.terms.push_back({tcoeff, adjoin(*part, linalg::pinv(tcoeff, tol))});
  }
  spec.proper = true;
  CombinationValidation v = validate(spec, CombinationClass::Contractive, tol);
  if (!v.valid) {
    throw Error(ErrorCode::InvalidSpec, "proper decomposition failed self-check: " + v.why);
  }
  return spec;
}

}  // namespace cpext
