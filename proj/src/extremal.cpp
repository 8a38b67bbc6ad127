#include "cpext/extremal.hpp"

#include "cpext/rand.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cpext {

const char* model_name(Model m) {
  switch (m) {
    case Model::Ucp: return "ucp";
    case Model::CpP: return "cp-p";
    case Model::Ccp: return "ccp";
  }
  return "unknown";
}

const char* verdict_kind_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Extreme: return "extreme";
    case VerdictKind::NotExtreme: return "not_extreme";
    case VerdictKind::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// a |-> T* Phi(a) T for a rectangular T (hdim x m), producing a map on C^m.
CpMap conjugate_by(const CpMap& phi, const CMatrix& t) {
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

std::vector<CMatrix> generator_images(const CpMap& phi) {
  std::vector<CMatrix> images;
  for (int i = 0; i < phi.algebra.num_blocks(); ++i) {
    const int n = phi.algebra.block_size(i);
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) images.push_back(phi.choi_sub(i, p, q));
    }
  }
  return images;
}

// Basis of {X : X A_g = A_g X for all g} as d x d matrices.
std::vector<CMatrix> commuting_space(const std::vector<CMatrix>& images, int d,
                                     const Tolerances& tol) {
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix l(static_cast<Eigen::Index>(images.size()) * d * d, d * d);
  for (size_t g = 0; g < images.size(); ++g) {
    l.middleRows(static_cast<Eigen::Index>(g) * d * d, d * d) =
        kron(id, images[g]) - kron(images[g].transpose(), id);
  }
  Eigen::JacobiSVD<CMatrix> svd(l, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  std::vector<CMatrix> basis;
  for (Eigen::Index k = 0; k < d * d; ++k) {
    const double s = k < sv.size() ? sv(k) : 0.0;
    if (s <= std::max(tol.inv_cut * smax, 1e-12)) {
      CVector v = svd.matrixV().col(k);
      basis.push_back(Eigen::Map<const CMatrix>(v.data(), d, d));
    }
  }
  return basis;
}

// Basis of {X : X B_g = A_g X for all g} (intertwiners from the map with
// images B into the map with images A).
std::vector<CMatrix> intertwiner_space(const std::vector<CMatrix>& a,
                                       const std::vector<CMatrix>& b, int d,
                                       const Tolerances& tol) {
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix l(static_cast<Eigen::Index>(a.size()) * d * d, d * d);
  for (size_t g = 0; g < a.size(); ++g) {
    l.middleRows(static_cast<Eigen::Index>(g) * d * d, d * d) =
        kron(b[g].transpose(), id) - kron(id, a[g]);
  }
  Eigen::JacobiSVD<CMatrix> svd(l, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  std::vector<CMatrix> basis;
  for (Eigen::Index k = 0; k < d * d; ++k) {
    const double s = k < sv.size() ? sv(k) : 0.0;
    if (s <= std::max(tol.inv_cut * smax, 1e-12)) {
      CVector v = svd.matrixV().col(k);
      basis.push_back(Eigen::Map<const CMatrix>(v.data(), d, d));
    }
  }
  return basis;
}

RVector sorted_spectrum(const CMatrix& m, const Tolerances& tol) {
  RVector ev = linalg::hermitian_eigenvalues(linalg::hermitize(m), tol);
  std::sort(ev.data(), ev.data() + ev.size());
  return ev;
}

bool spectra_match(const CMatrix& a, const CMatrix& b, const Tolerances& tol) {
  if (a.rows() != b.rows()) return false;
  RVector ea = sorted_spectrum(a, tol);
  RVector eb = sorted_spectrum(b, tol);
  const double scale = std::max({1.0, ea.size() ? ea.cwiseAbs().maxCoeff() : 0.0,
                                 eb.size() ? eb.cwiseAbs().maxCoeff() : 0.0});
  for (Eigen::Index i = 0; i < ea.size(); ++i) {
    if (std::abs(ea(i) - eb(i)) > 100 * tol.eq_tol * scale) return false;
  }
  return true;
}

// ----------------------------------------------------------------------
// Indecomposable splitting through the range commutant
// ----------------------------------------------------------------------

struct SplitResult {
  bool ok = false;
  std::vector<CMatrix> bases;  // orthonormal d x m_j, mutually orthogonal
  std::string why;
};

SplitResult split_indecomposable(const CpMap& phi, const Tolerances& tol, Rng& rng) {
  const int d = phi.hdim;
  SplitResult out;
  std::vector<CMatrix> images = generator_images(phi);
  std::vector<CMatrix> space = commuting_space(images, d, tol);
  if (space.size() <= 1) {
    out.ok = true;
    out.bases.push_back(CMatrix::Identity(d, d));
    return out;
  }

  for (int attempt = 0; attempt < 8; ++attempt) {
    // Random Hermitian element of the range commutant; its eigenprojections
    // stay inside the commutant, so they cut Phi into direct summands.
    CMatrix x = CMatrix::Zero(d, d);
    for (const CMatrix& b : space) x += rng.gaussian() * b;
    x = linalg::hermitize(x);
    if (x.norm() < 1e-10) continue;

    Eigen::SelfAdjointEigenSolver<CMatrix> es(x);
    const RVector& ev = es.eigenvalues();
    const double span = ev(ev.size() - 1) - ev(0);
    if (span < 1e-10 * std::max(1.0, x.norm())) continue;  // scalar-like, retry

    // Cluster eigenvalues: coarse merging is safe, splitting a true
    // eigenspace is not, so the gap threshold is generous.
    const double gap = 1e-6 * span;
    std::vector<std::pair<int, int>> clusters;  // [begin, end)
    int begin = 0;
    for (int k = 1; k <= d; ++k) {
      if (k == d || ev(k) - ev(k - 1) > gap) {
        clusters.emplace_back(begin, k);
        begin = k;
      }
    }
    if (clusters.size() < 2) continue;

    bool leak = false;
    std::vector<CMatrix> bases;
    for (auto [b0, b1] : clusters) {
      CMatrix q = es.eigenvectors().middleCols(b0, b1 - b0);
      for (const CMatrix& g : images) {
        const CMatrix rest = g * q - q * (q.adjoint() * g * q);
        if (rest.norm() > 100 * tol.eq_tol * std::max(1.0, g.norm())) {
          leak = true;
          break;
        }
      }
      if (leak) break;
      bases.push_back(std::move(q));
    }
    if (leak) continue;

    out.ok = true;
    for (const CMatrix& q : bases) {
      CpMap part = conjugate_by(phi, q);
      SplitResult sub = split_indecomposable(part, tol, rng);
      if (!sub.ok) return sub;
      for (const CMatrix& inner : sub.bases) out.bases.push_back(q * inner);
    }
    return out;
  }
  out.why = "commutant splitting failed to separate eigenspaces";
  return out;
}

bool ranges_nested(std::vector<PureSummand>& group, const Tolerances& tol) {
  std::stable_sort(group.begin(), group.end(), [](const PureSummand& a, const PureSummand& b) {
    return a.isometry.cols() > b.isometry.cols();
  });
  for (size_t j = 1; j < group.size(); ++j) {
    const CMatrix& big = group[j - 1].isometry;
    const CMatrix& small = group[j].isometry;
    const CMatrix rest = small - big * (big.adjoint() * small);
    if (rest.norm() > 100 * tol.eq_tol * std::max(1.0, small.norm())) return false;
  }
  return true;
}

struct WitnessSearch {
  bool found = false;
  DecompositionWitness witness;
  std::string note;
};

// Radon-Nikodym route: a positive invertible non-scalar commutant element D
// gives Psi = V* D pi(.) V; the two-term completion splits Phi properly, and
// for a non-extreme map a generic D yields an inequivalent term.
WitnessSearch ucp_witness_search(const CpMap& phi, const Tolerances& tol, uint64_t seed) {
  WitnessSearch out;
  Dilation dil = minimal_dilation(phi, tol);
  std::vector<CommutantElement> basis = commutant_basis(dil);
  const int d = phi.hdim;
  const CMatrix id = CMatrix::Identity(d, d);

  for (int attempt = 0; attempt < 16; ++attempt) {
    Rng rng(mix_seed(seed, static_cast<uint64_t>(attempt)));
    CommutantElement dir;
    for (int i = 0; i < dil.algebra.num_blocks(); ++i) {
      dir.blocks.push_back(CMatrix::Zero(dil.mult[static_cast<size_t>(i)],
                                         dil.mult[static_cast<size_t>(i)]));
    }
    for (const CommutantElement& b : basis) {
      const Complex c = rng.gaussian();
      for (size_t i = 0; i < dir.blocks.size(); ++i) dir.blocks[i] += c * b.blocks[i];
    }
    double opnorm = 0.0;
    for (CMatrix& m : dir.blocks) {
      m = linalg::hermitize(m);
      if (m.rows() > 0) {
        RVector ev = linalg::hermitian_eigenvalues(m, tol);
        opnorm = std::max(opnorm, ev.cwiseAbs().maxCoeff());
      }
    }
    if (opnorm < 1e-10) continue;

    // D = I/2 + dir/(4*opnorm): spectrum inside [1/4, 3/4].
    CommutantElement dmat;
    for (size_t i = 0; i < dir.blocks.size(); ++i) {
      const Eigen::Index r = dir.blocks[i].rows();
      dmat.blocks.push_back(0.5 * CMatrix::Identity(r, r) + dir.blocks[i] / (4.0 * opnorm));
    }

    CpMap psi = commutant_compress(dil, dmat);
    const CMatrix psi_unit = linalg::hermitize(unit_image(psi));
    const CMatrix b = linalg::psd_sqrt(psi_unit, tol);
    const CMatrix binv = linalg::psd_inv_sqrt(psi_unit, tol);
    const CMatrix rem = linalg::hermitize(id - 0.5 * psi_unit);
    const CMatrix c = linalg::psd_sqrt(rem, tol);
    const CMatrix cinv = linalg::psd_inv_sqrt(rem, tol);

    DecompositionWitness wit;
    wit.terms.push_back({b / std::sqrt(2.0), adjoin(psi, binv)});
    CpMap psi2 = phi + (-0.5) * psi;
    wit.terms.push_back({c, adjoin(psi2, cinv)});

    // Both terms must be UCP and the decomposition must recombine.
    CpMap recomb = adjoin(wit.terms[0].map, wit.terms[0].t) + adjoin(wit.terms[1].map, wit.terms[1].t);
    if (!maps_equal(recomb, phi, tol)) continue;
    bool units_ok = true;
    for (const auto& term : wit.terms) {
      if (!linalg::approx_equal(unit_image(term.map), id, tol)) units_ok = false;
    }
    if (!units_ok) continue;

    for (int j = 0; j < 2; ++j) {
      if (!equivalent_unitary(phi, wit.terms[static_cast<size_t>(j)].map, tol,
                              mix_seed(seed, 1000 + static_cast<uint64_t>(attempt) * 2 +
                                                 static_cast<uint64_t>(j)))
               .equivalent) {
        wit.nonequiv_index = j;
        out.found = true;
        out.witness = std::move(wit);
        return out;
      }
    }
  }
  out.note = "witness search exhausted 16 commutant samples";
  return out;
}

std::vector<CMatrix> choi_list(const CpMap& m) { return m.choi; }

}  // namespace

// ----------------------------------------------------------------------
// Linear extremality (Kraus-product independence)
// ----------------------------------------------------------------------

LinearExtremeResult linear_extreme(const CpMap& phi, const Tolerances& tol) {
  VerifyReport vr = verify(phi, tol);
  if (!vr.is_cp) throw Error(ErrorCode::NotCp, "linear_extreme needs a CP map");
  Dilation dil = minimal_dilation(phi, tol);
  const int d = phi.hdim;

  int total = 0;
  for (int r : dil.mult) total += r * r;
  if (total == 0) return {true, std::nullopt};  // zero map

  CMatrix g(d * d, total);
  int col = 0;
  for (int i = 0; i < dil.algebra.num_blocks(); ++i) {
    const auto& ks = dil.kraus[static_cast<size_t>(i)];
    for (size_t s = 0; s < ks.size(); ++s) {
      for (size_t t = 0; t < ks.size(); ++t) {
        CMatrix prod = ks[s].adjoint() * ks[t];
        g.col(col++) = Eigen::Map<const CVector>(prod.data(), d * d);
      }
    }
  }

  Eigen::JacobiSVD<CMatrix> svd(g, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > tol.inv_cut * smax && sv(k) > 0.0) ++rank;
  }
  if (rank == total) return {true, std::nullopt};

  // A null direction is a commutant-coordinate perturbation fixing the unit
  // image. Hermitianize it, then split Phi = (Phi_+ + Phi_-)/2.
  for (Eigen::Index k = total - 1; k >= rank; --k) {
    CVector null = svd.matrixV().col(k);
    CommutantElement raw;
    int off = 0;
    for (int i = 0; i < dil.algebra.num_blocks(); ++i) {
      const int r = dil.mult[static_cast<size_t>(i)];
      CMatrix m(r, r);
      for (int s = 0; s < r; ++s) {
        for (int t = 0; t < r; ++t) m(s, t) = null(off + s * r + t);
      }
      off += r * r;
      raw.blocks.push_back(std::move(m));
    }
    for (int variant = 0; variant < 2; ++variant) {
      CommutantElement herm;
      double opnorm = 0.0;
      for (const CMatrix& m : raw.blocks) {
        CMatrix h = (variant == 0) ? CMatrix(0.5 * (m + m.adjoint()))
                                   : CMatrix((m - m.adjoint()) / Complex(0.0, 2.0));
        if (h.rows() > 0) {
          RVector ev = linalg::hermitian_eigenvalues(h, tol);
          if (ev.size() > 0) opnorm = std::max(opnorm, ev.cwiseAbs().maxCoeff());
        }
        herm.blocks.push_back(std::move(h));
      }
      if (opnorm < 1e-8) continue;

      CommutantElement dplus, dminus;
      for (const CMatrix& m : herm.blocks) {
        const Eigen::Index r = m.rows();
        dplus.blocks.push_back(CMatrix::Identity(r, r) + m / (2.0 * opnorm));
        dminus.blocks.push_back(CMatrix::Identity(r, r) - m / (2.0 * opnorm));
      }
      LinearExtremeWitness wit;
      wit.phi1 = commutant_compress(dil, dplus);
      wit.phi2 = commutant_compress(dil, dminus);
      wit.t = 0.5;
      CpMap mid = 0.5 * wit.phi1 + 0.5 * wit.phi2;
      if (!maps_equal(mid, phi, tol)) continue;
      if (!linalg::approx_equal(unit_image(wit.phi1), unit_image(phi), tol)) continue;
      if (maps_equal(wit.phi1, phi, tol)) continue;  // degenerate direction
      return {false, wit};
    }
  }
  return {false, std::nullopt};  // dependent family; no verified splitting found
}

// ----------------------------------------------------------------------
// UCP C*-extremality (structure theorem)
// ----------------------------------------------------------------------

ExtremalityVerdict ucp_cstar_extreme(const CpMap& phi, const Tolerances& tol, uint64_t seed) {
  VerifyReport vr = verify(phi, tol);
  if (!vr.is_cp) throw Error(ErrorCode::NotCp, "ucp_cstar_extreme needs a CP map");
  if (!vr.is_unital) throw Error(ErrorCode::NotUnital, "ucp_cstar_extreme needs a unital map");

  ExtremalityVerdict verdict;
  verdict.model = Model::Ucp;
  verdict.seed = seed;

  Rng rng(mix_seed(seed, 17));
  SplitResult split = split_indecomposable(phi, tol, rng);
  if (!split.ok) {
    verdict.kind = VerdictKind::Inconclusive;
    verdict.diagnostics = split.why;
    return verdict;
  }

  bool structural_extreme = true;
  std::string reason;
  std::vector<PureSummand> summands;
  for (const CMatrix& basis : split.bases) {
    CpMap part = conjugate_by(phi, basis);
    Dilation dil = minimal_dilation(part, tol);
    int nonzero = 0, block = -1;
    for (int i = 0; i < dil.algebra.num_blocks(); ++i) {
      if (dil.mult[static_cast<size_t>(i)] > 0) {
        ++nonzero;
        block = i;
      }
    }
    if (nonzero != 1 || dil.mult[static_cast<size_t>(block)] != 1) {
      structural_extreme = false;
      reason = "an indecomposable summand is not pure";
      break;
    }
    PureSummand s;
    s.block = block;
    s.basis_h = basis;
    s.isometry = dil.kraus[static_cast<size_t>(block)][0];
    // Unitality of the summand makes the Kraus operator an isometry.
    if ((s.isometry.adjoint() * s.isometry - CMatrix::Identity(basis.cols(), basis.cols()))
            .norm() > 100 * tol.eq_tol) {
      verdict.kind = VerdictKind::Inconclusive;
      verdict.diagnostics = "pure summand produced a non-isometric Kraus operator";
      return verdict;
    }
    summands.push_back(std::move(s));
  }

  if (structural_extreme) {
    NestedStructure cert;
    cert.conjugator = CMatrix::Identity(phi.hdim, phi.hdim);
    std::vector<int> blocks_used;
    for (const PureSummand& s : summands) {
      if (std::find(blocks_used.begin(), blocks_used.end(), s.block) == blocks_used.end()) {
        blocks_used.push_back(s.block);
      }
    }
    std::sort(blocks_used.begin(), blocks_used.end());
    for (int b : blocks_used) {
      std::vector<PureSummand> group;
      for (const PureSummand& s : summands) {
        if (s.block == b) group.push_back(s);
      }
      if (!ranges_nested(group, tol)) {
        structural_extreme = false;
        reason = "dilation ranges within a representation class are not nested";
        break;
      }
      cert.groups.push_back(std::move(group));
    }
    if (structural_extreme) {
      std::string why;
      if (!check_certificate(phi, cert, Model::Ucp, tol, &why)) {
        verdict.kind = VerdictKind::Inconclusive;
        verdict.diagnostics = "certificate failed self-validation: " + why;
        return verdict;
      }
      verdict.kind = VerdictKind::Extreme;
      verdict.certificate = std::move(cert);
      return verdict;
    }
  }

  WitnessSearch search = ucp_witness_search(phi, tol, mix_seed(seed, 29));
  if (search.found) {
    verdict.kind = VerdictKind::NotExtreme;
    verdict.witness = std::move(search.witness);
    verdict.diagnostics = reason;
  } else {
    verdict.kind = VerdictKind::Inconclusive;
    verdict.diagnostics = reason + "; " + search.note;
  }
  return verdict;
}

// ----------------------------------------------------------------------
// CP^(P) C*-extremality via range compression and the hat reduction
// ----------------------------------------------------------------------

ExtremalityVerdict cp_p_cstar_extreme(const CpMap& phi, const Tolerances& tol, uint64_t seed) {
  VerifyReport vr = verify(phi, tol);
  if (!vr.is_cp) throw Error(ErrorCode::NotCp, "cp_p_cstar_extreme needs a CP map");

  ExtremalityVerdict verdict;
  verdict.model = Model::CpP;
  verdict.seed = seed;

  const CMatrix p = linalg::hermitize(unit_image(phi));
  const int d = phi.hdim;

  if (vr.unit.tag == UnitTag::Zero) {
    NestedStructure cert;
    cert.conjugator = CMatrix::Identity(d, d);
    verdict.kind = VerdictKind::Extreme;
    verdict.certificate = std::move(cert);
    return verdict;
  }

  if (vr.unit.tag == UnitTag::Invertible) {
    CpMap phat = hat(phi, tol);
    ExtremalityVerdict inner = ucp_cstar_extreme(phat, tol, mix_seed(seed, 3));
    verdict.kind = inner.kind;
    verdict.diagnostics = inner.diagnostics;
    const CMatrix proot = linalg::psd_sqrt(p, tol);
    const CMatrix pinvroot = linalg::psd_inv_sqrt(p, tol);
    if (inner.kind == VerdictKind::Extreme) {
      NestedStructure cert = *inner.certificate;
      cert.conjugator = cert.conjugator * proot;
      verdict.certificate = std::move(cert);
    } else if (inner.kind == VerdictKind::NotExtreme) {
      DecompositionWitness wit;
      wit.nonequiv_index = inner.witness->nonequiv_index;
      for (const auto& term : inner.witness->terms) {
        wit.terms.push_back({pinvroot * term.t * proot, adjoin(term.map, proot)});
      }
      verdict.witness = std::move(wit);
    }
    return verdict;
  }

  // Singular nonzero unit: compress onto ran P; the compressed unit is
  // invertible, so the recursion terminates in one step.
  Compression comp = compress_to_range(phi, tol);
  const CMatrix& c0 = comp.range_basis;
  const CMatrix& ck = comp.kernel_basis;
  ExtremalityVerdict inner = cp_p_cstar_extreme(comp.compressed, tol, mix_seed(seed, 5));
  verdict.kind = inner.kind;
  verdict.diagnostics = inner.diagnostics;
  if (inner.kind == VerdictKind::Extreme) {
    NestedStructure cert;
    for (const auto& group : inner.certificate->groups) {
      std::vector<PureSummand> lifted;
      for (const PureSummand& s : group) {
        lifted.push_back({s.block, c0 * s.basis_h, s.isometry});
      }
      cert.groups.push_back(std::move(lifted));
    }
    cert.conjugator = c0 * inner.certificate->conjugator * c0.adjoint() + ck * ck.adjoint();
    verdict.certificate = std::move(cert);
  } else if (inner.kind == VerdictKind::NotExtreme) {
    DecompositionWitness wit;
    wit.nonequiv_index = inner.witness->nonequiv_index;
    const double kscale = 1.0 / std::sqrt(static_cast<double>(inner.witness->terms.size()));
    for (const auto& term : inner.witness->terms) {
      CMatrix t = c0 * term.t * c0.adjoint() + kscale * ck * ck.adjoint();
      wit.terms.push_back({std::move(t), conjugate_by(term.map, c0.adjoint())});
    }
    verdict.witness = std::move(wit);
  }
  return verdict;
}

// ----------------------------------------------------------------------
// CCP C*-extremality (projection criterion + compressed test)
// ----------------------------------------------------------------------

ExtremalityVerdict ccp_cstar_extreme(const CpMap& phi, const Tolerances& tol, uint64_t seed) {
  VerifyReport vr = verify(phi, tol);
  if (!vr.is_cp) throw Error(ErrorCode::NotCp, "ccp_cstar_extreme needs a CP map");
  if (!vr.is_contractive) {
    throw Error(ErrorCode::NotContractive, "ccp_cstar_extreme needs a contractive map");
  }

  ExtremalityVerdict verdict;
  verdict.model = Model::Ccp;
  verdict.seed = seed;

  const CMatrix p = linalg::hermitize(unit_image(phi));
  if (vr.unit.tag == UnitTag::Zero || is_projection_matrix(p, tol)) {
    ExtremalityVerdict inner = cp_p_cstar_extreme(phi, tol, mix_seed(seed, 7));
    verdict.kind = inner.kind;
    verdict.certificate = std::move(inner.certificate);
    verdict.witness = std::move(inner.witness);
    verdict.diagnostics = inner.diagnostics;
    return verdict;
  }

  // Non-projection unit: the explicit blockwise splitting through
  // P_0^{1/2} and (2I - P_0)^{1/2} always works, and its first term has a
  // projection unit, hence a different unit spectrum than Phi.
  Compression comp = compress_to_range(phi, tol);
  const CMatrix& c0 = comp.range_basis;
  const CMatrix& ck = comp.kernel_basis;
  const CMatrix p0 = linalg::hermitize(c0.adjoint() * p * c0);
  const CMatrix id0 = CMatrix::Identity(p0.rows(), p0.cols());

  const CMatrix s1 = linalg::psd_sqrt(p0, tol);
  const CMatrix s2 = linalg::psd_sqrt(2.0 * id0 - p0, tol);
  const CMatrix kk = ck * ck.adjoint();

  DecompositionWitness wit;
  wit.nonequiv_index = 0;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (const CMatrix* s : {&s1, &s2}) {
    CMatrix t = inv_sqrt2 * (c0 * (*s) * c0.adjoint() + ck * ck.adjoint());
    CMatrix sinv = linalg::pinv(*s, tol);
    CMatrix x = c0 * sinv * c0.adjoint() + kk;  // (1/sqrt(2)) T^{-1}
    wit.terms.push_back({std::move(t), adjoin(phi, x)});
  }
  verdict.kind = VerdictKind::NotExtreme;
  verdict.witness = std::move(wit);
  verdict.diagnostics = "unit image is not a projection";
  return verdict;
}

// ----------------------------------------------------------------------
// Equivalence testers
// ----------------------------------------------------------------------

EquivalenceResult equivalent_unitary(const CpMap& phi, const CpMap& psi, const Tolerances& tol,
                                     uint64_t seed) {
  if (!(phi.algebra == psi.algebra) || phi.hdim != psi.hdim) {
    throw Error(ErrorCode::DimMismatch, "equivalence needs maps of identical shape");
  }
  const int d = phi.hdim;
  // Unitary conjugation preserves every Choi-block spectrum and the unit
  // spectrum; mismatches reject without solving for intertwiners.
  for (size_t i = 0; i < phi.choi.size(); ++i) {
    if (!spectra_match(phi.choi[i], psi.choi[i], tol)) return {false, CMatrix()};
  }
  if (!spectra_match(unit_image(phi), unit_image(psi), tol)) return {false, CMatrix()};

  std::vector<CMatrix> a = generator_images(phi);
  std::vector<CMatrix> b = generator_images(psi);
  std::vector<CMatrix> space = intertwiner_space(a, b, d, tol);
  if (space.empty()) return {false, CMatrix()};

  Rng rng(mix_seed(seed, 41));
  for (int attempt = 0; attempt < 16; ++attempt) {
    CMatrix x = CMatrix::Zero(d, d);
    if (attempt == 0 && space.size() == 1) {
      x = space[0];
    } else {
      for (const CMatrix& s : space) x += rng.gaussian() * s;
    }
    if (!linalg::is_invertible(x, tol)) continue;
    Eigen::JacobiSVD<CMatrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    CMatrix u = svd.matrixU() * svd.matrixV().adjoint();
    if (maps_equal(adjoin(phi, u), psi, tol)) return {true, u};
  }
  return {false, CMatrix()};
}

EquivalenceResult equivalent_invertible(const CpMap& phi, const CpMap& psi, const Tolerances& tol,
                                        uint64_t seed) {
  if (!(phi.algebra == psi.algebra) || phi.hdim != psi.hdim) {
    throw Error(ErrorCode::DimMismatch, "equivalence needs maps of identical shape");
  }
  const CMatrix pu = linalg::hermitize(unit_image(phi));
  const CMatrix su = linalg::hermitize(unit_image(psi));
  if (!linalg::is_invertible(pu, tol) || !linalg::is_invertible(su, tol)) {
    throw Error(ErrorCode::UnitNotInvertible, "equivalent_invertible needs invertible units");
  }
  CpMap ha = hat(phi, tol);
  CpMap hb = hat(psi, tol);
  EquivalenceResult inner = equivalent_unitary(ha, hb, tol, seed);
  if (!inner.equivalent) return {false, CMatrix()};
  CMatrix z = linalg::psd_inv_sqrt(pu, tol) * inner.conjugator * linalg::psd_sqrt(su, tol);
  if (!maps_equal(adjoin(phi, z), psi, tol)) return {false, CMatrix()};
  return {true, z};
}

bool equivalent_in_model(const CpMap& phi, const CpMap& psi, Model model, const Tolerances& tol,
                         uint64_t seed) {
  if (model == Model::Ucp || model == Model::Ccp) {
    return equivalent_unitary(phi, psi, tol, seed).equivalent;
  }
  const CMatrix pu = linalg::hermitize(unit_image(phi));
  if (pu.norm() <= tol.eig_cut) {
    return linalg::hermitize(unit_image(psi)).norm() <= tol.eig_cut;
  }
  if (linalg::is_invertible(pu, tol)) {
    return equivalent_invertible(phi, psi, tol, seed).equivalent;
  }
  // Singular shared unit: compress both onto ran P; invertible equivalence
  // upstairs matches invertible equivalence of the compressions.
  Compression ca = compress_to_range(phi, tol);
  Compression cb = compress_to_range(psi, tol);
  if (ca.compressed.hdim != cb.compressed.hdim) return false;
  return equivalent_invertible(ca.compressed, cb.compressed, tol, seed).equivalent;
}

// ----------------------------------------------------------------------
// Commutative representation
// ----------------------------------------------------------------------

std::optional<CommutativeForm> commutative_form(const CpMap& phi, const Tolerances& tol) {
  if (!phi.algebra.commutative()) {
    throw Error(ErrorCode::NotCommutativeAlgebra, "commutative_form needs an all-ones algebra");
  }
  VerifyReport vr = verify(phi, tol);
  if (!vr.is_cp) throw Error(ErrorCode::NotCp, "commutative_form needs a CP map");
  const CMatrix p = linalg::hermitize(unit_image(phi));
  const CMatrix g = linalg::psd_inv_sqrt(p, tol);
  linalg::RangeBasis rb = linalg::range_basis(p, tol);
  const CMatrix range_proj = rb.basis * rb.basis.adjoint();
  const CMatrix proot = linalg::psd_sqrt(p, tol);

  // Candidate Q_j = P^{-1/2} Phi(delta_j) P^{-1/2} on ran P; the form exists
  // iff they are mutually orthogonal projections summing to the range
  // projection. These tests separate cleanly, so the gate is mid-scale.
  const double gate = std::sqrt(tol.eq_tol) * std::max(1.0, p.norm());
  CommutativeForm form;
  CMatrix total = CMatrix::Zero(phi.hdim, phi.hdim);
  for (int j = 0; j < phi.algebra.num_blocks(); ++j) {
    const CMatrix f = phi.choi_sub(j, 0, 0);
    CMatrix q = linalg::hermitize(g * f * g);
    if (q.norm() <= gate) continue;  // zero weight at this point
    if ((q * q - q).norm() > gate) return std::nullopt;
    if ((proot * q * proot - f).norm() > gate * std::max(1.0, f.norm())) return std::nullopt;
    for (const CMatrix& prev : form.projections) {
      if ((prev * q).norm() > gate) return std::nullopt;
    }
    total += q;
    form.points.push_back(j);
    form.projections.push_back(std::move(q));
  }
  if ((total - range_proj).norm() > gate) return std::nullopt;
  return form;
}

// ----------------------------------------------------------------------
// Certificate / witness re-validation
// ----------------------------------------------------------------------

namespace {

bool fail(std::string* why, const std::string& msg) {
  if (why) *why = msg;
  return false;
}

}  // namespace

bool check_certificate(const CpMap& phi, const NestedStructure& cert, Model model,
                       const Tolerances& tol, std::string* why) {
  const int d = phi.hdim;
  const CMatrix p = linalg::hermitize(unit_image(phi));
  linalg::RangeBasis rb = linalg::range_basis(p, tol);
  const double gate = 100 * tol.eq_tol;

  int total_cols = 0;
  std::vector<const PureSummand*> all;
  std::vector<int> blocks_seen;
  for (const auto& group : cert.groups) {
    if (group.empty()) return fail(why, "empty summand group");
    const int block = group.front().block;
    if (std::find(blocks_seen.begin(), blocks_seen.end(), block) != blocks_seen.end()) {
      return fail(why, "two groups share an algebra block");
    }
    blocks_seen.push_back(block);
    for (const PureSummand& s : group) {
      if (s.block != block) return fail(why, "mixed blocks inside a group");
      if (s.block < 0 || s.block >= phi.algebra.num_blocks()) return fail(why, "bad block index");
      const int n = phi.algebra.block_size(s.block);
      const int m = static_cast<int>(s.basis_h.cols());
      if (s.basis_h.rows() != d || s.isometry.rows() != n || s.isometry.cols() != m || m < 1) {
        return fail(why, "summand dimensions are inconsistent");
      }
      if ((s.basis_h.adjoint() * s.basis_h - CMatrix::Identity(m, m)).norm() > gate) {
        return fail(why, "summand basis is not orthonormal");
      }
      if ((s.isometry.adjoint() * s.isometry - CMatrix::Identity(m, m)).norm() > gate) {
        return fail(why, "summand dilation operator is not an isometry");
      }
      total_cols += m;
      all.push_back(&s);
    }
  }
  if (total_cols != rb.rank) {
    return fail(why, "summand subspaces do not add up to the rank of the unit image");
  }
  for (size_t a = 0; a < all.size(); ++a) {
    for (size_t b = a + 1; b < all.size(); ++b) {
      if ((all[a]->basis_h.adjoint() * all[b]->basis_h).norm() > gate) {
        return fail(why, "summand subspaces are not mutually orthogonal");
      }
    }
    if (rb.rank > 0 &&
        (all[a]->basis_h - rb.basis * (rb.basis.adjoint() * all[a]->basis_h)).norm() > gate) {
      return fail(why, "a summand subspace leaves the range of the unit image");
    }
  }
  for (const auto& group : cert.groups) {
    std::vector<PureSummand> sorted = group;
    if (!ranges_nested(sorted, tol)) {
      return fail(why, "dilation ranges do not form a chain under inclusion");
    }
  }
  if (cert.conjugator.rows() != d || cert.conjugator.cols() != d ||
      !linalg::is_invertible(cert.conjugator, tol)) {
    return fail(why, "conjugator is not invertible");
  }
  if (model != Model::CpP) {
    if ((cert.conjugator.adjoint() * cert.conjugator - CMatrix::Identity(d, d)).norm() > gate) {
      return fail(why, "conjugator must be unitary for this model");
    }
  }

  // Reconstruction: Phi(iota_i(E_pq)) = S* (sum_j B_j V_j* E_pq V_j B_j*) S.
  double scale = 1.0;
  for (const CMatrix& c : phi.choi) scale = std::max(scale, c.norm());
  for (int i = 0; i < phi.algebra.num_blocks(); ++i) {
    const int n = phi.algebra.block_size(i);
    for (int pq = 0; pq < n * n; ++pq) {
      const int pr = pq / n, qc = pq % n;
      CMatrix dsum = CMatrix::Zero(d, d);
      CMatrix unit = CMatrix::Zero(n, n);
      unit(pr, qc) = 1.0;
      for (const auto& group : cert.groups) {
        if (group.front().block != i) continue;
        for (const PureSummand& s : group) {
          dsum += s.basis_h * (s.isometry.adjoint() * unit * s.isometry) * s.basis_h.adjoint();
        }
      }
      const CMatrix lhs = cert.conjugator.adjoint() * dsum * cert.conjugator;
      if ((lhs - phi.choi_sub(i, pr, qc)).norm() > tol.eq_tol * scale * 100) {
        return fail(why, "certificate does not reconstruct the map");
      }
    }
  }
  return true;
}

bool check_witness(const CpMap& phi, const DecompositionWitness& wit, Model model,
                   const Tolerances& tol, uint64_t seed, std::string* why) {
  if (wit.terms.empty()) return fail(why, "witness has no terms");
  if (wit.nonequiv_index < 0 || wit.nonequiv_index >= static_cast<int>(wit.terms.size())) {
    return fail(why, "flagged index out of range");
  }
  const int d = phi.hdim;
  const CMatrix p = linalg::hermitize(unit_image(phi));
  const CMatrix id = CMatrix::Identity(d, d);

  CMatrix coeff_p = CMatrix::Zero(d, d);
  CMatrix coeff_i = CMatrix::Zero(d, d);
  CpMap recomb = CpMap::zero(phi.algebra, d);
  for (const auto& term : wit.terms) {
    if (term.t.rows() != d || term.t.cols() != d) return fail(why, "coefficient has wrong shape");
    if (!linalg::is_invertible(term.t, tol)) return fail(why, "coefficient is not invertible");
    coeff_p += term.t.adjoint() * p * term.t;
    coeff_i += term.t.adjoint() * term.t;
    recomb += adjoin(term.map, term.t);

    VerifyReport tv = verify(term.map, tol);
    if (!tv.is_cp) return fail(why, "witness term is not CP");
    switch (model) {
      case Model::Ucp:
        if (!tv.is_unital) return fail(why, "witness term is not unital");
        break;
      case Model::Ccp:
        if (!tv.is_contractive) return fail(why, "witness term is not contractive");
        break;
      case Model::CpP:
        if (!linalg::approx_equal(linalg::hermitize(unit_image(term.map)), p, tol)) {
          return fail(why, "witness term leaves CP^(P)");
        }
        break;
    }
  }
  if ((coeff_p - p).norm() > 100 * tol.eq_tol * std::max(1.0, p.norm())) {
    return fail(why, "coefficient identity sum T*PT = P fails");
  }
  if (model != Model::CpP && (coeff_i - id).norm() > 100 * tol.eq_tol) {
    return fail(why, "C*-convex coefficient identity sum T*T = I fails");
  }
  if (!maps_equal(recomb, phi, tol)) return fail(why, "witness does not recombine to the map");

  if (equivalent_in_model(phi, wit.terms[static_cast<size_t>(wit.nonequiv_index)].map, model, tol,
                          mix_seed(seed, 97))) {
    return fail(why, "flagged term is equivalent to the map");
  }
  return true;
}

}  // namespace cpext
