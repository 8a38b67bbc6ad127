#include "cpext/extremal.hpp"

#include "cpext/convexity.hpp"
#include "test_helpers.hpp"

using namespace cpext;
using namespace cpext::testing;

namespace {
const Tolerances tol;

CpMap diag_map() {
  // a |-> diag(a11, a22) on M_2.
  CpMap m = CpMap::zero(AlgebraSpec{{2}}, 2);
  m.choi[0](0, 0) = 1.0;
  m.choi[0](3, 3) = 1.0;
  return m;
}

CpMap a11_times_identity() {
  return from_kraus(AlgebraSpec{{2}}, 2, {{mat2(1, 0, 0, 0), mat2(0, 1, 0, 0)}});
}

}  // namespace

TEST_CASE("linear_extreme fixed cases") {
  CHECK(linear_extreme(CpMap::identity_map(2), tol).extreme);
  CHECK(linear_extreme(a11_times_identity(), tol).extreme);

  // Phi = (id + Ad_sigma_x)/2: Kraus products are linearly dependent.
  CMatrix sx = mat2(0, 1, 1, 0);
  CpMap mix = from_kraus(AlgebraSpec{{2}}, 2,
                         {{CMatrix::Identity(2, 2) / std::sqrt(2.0), sx / std::sqrt(2.0)}});
  LinearExtremeResult r = linear_extreme(mix, tol);
  CHECK_FALSE(r.extreme);
  REQUIRE(r.witness.has_value());
  const LinearExtremeWitness& w = *r.witness;
  CHECK(maps_equal(0.5 * w.phi1 + 0.5 * w.phi2, mix, tol));
  CHECK(verify(w.phi1, tol).is_cp);
  CHECK(verify(w.phi2, tol).is_cp);
  CHECK(dist(unit_image(w.phi1), unit_image(mix)) < 1e-8);
  CHECK_FALSE(maps_equal(w.phi1, mix, tol));
}

TEST_CASE("ucp extremality: irreducible and multiplicity cases") {
  // Identity channel: a single pure summand.
  ExtremalityVerdict v = ucp_cstar_extreme(CpMap::identity_map(2), tol, 1);
  REQUIRE(v.kind == VerdictKind::Extreme);
  REQUIRE(v.certificate.has_value());
  CHECK(v.certificate->groups.size() == 1);
  CHECK(v.certificate->groups[0].size() == 1);
  std::string why;
  CHECK(check_certificate(CpMap::identity_map(2), *v.certificate, Model::Ucp, tol, &why));

  // a11 I = psi (+) psi with equal ranges: still extreme.
  ExtremalityVerdict v2 = ucp_cstar_extreme(a11_times_identity(), tol, 2);
  REQUIRE(v2.kind == VerdictKind::Extreme);
  CHECK(v2.certificate->groups.size() == 1);
  CHECK(v2.certificate->groups[0].size() == 2);
  CHECK(check_certificate(a11_times_identity(), *v2.certificate, Model::Ucp, tol, &why));
}

TEST_CASE("ucp extremality: diagonal map rejected with a verified witness") {
  ExtremalityVerdict v = ucp_cstar_extreme(diag_map(), tol, 3);
  REQUIRE(v.kind == VerdictKind::NotExtreme);
  REQUIRE(v.witness.has_value());
  std::string why;
  CHECK(check_witness(diag_map(), *v.witness, Model::Ucp, tol, 3, &why));
  // The flagged term really is not equivalent.
  const CpMap& flagged = v.witness->terms[static_cast<size_t>(v.witness->nonequiv_index)].map;
  CHECK_FALSE(equivalent_unitary(diag_map(), flagged, tol, 99).equivalent);
}

TEST_CASE("ucp extremality rejects bad inputs") {
  CHECK_THROWS_AS(ucp_cstar_extreme(0.5 * CpMap::identity_map(2), tol, 1), Error);
}

TEST_CASE("cp_p extremality: pure-state constructions") {
  Rng rng(17);
  // psi pure state, arbitrary PSD P (singular included).
  for (int rank = 1; rank <= 3; ++rank) {
    CMatrix p = rng.psd(3, rank);
    CpMap m = gen(GenKind::PureStateTimesP, AlgebraSpec{{2}}, 3, p, 100 + rank, tol);
    ExtremalityVerdict v = cp_p_cstar_extreme(m, tol, 5);
    REQUIRE(v.kind == VerdictKind::Extreme);
    std::string why;
    CHECK(check_certificate(m, *v.certificate, Model::CpP, tol, &why));
  }

  // Any pure map with singular unit.
  CMatrix p = rng.psd(3, 2);
  CpMap pure = gen(GenKind::Pure, AlgebraSpec{{3}}, 3, p, 7, tol);
  CHECK(cp_p_cstar_extreme(pure, tol, 5).kind == VerdictKind::Extreme);

  // Mixed state times P: rejected.
  CpMap mixture = gen(GenKind::NonExtremeMixture, AlgebraSpec{{2}}, 2,
                      CMatrix(rng.psd_invertible(2)), 11, tol);
  ExtremalityVerdict v = cp_p_cstar_extreme(mixture, tol, 5);
  REQUIRE(v.kind == VerdictKind::NotExtreme);
  std::string why;
  CHECK(check_witness(mixture, *v.witness, Model::CpP, tol, 5, &why));
}

TEST_CASE("cp_p extremality: zero map is vacuously extreme") {
  ExtremalityVerdict v = cp_p_cstar_extreme(CpMap::zero(AlgebraSpec{{2}}, 2), tol, 1);
  CHECK(v.kind == VerdictKind::Extreme);
  std::string why;
  CHECK(check_certificate(CpMap::zero(AlgebraSpec{{2}}, 2), *v.certificate, Model::CpP, tol, &why));
}

TEST_CASE("ccp extremality fixed cases") {
  // Phi(a) = [[a11, 0], [0, 0]]: projection unit, compressed pure state.
  CpMap corner = CpMap::zero(AlgebraSpec{{2}}, 2);
  corner.choi[0](0, 0) = 1.0;
  ExtremalityVerdict v = ccp_cstar_extreme(corner, tol, 4);
  REQUIRE(v.kind == VerdictKind::Extreme);
  std::string why;
  CHECK(check_certificate(corner, *v.certificate, Model::Ccp, tol, &why));
  // For projection units the conjugator is unitary.
  CHECK((v.certificate->conjugator.adjoint() * v.certificate->conjugator -
         CMatrix::Identity(2, 2))
            .norm() < 1e-8);

  // Non-projection unit diag(1, 1/2): rejected through the blockwise witness.
  CVector z(2);
  z << 1, 0;
  CpMap half = gen(GenKind::PureStateTimesP, AlgebraSpec{{2}}, 2, diag({1, 0.5}), 3, tol);
  ExtremalityVerdict v2 = ccp_cstar_extreme(half, tol, 4);
  REQUIRE(v2.kind == VerdictKind::NotExtreme);
  CHECK(check_witness(half, *v2.witness, Model::Ccp, tol, 4, &why));
  // Both coefficient identities hold for the blockwise witness.
  CMatrix ci = CMatrix::Zero(2, 2);
  for (const auto& term : v2.witness->terms) ci += term.t.adjoint() * term.t;
  CHECK(dist(ci, CMatrix::Identity(2, 2)) < 1e-8);

  // Zero map: vacuously extreme.
  CHECK(ccp_cstar_extreme(CpMap::zero(AlgebraSpec{{2}}, 2), tol, 4).kind == VerdictKind::Extreme);

  // Non-contractive input.
  CHECK_THROWS_AS(ccp_cstar_extreme(2.0 * CpMap::identity_map(2), tol, 4), Error);
}

TEST_CASE("equivalent_unitary") {
  Rng rng(23);
  CpMap m = from_kraus(AlgebraSpec{{2}}, 3,
                       {{rng.gaussian_matrix(2, 3), rng.gaussian_matrix(2, 3)}});
  CHECK(equivalent_unitary(m, m, tol, 1).equivalent);

  CMatrix u = rng.unitary(3);
  EquivalenceResult r = equivalent_unitary(m, adjoin(m, u), tol, 1);
  REQUIRE(r.equivalent);
  CHECK(maps_equal(adjoin(m, r.conjugator), adjoin(m, u), tol));

  // psi1 (+) psi2 (diagonal map) vs psi1 (+) psi1 (a11 I): not equivalent.
  CHECK_FALSE(equivalent_unitary(diag_map(), a11_times_identity(), tol, 1).equivalent);
}

TEST_CASE("equivalent_invertible") {
  Rng rng(29);
  CpMap m = gen(GenKind::RandomCpP, AlgebraSpec{{2}}, 3, CMatrix(rng.psd_invertible(3)), 31, tol);
  CMatrix zmat = rng.invertible(3);
  EquivalenceResult r = equivalent_invertible(m, adjoin(m, zmat), tol, 1);
  REQUIRE(r.equivalent);
  CHECK(maps_equal(adjoin(m, r.conjugator), adjoin(m, zmat), tol));

  // Pure Phi against t*Phi.
  CpMap pure = gen(GenKind::Pure, AlgebraSpec{{3}}, 3, CMatrix(rng.psd_invertible(3)), 37, tol);
  EquivalenceResult r2 = equivalent_invertible(pure, 0.25 * pure, tol, 1);
  REQUIRE(r2.equivalent);
  CHECK(maps_equal(adjoin(pure, r2.conjugator), 0.25 * pure, tol));

  // Structurally distinct unital maps stay inequivalent.
  CHECK_FALSE(equivalent_invertible(diag_map(), a11_times_identity(), tol, 1).equivalent);
}

TEST_CASE("commutative_form") {
  // Phi(f) = f(w1) E11 + f(w2) E22 with P = I.
  CpMap hom = CpMap::zero(AlgebraSpec{{1, 1}}, 2);
  hom.choi[0] = diag({1, 0});
  hom.choi[1] = diag({0, 1});
  auto form = commutative_form(hom, tol);
  REQUIRE(form.has_value());
  CHECK(form->points == std::vector<int>{0, 1});
  CHECK(dist(form->projections[0], diag({1, 0})) < 1e-8);

  // Phi(f) = (f(w1) + f(w2))/2 * I: candidates are not projections.
  CpMap smear = CpMap::zero(AlgebraSpec{{1, 1}}, 2);
  smear.choi[0] = 0.5 * CMatrix::Identity(2, 2);
  smear.choi[1] = 0.5 * CMatrix::Identity(2, 2);
  CHECK_FALSE(commutative_form(smear, tol).has_value());

  // Existence agrees with multiplicativity on a generated homomorphism.
  Rng rng(41);
  CpMap gen_hom = gen(GenKind::Homomorphism, AlgebraSpec{{1, 1, 1}}, 3,
                      CMatrix(rng.projection(3, 2)), 43, tol);
  CHECK(is_homomorphism(gen_hom, tol));
  CHECK(commutative_form(gen_hom, tol).has_value());

  CHECK_THROWS_AS(commutative_form(CpMap::identity_map(2), tol), Error);
}

TEST_CASE("tampered certificates and witnesses are rejected") {
  ExtremalityVerdict v = ucp_cstar_extreme(CpMap::identity_map(2), tol, 1);
  REQUIRE(v.certificate.has_value());
  NestedStructure broken = *v.certificate;
  broken.conjugator *= 2.0;
  std::string why;
  CHECK_FALSE(check_certificate(CpMap::identity_map(2), broken, Model::Ucp, tol, &why));

  ExtremalityVerdict v2 = ucp_cstar_extreme(diag_map(), tol, 3);
  REQUIRE(v2.witness.has_value());
  DecompositionWitness bw = *v2.witness;
  bw.terms[0].t *= 1.5;
  CHECK_FALSE(check_witness(diag_map(), bw, Model::Ucp, tol, 3, &why));
}
