#include "cpext/convexity.hpp"

#include "cpext/extremal.hpp"
#include "test_helpers.hpp"

using namespace cpext;
using namespace cpext::testing;

namespace {
const Tolerances tol;
}

TEST_CASE("validate combination specs") {
  Rng rng(3);
  const int d = 2;
  CpMap m = gen(GenKind::RandomCpP, AlgebraSpec{{2}}, d, CMatrix(rng.psd_invertible(d)), 5, tol);
  const CMatrix p = unit_image(m);

  // T_j = I/sqrt(n): always a valid P-C*-combination.
  CombinationSpec spec;
  spec.p = p;
  spec.terms.push_back({CMatrix::Identity(d, d) / std::sqrt(2.0), m});
  spec.terms.push_back({CMatrix::Identity(d, d) / std::sqrt(2.0), m});
  spec.proper = true;
  CHECK(validate(spec, CombinationClass::FixedUnit, tol).valid);
  CHECK(maps_equal(combine(spec, CombinationClass::FixedUnit, tol), m, tol));

  // T_j = P^{-1/2} S_j P^{1/2} with sum S_j* S_j = I.
  CMatrix s1 = rng.invertible(d) / 2.0;
  CMatrix s2 = linalg::psd_sqrt(CMatrix(CMatrix::Identity(d, d) - s1.adjoint() * s1), tol);
  CMatrix pr = linalg::psd_sqrt(p, tol);
  CMatrix pri = linalg::psd_inv_sqrt(p, tol);
  CombinationSpec spec2;
  spec2.p = p;
  spec2.terms.push_back({pri * s1 * pr, m});
  spec2.terms.push_back({pri * s2 * pr, m});
  spec2.proper = true;
  CHECK(validate(spec2, CombinationClass::FixedUnit, tol).valid);

  // Two copies of T = I: invalid with residual ||P||.
  CombinationSpec bad;
  bad.p = p;
  bad.terms.push_back({CMatrix::Identity(d, d), m});
  bad.terms.push_back({CMatrix::Identity(d, d), m});
  CombinationValidation v = validate(bad, CombinationClass::FixedUnit, tol);
  CHECK_FALSE(v.valid);
  CHECK(v.residual == doctest::Approx(p.norm()));
  CHECK_THROWS_AS(combine(bad, CombinationClass::FixedUnit, tol), Error);
}

TEST_CASE("km_reduce_ccp branches") {
  Rng rng(7);
  const int d = 3;

  // Unital map: a single effective term.
  CpMap unital = gen(GenKind::RandomCpP, AlgebraSpec{{2}}, d, CMatrix::Identity(d, d), 11, tol);
  CombinationSpec spec = km_reduce_ccp(unital, tol);
  CHECK(spec.terms.size() == 1);
  CHECK(maps_equal(combine(spec, CombinationClass::Contractive, tol), unital, tol));

  // Invertible non-unital unit.
  CpMap inv = gen(GenKind::RandomCpP, AlgebraSpec{{2}}, d, CMatrix(0.8 * rng.psd_invertible(d)), 13, tol);
  CombinationSpec spec2 = km_reduce_ccp(inv, tol);
  CHECK(maps_equal(combine(spec2, CombinationClass::Contractive, tol), inv, tol));
  for (const CombinationTerm& term : spec2.terms) {
    const CMatrix u = linalg::hermitize(unit_image(term.map));
    CHECK((is_projection_matrix(u, tol) || u.norm() < 1e-9));
  }

  // Singular unit: the blockwise branch.
  CpMap sing = gen(GenKind::RandomCpP, AlgebraSpec{{2}}, d, CMatrix(rng.psd(d, 2)), 17, tol);
  CombinationSpec spec3 = km_reduce_ccp(sing, tol);
  CHECK(maps_equal(combine(spec3, CombinationClass::Contractive, tol), sing, tol));
  CMatrix csum = CMatrix::Zero(d, d);
  for (const CombinationTerm& term : spec3.terms) {
    csum += term.t.adjoint() * term.t;
    const CMatrix u = linalg::hermitize(unit_image(term.map));
    CHECK((is_projection_matrix(u, tol) || u.norm() < 1e-9));
  }
  CHECK(dist(csum, CMatrix::Identity(d, d)) < 1e-8);

  // Zero map: a combination of zero maps.
  CombinationSpec spec4 = km_reduce_ccp(CpMap::zero(AlgebraSpec{{2}}, d), tol);
  CHECK(maps_equal(combine(spec4, CombinationClass::Contractive, tol),
                   CpMap::zero(AlgebraSpec{{2}}, d), tol));
}

TEST_CASE("complete_contraction") {
  // X = I, t = 1/2, P = I: Y*Y = I/2.
  CMatrix y = complete_contraction(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2), 0.5, tol);
  CHECK(dist(y.adjoint() * y, 0.5 * CMatrix::Identity(2, 2)) < 1e-10);

  // X unitary, P = I, t = 1/4: Y*Y = (3/4) I.
  Rng rng(5);
  CMatrix u = rng.unitary(2);
  CMatrix y2 = complete_contraction(CMatrix::Identity(2, 2), u, 0.25, tol);
  CHECK(dist(y2.adjoint() * y2, 0.75 * CMatrix::Identity(2, 2)) < 1e-10);

  // P = diag(1,0), X = I, t = 1/2: identity completed on the kernel.
  CMatrix y3 = complete_contraction(diag({1, 0}), CMatrix::Identity(2, 2), 0.5, tol);
  CHECK(dist(0.5 * diag({1, 0}) + y3.adjoint() * diag({1, 0}) * y3, diag({1, 0})) < 1e-10);
  CHECK(linalg::is_invertible(y3, tol));
}

TEST_CASE("generators self-verify and land in their class") {
  Rng rng(9);
  const Tolerances t = tol;

  CpMap m1 = gen(GenKind::PureStateTimesP, AlgebraSpec{{2}}, 2, diag({1, 0.5}), 21, t);
  CHECK(cp_p_cstar_extreme(m1, t, 1).kind == VerdictKind::Extreme);

  CpMap m2 = gen(GenKind::NestedExtreme, AlgebraSpec{{2}}, 2, CMatrix::Identity(2, 2), 23, t);
  CHECK(cp_p_cstar_extreme(m2, t, 1).kind == VerdictKind::Extreme);

  CpMap m3 = gen(GenKind::NonExtremeMixture, AlgebraSpec{{2}}, 2, CMatrix::Identity(2, 2), 25, t);
  CHECK(cp_p_cstar_extreme(m3, t, 1).kind == VerdictKind::NotExtreme);

  CHECK_THROWS_AS(gen(GenKind::NonExtremeMixture, AlgebraSpec{{1}}, 2, CMatrix::Identity(2, 2), 1, t),
                  Error);
  CHECK_THROWS_AS(gen(GenKind::Homomorphism, AlgebraSpec{{2}}, 2, CMatrix::Identity(2, 2), 1, t),
                  Error);
  CHECK_THROWS_AS(gen(GenKind::Homomorphism, AlgebraSpec{{1, 1}}, 2, diag({1, 0.5}), 1, t), Error);
  // Chain dims cannot exceed the block size when rank P > block size.
  CHECK_THROWS_AS(gen(GenKind::Pure, AlgebraSpec{{1}}, 3, CMatrix::Identity(3, 3), 1, t), Error);
}

TEST_CASE("proper two-term decomposition of a CCP map") {
  Rng rng(13);
  CpMap m = gen(GenKind::RandomCpP, AlgebraSpec{{2}}, 3, CMatrix(rng.psd(3, 2)), 27, tol);
  CombinationSpec spec = decompose_ccp_proper(m, 29, tol);
  CHECK(spec.terms.size() == 2);
  CHECK(spec.proper);
  CHECK(validate(spec, CombinationClass::Contractive, tol).valid);
  CHECK(maps_equal(combine(spec, CombinationClass::Contractive, tol), m, tol));
}

TEST_CASE("gen kind names round trip") {
  for (GenKind k : {GenKind::RandomCpP, GenKind::Pure, GenKind::PureStateTimesP,
                    GenKind::NestedExtreme, GenKind::NonExtremeMixture, GenKind::Homomorphism}) {
    CHECK(parse_gen_kind(gen_kind_name(k)) == k);
  }
  CHECK_THROWS_AS(parse_gen_kind("nope"), Error);
}
