#include "cpext/serialize.hpp"

#include "test_helpers.hpp"

using namespace cpext;
using namespace cpext::testing;

namespace {
const Tolerances tol;
}

TEST_CASE("matrix round trip is bit exact") {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    // Rows are always known from context in the schemas; columns may be zero
    // (empty bases serialize as rows of empty arrays).
    CMatrix m = rng.gaussian_matrix(rng.uniform_int(1, 5), rng.uniform_int(0, 5));
    CMatrix back = matrix_from_json(parse_json(matrix_to_json(m).dump()));
    REQUIRE(back.rows() == m.rows());
    REQUIRE(back.cols() == m.cols());
    CHECK(back == m);
  }
}

TEST_CASE("map file round trip") {
  Rng rng(2);
  CpMap m = from_kraus(AlgebraSpec{{2, 1}}, 3,
                       {{rng.gaussian_matrix(2, 3)}, {rng.gaussian_matrix(1, 3)}});
  CpMap back = map_from_json(parse_json(to_json(m).dump()));
  CHECK(back.algebra == m.algebra);
  CHECK(back.hdim == m.hdim);
  for (size_t i = 0; i < m.choi.size(); ++i) CHECK(back.choi[i] == m.choi[i]);
}

TEST_CASE("map file parse errors") {
  CHECK_THROWS_AS(parse_json("{not json"), Error);
  CHECK_THROWS_AS(map_from_json(parse_json(R"({"hdim": 2, "choi": []})")), Error);
  CHECK_THROWS_AS(map_from_json(parse_json(R"({"algebra": [2], "hdim": 2, "choi": [[[ [1,0] ]]]})")),
                  Error);
  // Wrong complex encoding.
  CHECK_THROWS_AS(
      map_from_json(parse_json(R"({"algebra": [1], "hdim": 1, "choi": [[[1.0]]]})")), Error);
  // Non-finite entries are not representable in strict JSON at all; the
  // parser rejects the token.
  CHECK_THROWS_AS(parse_json(R"({"algebra": [1], "hdim": 1, "choi": [[[[NaN, 0]]]]})"), Error);
}

TEST_CASE("tolerances round trip") {
  Tolerances t;
  t.eq_tol = 1e-7;
  Tolerances back = tolerances_from_json(parse_json(to_json(t).dump()));
  CHECK(back.eq_tol == t.eq_tol);
  CHECK(back.eig_cut == t.eig_cut);
  CHECK_THROWS_AS(tolerances_from_json(parse_json(R"({"eig_cut": 1e-9})")), Error);
}

TEST_CASE("dilation and commutant round trips") {
  Rng rng(3);
  CpMap m = from_kraus(AlgebraSpec{{2}}, 2,
                       {{rng.gaussian_matrix(2, 2), rng.gaussian_matrix(2, 2)}});
  Dilation dil = minimal_dilation(m, tol);
  Dilation back = dilation_from_json(parse_json(to_json(dil).dump()));
  CHECK(back.mult == dil.mult);
  CHECK(back.kdim == dil.kdim);
  CHECK(back.v == dil.v);

  CommutantElement d = rn_derivative(0.5 * m, m, tol);
  CommutantElement dback = commutant_from_json(parse_json(to_json(d).dump()));
  REQUIRE(dback.blocks.size() == d.blocks.size());
  CHECK(dback.blocks[0] == d.blocks[0]);
}

TEST_CASE("report round trip preserves payloads") {
  ExtremalityVerdict v = ucp_cstar_extreme(CpMap::identity_map(2), tol, 7);
  Json j = report_to_json(v, tol);
  Tolerances parsed;
  ExtremalityVerdict back = report_from_json(parse_json(j.dump()), &parsed);
  CHECK(back.kind == v.kind);
  CHECK(back.model == v.model);
  CHECK(back.seed == v.seed);
  REQUIRE(back.certificate.has_value());
  CHECK(back.certificate->conjugator == v.certificate->conjugator);
  CHECK(parsed.eq_tol == tol.eq_tol);

  // Witness payloads survive as well.
  CpMap dm = CpMap::zero(AlgebraSpec{{2}}, 2);
  dm.choi[0](0, 0) = 1.0;
  dm.choi[0](3, 3) = 1.0;
  ExtremalityVerdict w = ucp_cstar_extreme(dm, tol, 7);
  REQUIRE(w.kind == VerdictKind::NotExtreme);
  ExtremalityVerdict wback = report_from_json(parse_json(report_to_json(w, tol).dump()));
  REQUIRE(wback.witness.has_value());
  CHECK(wback.witness->nonequiv_index == w.witness->nonequiv_index);
  CHECK(wback.witness->terms[0].t == w.witness->terms[0].t);
}

TEST_CASE("combination spec round trip") {
  Rng rng(5);
  CpMap m = gen(GenKind::RandomCpP, AlgebraSpec{{2}}, 2, CMatrix(0.9 * rng.psd_invertible(2)), 9,
                tol);
  CombinationSpec spec = km_reduce_ccp(m, tol);
  CombinationSpec back = combination_from_json(parse_json(to_json(spec).dump()));
  CHECK(back.proper == spec.proper);
  REQUIRE(back.terms.size() == spec.terms.size());
  CHECK(back.p == spec.p);
  for (size_t i = 0; i < spec.terms.size(); ++i) {
    CHECK(back.terms[i].t == spec.terms[i].t);
  }
}

TEST_CASE("reports are deterministic for a fixed seed") {
  CpMap dm = CpMap::zero(AlgebraSpec{{2}}, 2);
  dm.choi[0](0, 0) = 1.0;
  dm.choi[0](3, 3) = 1.0;
  const std::string a = report_to_json(ucp_cstar_extreme(dm, tol, 42), tol).dump();
  const std::string b = report_to_json(ucp_cstar_extreme(dm, tol, 42), tol).dump();
  CHECK(a == b);
}
