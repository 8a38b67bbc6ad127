#include "cpext/linalg.hpp"

#include "test_helpers.hpp"

using namespace cpext;
using namespace cpext::testing;
using namespace cpext::linalg;

namespace {
const Tolerances tol;
}

TEST_CASE("psd_check on fixed matrices") {
  CHECK(psd_check(CMatrix::Identity(2, 2), tol).psd);
  CHECK(psd_check(CMatrix::Identity(2, 2), tol).min_eig == doctest::Approx(1.0));

  // Eigenvalues of [[1,2],[2,1]] are 3 and -1.
  auto r = psd_check(mat2(1, 2, 2, 1), tol);
  CHECK_FALSE(r.psd);
  CHECK(r.min_eig == doctest::Approx(-1.0));

  // Gram matrix of (1,1): eigenvalues 2 and 0.
  auto g = psd_check(mat2(1, 1, 1, 1), tol);
  CHECK(g.psd);
  CHECK(g.min_eig == doctest::Approx(0.0).epsilon(1e-9));

  CHECK_THROWS_AS(psd_check(mat2(0, 1, 0, 0), tol), Error);
}

TEST_CASE("psd_sqrt on fixed matrices") {
  CHECK(dist(psd_sqrt(diag({4, 9}), tol), diag({2, 3})) < 1e-12);
  CHECK(dist(psd_sqrt(CMatrix::Identity(3, 3), tol), CMatrix::Identity(3, 3)) < 1e-12);

  CMatrix m = mat2(2, 1, 1, 1);
  CMatrix r = psd_sqrt(m, tol);
  CHECK(dist(r * r, m) < 1e-10);
  CHECK(psd_check(r, tol).psd);

  CHECK_THROWS_AS(psd_sqrt(mat2(1, 2, 2, 1), tol), Error);
}

TEST_CASE("range_basis") {
  auto rb = range_basis(diag({1, 0}), tol);
  CHECK(rb.rank == 1);
  CHECK(std::abs(std::abs(rb.basis(0, 0)) - 1.0) < 1e-12);

  CHECK(range_basis(CMatrix::Zero(3, 3), tol).rank == 0);

  // Rank-one outer product of (1,1): basis along (1,1)/sqrt(2).
  auto rb2 = range_basis(mat2(1, 1, 1, 1), tol);
  CHECK(rb2.rank == 1);
  CHECK(std::abs(std::abs(rb2.basis(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(rb2.basis(0, 0) - rb2.basis(1, 0)) < 1e-12);
}

TEST_CASE("pinv identities") {
  CHECK(dist(pinv(diag({2, 0}), tol), diag({0.5, 0})) < 1e-12);
  CHECK(dist(pinv(CMatrix::Identity(3, 3), tol), CMatrix::Identity(3, 3)) < 1e-12);

  Rng rng(7);
  CMatrix u = rng.gaussian_matrix(4, 1);
  CMatrix v = rng.gaussian_matrix(1, 4);
  CMatrix m = u * v;
  CMatrix p = pinv(m, tol);
  CHECK(dist(m * p * m, m) < 1e-8 * m.norm());
  CHECK(dist(p * m * p, p) < 1e-8 * p.norm());
  CHECK(dist((m * p).adjoint(), m * p) < 1e-9);
  CHECK(dist((p * m).adjoint(), p * m) < 1e-9);
}

TEST_CASE("invertible_factor") {
  CHECK(dist(invertible_factor(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2), tol),
             CMatrix::Identity(2, 2)) < 1e-12);

  CMatrix c = invertible_factor(diag({2, 0}), diag({1, 0}), tol);
  CHECK(dist(c, diag({2, 1})) < 1e-12);
  CHECK(is_invertible(c, tol));

  CHECK_THROWS_AS(invertible_factor(diag({1, 0}), CMatrix::Identity(2, 2), tol), Error);
}

TEST_CASE("douglas_complete fixed cases") {
  // P = Q = I, t = 1/2: Y*Y = I/2.
  CMatrix y = douglas_complete(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2), 0.5, tol);
  CHECK(dist(y.adjoint() * y, 0.5 * CMatrix::Identity(2, 2)) < 1e-12);

  // P = Q = diag(1,0): Y = diag(1/sqrt(2), 1).
  CMatrix y2 = douglas_complete(diag({1, 0}), diag({1, 0}), 0.5, tol);
  CHECK(dist(y2, diag({1.0 / std::sqrt(2.0), 1.0})) < 1e-12);
  CHECK(dist(y2.adjoint() * diag({1, 0}) * y2, 0.5 * diag({1, 0})) < 1e-12);

  // Scalar case P - tP = (3/4) P.
  CMatrix p = mat2(2, 1, 1, 1);
  CMatrix y3 = douglas_complete(p, p, 0.25, tol);
  CHECK(dist(y3.adjoint() * p * y3, 0.75 * p) < 1e-10);

  CHECK_THROWS_AS(douglas_complete(p, p, 1.5, tol), Error);
  CHECK_THROWS_AS(douglas_complete(diag({1, 0}), CMatrix::Identity(2, 2), 0.5, tol), Error);
}

TEST_CASE("range_conjugacy_check") {
  Rng rng(3);
  CMatrix u = rng.unitary(3);
  auto r = range_conjugacy_check(u, CMatrix::Identity(3, 3), tol);
  CHECK(r.conjugate);
  CHECK(dist(u.adjoint(), r.y) < 1e-10);

  // Invertible P: always conjugate.
  CMatrix p = rng.psd_invertible(3);
  CMatrix t = rng.invertible(3);
  auto r2 = range_conjugacy_check(t, p, tol);
  CHECK(r2.conjugate);
  CMatrix proot = psd_sqrt(p, tol);
  CHECK(dist(t.adjoint() * proot, proot * r2.y) < 1e-8);
  CHECK(is_invertible(r2.y, tol));

  // d=2, P = diag(1,0), T = [[1,0],[1,1]]: T* P^{1/2} = [[1,0],[0,0]], so the
  // ranges agree and an explicit Y exists.
  CMatrix t2 = mat2(1, 0, 1, 1);
  auto r3 = range_conjugacy_check(t2, diag({1, 0}), tol);
  CHECK(r3.conjugate);
  CHECK(is_invertible(r3.y, tol));
  CHECK(dist(t2.adjoint() * diag({1, 0}), diag({1, 0}) * r3.y) < 1e-10);

  // T = [[1,1],[0,1]]: T* P^{1/2} has range span{(1,1)}, which leaves
  // ran(P^{1/2}), so no beta with T*PT <= beta P exists.
  CMatrix t3 = mat2(1, 1, 0, 1);
  CHECK_THROWS_AS(range_conjugacy_check(t3, diag({1, 0}), tol), Error);
}

TEST_CASE("tolerances validate") {
  Tolerances bad;
  bad.eq_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  Tolerances good;
  CHECK_NOTHROW(good.validate());
}
