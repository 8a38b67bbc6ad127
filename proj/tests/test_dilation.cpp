#include "cpext/dilation.hpp"

#include "test_helpers.hpp"

using namespace cpext;
using namespace cpext::testing;

namespace {
const Tolerances tol;
}

TEST_CASE("minimal dilation of the identity map") {
  Dilation dil = minimal_dilation(CpMap::identity_map(2), tol);
  CHECK(dil.mult == std::vector<int>{1});
  CHECK(dil.kdim == 2);
  CHECK(dist(dil.v.adjoint() * dil.v, CMatrix::Identity(2, 2)) < 1e-10);
  CHECK(dist(dil.v * dil.v.adjoint(), CMatrix::Identity(2, 2)) < 1e-10);
}

TEST_CASE("minimal dilation of a11 * I") {
  CMatrix k1 = mat2(1, 0, 0, 0), k2 = mat2(0, 1, 0, 0);
  CpMap m = from_kraus(AlgebraSpec{{2}}, 2, {{k1, k2}});
  Dilation dil = minimal_dilation(m, tol);
  CHECK(dil.mult == std::vector<int>{2});
  CHECK(dil.kdim == 4);
}

TEST_CASE("minimal dilation of the zero map") {
  Dilation dil = minimal_dilation(CpMap::zero(AlgebraSpec{{2, 1}}, 3), tol);
  CHECK(dil.mult == std::vector<int>{0, 0});
  CHECK(dil.kdim == 0);
}

TEST_CASE("commutant basis sizes") {
  CHECK(commutant_basis(minimal_dilation(CpMap::identity_map(2), tol)).size() == 1);

  CMatrix k1 = mat2(1, 0, 0, 0), k2 = mat2(0, 1, 0, 0);
  CpMap m = from_kraus(AlgebraSpec{{2}}, 2, {{k1, k2}});
  CHECK(commutant_basis(minimal_dilation(m, tol)).size() == 4);

  // Two one-dimensional blocks with scalar images: multiplicity [1, 1].
  CpMap comm = CpMap::zero(AlgebraSpec{{1, 1}}, 2);
  comm.choi[0] = diag({1, 0});
  comm.choi[1] = diag({0, 1});
  Dilation dil = minimal_dilation(comm, tol);
  CHECK(dil.mult == std::vector<int>{1, 1});
  CHECK(commutant_basis(dil).size() == 2);
}

TEST_CASE("commutant elements commute with the representation") {
  Rng rng(15);
  CpMap m = from_kraus(AlgebraSpec{{2, 1}}, 3,
                       {{rng.gaussian_matrix(2, 3), rng.gaussian_matrix(2, 3)},
                        {rng.gaussian_matrix(1, 3)}});
  Dilation dil = minimal_dilation(m, tol);
  for (const CommutantElement& e : commutant_basis(dil)) {
    CMatrix big = commutant_expand(dil, e);
    for (int i = 0; i < m.algebra.num_blocks(); ++i) {
      for (int p = 0; p < m.algebra.block_size(i); ++p) {
        for (int q = 0; q < m.algebra.block_size(i); ++q) {
          CMatrix rep = representation_apply(dil, AlgElement::matrix_unit(m.algebra, i, p, q));
          CHECK((big * rep - rep * big).norm() < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("is_pure") {
  // Ad_T is pure for any nonzero T.
  Rng rng(8);
  CpMap ad = from_kraus(AlgebraSpec{{3}}, 3, {{rng.gaussian_matrix(3, 3)}});
  CHECK(is_pure(ad, tol));

  CMatrix k1 = mat2(1, 0, 0, 0), k2 = mat2(0, 1, 0, 0);
  CHECK_FALSE(is_pure(from_kraus(AlgebraSpec{{2}}, 2, {{k1, k2}}), tol));

  // Supported on two algebra blocks: not pure.
  CpMap two = CpMap::zero(AlgebraSpec{{1, 1}}, 2);
  two.choi[0] = diag({1, 0});
  two.choi[1] = diag({0, 1});
  CHECK_FALSE(is_pure(two, tol));

  CHECK_THROWS_AS(is_pure(CpMap::zero(AlgebraSpec{{2}}, 2), tol), Error);
}

TEST_CASE("rn_derivative scalar and projection cases") {
  Rng rng(21);
  CpMap m = from_kraus(AlgebraSpec{{2}}, 2, {{rng.gaussian_matrix(2, 2), rng.gaussian_matrix(2, 2)}});

  // Psi = t Phi gives D = t I.
  CommutantElement d = rn_derivative(0.3 * m, m, tol);
  CHECK(d.blocks.size() == 1);
  CHECK(dist(d.blocks[0], 0.3 * CMatrix::Identity(2, 2)) < 1e-8);

  // Psi = Phi gives D = I.
  CommutantElement d1 = rn_derivative(m, m, tol);
  CHECK(dist(d1.blocks[0], CMatrix::Identity(2, 2)) < 1e-8);

  CHECK_THROWS_AS(rn_derivative(1.5 * m, m, tol), Error);

  // Corner of a direct sum recovers a projection in the commutant.
  CpMap big = direct_sum(CpMap::identity_map(2), 0.9999 * CpMap::identity_map(2));
  Dilation dil = minimal_dilation(big, tol);
  CpMap corner = CpMap::zero(big.algebra, big.hdim);
  for (int p = 0; p < 2; ++p) {
    for (int q = 0; q < 2; ++q) {
      CMatrix sub = CMatrix::Zero(4, 4);
      sub(p, q) = 1.0;  // top corner of Phi1 = id
      corner.choi[0].block(p * 4, q * 4, 4, 4) = sub;
    }
  }
  CommutantElement dp = rn_derivative(corner, big, tol);
  CHECK(cp_order(corner, big, tol));
  CHECK(maps_equal(commutant_compress(dil, dp), corner, tol));
  // D is a projection: D^2 = D within tolerance.
  for (const CMatrix& blk : dp.blocks) {
    CHECK((blk * blk - blk).norm() < 1e-6);
  }
}

TEST_CASE("dilation_range") {
  // Identity map: full C^2.
  Dilation dil = minimal_dilation(CpMap::identity_map(2), tol);
  CMatrix r = dilation_range(dil, 0, tol);
  CHECK(r.cols() == 2);

  // psi(a) = a11 on M_2 -> C: range span{e1}.
  CpMap psi = CpMap::zero(AlgebraSpec{{2}}, 1);
  psi.choi[0](0, 0) = 1.0;
  CMatrix r2 = dilation_range(minimal_dilation(psi, tol), 0, tol);
  CHECK(r2.cols() == 1);
  CHECK(std::abs(std::abs(r2(0, 0)) - 1.0) < 1e-10);

  // Compression onto span{e1, e2} inside M_3.
  CMatrix inc = CMatrix::Zero(3, 2);
  inc(0, 0) = 1.0;
  inc(1, 1) = 1.0;
  CpMap comp = from_kraus(AlgebraSpec{{3}}, 2, {{inc}});
  CMatrix r3 = dilation_range(minimal_dilation(comp, tol), 0, tol);
  CHECK(r3.cols() == 2);
  CHECK((r3.bottomRows(1)).norm() < 1e-10);

  CHECK_THROWS_AS(dilation_range(minimal_dilation(from_kraus(AlgebraSpec{{2}}, 2,
                                                             {{mat2(1, 0, 0, 0), mat2(0, 1, 0, 0)}}),
                                                  tol),
                                 0, tol),
                  Error);
}

TEST_CASE("stinespring identity on a random two-block map") {
  Rng rng(31);
  CpMap m = from_kraus(AlgebraSpec{{2, 2}}, 3,
                       {{rng.gaussian_matrix(2, 3)}, {rng.gaussian_matrix(2, 3), rng.gaussian_matrix(2, 3)}});
  Dilation dil = minimal_dilation(m, tol);
  for (int i = 0; i < 2; ++i) {
    for (int p = 0; p < 2; ++p) {
      for (int q = 0; q < 2; ++q) {
        AlgElement unit = AlgElement::matrix_unit(m.algebra, i, p, q);
        CHECK(dist(dil.v.adjoint() * representation_apply(dil, unit) * dil.v,
                   apply(m, unit)) < 1e-9);
      }
    }
  }
}
