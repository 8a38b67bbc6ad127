#pragma once

#include "cpext/linalg.hpp"

#include <vector>

namespace cpext {

/// A finite-dimensional C*-algebra presented as an ordered direct sum of
/// full matrix blocks M_{n_1} (+) ... (+) M_{n_k}. The commutative case is
/// exactly the all-ones block list.
struct AlgebraSpec {
  std::vector<int> blocks;

  int num_blocks() const { return static_cast<int>(blocks.size()); }
  int block_size(int i) const { return blocks[static_cast<size_t>(i)]; }
  int total_dim() const;  // sum of n_i^2
  bool commutative() const;
  void validate() const;

  bool operator==(const AlgebraSpec&) const = default;
};

struct AlgElement {
  std::vector<CMatrix> blocks;

  static AlgElement zero(const AlgebraSpec& alg);
  static AlgElement identity(const AlgebraSpec& alg);
  /// iota_i(E_pq): the (p,q) matrix unit of block i, zero elsewhere.
  static AlgElement matrix_unit(const AlgebraSpec& alg, int block, int p, int q);

  AlgElement adjoint() const;
};

/// A CP map A -> B(C^d) stored as one Choi block per algebra block.
/// Convention: the (p,q) d x d sub-block of Choi block i equals
/// Phi(iota_i(E_pq)), i.e. the first tensor factor indexes the algebra.
struct CpMap {
  AlgebraSpec algebra;
  int hdim = 0;
  std::vector<CMatrix> choi;  // block i: (n_i * hdim) x (n_i * hdim)

  static CpMap zero(const AlgebraSpec& alg, int hdim);
  static CpMap identity_map(int n);  // the identity channel on M_n

  /// Structural validation: block count, block dimensions, finite entries.
  void validate() const;

  /// Phi(iota_i(E_pq)) read directly off the Choi block.
  CMatrix choi_sub(int block, int p, int q) const;

  CpMap& operator+=(const CpMap& other);
  friend CpMap operator+(CpMap a, const CpMap& b) { return a += b; }
  friend CpMap operator*(double t, CpMap m);
};

enum class UnitTag { Zero, Projection, Invertible, GeneralPsd };

const char* unit_tag_name(UnitTag tag);

struct UnitClass {
  UnitTag tag = UnitTag::Zero;
  CMatrix p;
};

CMatrix apply(const CpMap& phi, const AlgElement& a);

/// Phi(1) as the sum of diagonal d x d sub-blocks of every Choi block.
CMatrix unit_image(const CpMap& phi);

CpMap from_kraus(const AlgebraSpec& alg, int hdim,
                 const std::vector<std::vector<CMatrix>>& kraus);

/// Kraus operators from the eigen-factorization of each Choi block at the
/// eig_cut cutoff. Ordered by descending eigenvalue, with the phase fixed so
/// the first non-negligible component of each eigenvector is real positive.
std::vector<std::vector<CMatrix>> kraus_of(const CpMap& phi, const Tolerances& tol);

struct VerifyReport {
  bool is_cp = false;
  bool choi_hermitian = false;
  double min_choi_eig = 0.0;
  UnitClass unit;
  bool is_contractive = false;
  bool is_unital = false;
  double norm = 0.0;  // ||Phi(1)||
};

VerifyReport verify(const CpMap& phi, const Tolerances& tol);

/// Spectral classification of a PSD matrix. The identity is classified as
/// Invertible; Projection is reserved for proper (singular) projections.
/// is_projection_matrix accepts every projection including 0 and I.
UnitClass classify_unit(const CMatrix& p, const Tolerances& tol);
bool is_projection_matrix(const CMatrix& p, const Tolerances& tol);

/// Psi <=_cp Phi: every Choi block of Phi - Psi is PSD.
bool cp_order(const CpMap& psi, const CpMap& phi, const Tolerances& tol);

/// Ad_T . Phi, i.e. a |-> T* Phi(a) T.
CpMap adjoin(const CpMap& phi, const CMatrix& t);

/// Unital renormalization Phi(1)^{-1/2} Phi(.) Phi(1)^{-1/2}.
/// Throws UnitNotInvertible when Phi(1) is singular at tolerance.
CpMap hat(const CpMap& phi, const Tolerances& tol);

CpMap direct_sum(const CpMap& a, const CpMap& b);

struct Compression {
  CpMap compressed;      // on H_0 = ran Phi(1)
  CMatrix range_basis;   // d x r, orthonormal columns spanning ran Phi(1)
  CMatrix kernel_basis;  // d x (d-r), orthonormal columns spanning ker Phi(1)
};

/// Block form of Lemma-style range compression: in the basis
/// (range of Phi(1)) (+) (kernel of Phi(1)) the map is diag(Phi_0, 0) with
/// Phi_0(1) invertible. Off-diagonal leakage above tolerance raises
/// OffDiagonalLeak.
Compression compress_to_range(const CpMap& phi, const Tolerances& tol);

/// Multiplicativity on all pairs of matrix-unit generators plus
/// *-preservation.
bool is_homomorphism(const CpMap& phi, const Tolerances& tol);

/// Per-block Choi Frobenius distance at eq_tol.
bool maps_equal(const CpMap& a, const CpMap& b, const Tolerances& tol);

}  // namespace cpext
