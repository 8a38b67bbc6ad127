#pragma once

#include "cpext/cpmap.hpp"

namespace cpext {

/// Minimal Stinespring data for a CP map. The representation is implicit:
/// pi(a) = (+)_i (a_i (x) I_{r_i}) acting on K = (+)_i (C^{n_i} (x) C^{r_i}),
/// with r_i the numerical rank of Choi block i. Coordinates of block i are
/// ordered (p, s) -> p * r_i + s.
struct Dilation {
  AlgebraSpec algebra;
  int hdim = 0;
  std::vector<int> mult;  // r_i = rank of Choi block i
  int kdim = 0;           // sum of n_i * r_i
  CMatrix v;              // kdim x hdim with V* pi(a) V = Phi(a)
  std::vector<std::vector<CMatrix>> kraus;  // the factorization backing V

  int block_offset(int i) const;  // start of block i inside K
};

/// An element of the commutant pi(A)' = (+)_i (I_{n_i} (x) M_{r_i}),
/// stored by its r_i x r_i coordinate blocks.
struct CommutantElement {
  std::vector<CMatrix> blocks;
};

Dilation minimal_dilation(const CpMap& phi, const Tolerances& tol);

/// pi(a) as a kdim x kdim matrix.
CMatrix representation_apply(const Dilation& dil, const AlgElement& a);

/// Realize a commutant element as a kdim x kdim operator.
CMatrix commutant_expand(const Dilation& dil, const CommutantElement& e);

/// Basis of the commutant, orthonormal in the trace inner product on K;
/// sum of r_i^2 elements.
std::vector<CommutantElement> commutant_basis(const Dilation& dil);

/// The CP map a |-> V* D pi(a) V for a commutant element D, computed at the
/// Choi level.
CpMap commutant_compress(const Dilation& dil, const CommutantElement& d);

/// A nonzero CP map is pure iff its minimal dilation is irreducible:
/// exactly one nonzero Choi block, of numerical rank one.
bool is_pure(const CpMap& phi, const Tolerances& tol);

/// Radon-Nikodym derivative of Psi with respect to Phi: the unique positive
/// contraction D in the commutant of the minimal dilation of Phi with
/// Psi = V* D pi(.) V. Throws NotDominated when Psi is not cp-dominated and
/// ReconstructionFailure when the least-squares solution does not reproduce
/// Psi at tolerance.
CommutantElement rn_derivative(const CpMap& psi, const CpMap& phi, const Tolerances& tol);

/// For a pure map supported on the given block: orthonormal basis of the
/// range of its unique Kraus operator inside C^{n_i}.
CMatrix dilation_range(const Dilation& dil, int block, const Tolerances& tol);

}  // namespace cpext
