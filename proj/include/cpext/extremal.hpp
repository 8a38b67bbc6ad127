#pragma once

#include "cpext/cpmap.hpp"
#include "cpext/dilation.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace cpext {

enum class Model { Ucp, CpP, Ccp };

const char* model_name(Model m);

/// One pure summand of an extremality certificate: the subspace of H it acts
/// on (orthonormal columns of basis_h), the algebra block carrying its
/// irreducible representation, and the dilation isometry whose range in
/// C^{n_i} realizes it as a compression of that representation.
struct PureSummand {
  int block = 0;
  CMatrix basis_h;   // d x m, orthonormal columns
  CMatrix isometry;  // n_i x m, isometry; its range is the dilation range
};

/// Certificate of (P-)C*-extremality: Phi = S* ((+)_j pure_j (+) 0) S where
/// the pure summands are grouped by algebra block and, within each group,
/// their dilation ranges form a chain under inclusion.
struct NestedStructure {
  std::vector<std::vector<PureSummand>> groups;  // one group per used block
  CMatrix conjugator;                            // S, invertible; unitary for
                                                 // unital / projection units
};

/// Witness of non-extremality: a proper decomposition
/// Phi = sum_j Ad_{T_j} Phi_j with sum_j T_j* P T_j = P whose flagged term is
/// not equivalent to Phi in the model's sense.
struct DecompositionWitness {
  struct Term {
    CMatrix t;
    CpMap map;
  };
  std::vector<Term> terms;
  int nonequiv_index = 0;
};

enum class VerdictKind { Extreme, NotExtreme, Inconclusive };

const char* verdict_kind_name(VerdictKind k);

struct ExtremalityVerdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  Model model = Model::CpP;
  std::optional<NestedStructure> certificate;  // set when Extreme
  std::optional<DecompositionWitness> witness;  // set when NotExtreme
  std::string diagnostics;
  uint64_t seed = 0;
};

struct LinearExtremeWitness {
  CpMap phi1;
  CpMap phi2;
  double t = 0.5;  // Phi = t*phi1 + (1-t)*phi2
};

struct LinearExtremeResult {
  bool extreme = false;
  std::optional<LinearExtremeWitness> witness;
};

/// Linear extremality of Phi inside CP^(P), P = Phi(1): the Kraus products
/// {K_{i,s}* K_{i,t}} over all blocks must be linearly independent. When they
/// are not, a null direction yields a proper convex splitting with the same
/// unit image.
LinearExtremeResult linear_extreme(const CpMap& phi, const Tolerances& tol);

ExtremalityVerdict ucp_cstar_extreme(const CpMap& phi, const Tolerances& tol, uint64_t seed);

ExtremalityVerdict cp_p_cstar_extreme(const CpMap& phi, const Tolerances& tol, uint64_t seed);

ExtremalityVerdict ccp_cstar_extreme(const CpMap& phi, const Tolerances& tol, uint64_t seed);

struct EquivalenceResult {
  bool equivalent = false;
  CMatrix conjugator;  // U (unitary) or Z (invertible) with Psi = Ad_. Phi
};

/// Unitary equivalence Psi = Ad_U Phi, decided through the intertwiner space
/// {X : X Psi(a) = Phi(a) X}. Probabilistically complete: an invertible
/// intertwiner exists iff a random element of the space is invertible almost
/// surely; its polar part is then a valid unitary.
EquivalenceResult equivalent_unitary(const CpMap& phi, const CpMap& psi, const Tolerances& tol,
                                     uint64_t seed);

/// Invertible equivalence Psi = Ad_Z Phi for maps with invertible units,
/// reduced to unitary equivalence of the unital renormalizations.
EquivalenceResult equivalent_invertible(const CpMap& phi, const CpMap& psi, const Tolerances& tol,
                                        uint64_t seed);

struct CommutativeForm {
  std::vector<int> points;          // indices of the carrying algebra blocks
  std::vector<CMatrix> projections;  // mutually orthogonal, summing to the
                                     // projection onto ran P
};

/// For commutative algebras: the representation
/// Phi(f) = sum_j f(w_j) P^{1/2} Q_j P^{1/2} when it exists at tolerance.
std::optional<CommutativeForm> commutative_form(const CpMap& phi, const Tolerances& tol);

/// Re-validate an Extreme certificate against the map it claims to certify.
bool check_certificate(const CpMap& phi, const NestedStructure& cert, Model model,
                       const Tolerances& tol, std::string* why = nullptr);

/// Re-validate a NotExtreme witness: coefficient identity, invertibility,
/// recombination, class membership and non-equivalence of the flagged term.
bool check_witness(const CpMap& phi, const DecompositionWitness& wit, Model model,
                   const Tolerances& tol, uint64_t seed, std::string* why = nullptr);

/// Equivalence in the sense of the given model: unitary for Ucp/Ccp,
/// invertible for CpP. Both maps must share the unit image P; singular P is
/// handled by compressing both maps onto ran P first.
bool equivalent_in_model(const CpMap& phi, const CpMap& psi, Model model, const Tolerances& tol,
                         uint64_t seed);

}  // namespace cpext
