#pragma once

#include "cpext/cpmap.hpp"

#include <cstdint>
#include <string>

namespace cpext {

struct CombinationTerm {
  CMatrix t;
  CpMap map;
};

/// A (P-)C*-convex combination: sum_j Ad_{T_j} Phi_j with the coefficient
/// identity sum_j T_j* P T_j = P. C*-convex combinations are the P = I case.
struct CombinationSpec {
  CMatrix p;
  std::vector<CombinationTerm> terms;
  bool proper = false;  // all T_j invertible
};

/// Membership class the terms are validated against: CP^(P) with the spec's
/// P, or merely contractive CP.
enum class CombinationClass { FixedUnit, Contractive };

struct CombinationValidation {
  bool valid = false;
  double residual = 0.0;  // ||sum T*PT - P||_F
  std::string why;
};

CombinationValidation validate(const CombinationSpec& spec, CombinationClass cls,
                               const Tolerances& tol);

/// Choi-level sum of the adjoined terms. Throws InvalidSpec when validation
/// fails.
CpMap combine(const CombinationSpec& spec, CombinationClass cls, const Tolerances& tol);

/// The explicit two-term C*-convex reduction of a CCP map to terms whose
/// unit images are projections (or zero); coefficients satisfy
/// sum T_j* T_j = I and the combination reproduces the input.
CombinationSpec km_reduce_ccp(const CpMap& phi, const Tolerances& tol);

/// Invertible Y with t X*PX + Y*PY = P for invertible X with X*PX <= P and
/// t in (0,1).
CMatrix complete_contraction(const CMatrix& p, const CMatrix& x, double t, const Tolerances& tol);

enum class GenKind {
  RandomCpP,
  Pure,
  PureStateTimesP,
  NestedExtreme,
  NonExtremeMixture,
  Homomorphism,
};

const char* gen_kind_name(GenKind kind);
GenKind parse_gen_kind(const std::string& name);

/// Seeded instance generator. Every kind self-checks the advertised class of
/// its output and throws rather than emitting a drifted instance.
CpMap gen(GenKind kind, const AlgebraSpec& alg, int hdim, const CMatrix& unit, uint64_t seed,
          const Tolerances& tol);

/// A proper two-term C*-convex decomposition of a contractive map, built
/// from a random positive invertible commutant element of its minimal
/// dilation. Coefficients satisfy sum T_j* T_j = I.
CombinationSpec decompose_ccp_proper(const CpMap& phi, uint64_t seed, const Tolerances& tol);

}  // namespace cpext
