#pragma once

#include "cocylab/conjugacy.hpp"

namespace cocylab {

// Commutant tower of one return product: V_k = { X : M^k X = X M^k }.
struct CommutantReport {
  PeriodicOrbit base_orbit;
  std::vector<std::pair<int, int>> dims;  // (k, dim V_k) for k = 1..K_max
  int l_star = 0;        // smallest k attaining the maximal dimension
  int m_claim = 0;       // stabilization exponent: V_{L*} = V_{L* T} verified
  bool tower_verified = false;  // subspace equality held for every tested T
  bool containment_ok = false;  // V_k inside V_{kT} wherever tested
};

CommutantReport commutant_tower(const CocycleSystem& cs, const PeriodicOrbit& p,
                                int k_max);

struct MembershipVerdict {
  bool member = false;
  double max_residual = 0.0;
  double max_excess = 0.0;
};

// D centralizes A iff it is a conjugacy from A to itself.
MembershipVerdict centralizer_membership(const CocycleSystem& a,
                                         const ConjugacyField& d_field,
                                         const std::vector<SftPoint>& samples,
                                         long depth, long eval_window,
                                         double tol = kTolPcf);

struct CosetVerdict {
  MembershipVerdict quotient_membership;  // C1 C2^{-1} in Z(A)?
  bool direct_c2_valid = false;           // does C2 verify for (A, B)?
  bool routes_agree = false;
};

// The two equivalent tests of "C2 is a conjugacy": quotient membership in
// the centralizer vs direct verification. The verdicts must agree.
CosetVerdict coset_test(const CocycleSystem& a, const CocycleSystem& b,
                        const ConjugacyField& c1, const ConjugacyField& c2,
                        const std::vector<SftPoint>& samples, long depth,
                        long eval_window, double tol = kTolPcf);

}  // namespace cocylab
