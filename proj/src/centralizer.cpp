#include "cocylab/centralizer.hpp"

namespace cocylab {

CommutantReport commutant_tower(const CocycleSystem& cs, const PeriodicOrbit& p,
                                int k_max) {
  if (k_max < 2) fail(Errc::ConfigInvalid, "k_max must be >= 2");
  CommutantReport rep{p, {}, 0, 0, false, false};
  const Mat ret = product_along_cyclic_word(cs, p);

  std::vector<Subspace> towers;
  Mat power = Mat::Identity(ret.rows(), ret.cols());
  int best_dim = -1;
  for (int k = 1; k <= k_max; ++k) {
    power = ret * power;
    Subspace vk = solve_commutant(power, power);
    rep.dims.emplace_back(k, vk.rank());
    if (vk.rank() > best_dim) {
      best_dim = vk.rank();
      rep.l_star = k;
    }
    towers.push_back(std::move(vk));
  }

  // divisibility containments V_k <= V_{kT}
  rep.containment_ok = true;
  for (int k = 1; k <= k_max; ++k)
    for (int kt = 2 * k; kt <= k_max; kt += k) {
      const Subspace& small = towers[static_cast<std::size_t>(k - 1)];
      const Subspace& big = towers[static_cast<std::size_t>(kt - 1)];
      if (small.rank() == 0) continue;
      const auto angles = principal_angles(big, small);
      const double worst = angles.empty() ? 0.0 : angles.back();
      rep.containment_ok = rep.containment_ok &&
                           small.rank() <= big.rank() && worst < NumTol::angle;
    }

  // stabilization at L*: V_{L*} = V_{L* T} for every multiple in range
  rep.tower_verified = true;
  for (int kt = 2 * rep.l_star; kt <= k_max; kt += rep.l_star)
    rep.tower_verified =
        rep.tower_verified &&
        subspace_equal(towers[static_cast<std::size_t>(rep.l_star - 1)],
                       towers[static_cast<std::size_t>(kt - 1)]);
  rep.m_claim = rep.l_star;
  return rep;
}

MembershipVerdict centralizer_membership(const CocycleSystem& a,
                                         const ConjugacyField& d_field,
                                         const std::vector<SftPoint>& samples,
                                         long depth, long eval_window,
                                         double tol) {
  const CohomologyReport rep =
      verify_cohomology(a, a, d_field, samples, depth, eval_window, tol);
  return MembershipVerdict{rep.pass, rep.max_residual, rep.max_excess};
}

CosetVerdict coset_test(const CocycleSystem& a, const CocycleSystem& b,
                        const ConjugacyField& c1, const ConjugacyField& c2,
                        const std::vector<SftPoint>& samples, long depth,
                        long eval_window, double tol) {
  CosetVerdict v;
  const ConjugacyField quot = ConjugacyField::quotient(c1, c2);
  v.quotient_membership =
      centralizer_membership(a, quot, samples, depth, eval_window, tol);
  const CohomologyReport direct =
      verify_cohomology(a, b, c2, samples, depth, eval_window, tol);
  v.direct_c2_valid = direct.pass;
  v.routes_agree = (v.quotient_membership.member == v.direct_c2_valid);
  return v;
}

}  // namespace cocylab
