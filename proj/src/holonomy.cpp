#include "cocylab/holonomy.hpp"

#include <cmath>

namespace cocylab {

namespace {

long ceil_div(long a, long b) { return (a + b - 1) / b; }

}  // namespace

HolonomyMap stable_holonomy(const CocycleSystem& cs, const SftPoint& x,
                            const SftPoint& y) {
  if (x == y)
    return HolonomyMap{Mat::Identity(cs.dim(), cs.dim()), x, y,
                       HolonomyKind::Stable, 0, true};
  const auto r = stable_agreement(x, y);
  if (!r)
    fail(Errc::NotStableRelated,
         "points " + x.repr() + " and " + y.repr() + " are not stable-related");
  const long m = cs.gen->window_radius();
  // factors with window inside the agreement zone cancel; the partial
  // product is frozen from this depth on
  const long depth = ceil_div(*r + m, cs.step);
  const Mat hx = evaluate(cs, x, depth);
  const Mat hy = evaluate(cs, y, depth);
  return HolonomyMap{inverse(hy) * hx, x, y, HolonomyKind::Stable, depth,
                     true};
}

HolonomyMap unstable_holonomy(const CocycleSystem& cs, const SftPoint& x,
                              const SftPoint& y) {
  if (x == y)
    return HolonomyMap{Mat::Identity(cs.dim(), cs.dim()), x, y,
                       HolonomyKind::Unstable, 0, true};
  const auto r = unstable_agreement(x, y);
  if (!r)
    fail(Errc::NotUnstableRelated,
         "points " + x.repr() + " and " + y.repr() + " are not unstable-related");
  const long m = cs.gen->window_radius();
  const long depth = ceil_div(*r + m, cs.step);
  const SftPoint xb = x.shifted(-depth * cs.step);
  const SftPoint yb = y.shifted(-depth * cs.step);
  const Mat hx = evaluate(cs, xb, depth);
  const Mat hy = evaluate(cs, yb, depth);
  return HolonomyMap{hy * inverse(hx), x, y, HolonomyKind::Unstable, depth,
                     true};
}

double certified_holonomy_constant(const CocycleSystem& cs,
                                   const BunchingCertificate& cert) {
  if (cert.verdict != BunchVerdict::Bunched)
    fail(Errc::UnbunchedInput,
         "certified holonomy constant needs a BUNCHED certificate");
  // Telescoping the partial products P_n = (A_y^n)^{-1} A_x^n gives
  //   ||P_{n+1} - P_n|| <= K(y,n) (nu^n)^beta * Minv * c_A * d(x,y)^beta * ||P_n||
  // with K(y,n)(nu^n)^beta <= L theta^n from the certificate, Minv the worst
  // one-step inverse norm and c_A the generator's Hoelder constant. Summing
  // the geometric series and bounding ||P_n|| by the product of the
  // (1 + L theta^n Minv c_A) factors:
  const double c_a = holder_constant(cs);
  const double minv = cs.gen->max_inv_opnorm();
  const double theta = cert.theta;
  const double g = cert.big_l * minv * c_a / (1.0 - theta);
  return g * std::exp(g);
}

HolonomyAxiomReport verify_holonomy_axioms(
    const CocycleSystem& cs,
    const std::vector<std::pair<SftPoint, SftPoint>>& stable_pairs,
    const std::vector<std::pair<SftPoint, SftPoint>>& unstable_pairs,
    const BunchingCertificate& cert, int equivariance_depth) {
  HolonomyAxiomReport rep;
  rep.certified_constant = (cert.verdict == BunchVerdict::Bunched)
                               ? certified_holonomy_constant(cs, cert)
                               : 0.0;

  auto check_pair = [&](const SftPoint& x, const SftPoint& y, bool stable) {
    HolonomyMap h = stable ? stable_holonomy(cs, x, y)
                           : unstable_holonomy(cs, x, y);
    HolonomyMap back = stable ? stable_holonomy(cs, y, x)
                              : unstable_holonomy(cs, y, x);
    rep.max_inverse_residual = std::max(
        rep.max_inverse_residual, opnorm(inverse(h.matrix) - back.matrix));

    // equivariance: H_{x,y} = (A_y^n)^{-1} H_{f^n x, f^n y} A_x^n (stable);
    // mirrored through negative iterates for the unstable kind
    for (int n = 1; n <= equivariance_depth; ++n) {
      const long sn = (stable ? n : -n) * cs.step;
      HolonomyMap hn = stable
                           ? stable_holonomy(cs, x.shifted(sn), y.shifted(sn))
                           : unstable_holonomy(cs, x.shifted(sn), y.shifted(sn));
      const Mat ax = evaluate(cs, x, stable ? n : -n);
      const Mat ay = evaluate(cs, y, stable ? n : -n);
      const Mat rhs = inverse(ay) * hn.matrix * ax;
      rep.max_equivariance_residual = std::max(
          rep.max_equivariance_residual, opnorm(h.matrix - rhs));
    }

    // local pairs feed the Hoelder ratio
    const auto agree = stable ? stable_agreement(x, y) : unstable_agreement(x, y);
    if (agree && *agree == 0 && !(x == y)) {
      const double dist = d_alpha(x, y, cs.metric);
      const double ratio = opnorm(h.matrix - Mat::Identity(cs.dim(), cs.dim())) /
                           std::pow(dist, cs.metric.beta);
      rep.max_holder_ratio = std::max(rep.max_holder_ratio, ratio);
    }
    ++rep.pairs_checked;
  };

  for (const auto& [x, y] : stable_pairs) check_pair(x, y, true);
  for (const auto& [x, y] : unstable_pairs) check_pair(x, y, false);

  // composition on triples built from consecutive sample pairs sharing a leaf
  auto check_triples = [&](const std::vector<std::pair<SftPoint, SftPoint>>& ps,
                           bool stable) {
    for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
      const SftPoint& x = ps[i].first;
      const SftPoint& y = ps[i].second;
      const SftPoint& z = ps[i + 1].second;
      const auto rel = stable ? stable_agreement(y, z) : unstable_agreement(y, z);
      if (!rel) continue;
      HolonomyMap hxy = stable ? stable_holonomy(cs, x, y)
                               : unstable_holonomy(cs, x, y);
      HolonomyMap hyz = stable ? stable_holonomy(cs, y, z)
                               : unstable_holonomy(cs, y, z);
      HolonomyMap hxz = stable ? stable_holonomy(cs, x, z)
                               : unstable_holonomy(cs, x, z);
      rep.max_composition_residual =
          std::max(rep.max_composition_residual,
                   opnorm(hyz.matrix * hxy.matrix - hxz.matrix));
      ++rep.triples_checked;
    }
  };
  check_triples(stable_pairs, true);
  check_triples(unstable_pairs, false);
  return rep;
}

}  // namespace cocylab
