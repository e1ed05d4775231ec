#pragma once

#include <optional>
#include <vector>

#include "cocylab/bunching.hpp"
#include "cocylab/cocycle.hpp"

namespace cocylab {

enum class HolonomyKind { Stable, Unstable };

// H_{x,y}: fiber at x -> fiber at y, y in W^s(x) (resp. W^u(x)).
// For windowed generators the defining limits freeze at a finite depth, so
// the stored matrix is the exact limit up to rounding. The raw finite
// product exists with or without fiber bunching, so maps start out
// `formal`; clear the flag once a BUNCHED certificate backs the limit laws.
struct HolonomyMap {
  Mat matrix;
  SftPoint from_point;
  SftPoint to_point;
  HolonomyKind kind;
  long stabilization_depth;  // iterations of sigma^step at which the limit froze
  bool formal = true;

  HolonomyMap certified(const BunchingCertificate& cert) const {
    HolonomyMap h(*this);
    h.formal = cert.verdict != BunchVerdict::Bunched;
    return h;
  }
};

// lim (A_y^n)^{-1} A_x^n; requires y in W^s(x).
HolonomyMap stable_holonomy(const CocycleSystem& cs, const SftPoint& x,
                            const SftPoint& y);

// lim A_{f^{-n}y}^n (A_{f^{-n}x}^n)^{-1}; requires y in W^u(x).
HolonomyMap unstable_holonomy(const CocycleSystem& cs, const SftPoint& x,
                              const SftPoint& y);

// Conservative certified constant for the local Hoelder bound
//   ||H_{x,y} - Id|| <= c_H d_alpha(x, y)^beta,  y in W_loc^{s/u}(x),
// assembled from the Hoelder constant of the generator and a bunching
// certificate (geometric-series bound; derivation documented in the source).
double certified_holonomy_constant(const CocycleSystem& cs,
                                   const BunchingCertificate& cert);

struct HolonomyAxiomReport {
  double max_composition_residual = 0.0;   // H_{y,z} H_{x,y} vs H_{x,z}
  double max_equivariance_residual = 0.0;  // conjugation by the cocycle, n = 1..10
  double max_inverse_residual = 0.0;       // H_{x,y}^{-1} vs H_{y,x}
  double max_holder_ratio = 0.0;           // ||H - Id|| / d_alpha^beta on local pairs
  double certified_constant = 0.0;
  int pairs_checked = 0;
  int triples_checked = 0;
  bool holder_ok() const { return max_holder_ratio <= certified_constant; }
};

// Residual sweep of the holonomy laws over sample pairs (both kinds derived
// from the points' relation) plus composition on consecutive triples.
HolonomyAxiomReport verify_holonomy_axioms(
    const CocycleSystem& cs,
    const std::vector<std::pair<SftPoint, SftPoint>>& stable_pairs,
    const std::vector<std::pair<SftPoint, SftPoint>>& unstable_pairs,
    const BunchingCertificate& cert, int equivariance_depth = 10);

}  // namespace cocylab
