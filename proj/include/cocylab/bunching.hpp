#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cocylab/cocycle.hpp"

namespace cocylab {

enum class BunchVerdict { Bunched, NotBunched, Undecided };

const char* verdict_name(BunchVerdict v);

enum class BunchRoute { Direct, Periodic };

// Witness data for the bunching decision. Via the direct route: the uniform
// sweep found depth N with every admissible context negative, theta is the
// per-step rate exp(max/N) and (L, theta) satisfy
//   ||A_x^n|| ||(A_x^n)^{-1}|| (nu_x^n)^beta <= L theta^n   for all n >= 0.
// Via the periodic route: every checked orbit has margin eta < 0 (evidence),
// or a violating orbit is reported.
struct BunchingCertificate {
  BunchVerdict verdict = BunchVerdict::Undecided;
  BunchRoute route = BunchRoute::Direct;
  int n_witness = 0;          // sweep depth (direct) / max period checked (periodic)
  double theta = 1.0;         // per-step rate, < 1 when Bunched via Direct
  double big_l = 1.0;         // prefactor L
  std::optional<double> eta;  // periodic margin, < 0 when all orbits negative
  std::string diagnostics;    // worst word / worst orbit
  bool evidence_only = false; // periodic route over finitely many orbits

  double geometric_bound(long n) const;  // L * theta^n
};

// Quasiconformal distortion K(x, n) = ||A_x^n|| ||(A_x^n)^{-1}|| >= 1.
double distortion(const CocycleSystem& cs, const SftPoint& x, long n);

// a_n along an explicit context: log distortion of the n-step word product
// plus n * beta * step * log alpha. The word must have length
// (n-1)*step + 2m + 1.
double subadditive_value(const CocycleSystem& cs, const Word& w, long n);

// Cor-4.2-style quantity of one orbit:
//   q(p) = (1/n) log(max |eig| / min |eig| of the return product)
//          + beta * step * log alpha,
// n the number of sigma^step returns.
double periodic_bunching_value(const CocycleSystem& cs, const PeriodicOrbit& p);

struct DirectSweepOptions {
  int max_n = 8;
  int violator_max_period = 8;   // periodic search depth when the sweep stalls
  std::uint64_t node_budget = 20'000'000;
  int threads = 1;
};

// Uniform sweep over all admissible contexts for N = 1..max_n, exact maxima
// with branch-and-bound pruning. Falls back to the periodic criterion for a
// NotBunched witness; Undecided when neither settles it.
BunchingCertificate certify_direct(const CocycleSystem& cs,
                                   const DirectSweepOptions& opt = {});

struct OrbitBunchingRow {
  PeriodicOrbit orbit;
  double q;
};

struct PeriodicCertifyResult {
  BunchingCertificate certificate;
  std::vector<OrbitBunchingRow> rows;
};

// Periodic-data criterion over the given orbits. Negative margin below
// -1e-9 on every orbit is evidence for bunching; any q(p) >= 0 certifies
// the violation.
PeriodicCertifyResult certify_periodic(const CocycleSystem& cs,
                                       const std::vector<PeriodicOrbit>& orbits);

}  // namespace cocylab
