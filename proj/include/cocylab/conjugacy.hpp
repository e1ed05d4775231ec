#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cocylab/holonomy.hpp"

namespace cocylab {

// Periodic cycle functional at a homoclinic point x of the base fixed
// point p: H^s_{x,p} composed with H^u_{p,x}, an endomorphism of the fiber
// at p. Exactly computable for windowed generators.
struct PcfValue {
  SftPoint point;
  Mat matrix;
  std::string system_label;
};

PcfValue pcf(const CocycleSystem& cs, const SftPoint& p0, const SftPoint& x);

// Tolerance scale: products of up to `depth` table factors set the natural
// residual floor.
double tol_scale(const CocycleSystem& a, const CocycleSystem& b, long depth);

inline constexpr double kTolEq = 1e-9;
inline constexpr double kTolConj = 1e-9;
inline constexpr double kTolPcf = 1e-8;

// ---------------------------------------------------------------------------
// periodic data
// ---------------------------------------------------------------------------

enum class MatchMode { Equal, Conjugate };

// Least-squares solution data for A_p = X B_p X^{-1} at one orbit.
struct TransferSolution {
  bool spectra_match = false;
  int solution_dim = 0;     // dim { X : P X = X Q }
  std::optional<Mat> c_p;   // canonical invertible representative
  double residual = 0.0;    // ||P - X Q X^{-1}|| for the returned X
};

// Canonical representative: the Frobenius projection of the identity onto
// the solution space when invertible, otherwise the first invertible
// seeded combination.
TransferSolution solve_transfer(const Mat& P, const Mat& Q);

struct MatchRow {
  PeriodicOrbit orbit;
  double residual = 0.0;         // EQUAL: ||A_p^k - B_p^k||; CONJUGATE: conjugation residual
  bool pass = false;
  std::optional<TransferSolution> transfer;  // CONJUGATE mode
};

struct MatchReport {
  MatchMode mode;
  std::vector<MatchRow> rows;
  bool pass = false;
  double worst_residual = 0.0;
};

MatchReport match_periodic_data(const CocycleSystem& a, const CocycleSystem& b,
                                const std::vector<PeriodicOrbit>& orbits,
                                MatchMode mode);

// ---------------------------------------------------------------------------
// the PCF obstruction
// ---------------------------------------------------------------------------

struct CondBRow {
  SftPoint point;
  double residual;
};

struct CondBReport {
  double condition_a_residual = 0.0;
  double max_residual = 0.0;
  std::optional<SftPoint> argmax;
  std::vector<CondBRow> rows;
  bool pass = false;
  double tolerance = 0.0;
};

// max over homoclinic points of core length <= window of
//   || pcf^A(x) - C_p pcf^B(x) C_p^{-1} ||.
// Throws ConditionAFailed when A_p != C_p B_p C_p^{-1} beyond tolerance.
CondBReport check_condition_b(const CocycleSystem& a, const CocycleSystem& b,
                              const SftPoint& p0, const Mat& c_p, int window,
                              double tolerance_scale = 1.0);

// ---------------------------------------------------------------------------
// conjugacy fields
// ---------------------------------------------------------------------------

// The transfer map C between two cocycles, carried as its exact values on
// homoclinic points of the base fixed point plus the extension machinery.
// Built fields evaluate anywhere through the holonomy formula; quotient
// fields (pointwise C1 * C2^{-1}) evaluate through their parents.
class ConjugacyField {
 public:
  static ConjugacyField built(CocycleSystem a, CocycleSystem b, SftPoint p0,
                              Mat c_p, int window, double holder_estimate,
                              bool holder_suspect,
                              std::map<SftPoint, Mat> cache);
  static ConjugacyField quotient(const ConjugacyField& c1,
                                 const ConjugacyField& c2);

  // exact value at a homoclinic point of the base
  Mat value_at(const SftPoint& h) const;

  // approximate value anywhere: routes x to a homoclinic point agreeing on
  // [-n, n]; the returned radius bounds matdist to the true value by
  // holder_estimate * alpha^{beta n}.
  std::pair<Mat, double> evaluate(const SftPoint& x, long n) const;

  const CocycleSystem& system_a() const { return *a_; }
  const CocycleSystem& system_b() const { return *b_; }
  const SftPoint& base_point() const { return *p0_; }
  const Mat& c_p() const { return c_p_; }
  int window() const { return window_; }
  double holder_estimate() const { return holder_est_; }
  bool holder_suspect() const { return holder_suspect_; }
  const std::map<SftPoint, Mat>& cache() const { return cache_; }

  // scalar multiple (scalars stay central, so this is again a conjugacy)
  ConjugacyField scaled(double s) const;

 private:
  ConjugacyField() = default;

  enum class Kind { Built, Quotient } kind_ = Kind::Built;
  std::optional<CocycleSystem> a_, b_;
  std::optional<SftPoint> p0_;
  Mat c_p_;
  int window_ = 0;
  double holder_est_ = 0.0;
  bool holder_suspect_ = false;
  std::map<SftPoint, Mat> cache_;
  std::shared_ptr<const ConjugacyField> lhs_, rhs_;
};

struct BuildOptions {
  bool force = false;           // skip the (a)/(b)/bunching gate
  const BunchingCertificate* cert_a = nullptr;
  const BunchingCertificate* cert_b = nullptr;
};

// Prop-4.7-style construction: caches C(x) = H^{A,s}_{p,x} C_p H^{B,s}_{x,p}
// on homoclinic points up to `window`, cross-checks the unstable route, and
// measures the Hoelder quotient of the cache.
ConjugacyField build_conjugacy(const CocycleSystem& a, const CocycleSystem& b,
                               const SftPoint& p0, const Mat& c_p, int window,
                               const BuildOptions& opts = {});

// Routes x to a homoclinic point of `base` agreeing with x on [-n, n]
// through shortest admissible connectors (lexicographic tie-break).
SftPoint route_to_homoclinic(const SftPoint& base, const SftPoint& x, long n);

// Same extension for an explicit admissible word anchored at [lo, lo+|w|-1].
SftPoint extend_word_to_homoclinic(const SftPoint& base, const Word& w, long lo);

// ---------------------------------------------------------------------------
// verification sweeps
// ---------------------------------------------------------------------------

struct CohomologyRow {
  SftPoint point;
  long depth;
  double residual;
  double admissible;  // extension-error allowance at this sample
};

struct CohomologyReport {
  double max_residual = 0.0;
  double max_excess = 0.0;  // residual minus allowance, worst case
  std::vector<CohomologyRow> rows;
  bool pass = false;
};

// max over samples and 1 <= j <= depth of
//   || A_x^j - C(f^j x) B_x^j C(x)^{-1} ||,
// with the evaluation radius folded into the per-row allowance.
CohomologyReport verify_cohomology(const CocycleSystem& a,
                                   const CocycleSystem& b,
                                   const ConjugacyField& cf,
                                   const std::vector<SftPoint>& samples,
                                   long depth, long eval_window,
                                   double tol = kTolPcf);

struct ClosingRow {
  int n;
  double residual_norm;               // ||R^n||
  std::optional<double> holder_ratio; // d(C(q_n), C_p) / dist(q_n, p)^beta
  std::optional<int> orbit_period;
};

struct ClosingReport {
  std::vector<ClosingRow> rows;
  double fitted_log_rate = 0.0;  // slope of log||R^n|| vs n
  bool geometric = false;        // decay consistent with rate <= theta + slack
  double plateau_level = 0.0;    // residual at the largest n
};

// Quadruple-product decay behind the PCF identity: after normalizing B by
// c_p, reports ||R^n|| for n in [n_lo, n_hi], per-n closing-orbit transfer
// data, and the fitted geometric rate.
ClosingReport verify_pcf_closing_convergence(const CocycleSystem& a,
                                             const CocycleSystem& b,
                                             const Mat& c_p, const SftPoint& x,
                                             int n_lo, int n_hi,
                                             double rate_budget,
                                             bool strict_orbit_data = false);

struct SubgroupReport {
  double orthogonal_residual = 0.0;   // max ||C^T C - Id|| over the cache
  double special_linear_residual = 0.0;  // max | |det C| - 1 |
};

// A-posteriori subgroup check: when the systems take values in O(d) or
// SL(d) and C_p does too, the cached field values must as well.
SubgroupReport subgroup_residuals(const ConjugacyField& cf);

struct CombineReport {
  long bezout_r = 0;
  long bezout_s = 0;
  double step1_residual = 0.0;
  double membership_residual = 0.0;
  bool pass = false;
};

// Relatively-prime power combination: checks that C2 (valid for the
// N2-power systems) already satisfies the step-1 equation, and that
// C1 C2^{-1} centralizes the N1*N2-power system.
CombineReport combine_relprime(const ConjugacyField& c1,
                               const ConjugacyField& c2,
                               const CocycleSystem& a, const CocycleSystem& b,
                               const std::vector<SftPoint>& samples,
                               long eval_window, double tol = kTolConj);

}  // namespace cocylab
