#pragma once

#include <map>
#include <memory>
#include <string>

#include "cocylab/numerics.hpp"
#include "cocylab/sft.hpp"

namespace cocylab {

// ---------------------------------------------------------------------------
// A locally constant map from points to invertible matrices:
//   F(x) = table[x_{-m} ... x_{m}]
// The table must cover every admissible (2m+1)-word. Such maps are
// beta-Hoelder for every beta, with certified constant
//   (max pairwise matdist over the table) / alpha^{m beta}.
// ---------------------------------------------------------------------------
class LocalMap {
 public:
  LocalMap(const TransitionStructure& ts, int d, int window_radius,
           std::map<Word, Mat> table);

  // constant map, window radius 0
  static LocalMap constant(const TransitionStructure& ts, const Mat& value);

  const Mat& at_word(const Word& w) const;  // w has length 2m+1
  const Mat& at_point(const SftPoint& x, long i = 0) const;

  int dim() const { return d_; }
  int window_radius() const { return m_; }
  const std::map<Word, Mat>& table() const { return table_; }
  const TransitionStructure& ts() const { return ts_; }

  double max_opnorm() const;
  double max_inv_opnorm() const;
  double max_pairwise_matdist() const;
  // max over entries of log(||A|| ||A^{-1}||)
  double max_log_distortion() const;

  LocalMap inverse_map() const;  // entrywise inverse

 private:
  TransitionStructure ts_;  // held by value, like SftPoint
  int d_;
  int m_;
  std::map<Word, Mat> table_;
};

using Generator = LocalMap;

// All admissible words of the given length (sorted lexicographically).
std::vector<Word> admissible_words(const TransitionStructure& ts, int length);

// ---------------------------------------------------------------------------
// Cocycle over sigma^step generated by a windowed map: for n > 0
//   A(x, n) = gen(sigma^{(n-1) step} x) * ... * gen(x),
// n = 0 the identity, n < 0 the inverse of the block ending at x.
// step > 1 realizes iterate systems over the power shift.
// ---------------------------------------------------------------------------
struct CocycleSystem {
  std::shared_ptr<const Generator> gen;
  Metric metric;
  int step = 1;
  std::string label;

  CocycleSystem(std::shared_ptr<const Generator> g, Metric m, std::string lab,
                int power_step = 1);

  int dim() const { return gen->dim(); }
  const TransitionStructure& ts() const { return gen->ts(); }
  // log of the per-step base contraction nu^beta = alpha^{step*beta}
  double log_contraction() const {
    return static_cast<double>(step) * metric.beta * std::log(metric.alpha);
  }
};

CocycleSystem make_system(const TransitionStructure& ts, Metric m,
                          const Generator& gen, std::string label);

Mat evaluate(const CocycleSystem& cs, const SftPoint& x, long n);

// Matrix with a separated log scale, for products long enough to overflow.
struct ScaledMat {
  Mat m;
  double log_scale = 0.0;
  double log_opnorm() const { return std::log(opnorm(m)) + log_scale; }
};

ScaledMat evaluate_scaled(const CocycleSystem& cs, const SftPoint& x, long n);

// Return product over an orbit: A at the canonical orbit point, iterated
// until the orbit closes under sigma^step.
Mat product_along_cyclic_word(const CocycleSystem& cs, const PeriodicOrbit& p);
// Number of sigma^step iterations until the orbit of period k closes.
long return_steps(const CocycleSystem& cs, const PeriodicOrbit& p);

// Product of gen along an explicit word context. The word must have length
// (n-1)*step + 2m + 1; factor j reads the window centred at m + j*step.
Mat product_along_word(const CocycleSystem& cs, const Word& w, long n);

// New system with generator x -> C(sigma^step x) * gen(x) * C(x)^{-1}.
// The result plays the role of the left-hand cocycle: if B = input and
// A = conjugate_system(B, C), then A and B are cohomologous via C.
CocycleSystem conjugate_system(const CocycleSystem& cs, const LocalMap& c,
                               std::string label = "");
CocycleSystem conjugate_system(const CocycleSystem& cs, const Mat& c,
                               std::string label = "");

// Certified Hoelder constant of the generator w.r.t. d_alpha^beta.
double holder_constant(const CocycleSystem& cs);

// The iterate system over sigma^{step*n_power}: generator tabulated as the
// n_power-step product, window radius m + (n_power-1)*step.
CocycleSystem power_system(const CocycleSystem& cs, int n_power);

}  // namespace cocylab
