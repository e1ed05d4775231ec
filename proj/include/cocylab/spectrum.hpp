#pragma once

#include <cstdint>
#include <random>

#include "cocylab/cocycle.hpp"

namespace cocylab {

// Extreme Lyapunov exponents of the return product at one orbit:
// lambda_+- = (1/n) log (largest/smallest |eigenvalue|).
std::pair<double, double> periodic_exponents(const CocycleSystem& cs,
                                             const PeriodicOrbit& p);

// ---------------------------------------------------------------------------
// Stationary Markov sampler over the transition graph. Default weights give
// the maximal-entropy (Parry) measure from the Perron eigendata of Q.
// ---------------------------------------------------------------------------
class MarkovSampler {
 public:
  // weights: row-stochastic-able positive matrix supported exactly on Q;
  // empty -> Parry measure.
  MarkovSampler(const TransitionStructure& ts,
                std::vector<std::vector<double>> weights, std::uint64_t seed);
  static MarkovSampler parry(const TransitionStructure& ts, std::uint64_t seed);

  // stationary word of the given length
  Word sample_word(int length);

  const std::vector<double>& stationary() const { return stationary_; }
  const std::vector<std::vector<double>>& transition() const { return p_; }

 private:
  const TransitionStructure* ts_;
  std::vector<std::vector<double>> p_;  // row-stochastic
  std::vector<double> stationary_;
  std::mt19937_64 rng_;
};

struct MeasureEstimate {
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double std_error_plus = 0.0;
  double std_error_minus = 0.0;
  long n_steps = 0;
  int n_samples = 0;
};

// Monte-Carlo estimate of the extreme exponents along sampler paths; QR
// re-orthogonalization for d > 2, scaled norm tracking for d <= 2.
MeasureEstimate measure_exponents(const CocycleSystem& cs,
                                  MarkovSampler& sampler, long n_steps,
                                  int n_samples);

struct SpectrumRow {
  PeriodicOrbit orbit;
  double lambda_plus;
  double lambda_minus;
};

struct GapRow {
  int max_period;
  double gap;           // best |dl+| + |dl-| over orbits of period <= max_period
  PeriodicOrbit best_orbit;
};

struct ApproximationGapReport {
  MeasureEstimate measure;
  std::vector<SpectrumRow> periodic;
  std::vector<GapRow> gaps;  // nonincreasing in max_period by construction
};

// How well periodic exponents approximate the measure exponents, as a
// function of the allowed period.
ApproximationGapReport approximation_gap(const CocycleSystem& cs,
                                         int max_period, MarkovSampler& sampler,
                                         long n_steps, int n_samples);

}  // namespace cocylab
