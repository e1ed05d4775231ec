#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cocylab/errors.hpp"

namespace cocylab {

// Words over the alphabet {0, ..., k-1} are stored as strings; symbol i is
// written as the character '0'+i (then 'a'+i-10), so configs stay readable
// for every supported alphabet size (k <= 16).
using Word = std::string;

char symbol_char(int s);
int char_symbol(char c);

// -------------------------------------------------------------------------
// Transition structure of a two-sided shift of finite type.
// -------------------------------------------------------------------------
struct TransitionStructure {
  int k = 0;                             // alphabet size
  std::vector<std::vector<bool>> allowed;  // k x k 0/1 transition matrix
  std::optional<int> mixing_power;       // smallest N with Q^N > 0, if known

  TransitionStructure() = default;
  TransitionStructure(int alphabet, std::vector<std::vector<bool>> q);

  bool edge(int a, int b) const { return allowed[a][b]; }
  bool word_admissible(const Word& w) const;
  // cyclic words additionally need last -> first
  bool cyclic_admissible(const Word& w) const;

  // Full k x k shift.
  static TransitionStructure full_shift(int k);

  // trace(Q^n), i.e. the number of period-n points (with multiplicity).
  std::uint64_t trace_power(int n) const;

  std::vector<int> successors(int a) const;

  // Shortest admissible word c with edge(from, c[0]), edges inside c, and
  // edge(c.back(), to); empty when edge(from,to) already holds. Ties broken
  // lexicographically. Throws NotMixing if unreachable.
  Word connector(int from, int to) const;
};

// Smallest N <= max_power with Q^N entrywise positive.
// Throws NotMixing, reporting reducibility/periodicity when detectable.
int validate_mixing(const TransitionStructure& ts, int max_power);

// -------------------------------------------------------------------------
// Metric d_alpha with Hoelder exponent beta. The SFT base contraction is
// nu = alpha, nu_hat = 1/alpha.
// -------------------------------------------------------------------------
struct Metric {
  double alpha = 0.5;
  double beta = 1.0;

  Metric() = default;
  Metric(double a, double b);
};

// -------------------------------------------------------------------------
// A point of the shift space, restricted to sequences that are eventually
// periodic in both directions:
//
//   x_i = left periodic extension   for i <  core_begin
//   x_i = core[i - core_begin]      for core_begin <= i <= core_end
//   x_i = right periodic extension  for i >  core_end
//
// The left period ends at core_begin-1 and the right period starts at
// core_end+1. The representation is normalized on construction: periods
// primitive, core minimal, boundary of a coreless point slid maximally
// left, globally periodic points anchored at 0. Equality and hashing act
// on the normal form.
// -------------------------------------------------------------------------
class SftPoint {
 public:
  SftPoint(const TransitionStructure& ts, Word left, Word core, Word right,
           long core_start);

  // Periodic point x_i = w[i mod |w|].
  static SftPoint periodic(const TransitionStructure& ts, const Word& w);
  // Fixed point s^inf.
  static SftPoint fixed(const TransitionStructure& ts, int symbol);

  int at(long i) const;
  char at_char(long i) const;
  Word window(long lo, long hi) const;  // inclusive

  // sigma^n: (shifted(n))_i = x_{i+n}
  SftPoint shifted(long n) const;

  const Word& left_word() const { return left_; }
  const Word& core_word() const { return core_; }
  const Word& right_word() const { return right_; }
  long core_begin() const { return begin_; }
  long core_end() const { return begin_ + static_cast<long>(core_.size()) - 1; }

  bool globally_periodic() const;
  // true when the point equals fixed_symbol outside a finite window
  bool homoclinic_to_symbol(int symbol) const;

  bool operator==(const SftPoint& o) const;
  bool operator!=(const SftPoint& o) const { return !(*this == o); }
  bool operator<(const SftPoint& o) const;  // canonical order

  std::string repr() const;
  std::size_t hash() const;

  const TransitionStructure& ts() const { return ts_; }

 private:
  void normalize();
  void check_admissible() const;

  TransitionStructure ts_;  // held by value: points outlive their builders
  Word left_, core_, right_;
  long begin_;
};

// d_alpha(x, y) = alpha^{min{|i| : x_i != y_i}}, 0 when x == y.
double d_alpha(const SftPoint& x, const SftPoint& y, const Metric& m);

// Smallest R >= 0 with x_i = y_i for all i >= R; nullopt when the forward
// tails disagree infinitely often.
std::optional<long> stable_agreement(const SftPoint& x, const SftPoint& y);
// Smallest R >= 0 with x_i = y_i for all i <= -R.
std::optional<long> unstable_agreement(const SftPoint& x, const SftPoint& y);

// z with z_i = x_i (i >= 0), z_i = y_i (i <= 0); requires x_0 = y_0.
SftPoint bracket(const SftPoint& x, const SftPoint& y);

// -------------------------------------------------------------------------
// Periodic orbits, stored as primitive cyclic words in minimal rotation.
// -------------------------------------------------------------------------
struct PeriodicOrbit {
  Word word;  // primitive, lexicographically minimal rotation

  explicit PeriodicOrbit(Word w);
  int period() const { return static_cast<int>(word.size()); }
  SftPoint point(const TransitionStructure& ts) const;

  bool operator==(const PeriodicOrbit& o) const { return word == o.word; }
  bool operator<(const PeriodicOrbit& o) const;
};

// All primitive orbits of period <= max_period, sorted (period, word).
std::vector<PeriodicOrbit> enumerate_periodic_orbits(
    const TransitionStructure& ts, int max_period);

// Lexicographically smallest orbit of minimal period (used when passing to a
// power shift on structures without a fixed point).
PeriodicOrbit shortest_periodic_orbit(const TransitionStructure& ts);

// All points a^inf . w . a^inf, |w| <= window, core anchored at [0, |w|-1];
// includes the fixed point itself. Requires edge(a, a).
std::vector<SftPoint> homoclinic_points(const TransitionStructure& ts,
                                        int fixed_symbol, int window);

// Generalization used by power-shift pipelines: points agreeing with the
// (phase-locked) periodic extension of p outside [0, L-1], L <= window.
std::vector<SftPoint> homoclinic_points_periodic(const TransitionStructure& ts,
                                                 const PeriodicOrbit& p,
                                                 int window);

struct ClosingOrbit {
  PeriodicOrbit orbit;  // primitive reduction of the closing word
  SftPoint point;       // periodic point agreeing with x on [-n, n-1]
  int n;
};

// Periodic repetition of x_{-n} .. x_{n-1} for x homoclinic to a fixed
// point; d_alpha(sigma^i x, sigma^i q) <= alpha^{n-|i|} for |i| <= n.
ClosingOrbit closing_orbit(const SftPoint& x, int n);

}  // namespace cocylab
