#include <doctest.h>

#include <cmath>

#include "cocylab/bunching.hpp"
#include "cocylab/scenario.hpp"
#include "cocylab/spectrum.hpp"

using namespace cocylab;

namespace {

TransitionStructure full2() { return TransitionStructure::full_shift(2); }

TransitionStructure golden_mean() {
  return TransitionStructure(2, {{true, true}, {true, false}});
}

CocycleSystem constant_system(const TransitionStructure& ts, const Mat& a,
                              const std::string& label) {
  return CocycleSystem(std::make_shared<LocalMap>(LocalMap::constant(ts, a)),
                       Metric(0.5, 1.0), label);
}

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Mat rotation(double t) {
  Mat m(2, 2);
  m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return m;
}

}  // namespace

TEST_CASE("periodic exponents of constant diag(3, 1/3)") {
  const auto cs = constant_system(full2(), diag2(3.0, 1.0 / 3.0), "d3");
  const auto [lp, lm] = periodic_exponents(cs, PeriodicOrbit("0"));
  CHECK(lp == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK(lm == doctest::Approx(-std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("conformal generators have equal extreme exponents on every orbit") {
  const auto ts = full2();
  const auto cs = constant_system(ts, Mat(1.4 * rotation(0.8)), "conf");
  for (const auto& p : enumerate_periodic_orbits(ts, 6)) {
    const auto [lp, lm] = periodic_exponents(cs, p);
    CHECK(lp == doctest::Approx(lm).epsilon(1e-10));
  }
}

TEST_CASE("per-orbit exponents are invariant under system conjugation") {
  const auto ts = full2();
  SplitMix rng(301);
  const CocycleSystem cs(
      std::make_shared<LocalMap>(random_near_identity(ts, 2, 1, 0.2, rng)),
      Metric(0.5, 1.0), "S");
  SplitMix rng2(302);
  const LocalMap c = random_near_identity(ts, 2, 1, 0.2, rng2);
  const CocycleSystem moved = conjugate_system(cs, c);
  for (const auto& p : enumerate_periodic_orbits(ts, 5)) {
    const auto [lp, lm] = periodic_exponents(cs, p);
    const auto [lp2, lm2] = periodic_exponents(moved, p);
    CHECK(lp2 == doctest::Approx(lp).epsilon(1e-9));
    CHECK(lm2 == doctest::Approx(lm).epsilon(1e-9));
  }
}

TEST_CASE("eigen moduli of a return product and its inverse are reciprocal") {
  const auto ts = full2();
  SplitMix rng(303);
  const CocycleSystem cs(
      std::make_shared<LocalMap>(random_near_identity(ts, 2, 1, 0.3, rng)),
      Metric(0.5, 1.0), "S");
  for (const auto& p : enumerate_periodic_orbits(ts, 5)) {
    const Mat ret = product_along_cyclic_word(cs, p);
    const auto fwd = eigen_moduli(ret);
    const auto bwd = eigen_moduli(inverse(ret));
    const std::size_t d = fwd.size();
    for (std::size_t i = 0; i < d; ++i)
      CHECK(fwd[i] * bwd[d - 1 - i] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("bunching quantity equals the spectral identity on every orbit") {
  const auto ts = full2();
  SplitMix rng(307);
  const CocycleSystem cs(
      std::make_shared<LocalMap>(random_near_identity(ts, 2, 1, 0.25, rng)),
      Metric(0.5, 1.0), "S");
  for (const auto& p : enumerate_periodic_orbits(ts, 6)) {
    const auto [lp, lm] = periodic_exponents(cs, p);
    const double q = periodic_bunching_value(cs, p);
    CHECK(q == doctest::Approx(lp - lm + std::log(0.5)).epsilon(1e-12));
  }
}

TEST_CASE("parry sampler: frequencies, support, golden-mean stationary law") {
  // full shift: iid fair coin
  auto full = full2();
  MarkovSampler s1 = MarkovSampler::parry(full, 99);
  const Word w = s1.sample_word(20000);
  long ones = 0;
  for (char ch : w) ones += (ch == '1');
  const double freq = static_cast<double>(ones) / static_cast<double>(w.size());
  CHECK(std::abs(freq - 0.5) < 3.0 * 0.5 / std::sqrt(20000.0));

  // golden mean: stationary law from the Perron data of Q
  auto gm = golden_mean();
  MarkovSampler s2 = MarkovSampler::parry(gm, 100);
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  // right Perron vector (phi, 1), left (phi, 1); pi_1 = 1/(1 + phi^2)
  CHECK(s2.stationary()[1] == doctest::Approx(1.0 / (1.0 + phi * phi)).epsilon(1e-9));
  CHECK(s2.stationary()[0] == doctest::Approx(phi * phi / (1.0 + phi * phi)).epsilon(1e-9));

  // a disallowed transition never appears
  const Word w2 = s2.sample_word(100000);
  CHECK(w2.find("11") == Word::npos);

  // weights must match the support of Q
  CHECK_THROWS_AS(MarkovSampler(gm, {{1.0, 1.0}, {1.0, 1.0}}, 1), Error);
}

TEST_CASE("measure exponents: deterministic and conformal sanity") {
  const auto ts = full2();
  const auto cs = constant_system(ts, diag2(2.0, 1.0), "d21");
  MarkovSampler s = MarkovSampler::parry(ts, 5);
  const MeasureEstimate est = measure_exponents(cs, s, 400, 6);
  CHECK(std::abs(est.lambda_plus - std::log(2.0)) <=
        3.0 * est.std_error_plus + 1e-9);
  CHECK(std::abs(est.lambda_minus) <= 3.0 * est.std_error_minus + 1e-9);

  const auto conf = constant_system(ts, Mat(1.2 * rotation(0.3)), "conf");
  MarkovSampler s2 = MarkovSampler::parry(ts, 6);
  const MeasureEstimate e2 = measure_exponents(conf, s2, 400, 4);
  CHECK(std::abs(e2.lambda_plus - e2.lambda_minus) < 1e-9);
}

TEST_CASE("measure exponents are stable under doubling the path length") {
  const auto ts = full2();
  SplitMix rng(311);
  // SL(2)-style generator: random near-identity normalized to det 1
  std::map<Word, Mat> t;
  for (const auto& w : admissible_words(ts, 3)) {
    Mat m = Mat::Identity(2, 2);
    m(0, 0) += 0.3 * rng.symmetric();
    m(0, 1) += 0.3 * rng.symmetric();
    m(1, 0) += 0.3 * rng.symmetric();
    m(1, 1) += 0.3 * rng.symmetric();
    t[w] = m / std::sqrt(std::abs(m.determinant()));
  }
  const CocycleSystem cs(
      std::make_shared<LocalMap>(LocalMap(ts, 2, 1, std::move(t))),
      Metric(0.5, 1.0), "sl2");
  MarkovSampler s1 = MarkovSampler::parry(ts, 7);
  MarkovSampler s2 = MarkovSampler::parry(ts, 8);
  const MeasureEstimate a = measure_exponents(cs, s1, 1500, 12);
  const MeasureEstimate b = measure_exponents(cs, s2, 3000, 12);
  CHECK(std::abs(a.lambda_plus - b.lambda_plus) <=
        2.0 * (a.std_error_plus + b.std_error_plus) + 5e-3);
}

TEST_CASE("QR route matches the norm route for d = 3 diagonal data") {
  const auto ts = full2();
  Mat d3 = Mat::Zero(3, 3);
  d3(0, 0) = 2.0;
  d3(1, 1) = 1.0;
  d3(2, 2) = 0.25;
  const auto cs = constant_system(ts, d3, "d3");
  MarkovSampler s = MarkovSampler::parry(ts, 9);
  const MeasureEstimate est = measure_exponents(cs, s, 300, 4);
  CHECK(est.lambda_plus == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(est.lambda_minus == doctest::Approx(std::log(0.25)).epsilon(1e-10));
}

TEST_CASE("approximation gap: zero for constants, nonincreasing in period") {
  const auto ts = full2();
  const auto cs = constant_system(ts, diag2(2.0, 0.5), "d2");
  MarkovSampler s = MarkovSampler::parry(ts, 10);
  const ApproximationGapReport rep = approximation_gap(cs, 5, s, 300, 4);
  CHECK(rep.gaps.front().gap < 1e-12);
  for (std::size_t i = 1; i < rep.gaps.size(); ++i)
    CHECK(rep.gaps[i].gap <= rep.gaps[i - 1].gap + 1e-15);

  SplitMix rng(313);
  const CocycleSystem rnd(
      std::make_shared<LocalMap>(random_near_identity(ts, 2, 1, 0.2, rng)),
      Metric(0.5, 1.0), "R");
  MarkovSampler s2 = MarkovSampler::parry(ts, 11);
  const ApproximationGapReport r2 = approximation_gap(rnd, 6, s2, 800, 8);
  for (std::size_t i = 1; i < r2.gaps.size(); ++i)
    CHECK(r2.gaps[i].gap <= r2.gaps[i - 1].gap + 1e-15);
}
