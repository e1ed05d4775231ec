#include <doctest.h>

#include <cmath>
#include <random>

#include "cocylab/cocycle.hpp"

using namespace cocylab;

namespace {

TransitionStructure full2() { return TransitionStructure::full_shift(2); }

LocalMap seeded_generator(const TransitionStructure& ts, int d, int m,
                          double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  std::map<Word, Mat> t;
  for (const auto& w : admissible_words(ts, 2 * m + 1)) {
    Mat mat = Mat::Identity(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) mat(i, j) += u(rng);
    t[w] = mat;
  }
  return LocalMap(ts, d, m, std::move(t));
}

CocycleSystem seeded_system(const TransitionStructure& ts, std::uint64_t seed,
                            double spread = 0.1, int m = 1) {
  return CocycleSystem(
      std::make_shared<LocalMap>(seeded_generator(ts, 2, m, spread, seed)),
      Metric(0.5, 1.0), "S" + std::to_string(seed));
}

}  // namespace

TEST_CASE("evaluate: identity at zero, powers for constant generators") {
  const auto ts = full2();
  Mat a(2, 2);
  a << 1.0, 0.5, 0.0, 2.0;
  const CocycleSystem cs(std::make_shared<LocalMap>(LocalMap::constant(ts, a)),
                         Metric(0.5, 1.0), "const");
  const SftPoint x(ts, "0", "1", "0", 0);
  CHECK(opnorm(evaluate(cs, x, 0) - Mat::Identity(2, 2)) == 0.0);
  Mat p = Mat::Identity(2, 2);
  for (int n = 1; n <= 6; ++n) {
    p = a * p;
    CHECK(opnorm(evaluate(cs, x, n) - p) < 1e-12);
  }
}

TEST_CASE("evaluate honors the inversion identity") {
  const auto ts = full2();
  const auto cs = seeded_system(ts, 41);
  const SftPoint x(ts, "0", "1101", "0", -2);
  for (long n = 1; n <= 8; ++n) {
    const Mat lhs = evaluate(cs, x, -n) * evaluate(cs, x.shifted(-n), n);
    CHECK(opnorm(lhs - Mat::Identity(2, 2)) < 1e-12);
  }
}

TEST_CASE("cocycle identity across sampled points and exponents") {
  const auto ts = full2();
  const auto cs = seeded_system(ts, 42);
  const std::vector<SftPoint> pts = {
      SftPoint(ts, "0", "1", "0", 0), SftPoint(ts, "01", "11", "10", -1),
      SftPoint::periodic(ts, "011")};
  for (const auto& x : pts)
    for (long n = -20; n <= 20; n += 5)
      for (long k = -20; k <= 20; k += 7) {
        const Mat whole = evaluate(cs, x, n + k);
        const Mat split = evaluate(cs, x.shifted(k), n) * evaluate(cs, x, k);
        CHECK(opnorm(whole - split) / std::max(1.0, opnorm(whole)) < 1e-12);
      }
}

TEST_CASE("future-only tables are insensitive to the past") {
  const auto ts = full2();
  // table keyed on positions [0, m] of the window only
  std::map<Word, Mat> t;
  for (const auto& w : admissible_words(ts, 3)) {
    const Word fut = w.substr(1);  // x_0 x_1
    Mat m = Mat::Identity(2, 2);
    m(0, 0) = 1.0 + 0.1 * (fut[0] - '0');
    m(0, 1) = 0.2 * (fut[1] - '0');
    t[w] = m;
  }
  const CocycleSystem cs(
      std::make_shared<LocalMap>(LocalMap(ts, 2, 1, std::move(t))),
      Metric(0.5, 1.0), "future");
  const SftPoint x(ts, "0", "1", "0", 0);
  const SftPoint y(ts, "10", "11", "0", -1);  // same future from 0 on
  REQUIRE(stable_agreement(x, y).has_value());
  CHECK(*stable_agreement(x, y) == 0);
  for (long n = 0; n <= 10; ++n)
    CHECK(opnorm(evaluate(cs, x, n) - evaluate(cs, y, n)) == 0.0);
}

TEST_CASE("return products and rotation invariance of their spectra") {
  const auto ts = full2();
  const auto cs = seeded_system(ts, 7, 0.3, 0);
  // window 0: the period-2 product is table[b] * table[a]
  const PeriodicOrbit p("01");
  const Mat ret = product_along_cyclic_word(cs, p);
  const Mat expect = cs.gen->at_word("1") * cs.gen->at_word("0");
  CHECK(opnorm(ret - expect) < 1e-14);

  // fixed point: the single table value
  const PeriodicOrbit f("0");
  CHECK(opnorm(product_along_cyclic_word(cs, f) - cs.gen->at_word("0")) == 0.0);

  // eigen moduli do not depend on the starting rotation
  const auto cs1 = seeded_system(ts, 99, 0.2, 1);
  const PeriodicOrbit q("0011");
  const auto base = eigen_moduli(product_along_cyclic_word(cs1, q));
  const SftPoint qp = q.point(ts);
  for (long r = 1; r < 4; ++r) {
    const Mat rot = evaluate(cs1, qp.shifted(r), 4);
    const auto rotated = eigen_moduli(rot);
    for (std::size_t i = 0; i < base.size(); ++i)
      CHECK(rotated[i] == doctest::Approx(base[i]).epsilon(1e-10));
  }
}

TEST_CASE("conjugation by the identity and by constants") {
  const auto ts = full2();
  const auto cs = seeded_system(ts, 11);
  const CocycleSystem same = conjugate_system(cs, Mat(Mat::Identity(2, 2)));

  // pointwise equality of the generators after identity conjugation
  const SftPoint x(ts, "0", "110", "0", -1);
  for (long i = -4; i <= 4; ++i)
    CHECK(opnorm(same.gen->at_point(x, i) - cs.gen->at_point(x, i)) < 1e-15);

  // constant conjugation of a constant cocycle
  Mat a(2, 2), c(2, 2);
  a << 2, 1, 0, 0.5;
  c << 1, 0.3, -0.2, 1.1;
  const CocycleSystem ca(std::make_shared<LocalMap>(LocalMap::constant(ts, a)),
                         Metric(0.5, 1.0), "a");
  const CocycleSystem cc = conjugate_system(ca, c);
  const Mat want = c * a * inverse(c);
  CHECK(opnorm(cc.gen->at_point(x, 0) - want) < 1e-13);
}

TEST_CASE("conjugation round trip restores the generator") {
  const auto ts = full2();
  const auto cs = seeded_system(ts, 23);
  const LocalMap c = seeded_generator(ts, 2, 1, 0.15, 77);
  const LocalMap cinv = c.inverse_map();
  const CocycleSystem once = conjugate_system(cs, c);
  const CocycleSystem back = conjugate_system(once, cinv);
  const SftPoint x(ts, "0", "1011", "0", -2);
  for (long i = -5; i <= 5; ++i)
    CHECK(opnorm(back.gen->at_point(x, i) - cs.gen->at_point(x, i)) < 1e-12);
}

TEST_CASE("holder constant certifies the generator increments") {
  const auto ts = full2();
  // constant generator: zero constant
  const CocycleSystem cc(
      std::make_shared<LocalMap>(LocalMap::constant(ts, Mat(Mat::Identity(2, 2)))),
      Metric(0.5, 1.0), "id");
  CHECK(holder_constant(cc) == 0.0);

  // window 0, entries I and 2I: matdist = 1.5, alpha^0 = 1
  std::map<Word, Mat> t{{"0", Mat(Mat::Identity(2, 2))},
                        {"1", Mat(2.0 * Mat::Identity(2, 2))}};
  const CocycleSystem cs(
      std::make_shared<LocalMap>(LocalMap(ts, 2, 0, std::move(t))),
      Metric(0.5, 1.0), "two");
  CHECK(holder_constant(cs) == doctest::Approx(1.5).epsilon(1e-14));

  // certified inequality on sampled pairs
  const auto sys = seeded_system(ts, 5);
  const double c_a = holder_constant(sys);
  const auto pts = std::vector<SftPoint>{
      SftPoint(ts, "0", "1", "0", 0), SftPoint(ts, "0", "11", "0", -1),
      SftPoint(ts, "01", "1", "10", 0), SftPoint::periodic(ts, "01"),
      SftPoint::periodic(ts, "0011")};
  for (const auto& x : pts)
    for (const auto& y : pts) {
      if (x == y) continue;
      const double lhs = matdist(sys.gen->at_point(x), sys.gen->at_point(y));
      const double rhs =
          c_a * std::pow(d_alpha(x, y, sys.metric), sys.metric.beta);
      CHECK(lhs <= rhs + 1e-12);
    }
}

TEST_CASE("power systems compose the generator") {
  const auto ts = full2();
  const auto cs = seeded_system(ts, 31);
  const CocycleSystem p2 = power_system(cs, 2);
  CHECK(p2.step == 2);
  const SftPoint x(ts, "0", "1101", "0", -1);
  for (long n = 0; n <= 4; ++n)
    CHECK(opnorm(evaluate(p2, x, n) - evaluate(cs, x, 2 * n)) < 1e-12);
  const CocycleSystem p3 = power_system(cs, 3);
  CHECK(opnorm(evaluate(p3, x, 2) - evaluate(cs, x, 6)) < 1e-12);
}

TEST_CASE("scaled evaluation tracks long products without overflow") {
  const auto ts = full2();
  Mat a(2, 2);
  a << 40.0, 0, 0, 1.0 / 40.0;
  const CocycleSystem cs(std::make_shared<LocalMap>(LocalMap::constant(ts, a)),
                         Metric(0.5, 1.0), "steep");
  const SftPoint x = SftPoint::fixed(ts, 0);
  const ScaledMat p = evaluate_scaled(cs, x, 300);
  CHECK(std::isfinite(p.log_opnorm()));
  CHECK(p.log_opnorm() == doctest::Approx(300.0 * std::log(40.0)).epsilon(1e-10));
}
