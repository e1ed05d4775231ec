#include <doctest.h>

#include <cmath>
#include <random>

#include "cocylab/bunching.hpp"

using namespace cocylab;

namespace {

TransitionStructure full2() { return TransitionStructure::full_shift(2); }

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

CocycleSystem seeded_near_identity(const TransitionStructure& ts,
                                   std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  std::map<Word, Mat> t;
  for (const auto& w : admissible_words(ts, 3)) {
    Mat m = Mat::Identity(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) += u(rng);
    t[w] = m;
  }
  return CocycleSystem(std::make_shared<LocalMap>(LocalMap(ts, 2, 1, std::move(t))),
                       Metric(0.5, 1.0), "N" + std::to_string(seed));
}

}  // namespace

TEST_CASE("distortion of conformal and diagonal systems") {
  const auto ts = full2();
  const auto conf = constant_system(ts, Mat(1.7 * rotation(0.9)), "conf");
  const SftPoint x(ts, "0", "1", "0", 0);
  for (long n = 0; n <= 12; n += 3)
    CHECK(distortion(conf, x, n) == doctest::Approx(1.0).epsilon(1e-12));

  const auto diag = constant_system(ts, diag2(2.0, 1.0), "diag");
  CHECK(distortion(diag, x, 5) == doctest::Approx(32.0).epsilon(1e-12));
  CHECK(distortion(diag, x, 0) == 1.0);
}

TEST_CASE("distortion is submultiplicative along orbit splits") {
  const auto ts = full2();
  const auto cs = seeded_near_identity(ts, 3, 0.3);
  const SftPoint x(ts, "0", "110100", "0", -3);
  for (long n = 1; n <= 6; ++n)
    for (long k = 1; k <= 6; ++k)
      CHECK(distortion(cs, x, n + k) <=
            distortion(cs, x.shifted(k), n) * distortion(cs, x, k) + 1e-10);
}

TEST_CASE("subadditive values: conformal, diagonal, subadditivity") {
  const auto ts = full2();
  const auto conf = constant_system(ts, Mat(1.3 * rotation(0.4)), "conf");
  // any context word of the right length
  const Word w3(3 + 0, '0');
  CHECK(subadditive_value(conf, "000", 3) ==
        doctest::Approx(3.0 * std::log(0.5)).epsilon(1e-12));

  const auto bad = constant_system(ts, diag2(2.0, 0.5), "bad");
  CHECK(subadditive_value(bad, "000", 3) ==
        doctest::Approx(3.0 * std::log(4.0) + 3.0 * std::log(0.5)).epsilon(1e-12));

  // wrong context length
  CHECK_THROWS_AS(subadditive_value(bad, "0000", 3), Error);

  const auto cs = seeded_near_identity(ts, 9, 0.25);
  // a_{n+k}(w) <= a_k(prefix) + a_n(suffix shifted by k)
  const Word w = "011010011";  // length 9 = (7-1) + 2*1 + 1
  const long n = 4, k = 3;
  const double whole = subadditive_value(cs, w, n + k);
  const double first = subadditive_value(cs, w.substr(0, k + 2), k);
  const double second = subadditive_value(cs, w.substr(k), n);
  CHECK(whole <= first + second + 1e-12);
}

TEST_CASE("certify_direct reproduces the hand-computed constants") {
  const auto ts = full2();
  // diag(1.1, 1/1.1): log(1.21) + log(0.5) < 0 at N = 1
  const auto ok = constant_system(ts, diag2(1.1, 1.0 / 1.1), "ok");
  const BunchingCertificate c1 = certify_direct(ok);
  CHECK(c1.verdict == BunchVerdict::Bunched);
  CHECK(c1.n_witness == 1);
  CHECK(c1.theta == doctest::Approx(1.21 * 0.5).epsilon(1e-12));
  CHECK(c1.big_l == doctest::Approx(1.0).epsilon(1e-12));

  // diag(2, 1/2): the fixed point violates the periodic criterion
  const auto bad = constant_system(ts, diag2(2.0, 0.5), "bad");
  const BunchingCertificate c2 = certify_direct(bad);
  CHECK(c2.verdict == BunchVerdict::NotBunched);

  // identity generator: theta = alpha^beta, L = 1
  const auto id = constant_system(ts, Mat(Mat::Identity(2, 2)), "id");
  const BunchingCertificate c3 = certify_direct(id);
  CHECK(c3.verdict == BunchVerdict::Bunched);
  CHECK(c3.n_witness == 1);
  CHECK(c3.theta == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c3.big_l == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("certificate geometric bound dominates sampled distortions") {
  const auto ts = full2();
  const auto cs = seeded_near_identity(ts, 21, 0.2);
  const BunchingCertificate cert = certify_direct(cs);
  REQUIRE(cert.verdict == BunchVerdict::Bunched);
  const SftPoint x(ts, "0", "1101", "0", -2);
  for (long n = 0; n <= 14; ++n) {
    const double lhs = distortion(cs, x, n) *
                       std::pow(0.5, static_cast<double>(n));
    CHECK(lhs <= cert.geometric_bound(n) * (1.0 + 1e-12));
  }
}

TEST_CASE("certify_periodic hand values and verdicts") {
  const auto ts = full2();
  const auto orbits = enumerate_periodic_orbits(ts, 6);

  const auto conf = constant_system(ts, Mat(2.0 * rotation(1.0)), "conf");
  const auto res = certify_periodic(conf, orbits);
  CHECK(res.certificate.verdict == BunchVerdict::Bunched);
  for (const auto& row : res.rows)
    CHECK(row.q == doctest::Approx(std::log(0.5)).epsilon(1e-10));

  const auto bad = constant_system(ts, diag2(2.0, 0.5), "bad");
  const auto res2 = certify_periodic(bad, orbits);
  CHECK(res2.certificate.verdict == BunchVerdict::NotBunched);
  REQUIRE(res2.certificate.eta.has_value());
  CHECK(*res2.certificate.eta ==
        doctest::Approx(std::log(4.0) + std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("the two routes never contradict on seeded systems") {
  const auto ts = full2();
  const auto orbits = enumerate_periodic_orbits(ts, 6);
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto cs = seeded_near_identity(ts, seed, 0.15);
    const BunchingCertificate direct = certify_direct(cs);
    const auto periodic = certify_periodic(cs, orbits);
    const bool contradiction =
        (direct.verdict == BunchVerdict::Bunched &&
         periodic.certificate.verdict == BunchVerdict::NotBunched) ||
        (direct.verdict == BunchVerdict::NotBunched &&
         periodic.certificate.verdict == BunchVerdict::Bunched);
    CHECK_FALSE(contradiction);
    CHECK(direct.verdict == BunchVerdict::Bunched);
  }
}

TEST_CASE("periodic verdicts are invariant under system conjugation") {
  const auto ts = full2();
  const auto orbits = enumerate_periodic_orbits(ts, 5);
  const auto cs = seeded_near_identity(ts, 55, 0.2);
  std::mt19937_64 rng(56);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::map<Word, Mat> t;
  for (const auto& w : admissible_words(ts, 3)) {
    Mat m = Mat::Identity(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) += u(rng);
    t[w] = m;
  }
  const LocalMap c(ts, 2, 1, std::move(t));
  const CocycleSystem conj = conjugate_system(cs, c);
  const auto base = certify_periodic(cs, orbits);
  const auto moved = certify_periodic(conj, orbits);
  for (std::size_t i = 0; i < base.rows.size(); ++i)
    CHECK(moved.rows[i].q == doctest::Approx(base.rows[i].q).epsilon(1e-9));
}

TEST_CASE("threaded sweeps produce identical certificates") {
  const auto ts = full2();
  const auto cs = seeded_near_identity(ts, 61, 0.22);
  DirectSweepOptions serial;
  serial.threads = 1;
  DirectSweepOptions parallel;
  parallel.threads = 4;
  const BunchingCertificate a = certify_direct(cs, serial);
  const BunchingCertificate b = certify_direct(cs, parallel);
  CHECK(a.verdict == b.verdict);
  CHECK(a.n_witness == b.n_witness);
  CHECK(a.theta == b.theta);
  CHECK(a.big_l == b.big_l);
  CHECK(a.diagnostics == b.diagnostics);
}

TEST_CASE("periodic margins inside the guard band report UNDECIDED") {
  const auto ts = full2();
  // eigen ratio tuned so q(p) = -5e-10 sits in [-1e-9, 0)
  const double s = std::sqrt(2.0 * std::exp(-5e-10));
  const auto cs = constant_system(ts, diag2(s, 1.0 / s), "band");
  const auto res = certify_periodic(cs, enumerate_periodic_orbits(ts, 4));
  CHECK(res.certificate.verdict == BunchVerdict::Undecided);
  REQUIRE(res.certificate.eta.has_value());
  CHECK(*res.certificate.eta < 0.0);
  CHECK(*res.certificate.eta >= -1e-9);
}

TEST_CASE("combinatorial budget trips deliberately") {
  const auto ts = full2();
  const auto cs = seeded_near_identity(ts, 77, 0.2);
  DirectSweepOptions opt;
  opt.max_n = 30;
  opt.node_budget = 50;
  // near-identity certifies at N = 1 long before the budget matters
  CHECK(certify_direct(cs, opt).verdict == BunchVerdict::Bunched);
  // a never-certifying sweep runs deep and trips the budget before the
  // periodic fallback can report
  const auto edge = constant_system(ts, diag2(1.5, 1.0 / 1.5), "edge");
  opt.max_n = 24;
  opt.node_budget = 100;
  CHECK_THROWS_AS(certify_direct(edge, opt), Error);
}
