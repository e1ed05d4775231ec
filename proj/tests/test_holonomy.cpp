#include <doctest.h>

#include <cmath>
#include <random>

#include "cocylab/holonomy.hpp"

using namespace cocylab;

namespace {

TransitionStructure full2() { return TransitionStructure::full_shift(2); }

CocycleSystem seeded_near_identity(const TransitionStructure& ts,
                                   std::uint64_t seed, double spread, int m = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  std::map<Word, Mat> t;
  for (const auto& w : admissible_words(ts, 2 * m + 1)) {
    Mat mat = Mat::Identity(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) mat(i, j) += u(rng);
    t[w] = mat;
  }
  return CocycleSystem(std::make_shared<LocalMap>(LocalMap(ts, 2, m, std::move(t))),
                       Metric(0.5, 1.0), "N" + std::to_string(seed));
}

// the defining limit evaluated naively at a fixed large depth
Mat stable_oracle(const CocycleSystem& cs, const SftPoint& x, const SftPoint& y,
                  long depth) {
  return inverse(evaluate(cs, y, depth)) * evaluate(cs, x, depth);
}

Mat unstable_oracle(const CocycleSystem& cs, const SftPoint& x,
                    const SftPoint& y, long depth) {
  const SftPoint xb = x.shifted(-depth * cs.step);
  const SftPoint yb = y.shifted(-depth * cs.step);
  return evaluate(cs, yb, depth) * inverse(evaluate(cs, xb, depth));
}

}  // namespace

TEST_CASE("holonomy of a point with itself is the identity") {
  const auto ts = full2();
  const auto cs = seeded_near_identity(ts, 1, 0.2);
  const SftPoint x(ts, "0", "1", "0", 0);
  const auto hs = stable_holonomy(cs, x, x);
  CHECK(opnorm(hs.matrix - Mat::Identity(2, 2)) == 0.0);
  CHECK(hs.stabilization_depth <= 1);
  const auto hu = unstable_holonomy(cs, x, x);
  CHECK(opnorm(hu.matrix - Mat::Identity(2, 2)) == 0.0);
}

TEST_CASE("constant generators have identity holonomies everywhere") {
  const auto ts = full2();
  Mat a(2, 2);
  a << 1.2, 0.1, -0.3, 0.9;
  const CocycleSystem cs(std::make_shared<LocalMap>(LocalMap::constant(ts, a)),
                         Metric(0.5, 1.0), "const");
  const SftPoint x(ts, "0", "1", "0", 0);
  const SftPoint y(ts, "0", "1011", "0", 0);  // same future tail eventually
  REQUIRE(stable_agreement(x, y).has_value());
  CHECK(opnorm(stable_holonomy(cs, x, y).matrix - Mat::Identity(2, 2)) < 1e-13);
  CHECK(opnorm(unstable_holonomy(cs, x, y).matrix - Mat::Identity(2, 2)) < 1e-13);
}

TEST_CASE("future-only tables make stable holonomies exactly trivial") {
  const auto ts = full2();
  std::map<Word, Mat> t;
  for (const auto& w : admissible_words(ts, 3)) {
    Mat m = Mat::Identity(2, 2);
    m(0, 0) += 0.2 * (w[1] - '0');
    m(1, 0) += 0.1 * (w[2] - '0');
    t[w] = m;
  }
  const CocycleSystem cs(
      std::make_shared<LocalMap>(LocalMap(ts, 2, 1, std::move(t))),
      Metric(0.5, 1.0), "future");
  const SftPoint x(ts, "0", "1", "0", 0);
  const SftPoint y(ts, "10", "01", "0", -1);
  REQUIRE(stable_agreement(x, y) == 0);
  CHECK(opnorm(stable_holonomy(cs, x, y).matrix - Mat::Identity(2, 2)) == 0.0);
}

TEST_CASE("partial products freeze at the stabilization depth") {
  const auto ts = full2();
  const auto cs = seeded_near_identity(ts, 17, 0.15);
  const SftPoint x(ts, "0", "1", "0", 0);
  const std::vector<SftPoint> mates = {
      SftPoint(ts, "0", "11", "0", -1), SftPoint(ts, "0", "1011", "0", -3),
      SftPoint(ts, "01", "01", "0", -2)};
  for (const auto& y : mates) {
    REQUIRE(stable_agreement(x, y).has_value());
    const auto h = stable_holonomy(cs, x, y);
    for (long extra = 0; extra <= 50; extra += 10) {
      const Mat probe = stable_oracle(cs, x, y, h.stabilization_depth + extra);
      CHECK(opnorm(h.matrix - probe) / opnorm(h.matrix) < 1e-13);
    }
  }
  // unstable mirror
  const SftPoint xm(ts, "0", "1", "0", 0);
  const SftPoint ym(ts, "0", "101", "0", 0);  // same past up to index 0
  REQUIRE(unstable_agreement(xm, ym).has_value());
  const auto hu = unstable_holonomy(cs, xm, ym);
  for (long extra = 0; extra <= 50; extra += 25) {
    const Mat probe = unstable_oracle(cs, xm, ym, hu.stabilization_depth + extra);
    CHECK(opnorm(hu.matrix - probe) / opnorm(hu.matrix) < 1e-13);
  }
}

TEST_CASE("holonomy axioms on seeded homoclinic pairs") {
  const auto ts = full2();
  const auto cs = seeded_near_identity(ts, 23, 0.12);
  const BunchingCertificate cert = certify_direct(cs);
  REQUIRE(cert.verdict == BunchVerdict::Bunched);

  // homoclinic points are pairwise related both ways; shifted copies give
  // local (R = 0) pairs for the Hoelder ratio
  const auto pts = homoclinic_points(ts, 0, 5);
  std::vector<std::pair<SftPoint, SftPoint>> stable, unstable;
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
    stable.push_back({pts[i].shifted(6), pts[i + 1].shifted(6)});
    unstable.push_back({pts[i].shifted(-6), pts[i + 1].shifted(-6)});
  }
  const auto rep = verify_holonomy_axioms(cs, stable, unstable, cert, 10);
  CHECK(rep.pairs_checked > 10);
  CHECK(rep.max_composition_residual < 1e-11);
  CHECK(rep.max_equivariance_residual < 1e-11);
  CHECK(rep.max_inverse_residual < 1e-12);
  CHECK(rep.max_holder_ratio <= rep.certified_constant);
}

TEST_CASE("holonomies coincide with those of power systems") {
  const auto ts = full2();
  const auto cs = seeded_near_identity(ts, 29, 0.1);
  const SftPoint x(ts, "0", "1", "0", 0);
  const SftPoint y(ts, "0", "1101", "0", -2);
  REQUIRE(stable_agreement(x, y).has_value());
  const Mat h1 = stable_holonomy(cs, x, y).matrix;
  for (int n = 2; n <= 3; ++n) {
    const CocycleSystem pn = power_system(cs, n);
    const Mat hn = stable_holonomy(pn, x, y).matrix;
    CHECK(opnorm(h1 - hn) < 1e-12);
    const Mat hu1 = unstable_holonomy(cs, y, x).matrix;
    const Mat hun = unstable_holonomy(pn, y, x).matrix;
    CHECK(opnorm(hu1 - hun) < 1e-12);
  }
}

TEST_CASE("inverse symmetry and composition across a stable family") {
  const auto ts = full2();
  const auto cs = seeded_near_identity(ts, 31, 0.18);
  const auto pts = homoclinic_points(ts, 0, 4);
  for (std::size_t i = 0; i + 2 < pts.size(); i += 5) {
    const auto& x = pts[i];
    const auto& y = pts[i + 1];
    const auto& z = pts[i + 2];
    const Mat hxy = stable_holonomy(cs, x, y).matrix;
    const Mat hyx = stable_holonomy(cs, y, x).matrix;
    CHECK(opnorm(inverse(hxy) - hyx) < 1e-12);
    const Mat hyz = stable_holonomy(cs, y, z).matrix;
    const Mat hxz = stable_holonomy(cs, x, z).matrix;
    CHECK(opnorm(hyz * hxy - hxz) < 1e-11);
  }
}

TEST_CASE("unrelated points are rejected") {
  const auto ts = full2();
  const auto cs = seeded_near_identity(ts, 37, 0.1);
  const SftPoint x = SftPoint::fixed(ts, 0);
  const SftPoint p = SftPoint::periodic(ts, "01");
  CHECK_THROWS_AS(stable_holonomy(cs, x, p), Error);
  CHECK_THROWS_AS(unstable_holonomy(cs, x, p), Error);
}
