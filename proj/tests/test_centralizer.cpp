#include <doctest.h>

#include "cocylab/centralizer.hpp"
#include "cocylab/scenario.hpp"

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

}  // namespace

TEST_CASE("commutant tower of diag(2,-2): odd 2, even 4, L* = 2") {
  const auto ts = full2();
  const auto cs = constant_system(ts, diag2(2.0, -2.0), "flip");
  const CommutantReport rep = commutant_tower(cs, PeriodicOrbit("0"), 12);
  for (const auto& [k, dim] : rep.dims) CHECK(dim == (k % 2 ? 2 : 4));
  CHECK(rep.l_star == 2);
  CHECK(rep.tower_verified);
  CHECK(rep.containment_ok);
}

TEST_CASE("distinct moduli keep the commutant diagonal at every power") {
  const auto ts = full2();
  const auto cs = constant_system(ts, diag2(2.0, 3.0), "dm");
  const CommutantReport rep = commutant_tower(cs, PeriodicOrbit("0"), 10);
  for (const auto& [k, dim] : rep.dims) CHECK(dim == 2);
  CHECK(rep.l_star == 1);
  CHECK(rep.tower_verified);
}

TEST_CASE("identity return product commutes with everything") {
  const auto ts = full2();
  const auto cs = constant_system(ts, Mat(Mat::Identity(2, 2)), "id");
  const CommutantReport rep = commutant_tower(cs, PeriodicOrbit("0"), 6);
  for (const auto& [k, dim] : rep.dims) CHECK(dim == 4);
  CHECK(rep.l_star == 1);
}

TEST_CASE("tower dimensions are similarity invariant") {
  const auto ts = full2();
  Mat s(2, 2);
  s << 1.0, 0.4, -0.2, 1.3;
  const Mat m = diag2(2.0, -2.0);
  const auto base = commutant_tower(constant_system(ts, m, "m"),
                                    PeriodicOrbit("0"), 8);
  const auto conj = commutant_tower(
      constant_system(ts, Mat(s * m * inverse(s)), "sms"), PeriodicOrbit("0"), 8);
  REQUIRE(base.dims.size() == conj.dims.size());
  for (std::size_t i = 0; i < base.dims.size(); ++i)
    CHECK(base.dims[i].second == conj.dims[i].second);
}

namespace {

struct Pair {
  TransitionStructure ts = TransitionStructure::full_shift(2);
  CocycleSystem b;
  CocycleSystem a;
  LocalMap c_true;
  SftPoint p0;
  BunchingCertificate ca, cb;

  explicit Pair(std::uint64_t seed)
      : b(CocycleSystem(nullptr, Metric(0.5, 1.0), "B")),
        a(b),
        c_true(LocalMap::constant(ts, Mat(Mat::Identity(2, 2)))),
        p0(SftPoint::fixed(ts, 0)) {
    SplitMix rng(seed);
    b = CocycleSystem(
        std::make_shared<LocalMap>(random_near_identity(ts, 2, 1, 0.05, rng)),
        Metric(0.5, 1.0), "B");
    SplitMix rng2(seed ^ 0xC0);
    c_true = random_near_identity(ts, 2, 1, 0.06, rng2);
    a = conjugate_system(b, c_true, "A");
    ca = certify_direct(a);
    cb = certify_direct(b);
  }

  ConjugacyField build(int window) const {
    BuildOptions opts;
    opts.cert_a = &ca;
    opts.cert_b = &cb;
    return build_conjugacy(a, b, p0, c_true.at_point(p0), window, opts);
  }
};

}  // namespace

TEST_CASE("centralizer membership: identity and scalars are members") {
  const Pair g(211);
  BuildOptions opts;
  opts.cert_a = &g.ca;
  opts.cert_b = &g.ca;
  const ConjugacyField idf =
      build_conjugacy(g.a, g.a, g.p0, Mat(Mat::Identity(2, 2)), 5, opts);
  const auto samples = homoclinic_points(g.ts, 0, 4);
  CHECK(centralizer_membership(g.a, idf, samples, 6, 14).member);
  CHECK(centralizer_membership(g.a, idf.scaled(2.0), samples, 6, 14).member);
}

TEST_CASE("a field from a PCF-violating c_p is not a member") {
  const Pair g(223);
  Mat wrong = Mat::Identity(2, 2);
  wrong(0, 1) = 0.05;
  BuildOptions force;
  force.force = true;
  const ConjugacyField bad = build_conjugacy(g.a, g.a, g.p0, wrong, 5, force);
  const auto samples = homoclinic_points(g.ts, 0, 4);
  const MembershipVerdict v = centralizer_membership(g.a, bad, samples, 6, 14);
  CHECK_FALSE(v.member);
  CHECK(v.max_residual > 1e-4);
}

TEST_CASE("coset routes agree for valid and invalid second conjugacies") {
  const Pair g(227);
  const ConjugacyField c1 = g.build(6);
  const auto samples = homoclinic_points(g.ts, 0, 4);

  // C2 = C1: quotient is the identity
  const CosetVerdict same = coset_test(g.a, g.b, c1, c1, samples, 6, 14);
  CHECK(same.quotient_membership.member);
  CHECK(same.direct_c2_valid);
  CHECK(same.routes_agree);

  // C2 = 2 C1: the quotient is the central scalar 1/2
  const CosetVerdict scaled =
      coset_test(g.a, g.b, c1, c1.scaled(2.0), samples, 6, 14);
  CHECK(scaled.quotient_membership.member);
  CHECK(scaled.direct_c2_valid);
  CHECK(scaled.routes_agree);

  // C2 from a non-scalar commutant shift of c_p: both routes must reject
  // together (a generic commutant element does not fix the PCFs)
  const Mat ap = evaluate(g.a, g.p0, 1);
  const Subspace com = solve_commutant(ap, ap);
  Mat z = Mat::Identity(2, 2);
  for (int i = 0; i < com.rank(); ++i) {
    const Mat cand = vec_to_mat(com.basis.col(i), 2);
    if (opnorm(cand - cand(0, 0) * Mat::Identity(2, 2)) > 1e-6) {
      z = Mat::Identity(2, 2) + 0.3 * cand;
      break;
    }
  }
  BuildOptions force;
  force.force = true;
  const ConjugacyField c2 = build_conjugacy(
      g.a, g.b, g.p0, Mat(g.c_true.at_point(g.p0) * z), 6, force);
  const CosetVerdict shifted = coset_test(g.a, g.b, c1, c2, samples, 6, 14);
  CHECK(shifted.routes_agree);
}
