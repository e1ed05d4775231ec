#include <doctest.h>

#include <cmath>

#include "cocylab/scenario.hpp"
#include "cocylab/splitting.hpp"

using namespace cocylab;

namespace {

TransitionStructure full2() { return TransitionStructure::full_shift(2); }

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

CocycleSystem constant_system(const TransitionStructure& ts, const Mat& a,
                              const std::string& label) {
  return CocycleSystem(std::make_shared<LocalMap>(LocalMap::constant(ts, a)),
                       Metric(0.5, 1.0), label);
}

}  // namespace

TEST_CASE("cluster_constant: diagonal, conformal, companion") {
  const auto rep = cluster_constant(diag2(2.0, 0.5), 0.05);
  REQUIRE(rep.clusters.size() == 2);
  CHECK(rep.clusters[0].modulus == doctest::Approx(0.5));
  CHECK(rep.clusters[1].modulus == doctest::Approx(2.0));
  CHECK(subspace_equal(rep.clusters[0].space, Subspace::coordinate(2, {1})));
  CHECK(subspace_equal(rep.clusters[1].space, Subspace::coordinate(2, {0})));
  CHECK(rep.invariance_residual < 1e-12);
  CHECK(rep.min_gap == doctest::Approx(4.0).epsilon(1e-12));

  const auto one = cluster_constant(Mat(2.0 * rotation(1.0)), 0.05);
  CHECK(one.single_cluster);
  REQUIRE(one.clusters.size() == 1);
  CHECK(one.clusters[0].multiplicity == 2);

  // companion of t^2 - t - 1: eigenvector directions (phi, 1), (-1/phi, 1)
  Mat comp(2, 2);
  comp << 0, 1, 1, 1;
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const auto cp = cluster_constant(comp, 0.05);
  REQUIRE(cp.clusters.size() == 2);
  CHECK(cp.clusters[1].modulus == doctest::Approx(phi).epsilon(1e-12));
  Mat fast(2, 1);
  fast << 1.0, phi;
  fast.normalize();
  CHECK(subspace_angle(cp.clusters[1].space, Subspace(2, fast)) < 1e-10);
}

TEST_CASE("cluster_constant handles generalized eigenspaces") {
  // Jordan-type block with moduli {2, 2, 0.5}
  Mat m = Mat::Zero(3, 3);
  m(0, 0) = 2.0;
  m(0, 1) = 1.0;
  m(1, 1) = 2.0;
  m(2, 2) = 0.5;
  const auto rep = cluster_constant(m, 0.05);
  REQUIRE(rep.clusters.size() == 2);
  CHECK(rep.clusters[1].multiplicity == 2);
  CHECK(rep.clusters[1].space.rank() == 2);
  CHECK(subspace_equal(rep.clusters[1].space, Subspace::coordinate(3, {0, 1})));
}

TEST_CASE("splitting of the unperturbed constant is exact") {
  const auto ts = full2();
  const Mat a = diag2(2.0, 0.5);
  const auto ref = cluster_constant(a, 0.05);
  const auto b = constant_system(ts, a, "B");
  const SplittingReport rep = compute_splitting(b, a, ref, 3, 40);
  CHECK(rep.perturbation < 1e-14);
  CHECK(rep.invariance_residual < 1e-12);
  for (const auto& row : rep.samples)
    for (std::size_t i = 0; i < row.blocks.size(); ++i)
      CHECK(subspace_angle(row.blocks[i], ref.clusters[i].space) < 1e-12);
}

TEST_CASE("splitting tracks a conjugate construction exactly") {
  const auto ts = full2();
  const Mat a = diag2(2.0, 0.5);
  const auto ref = cluster_constant(a, 0.05);
  const auto a_sys = constant_system(ts, a, "A");
  SplitMix rng(401);
  const LocalMap h = random_near_identity(ts, 2, 1, 1e-3, rng);
  const CocycleSystem b = conjugate_system(a_sys, h, "B");

  const SplittingReport rep = compute_splitting(b, a, ref, 4, 60);
  CHECK(rep.perturbation < 0.05);
  CHECK(rep.invariance_residual < 1e-9);
  CHECK(rep.max_flag_delta < 1e-9);
  // ground truth: E_i^B(x) = h(x) E_i^A
  double worst = 0.0;
  for (const auto& row : rep.samples)
    for (std::size_t i = 0; i < row.blocks.size(); ++i) {
      const Subspace truth =
          Subspace::span(h.at_point(row.point) * ref.clusters[i].space.basis);
      worst = std::max(worst, subspace_angle(truth, row.blocks[i]));
    }
  CHECK(worst < 1e-8);
  // dimensions always fill the fiber
  for (const auto& row : rep.samples) {
    int total = 0;
    for (const auto& s : row.blocks) total += s.rank();
    CHECK(total == 2);
  }
}

TEST_CASE("splitting survives a generic small perturbation") {
  const auto ts = full2();
  const Mat a = diag2(2.0, 0.5);
  const auto ref = cluster_constant(a, 0.05);
  // generic (non-conjugate) perturbation of the table entries
  SplitMix rng(409);
  std::map<Word, Mat> t;
  for (const auto& w : admissible_words(ts, 3)) {
    Mat m = a;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) += 1e-3 * rng.symmetric();
    t[w] = m;
  }
  const CocycleSystem b(
      std::make_shared<LocalMap>(LocalMap(ts, 2, 1, std::move(t))),
      Metric(0.5, 1.0), "Bgen");
  const SplittingReport rep = compute_splitting(b, a, ref, 3, 80);
  CHECK(rep.invariance_residual < 1e-9);
  // the field stays O(perturbation) close to the constant splitting
  double worst = 0.0;
  for (const auto& row : rep.samples)
    for (std::size_t i = 0; i < row.blocks.size(); ++i)
      worst = std::max(worst,
                       subspace_angle(row.blocks[i], ref.clusters[i].space));
  CHECK(worst < 50.0 * 1e-3);
  CHECK(worst > 0.0);
}

TEST_CASE("restricted blocks: spectra, conformal 1x1, bunching inheritance") {
  const auto ts = full2();
  const Mat a = diag2(2.0, 0.5);
  const auto ref = cluster_constant(a, 0.05);
  const auto a_sys = constant_system(ts, a, "A");
  SplitMix rng(419);
  const LocalMap h = random_near_identity(ts, 2, 1, 1e-3, rng);
  const CocycleSystem b = conjugate_system(a_sys, h, "B");

  const auto orbits = enumerate_periodic_orbits(ts, 5);
  for (int i = 0; i < 2; ++i) {
    const FramedBlock blk = restrict_cocycle(b, a, ref, i, 2, 60);
    CHECK(blk.dim == 1);
    CHECK(blk.frame_residual < 1e-9);
    // block return spectra reproduce the matching cluster of the full product
    for (const auto& p : orbits) {
      const Mat full = product_along_cyclic_word(b, p);
      const Mat restr = product_along_cyclic_word(*blk.block_system, p);
      const auto full_mods = eigen_moduli(full);
      const double want = (i == 1) ? full_mods.front() : full_mods.back();
      CHECK(eigen_moduli(restr).front() ==
            doctest::Approx(want).epsilon(1e-9));
    }
    // 1x1 blocks are conformal; the periodic criterion certifies instantly
    const auto per = certify_periodic(*blk.block_system, orbits);
    CHECK(per.certificate.verdict == BunchVerdict::Bunched);
    REQUIRE(per.certificate.eta.has_value());
    CHECK(*per.certificate.eta ==
          doctest::Approx(std::log(0.5)).epsilon(1e-9));
  }
}

TEST_CASE("blockwise assembly passes ambient cohomology") {
  const auto ts = full2();
  const Mat a = diag2(2.0, 0.5);
  const auto ref = cluster_constant(a, 0.05);
  const auto a_sys = constant_system(ts, a, "A");
  SplitMix rng(421);
  const LocalMap h = random_near_identity(ts, 2, 1, 1e-3, rng);
  const CocycleSystem b = conjugate_system(a_sys, h, "B");
  const SftPoint p0 = SftPoint::fixed(ts, 0);

  std::vector<FramedBlock> blocks;
  std::vector<ConjugacyField> fields;
  for (int i = 0; i < 2; ++i) {
    FramedBlock blk = restrict_cocycle(b, a, ref, i, 2, 60);
    const CocycleSystem a_blk(
        std::make_shared<LocalMap>(LocalMap::constant(ts, blk.const_block)),
        Metric(0.5, 1.0), "Ablk");
    const TransferSolution sol = solve_transfer(
        evaluate(a_blk, p0, 1), evaluate(*blk.block_system, p0, 1));
    REQUIRE(sol.c_p.has_value());
    const BunchingCertificate ca = certify_direct(a_blk);
    const BunchingCertificate cb = certify_direct(*blk.block_system);
    BuildOptions opts;
    opts.cert_a = &ca;
    opts.cert_b = &cb;
    fields.push_back(
        build_conjugacy(a_blk, *blk.block_system, p0, *sol.c_p, 6, opts));
    blocks.push_back(std::move(blk));
  }
  const auto samples = homoclinic_points(ts, 0, 3);
  const AssemblyReport rep =
      assemble_blockwise(a_sys, b, blocks, fields, samples, 6, 12, 1e-7);
  CHECK(rep.pass);
  CHECK(rep.max_residual < 1e-7);

  // single-block sanity: one cluster reduces to a plain field build
  const Mat conf = 1.5 * rotation(0.5);
  const auto cref = cluster_constant(conf, 0.05);
  CHECK(cref.single_cluster);

  // a missing block is refused
  std::vector<FramedBlock> partial = {blocks[0]};
  std::vector<ConjugacyField> pf = {fields[0]};
  CHECK_THROWS_AS(
      assemble_blockwise(a_sys, b, partial, pf, samples, 4, 10, 1e-7), Error);
}

TEST_CASE("broken block data makes its field construction refuse") {
  const auto ts = full2();
  const Mat a = diag2(2.0, 0.5);
  const auto ref = cluster_constant(a, 0.05);
  const auto a_sys = constant_system(ts, a, "A");
  SplitMix rng(431);
  const LocalMap h = random_near_identity(ts, 2, 1, 1e-3, rng);
  CocycleSystem b = conjugate_system(a_sys, h, "B");
  // break one block's periodic data by scaling a single table entry; the
  // scaling leaks into the top-block return products
  auto table = b.gen->table();
  table["01010"] = 1.02 * table["01010"];
  b = CocycleSystem(
      std::make_shared<LocalMap>(LocalMap(ts, 2, 2, std::move(table))),
      Metric(0.5, 1.0), "Bbad");
  const SftPoint p0 = SftPoint::fixed(ts, 0);
  FramedBlock blk = restrict_cocycle(b, a, ref, 1, 2, 60);
  const CocycleSystem a_blk(
      std::make_shared<LocalMap>(LocalMap::constant(ts, blk.const_block)),
      Metric(0.5, 1.0), "Ablk");
  const MatchReport match =
      match_periodic_data(a_blk, *blk.block_system,
                          enumerate_periodic_orbits(ts, 5), MatchMode::Conjugate);
  CHECK_FALSE(match.pass);
}
