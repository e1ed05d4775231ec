#include "cocylab/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

namespace cocylab {

// ---------------------------------------------------------------------------
// clustering a constant matrix
// ---------------------------------------------------------------------------

ClusterReport cluster_constant(const Mat& a, double gap_tol) {
  const int d = static_cast<int>(a.rows());
  if (sigma_min(a) <= NumTol::sing_rel * std::max(opnorm(a), 1.0))
    fail(Errc::Singular, "cluster_constant: matrix singular");
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> eigs(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) eigs[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  std::sort(eigs.begin(), eigs.end(), [](const auto& x, const auto& y) {
    return std::abs(x) < std::abs(y);
  });

  // group adjacent moduli with relative gap <= gap_tol
  std::vector<std::vector<std::complex<double>>> groups;
  for (const auto& ev : eigs) {
    if (!groups.empty() &&
        std::abs(ev) / std::abs(groups.back().back()) <= 1.0 + gap_tol)
      groups.back().push_back(ev);
    else
      groups.push_back({ev});
  }

  ClusterReport rep;
  rep.single_cluster = groups.size() == 1;
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g + 1 < groups.size(); ++g)
    rep.min_gap = std::min(rep.min_gap, std::abs(groups[g + 1].front()) /
                                            std::abs(groups[g].back()));

  const Mat id = Mat::Identity(d, d);
  for (const auto& group : groups) {
    // real polynomial in A annihilating exactly this cluster's generalized
    // eigenvectors: linear factors for real eigenvalues, quadratic for each
    // positive-imaginary representative of a conjugate pair
    Mat poly = id;
    double mean_mod = 0.0;
    for (const auto& ev : group) {
      mean_mod += std::abs(ev);
      const double re = ev.real(), im = ev.imag();
      if (std::abs(im) <= 1e-9 * std::max(1.0, std::abs(ev))) {
        poly = poly * (a - re * id);
      } else if (im > 0) {
        poly = poly * (a * a - 2.0 * re * a + (re * re + im * im) * id);
      }
    }
    Cluster c;
    c.modulus = mean_mod / static_cast<double>(group.size());
    c.multiplicity = static_cast<int>(group.size());
    c.space = nullspace_of(poly);
    if (c.space.rank() != c.multiplicity)
      fail(Errc::RankAmbiguous,
           "cluster subspace rank " + std::to_string(c.space.rank()) +
               " != multiplicity " + std::to_string(c.multiplicity));
    rep.clusters.push_back(std::move(c));
  }

  for (const auto& c : rep.clusters) {
    const Subspace image = Subspace::span(a * c.space.basis);
    rep.invariance_residual =
        std::max(rep.invariance_residual, subspace_angle(c.space, image));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// flags at a point
// ---------------------------------------------------------------------------

namespace {

Mat concat_bases(const std::vector<Cluster>& clusters, std::size_t from,
                 std::size_t to_excl) {
  int cols = 0;
  for (std::size_t i = from; i < to_excl; ++i) cols += clusters[i].space.rank();
  Mat out(clusters[from].space.ambient, cols);
  int at = 0;
  for (std::size_t i = from; i < to_excl; ++i) {
    out.middleCols(at, clusters[i].space.rank()) = clusters[i].space.basis;
    at += clusters[i].space.rank();
  }
  return out;
}

}  // namespace

PointSplitting splitting_at_point(const CocycleSystem& b,
                                  const std::vector<Cluster>& clusters,
                                  const SftPoint& x, int iterations) {
  const std::size_t l = clusters.size();
  const int d = b.dim();
  PointSplitting out;
  out.blocks.resize(l);
  if (l == 1) {
    out.blocks[0] = Subspace(d, Mat::Identity(d, d));
    return out;
  }

  // fast flag at depth n: B^n at sigma^{-n} x applied to sum_{j >= i} E_j
  auto fast_flag = [&](std::size_t i, int n) {
    Mat s = orthonormalize(concat_bases(clusters, i, l));
    for (int t = n; t >= 1; --t)
      s = orthonormalize(b.gen->at_point(x, -static_cast<long>(t) * b.step) * s);
    return Subspace(d, s);
  };
  // slow flag at depth n: (B_x^n)^{-1} applied to sum_{j <= i} E_j
  auto slow_flag = [&](std::size_t i, int n) {
    Mat s = orthonormalize(concat_bases(clusters, 0, i + 1));
    for (int t = n - 1; t >= 0; --t)
      s = orthonormalize(
          inverse(b.gen->at_point(x, static_cast<long>(t) * b.step)) * s);
    return Subspace(d, s);
  };

  std::vector<Subspace> fast(l), slow(l);
  fast[0] = Subspace(d, Mat::Identity(d, d));
  slow[l - 1] = Subspace(d, Mat::Identity(d, d));
  for (std::size_t i = 1; i < l; ++i) {
    fast[i] = fast_flag(i, iterations);
    out.last_delta = std::max(
        out.last_delta, subspace_angle(fast_flag(i, iterations - 1), fast[i]));
  }
  for (std::size_t i = 0; i + 1 < l; ++i) {
    slow[i] = slow_flag(i, iterations);
    out.last_delta = std::max(
        out.last_delta, subspace_angle(slow_flag(i, iterations - 1), slow[i]));
  }

  for (std::size_t i = 0; i < l; ++i)
    out.blocks[i] = subspace_intersect(fast[i], slow[i]);
  return out;
}

// ---------------------------------------------------------------------------
// grid sweep
// ---------------------------------------------------------------------------

namespace {

SftPoint representative_point(const CocycleSystem& b, const Word& w, long lo) {
  // deterministic representative: the word routed onto the lexicographically
  // least short orbit through shortest connectors
  const SftPoint base = shortest_periodic_orbit(b.ts()).point(b.ts());
  return extend_word_to_homoclinic(base, w, lo);
}

}  // namespace

SplittingReport compute_splitting(const CocycleSystem& b, const Mat& a_const,
                                  const ClusterReport& reference, int depth,
                                  int iterations, double tol_split) {
  SplittingReport rep;
  rep.reference = reference;
  rep.depth = depth;
  rep.iterations = iterations;
  const int d = b.dim();

  for (const auto& [w, m] : b.gen->table())
    rep.perturbation = std::max(rep.perturbation, matdist(m, a_const));

  const auto grid = admissible_words(b.ts(), 2 * depth + 1);
  std::vector<std::pair<SftPoint, std::vector<Subspace>>> fields;
  for (const auto& w : grid) {
    const SftPoint x = representative_point(b, w, -depth);
    PointSplitting ps = splitting_at_point(b, reference.clusters, x, iterations);
    rep.max_flag_delta = std::max(rep.max_flag_delta, ps.last_delta);

    int total = 0;
    for (const auto& s : ps.blocks) total += s.rank();
    if (total != d)
      fail(Errc::RankAmbiguous, "block dimensions do not sum to d at " + x.repr());

    // invariance against the splitting at the shifted point
    PointSplitting next =
        splitting_at_point(b, reference.clusters, x.shifted(b.step), iterations);
    SplitSampleRow row{x, ps.blocks, 0.0};
    const Mat bx = b.gen->at_point(x, 0);
    for (std::size_t i = 0; i < ps.blocks.size(); ++i) {
      const Subspace pushed = Subspace::span(bx * ps.blocks[i].basis);
      row.invariance_angle = std::max(
          row.invariance_angle, subspace_angle(pushed, next.blocks[i]));
    }
    rep.invariance_residual =
        std::max(rep.invariance_residual, row.invariance_angle);
    fields.push_back({x, row.blocks});
    rep.samples.push_back(std::move(row));
  }

  if (rep.max_flag_delta > tol_split)
    fail(Errc::NotConverged,
         "flag iteration still moving by " + std::to_string(rep.max_flag_delta) +
             " after " + std::to_string(iterations) + " iterations");

  // Hoelder quotient of the field across the sampled points (strided so the
  // pair count stays bounded on deep grids)
  const std::size_t stride =
      std::max<std::size_t>(1, fields.size() * fields.size() / 1000000);
  std::size_t counter = 0;
  for (std::size_t i = 0; i < fields.size(); ++i)
    for (std::size_t j = i + 1; j < fields.size(); ++j) {
      if (counter++ % stride != 0) continue;
      const double dd = d_alpha(fields[i].first, fields[j].first, b.metric);
      if (dd <= 0) continue;
      double ang = 0.0;
      for (std::size_t q = 0; q < fields[i].second.size(); ++q)
        ang = std::max(ang,
                       subspace_angle(fields[i].second[q], fields[j].second[q]));
      rep.holder_quotient =
          std::max(rep.holder_quotient, ang / std::pow(dd, b.metric.beta));
    }
  return rep;
}

// ---------------------------------------------------------------------------
// framed blocks
// ---------------------------------------------------------------------------

Mat FramedBlock::frame_at(const SftPoint& x) const {
  const Word w = x.window(-frame_radius, frame_radius);
  auto it = frames.find(w);
  if (it == frames.end())
    fail(Errc::BadContext, "no frame for central word " + w);
  return it->second;
}

FramedBlock restrict_cocycle(const CocycleSystem& b, const Mat& a_const,
                             const ClusterReport& reference, int cluster_index,
                             int frame_radius, int iterations) {
  if (cluster_index < 0 ||
      cluster_index >= static_cast<int>(reference.clusters.size()))
    fail(Errc::BlockMissing, "no such cluster");
  const auto& cl = reference.clusters[static_cast<std::size_t>(cluster_index)];
  FramedBlock blk;
  blk.cluster_index = cluster_index;
  blk.dim = cl.space.rank();
  blk.frame_radius = frame_radius;
  blk.const_frame = cl.space.basis;
  blk.const_block = cl.space.basis.transpose() * a_const * cl.space.basis;

  for (const auto& w : admissible_words(b.ts(), 2 * frame_radius + 1)) {
    const SftPoint x = extend_word_to_homoclinic(
        shortest_periodic_orbit(b.ts()).point(b.ts()), w, -frame_radius);
    PointSplitting ps = splitting_at_point(b, reference.clusters, x, iterations);
    blk.frames[w] =
        ps.blocks[static_cast<std::size_t>(cluster_index)].basis;
  }

  // block generator keyed on words wide enough for both frames and B
  const int mb = b.gen->window_radius();
  const int mr = std::max(frame_radius + b.step, mb);
  std::map<Word, Mat> table;
  for (const auto& w : admissible_words(b.ts(), 2 * mr + 1)) {
    const Mat f0 = blk.frames.at(w.substr(
        static_cast<std::size_t>(mr - frame_radius),
        static_cast<std::size_t>(2 * frame_radius + 1)));
    const Mat f1 = blk.frames.at(w.substr(
        static_cast<std::size_t>(mr - frame_radius + b.step),
        static_cast<std::size_t>(2 * frame_radius + 1)));
    const Mat& bx = b.gen->at_word(w.substr(static_cast<std::size_t>(mr - mb),
                                            static_cast<std::size_t>(2 * mb + 1)));
    // how far B E(x) falls outside E(sigma x) in this context
    const Mat pushed = bx * f0;
    blk.frame_residual = std::max(
        blk.frame_residual,
        subspace_angle(Subspace::span(pushed), Subspace(b.dim(), f1)));
    table[w] = f1.transpose() * pushed;
  }
  Generator g(b.ts(), blk.dim, mr, std::move(table));
  blk.block_system = std::make_shared<CocycleSystem>(
      std::make_shared<Generator>(std::move(g)), b.metric,
      b.label + "|block" + std::to_string(cluster_index), b.step);
  return blk;
}

AssemblyReport assemble_blockwise(const CocycleSystem& a_const_sys,
                                  const CocycleSystem& b,
                                  const std::vector<FramedBlock>& blocks,
                                  const std::vector<ConjugacyField>& block_fields,
                                  const std::vector<SftPoint>& samples,
                                  long depth, long eval_window, double tol) {
  if (blocks.empty() || blocks.size() != block_fields.size())
    fail(Errc::BlockMissing, "need one conjugacy field per block");
  const int d = b.dim();
  int total = 0;
  for (const auto& blk : blocks) total += blk.dim;
  if (total != d) fail(Errc::BlockMissing, "block dimensions do not sum to d");

  Mat frame_a(d, d);
  {
    int at = 0;
    for (const auto& blk : blocks) {
      frame_a.middleCols(at, blk.dim) = blk.const_frame;
      at += blk.dim;
    }
  }
  const Mat frame_a_inv = inverse(frame_a);

  auto assembled = [&](const SftPoint& x) {
    Mat frame_b(d, d);
    Mat diag = Mat::Zero(d, d);
    int at = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      frame_b.middleCols(at, blocks[i].dim) = blocks[i].frame_at(x);
      diag.block(at, at, blocks[i].dim, blocks[i].dim) =
          block_fields[i].evaluate(x, eval_window).first;
      at += blocks[i].dim;
    }
    // C maps the B-side fiber to the A-side fiber blockwise
    return Mat(frame_a * diag * inverse(frame_b));
  };

  AssemblyReport rep;
  for (const auto& x : samples) {
    const Mat c0i = inverse(assembled(x));
    for (long j = 1; j <= depth; ++j) {
      const Mat cj = assembled(x.shifted(j * b.step));
      const double resid =
          opnorm(evaluate(a_const_sys, x, j) - cj * evaluate(b, x, j) * c0i);
      rep.rows.push_back({x, j, resid});
      rep.max_residual = std::max(rep.max_residual, resid);
    }
  }
  rep.pass = rep.max_residual < tol;
  return rep;
}

}  // namespace cocylab
