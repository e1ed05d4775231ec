#pragma once

#include "cocylab/conjugacy.hpp"

namespace cocylab {

// One eigenvalue-modulus cluster of a constant matrix, with the invariant
// subspace spanned by the corresponding generalized eigenvectors.
struct Cluster {
  double modulus = 0.0;
  int multiplicity = 0;
  Subspace space;
};

struct ClusterReport {
  std::vector<Cluster> clusters;  // moduli ascending
  bool single_cluster = false;    // all moduli inside one gap_tol band
  double min_gap = 0.0;           // min over i of rho_{i+1}/rho_i
  double invariance_residual = 0.0;  // max angle(A E_i, E_i)
};

// Moduli grouped by relative gap > gap_tol; per-cluster subspaces via the
// real kernel of the clustered characteristic factors.
ClusterReport cluster_constant(const Mat& a, double gap_tol = 0.05);

// Invariant blocks at one point by push-forward of the fast flags along the
// past and pull-back of the slow flags along the future.
struct PointSplitting {
  std::vector<Subspace> blocks;
  double last_delta = 0.0;  // flag movement in the final iteration
};

PointSplitting splitting_at_point(const CocycleSystem& b,
                                  const std::vector<Cluster>& clusters,
                                  const SftPoint& x, int iterations);

struct SplitSampleRow {
  SftPoint point;
  std::vector<Subspace> blocks;
  double invariance_angle = 0.0;  // worst angle(B_x E_i(x), E_i(sigma x))
};

struct SplittingReport {
  ClusterReport reference;
  std::vector<SplitSampleRow> samples;
  double invariance_residual = 0.0;
  double max_flag_delta = 0.0;   // convergence indicator at the iteration cap
  double perturbation = 0.0;     // max matdist(generator entry, A)
  double holder_quotient = 0.0;  // angle(E(x), E(y)) / d_alpha(x,y)^beta
  int depth = 0;
  int iterations = 0;
};

// Splitting over the grid of all admissible central words of the given
// cylinder depth, each represented by its routed homoclinic point.
// Throws NotConverged when the flag iteration stalls above tol.
SplittingReport compute_splitting(const CocycleSystem& b, const Mat& a_const,
                                  const ClusterReport& reference, int depth,
                                  int iterations, double tol_split = 1e-9);

// The cocycle induced on one block, written in deterministic orthonormal
// frames keyed by central words.
struct FramedBlock {
  int cluster_index = 0;
  int dim = 0;
  int frame_radius = 0;
  std::map<Word, Mat> frames;  // central word -> d x r orthonormal frame
  Mat const_frame;             // d x r basis of the constant-side block
  Mat const_block;             // r x r restriction of A
  std::shared_ptr<const CocycleSystem> block_system;  // r x r generator (B side)
  double frame_residual = 0.0; // worst invariance angle met while framing

  Mat frame_at(const SftPoint& x) const;
};

FramedBlock restrict_cocycle(const CocycleSystem& b, const Mat& a_const,
                             const ClusterReport& reference, int cluster_index,
                             int frame_radius, int iterations);

struct AssemblyRow {
  SftPoint point;
  long depth;
  double residual;
};

struct AssemblyReport {
  double max_residual = 0.0;
  std::vector<AssemblyRow> rows;
  bool pass = false;
};

// Direct-sum conjugacy: C(x) = FrameA * blockdiag(C_i(x)) * FrameB(x)^{-1},
// verified against the ambient pair (constant A, B).
AssemblyReport assemble_blockwise(const CocycleSystem& a_const_sys,
                                  const CocycleSystem& b,
                                  const std::vector<FramedBlock>& blocks,
                                  const std::vector<ConjugacyField>& block_fields,
                                  const std::vector<SftPoint>& samples,
                                  long depth, long eval_window,
                                  double tol = 1e-7);

}  // namespace cocylab
