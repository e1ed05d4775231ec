#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cocylab/errors.hpp"

namespace cocylab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Central numeric tolerances. All rank decisions must pass a gap test or
// raise RankAmbiguous rather than silently choose.
struct NumTol {
  static constexpr double sing_rel = 1e-10;    // singularity cut, relative to ||M||
  static constexpr double rank_gap = 1e6;      // required gap at a rank cut
  static constexpr double rank_floor = 1e-7;   // null candidates: sigma <= floor*max
  static constexpr double angle = 1e-8;        // principal-angle equality cut
};

// Operator (spectral) norm: largest singular value.
double opnorm(const Mat& M);

// Smallest singular value.
double sigma_min(const Mat& M);

// ||M^{-1}|| without forming the inverse; throws Singular.
double opnorm_inv(const Mat& M);

// Inverse with singularity check against sing_rel * ||M||.
Mat inverse(const Mat& M);

// d(A, B) = ||A - B|| + ||A^{-1} - B^{-1}||.
double matdist(const Mat& A, const Mat& B);

// Moduli of all complex eigenvalues, descending, with multiplicity.
std::vector<double> eigen_moduli(const Mat& M);

// ---------------------------------------------------------------------------
// Subspaces as column-orthonormal bases of R^d. rank 0 is representable
// (flagged by callers where it matters).
// ---------------------------------------------------------------------------
struct Subspace {
  int ambient = 0;
  Mat basis;  // ambient x rank, orthonormal columns

  Subspace() = default;
  Subspace(int d, Mat b);
  int rank() const { return static_cast<int>(basis.cols()); }

  static Subspace span(const Mat& columns);      // orthonormalized, rank-trimmed
  static Subspace coordinate(int d, const std::vector<int>& axes);

  Mat projector() const;  // basis * basis^T
};

// Deterministic orthonormalization: modified Gram-Schmidt in column order
// with a re-orthogonalization pass, columns below droptol removed, each
// column's first nonvanishing component made positive.
Mat orthonormalize(const Mat& columns, double droptol = 1e-12);

// Orthonormal basis of {X : P X = X Q} inside the d^2-dimensional matrix
// space (vec is column-major). For P = Q this is the commutant.
// Throws RankAmbiguous when the singular spectrum has no clean gap.
Subspace solve_commutant(const Mat& P, const Mat& Q);

// Nullspace of a rectangular matrix under the same gap discipline.
Subspace nullspace_of(const Mat& M);

// Matrix <-> vec helpers matching solve_commutant's convention.
Vec mat_to_vec(const Mat& M);
Mat vec_to_mat(const Vec& v, int d);

// Largest principal angle between equal-rank subspaces, in [0, pi/2].
double subspace_angle(const Subspace& U, const Subspace& V);

// All principal angles (ascending) between U and V.
std::vector<double> principal_angles(const Subspace& U, const Subspace& V);

// Intersection decided by principal angles below NumTol::angle; angles in
// the ambiguous band raise RankAmbiguous. Rank 0 results are allowed.
Subspace subspace_intersect(const Subspace& U, const Subspace& V);

// true iff the two subspaces have equal rank and max principal angle < tol.
bool subspace_equal(const Subspace& U, const Subspace& V,
                    double tol = NumTol::angle);

}  // namespace cocylab
