#include "cocylab/numerics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace cocylab {

namespace {

void check_square(const Mat& M, const char* who) {
  if (M.rows() != M.cols() || M.rows() < 1)
    fail(Errc::DimensionMismatch, std::string(who) + ": matrix must be square");
  if (!M.allFinite())
    fail(Errc::ConfigInvalid, std::string(who) + ": non-finite entries");
}

Eigen::JacobiSVD<Mat> svd_of(const Mat& M, unsigned options = 0) {
  return Eigen::JacobiSVD<Mat>(M, options);
}

}  // namespace

double opnorm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() == 1 && M.cols() == 1) return std::abs(M(0, 0));
  if (M.rows() == 2 && M.cols() == 2) {
    // sigma_max^2 = (t + sqrt(t^2 - 4 det^2)) / 2 with t = ||M||_F^2;
    // no cancellation on the + branch; prescaled so t^2 cannot overflow
    const double s = M.cwiseAbs().maxCoeff();
    if (s == 0.0 || !std::isfinite(s)) return s;
    const Mat n = M / s;
    const double t = n.squaredNorm();
    const double det = n(0, 0) * n(1, 1) - n(0, 1) * n(1, 0);
    const double disc = std::sqrt(std::max(0.0, t * t - 4.0 * det * det));
    return s * std::sqrt(std::max(0.0, 0.5 * (t + disc)));
  }
  return svd_of(M).singularValues()(0);
}

double sigma_min(const Mat& M) {
  const auto sv = svd_of(M).singularValues();
  return sv(sv.size() - 1);
}

double opnorm_inv(const Mat& M) {
  check_square(M, "opnorm_inv");
  const auto sv = svd_of(M).singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= NumTol::sing_rel * sv(0))
    fail(Errc::Singular, "matrix numerically singular (sigma_min/sigma_max = " +
                             std::to_string(smin / sv(0)) + ")");
  return 1.0 / smin;
}

Mat inverse(const Mat& M) {
  check_square(M, "inverse");
  const auto sv = svd_of(M).singularValues();
  if (sv(sv.size() - 1) <= NumTol::sing_rel * sv(0))
    fail(Errc::Singular, "matrix numerically singular");
  return M.inverse();
}

double matdist(const Mat& A, const Mat& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    fail(Errc::DimensionMismatch, "matdist: shape mismatch");
  return opnorm(A - B) + opnorm(inverse(A) - inverse(B));
}

std::vector<double> eigen_moduli(const Mat& M) {
  check_square(M, "eigen_moduli");
  if (M.rows() > 16)
    fail(Errc::DimensionMismatch, "eigen_moduli supports d <= 16 only");
  Eigen::EigenSolver<Mat> es(M, /*computeEigenvectors=*/false);
  std::vector<double> mods(static_cast<std::size_t>(M.rows()));
  for (int i = 0; i < M.rows(); ++i) mods[static_cast<std::size_t>(i)] =
      std::abs(es.eigenvalues()(i));
  std::sort(mods.begin(), mods.end(), std::greater<double>());
  // consistency: product of moduli must reproduce |det|
  const double det = std::abs(M.determinant());
  double prod = 1.0;
  for (double m : mods) prod *= m;
  const double scale = std::max(det, 1e-300);
  if (std::abs(prod - det) > 1e-6 * scale)
    fail(Errc::ConfigInvalid, "eigenvalue moduli inconsistent with determinant");
  return mods;
}

// ---------------------------------------------------------------------------
// Subspace
// ---------------------------------------------------------------------------

Subspace::Subspace(int d, Mat b) : ambient(d), basis(std::move(b)) {
  if (basis.rows() != d)
    fail(Errc::DimensionMismatch, "Subspace: basis rows != ambient");
  if (basis.cols() > 0) {
    const Mat g = basis.transpose() * basis -
                  Mat::Identity(basis.cols(), basis.cols());
    if (g.cwiseAbs().maxCoeff() > 1e-8)
      fail(Errc::ConfigInvalid, "Subspace: basis not orthonormal");
  }
}

Subspace Subspace::span(const Mat& columns) {
  return Subspace(static_cast<int>(columns.rows()), orthonormalize(columns));
}

Subspace Subspace::coordinate(int d, const std::vector<int>& axes) {
  Mat b = Mat::Zero(d, static_cast<int>(axes.size()));
  for (std::size_t j = 0; j < axes.size(); ++j) b(axes[j], static_cast<int>(j)) = 1.0;
  return Subspace(d, b);
}

Mat Subspace::projector() const { return basis * basis.transpose(); }

Mat orthonormalize(const Mat& columns, double droptol) {
  const int d = static_cast<int>(columns.rows());
  Mat out(d, columns.cols());
  int r = 0;
  for (int j = 0; j < columns.cols(); ++j) {
    Vec v = columns.col(j);
    const double scale = v.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < r; ++i) v -= out.col(i).dot(v) * out.col(i);
    if (v.norm() <= droptol * std::max(scale, 1.0)) continue;
    v.normalize();
    for (int i = 0; i < d; ++i) {
      if (std::abs(v(i)) > 1e-10) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    out.col(r++) = v;
  }
  return out.leftCols(r);
}

// ---------------------------------------------------------------------------
// Sylvester nullspace
// ---------------------------------------------------------------------------

Vec mat_to_vec(const Mat& M) {
  return Eigen::Map<const Vec>(M.data(), M.size());
}

Mat vec_to_mat(const Vec& v, int d) {
  return Eigen::Map<const Mat>(v.data(), d, d);
}

Subspace nullspace_of(const Mat& M) {
  const int n = static_cast<int>(M.cols());
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  Vec sv = Vec::Zero(n);
  const int r = static_cast<int>(svd.singularValues().size());
  sv.head(r) = svd.singularValues();
  const double smax = std::max(r > 0 ? sv(0) : 0.0, 1.0);
  int null_dim = 0;
  for (int i = n - 1; i >= 0; --i) {
    if (sv(i) <= NumTol::rank_floor * smax)
      ++null_dim;
    else
      break;
  }
  if (null_dim < n) {
    const double kept = sv(n - null_dim - 1);
    const double dropped = null_dim > 0 ? sv(n - null_dim) : 0.0;
    if (null_dim > 0 && dropped > 0.0 && kept / dropped < NumTol::rank_gap)
      fail(Errc::RankAmbiguous,
           "no clean singular-value gap at the nullspace cut (ratio " +
               std::to_string(kept / dropped) + ")");
    // a smallest value just above the floor could be a sloppy null
    if (null_dim == 0 && sv(n - 1) <= 100.0 * NumTol::rank_floor * smax)
      fail(Errc::RankAmbiguous, "smallest singular value sits in the ambiguous band");
  }
  Mat basis = svd.matrixV().rightCols(null_dim);
  return Subspace(n, orthonormalize(basis));
}

Subspace solve_commutant(const Mat& P, const Mat& Q) {
  check_square(P, "solve_commutant");
  check_square(Q, "solve_commutant");
  if (P.rows() != Q.rows())
    fail(Errc::DimensionMismatch, "solve_commutant: dimension mismatch");
  const int d = static_cast<int>(P.rows());
  const int n = d * d;
  // vec(P X - X Q) = (I (x) P - Q^T (x) I) vec(X), column-major vec
  Mat op = Mat::Zero(n, n);
  const Mat id = Mat::Identity(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      // block (i,j) of I (x) P is delta_{ij} P; of Q^T (x) I is Q(j,i) I
      op.block(i * d, j * d, d, d) =
          (i == j ? P : Mat::Zero(d, d)) - Q(j, i) * id;
    }
  return nullspace_of(op);
}

// ---------------------------------------------------------------------------
// principal angles
// ---------------------------------------------------------------------------

std::vector<double> principal_angles(const Subspace& U, const Subspace& V) {
  if (U.ambient != V.ambient)
    fail(Errc::DimensionMismatch, "principal_angles: ambient mismatch");
  if (U.rank() == 0 || V.rank() == 0) return {};
  // sine-based: singular values of (I - U U^T) V are the sines, accurate
  // near zero where the cosine route loses everything
  const Mat res = V.basis - U.basis * (U.basis.transpose() * V.basis);
  Eigen::JacobiSVD<Mat> svd(res);
  const Vec s = svd.singularValues();
  const int r = std::min(U.rank(), V.rank());
  std::vector<double> angles;
  // (I-UU^T)V has V.rank() singular values; the smallest r of them are the
  // sines of the principal angles
  const int total = static_cast<int>(s.size());
  for (int i = total - r; i < total; ++i)
    angles.push_back(std::asin(std::clamp(s(i), 0.0, 1.0)));
  std::sort(angles.begin(), angles.end());
  return angles;
}

double subspace_angle(const Subspace& U, const Subspace& V) {
  if (U.ambient != V.ambient)
    fail(Errc::DimensionMismatch, "subspace_angle: ambient mismatch");
  if (U.rank() != V.rank())
    fail(Errc::RankMismatch, "subspace_angle: rank mismatch (" +
                                 std::to_string(U.rank()) + " vs " +
                                 std::to_string(V.rank()) + ")");
  if (U.rank() == 0) return 0.0;
  const Mat res = V.basis - U.basis * (U.basis.transpose() * V.basis);
  return std::asin(std::clamp(opnorm(res), 0.0, 1.0));
}

Subspace subspace_intersect(const Subspace& U, const Subspace& V) {
  if (U.ambient != V.ambient)
    fail(Errc::DimensionMismatch, "subspace_intersect: ambient mismatch");
  if (U.rank() == 0 || V.rank() == 0) return Subspace(U.ambient, Mat(U.ambient, 0));
  const Mat res = V.basis - U.basis * (U.basis.transpose() * V.basis);
  Eigen::JacobiSVD<Mat> svd(res, Eigen::ComputeFullV);
  const Vec s = svd.singularValues();
  std::vector<int> keep;
  for (int i = 0; i < s.size(); ++i) {
    const double v = s(i);
    if (v < NumTol::angle)
      keep.push_back(i);
    else if (v < 100.0 * NumTol::angle)
      fail(Errc::RankAmbiguous,
           "principal angle in the ambiguous band: sin = " + std::to_string(v));
  }
  if (keep.empty()) return Subspace(U.ambient, Mat(U.ambient, 0));
  Mat dirs(U.ambient, static_cast<int>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    dirs.col(static_cast<int>(j)) = V.basis * svd.matrixV().col(keep[j]);
  return Subspace(U.ambient, orthonormalize(dirs));
}

bool subspace_equal(const Subspace& U, const Subspace& V, double tol) {
  if (U.ambient != V.ambient || U.rank() != V.rank()) return false;
  if (U.rank() == 0) return true;
  return subspace_angle(U, V) < tol;
}

}  // namespace cocylab
