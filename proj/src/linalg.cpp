#include "sublab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace sublab {

namespace {

std::string describe(const std::string& prefix, double value) {
  std::ostringstream os;
  os.precision(6);
  os << prefix << value;
  return os.str();
}

}  // namespace

PointOffManifold::PointOffManifold(const std::string& manifold, double residual)
    : GeometryError(describe("point off manifold " + manifold + ": membership residual ", residual)),
      residual_(residual) {}

DegeneratePlane::DegeneratePlane(double gram)
    : GeometryError(describe("degenerate plane: Gram determinant ", gram)), gram_(gram) {}

IllConditioned::IllConditioned(const std::string& what, double condition)
    : GeometryError(describe(what + ": condition number ", condition)), condition_(condition) {}

RankDeficient::RankDeficient(const std::string& what, int expected, int found)
    : GeometryError(what + ": expected rank " + std::to_string(expected) + ", found " +
                    std::to_string(found)),
      expected_(expected),
      found_(found) {}

Mat orthonormal_columns(const Mat& spanning, int max_rank, double tol) {
  const int rows = static_cast<int>(spanning.rows());
  const int cols = static_cast<int>(spanning.cols());
  Mat work = spanning;
  Mat basis(rows, std::min({max_rank, cols, rows}));
  std::vector<bool> used(cols, false);
  int found = 0;
  while (found < basis.cols()) {
    int pivot = -1;
    double best = tol;
    for (int j = 0; j < cols; ++j) {
      if (used[j]) continue;
      const double n = work.col(j).norm();
      if (n > best) {
        best = n;
        pivot = j;
      }
    }
    if (pivot < 0) break;
    used[pivot] = true;
    Vec q = work.col(pivot) / best;
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < found; ++k) q -= basis.col(k).dot(q) * basis.col(k);
      q.normalize();
    }
    basis.col(found) = q;
    ++found;
    for (int j = 0; j < cols; ++j) {
      if (!used[j]) work.col(j) -= q.dot(work.col(j)) * q;
    }
  }
  return basis.leftCols(found);
}

SvdResult full_svd(const Mat& a) {
  SvdResult out;
  if (a.size() == 0) {
    out.singular_values = Vec::Zero(0);
    out.right = Mat::Identity(a.cols(), a.cols());
    out.left = Mat::Identity(a.rows(), a.rows());
    return out;
  }
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  out.right = svd.matrixV();
  out.left = svd.matrixU();
  return out;
}

int numerical_rank(const Vec& singular_values, double rel_tol, double abs_floor) {
  if (singular_values.size() == 0) return 0;
  const double top = singular_values.maxCoeff();
  const double cut = std::max(rel_tol * top, abs_floor);
  int rank = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) > cut) ++rank;
  }
  return rank;
}

Mat nullspace(const Mat& a, double rel_tol, int* rank_out) {
  const auto svd = full_svd(a);
  const int rank = numerical_rank(svd.singular_values, rel_tol, 1e-300);
  if (rank_out) *rank_out = rank;
  return svd.right.rightCols(a.cols() - rank);
}

Mat rowspace(const Mat& a, double rel_tol) {
  const auto svd = full_svd(a);
  const int rank = numerical_rank(svd.singular_values, rel_tol, 1e-300);
  return svd.right.leftCols(rank);
}

double max_singular_value(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

double min_singular_value(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

double spd_condition(const Mat& spd) {
  if (spd.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(spd, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace sublab
