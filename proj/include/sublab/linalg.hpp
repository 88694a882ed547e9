/**
 * @file linalg.hpp
 * @brief Dense linear-algebra helpers shared by every geometry module.
 *
 * Tangent spaces are carried as orthonormal column bases in ambient
 * coordinates. Bases are produced deterministically from a spanning set by
 * greedy pivoted Gram-Schmidt so repeated evaluations at the same point give
 * bitwise-identical results.
 */
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sublab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class for every numerical error raised by the library.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PointOffManifold : public GeometryError {
 public:
  PointOffManifold(const std::string& manifold, double residual);
  double residual() const { return residual_; }

 private:
  double residual_;
};

class DegeneratePlane : public GeometryError {
 public:
  explicit DegeneratePlane(double gram);
  double gram() const { return gram_; }

 private:
  double gram_;
};

class IllConditioned : public GeometryError {
 public:
  IllConditioned(const std::string& what, double condition);
  double condition() const { return condition_; }

 private:
  double condition_;
};

class RankDeficient : public GeometryError {
 public:
  RankDeficient(const std::string& what, int expected, int found);
  int expected() const { return expected_; }
  int found() const { return found_; }

 private:
  int expected_;
  int found_;
};

/**
 * Orthonormalizes the columns of @p spanning by greedy pivoted Gram-Schmidt.
 *
 * At every step the remaining column with the largest residual norm is
 * taken (ties go to the lowest index). Stops after @p max_rank columns or
 * when the largest residual drops below @p tol. Two passes of
 * re-orthogonalization keep the result orthonormal to machine precision.
 */
Mat orthonormal_columns(const Mat& spanning, int max_rank, double tol = 1e-10);

/// Singular values and right singular vectors of @p a, largest first.
struct SvdResult {
  Vec singular_values;
  Mat right;  ///< columns are right singular vectors
  Mat left;   ///< columns are left singular vectors
};

SvdResult full_svd(const Mat& a);

/// Number of singular values above `rel_tol * max(sv)` (and above `abs_floor`).
int numerical_rank(const Vec& singular_values, double rel_tol, double abs_floor = 0.0);

/// Orthonormal basis of ker(a); columns of V past the numerical rank.
Mat nullspace(const Mat& a, double rel_tol, int* rank_out = nullptr);

/// Orthonormal basis of the row space of a (complement of nullspace).
Mat rowspace(const Mat& a, double rel_tol);

/// Largest and smallest singular value of a (0 for empty).
double max_singular_value(const Mat& a);
double min_singular_value(const Mat& a);

/// Spectral condition number of a symmetric positive-definite matrix.
double spd_condition(const Mat& spd);

/// Frobenius-norm helper used for residuals of operator identities.
inline double residual_norm(const Mat& a) { return a.size() == 0 ? 0.0 : a.norm(); }

}  // namespace sublab
