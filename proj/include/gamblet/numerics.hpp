#pragma once

// Dense symmetric kernels shared by every other module: an exactly symmetric
// matrix type, Cholesky with a scale-invariant SPD test, extreme eigenvalues,
// and the chi-square quantile used to size regularization radii.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gamblet/error.hpp"

namespace gamblet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Rectangular operators between label sets (pi, W, N, R).
using RectMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Dense symmetric matrix. Entries (i,j) and (j,i) are stored bit-identically.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Index n) : m_(Matrix::Zero(n, n)) {}

  static SymMatrix identity(Index n) {
    SymMatrix s;
    s.m_ = Matrix::Identity(n, n);
    return s;
  }

  static SymMatrix diagonal(const Vector& d) {
    SymMatrix s;
    s.m_ = d.asDiagonal();
    return s;
  }

  static SymMatrix diagonal(std::initializer_list<double> d) {
    Vector v(static_cast<Index>(d.size()));
    Index i = 0;
    for (double x : d) v(i++) = x;
    return diagonal(v);
  }

  /// Averages m with its transpose. Asymmetry above rel_tol * max|m| is an error,
  /// since it means the caller did not produce a symmetric operator.
  static SymMatrix from(const Matrix& m, double rel_tol = 1e-8) {
    detail::require(m.rows() == m.cols(), ErrorCode::ShapeMismatch,
                    "symmetric matrix must be square, got " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()));
    detail::require(m.rows() >= 1, ErrorCode::ShapeMismatch, "symmetric matrix must be non-empty");
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    detail::require(!(asym > rel_tol * std::max(scale, std::numeric_limits<double>::min())),
                    ErrorCode::ShapeMismatch,
                    "matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    SymMatrix s;
    s.m_ = 0.5 * (m + m.transpose());
    return s;
  }

  Index size() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Matrix& dense() const { return m_; }

  Vector operator*(const Vector& x) const { return m_ * x; }
  SymMatrix operator*(double c) const {
    SymMatrix s;
    s.m_ = c * m_;
    return s;
  }

  /// x^T M x.
  double quadratic(const Vector& x) const { return x.dot(m_ * x); }

 private:
  Matrix m_;
};

/// P * M * P^T, symmetrised.
inline SymMatrix congruence(const RectMatrix& p, const SymMatrix& m) {
  detail::require_same(p.cols(), m.size(), "congruence: P columns vs matrix size");
  Matrix r = p * m.dense() * p.transpose();
  return SymMatrix::from(r, 1e-6);
}

/// Lower Cholesky factor of an SPD matrix.
class CholFactor {
 public:
  CholFactor() = default;
  explicit CholFactor(Eigen::LLT<Matrix> llt) : llt_(std::move(llt)) {}

  Index size() const { return llt_.rows(); }
  Matrix lower() const { return llt_.matrixL(); }
  Matrix reconstruct() const { return llt_.reconstructedMatrix(); }

  Vector solve(const Vector& b) const {
    detail::require_same(b.size(), size(), "solve_spd: right-hand side length");
    return llt_.solve(b);
  }
  Matrix solve(const Matrix& b) const {
    detail::require_same(b.rows(), size(), "solve_spd: right-hand side rows");
    return llt_.solve(b);
  }

 private:
  Eigen::LLT<Matrix> llt_;
};

/// Pivots at or below this fraction of the largest diagonal entry reject the input.
inline constexpr double kSpdPivotTolerance = 1e-14;

inline CholFactor cholesky(const SymMatrix& m) {
  const Matrix& a = m.dense();
  const double max_diag = a.diagonal().maxCoeff();
  detail::require(max_diag > 0.0, ErrorCode::NotSPD, "largest diagonal entry is not positive");
  Eigen::LLT<Matrix> llt(a);
  detail::require(llt.info() == Eigen::Success, ErrorCode::NotSPD,
                  "non-positive pivot in factorisation of " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " matrix");
  const Matrix& l = llt.matrixLLT();
  const double threshold = kSpdPivotTolerance * max_diag;
  for (Index j = 0; j < l.rows(); ++j) {
    const double pivot = l(j, j) * l(j, j);
    if (!(pivot > threshold)) {
      throw Error(ErrorCode::NotSPD, "pivot " + std::to_string(j) + " = " + std::to_string(pivot) +
                                         " below tolerance " + std::to_string(threshold));
    }
  }
  return CholFactor(std::move(llt));
}

inline Vector solve_spd(const CholFactor& f, const Vector& b) { return f.solve(b); }
inline Matrix solve_spd(const CholFactor& f, const Matrix& b) { return f.solve(b); }

/// Explicit inverse of an SPD matrix (used only where a dense inverse is the point).
inline SymMatrix spd_inverse(const SymMatrix& m) {
  const CholFactor f = cholesky(m);
  return SymMatrix::from(f.solve(Matrix(Matrix::Identity(m.size(), m.size()))), 1e-6);
}

struct EigenRange {
  double min = 0.0;
  double max = 0.0;
  double condition() const { return max / min; }
};

inline constexpr Index kFullEigenLimit = 1024;

namespace detail {

struct LanczosExtreme {
  double value = 0.0;
  bool converged = false;
};

// Lanczos with full reorthogonalisation; returns the largest (want_max) or
// smallest Ritz value once its error estimate min(r, r^2 / gap) drops below
// tol * |theta|, where r is the residual norm and gap the distance to the
// neighbouring Ritz value.
inline LanczosExtreme lanczos_extreme(const std::function<Vector(const Vector&)>& apply, Index n,
                                      bool want_max, double tol, int max_steps) {
  const Index m = std::min<Index>(n, max_steps);
  Matrix q(n, m + 1);
  std::mt19937_64 rng(0x5eed1a2c3ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  q.col(0) = v.normalized();

  std::vector<double> alpha;
  std::vector<double> beta;
  LanczosExtreme out;
  for (Index j = 0; j < m; ++j) {
    Vector w = apply(q.col(j));
    const double a = q.col(j).dot(w);
    alpha.push_back(a);
    // Two passes of classical Gram-Schmidt against every previous vector.
    for (int pass = 0; pass < 2; ++pass) {
      const Vector coeff = q.leftCols(j + 1).transpose() * w;
      w -= q.leftCols(j + 1) * coeff;
    }
    const double b = w.norm();

    const Index k = j + 1;
    const bool last = (k == m) || b <= 1e-300;
    if (k % 5 == 0 || last) {
      Matrix t = Matrix::Zero(k, k);
      for (Index i = 0; i < k; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < k) {
          t(i, i + 1) = beta[static_cast<std::size_t>(i)];
          t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(t);
      const Index idx = want_max ? k - 1 : 0;
      const double theta = es.eigenvalues()(idx);
      const double resid = std::abs(b * es.eigenvectors()(k - 1, idx));
      double err = resid;
      if (k >= 2) {
        const double gap = std::abs(theta - es.eigenvalues()(want_max ? k - 2 : 1));
        if (gap > 0.0) err = std::min(err, resid * resid / gap);
      }
      out.value = theta;
      if (err <= tol * std::abs(theta) || b <= 1e-300 || k == n) {
        out.converged = true;
        return out;
      }
    }
    if (last) break;
    beta.push_back(b);
    q.col(j + 1) = w / b;
  }
  return out;
}

}  // namespace detail

/// Smallest and largest eigenvalue of a symmetric matrix, to relative accuracy tol.
/// Matrices up to kFullEigenLimit use a full symmetric eigensolver; larger ones use
/// Lanczos (on M for the top, on M^{-1} for the bottom when M is SPD).
inline EigenRange extreme_eigs(const SymMatrix& m, double tol = 1e-10, int max_steps = 1000) {
  const Index n = m.size();
  detail::require(n >= 1, ErrorCode::ShapeMismatch, "extreme_eigs on empty matrix");
  if (n <= kFullEigenLimit) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.dense(), Eigen::EigenvaluesOnly);
    detail::require(es.info() == Eigen::Success, ErrorCode::NoConvergence,
                    "symmetric eigensolver did not converge");
    return {es.eigenvalues()(0), es.eigenvalues()(n - 1)};
  }

  const Matrix& a = m.dense();
  const auto top = detail::lanczos_extreme([&](const Vector& x) { return Vector(a * x); }, n, true,
                                           tol, max_steps);
  detail::require(top.converged, ErrorCode::NoConvergence,
                  "Lanczos did not resolve the largest eigenvalue in " + std::to_string(max_steps) +
                      " steps");
  EigenRange out{0.0, top.value};
  try {
    const CholFactor f = cholesky(m);
    const auto inv = detail::lanczos_extreme([&](const Vector& x) { return f.solve(x); }, n, true,
                                             tol, max_steps);
    detail::require(inv.converged, ErrorCode::NoConvergence,
                    "Lanczos did not resolve the smallest eigenvalue");
    out.min = 1.0 / inv.value;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotSPD) throw;
    const auto bottom = detail::lanczos_extreme([&](const Vector& x) { return Vector(a * x); }, n,
                                                false, tol, max_steps);
    detail::require(bottom.converged, ErrorCode::NoConvergence,
                    "Lanczos did not resolve the smallest eigenvalue");
    out.min = bottom.value;
  }
  return out;
}

/// x with P[chi^2_dof <= x] = p, by bisection on the regularized lower incomplete gamma.
inline double chi_square_quantile(int dof, double p) {
  detail::require(p > 0.0 && p < 1.0, ErrorCode::InvalidProbability,
                  "probability must lie in (0,1), got " + std::to_string(p));
  detail::require(dof >= 1, ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  const double k = 0.5 * dof;
  auto cdf = [k](double x) { return boost::math::gamma_p(k, 0.5 * x); };
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (cdf(hi) < p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace gamblet
