#pragma once

// Reference computations used only by the tests. Each one is written
// independently of the library code it checks (plain loops, closed forms).

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Textbook column-by-column Cholesky. Returns false on a non-positive pivot.
inline bool naive_cholesky(const Mat& a, Mat& l) {
  const long n = a.rows();
  l = Mat::Zero(n, n);
  for (long j = 0; j < n; ++j) {
    double d = a(j, j);
    for (long k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return false;
    l(j, j) = std::sqrt(d);
    for (long i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (long k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

/// Forward/back substitution with a lower factor.
inline Vec chol_solve(const Mat& l, const Vec& b) {
  const long n = l.rows();
  Vec y(n);
  for (long i = 0; i < n; ++i) {
    double s = b(i);
    for (long k = 0; k < i; ++k) s -= l(i, k) * y(k);
    y(i) = s / l(i, i);
  }
  Vec x(n);
  for (long i = n - 1; i >= 0; --i) {
    double s = y(i);
    for (long k = i + 1; k < n; ++k) s -= l(k, i) * x(k);
    x(i) = s / l(i, i);
  }
  return x;
}

/// Dense Gauss-Jordan inverse with partial pivoting.
inline Mat gauss_jordan_inverse(Mat a) {
  const long n = a.rows();
  Mat inv = Mat::Identity(n, n);
  for (long c = 0; c < n; ++c) {
    long piv = c;
    for (long r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    a.row(c).swap(a.row(piv));
    inv.row(c).swap(inv.row(piv));
    const double d = a(c, c);
    a.row(c) /= d;
    inv.row(c) /= d;
    for (long r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      a.row(r) -= f * a.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return inv;
}

/// Random SPD matrix Q diag(d) Q^T with eigenvalues spread over [lo, hi].
inline Mat random_spd(long n, double lo, double hi, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) m(i, j) = g(rng);
  Eigen::HouseholderQR<Mat> qr(m);
  const Mat q = qr.householderQ();
  Vec d(n);
  for (long i = 0; i < n; ++i) d(i) = lo * std::pow(hi / lo, n == 1 ? 0.0 : double(i) / double(n - 1));
  Mat a = q * d.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

/// Wilson-Hilferty approximation of the chi-square quantile, with the normal
/// quantile from Acklam's rational approximation.
inline double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01, -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  const double lo = 0.02425;
  if (p < lo) {
    const double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > 1 - lo) return -normal_quantile(1 - p);
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

inline double wilson_hilferty(int dof, double p) {
  const double k = dof;
  const double z = normal_quantile(p);
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

/// Composite Gauss-Legendre (5 points per panel) of f over [lo, hi].
inline double composite_gauss5(const std::function<double(double)>& f, double lo, double hi, int panels) {
  static const double x[] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                             0.9061798459386640};
  static const double w[] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                             0.2369268850561891};
  double total = 0.0;
  const double step = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * step;
    for (int g = 0; g < 5; ++g) total += 0.5 * step * w[g] * f(a + 0.5 * step * (x[g] + 1.0));
  }
  return total;
}

/// beta_l of the level-selection rule, written out term by term.
inline std::vector<double> beta_table(double h, double s, double d, double sigma, double m, int q) {
  std::vector<double> beta;
  for (int l = 0; l <= q; ++l) {
    double b;
    if (l == 0) {
      b = std::pow(h, 2 * s) * m * m;
    } else if (l == q) {
      b = std::pow(h, -(2 * s + d) * q) * sigma * sigma;
    } else {
      b = sigma * sigma * std::pow(h, -(2 * s + d) * l) + std::pow(h, 2 * s * (l + 1)) * m * m;
    }
    beta.push_back(b);
  }
  return beta;
}

inline int argmin_first(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[static_cast<std::size_t>(i)] < v[static_cast<std::size_t>(best)]) best = i;
  return best;
}

}  // namespace oracle
