#pragma once

// Reference computations that share no code with the library.

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Symmetric tridiagonal matrix: diagonal d (size n), off-diagonal e (size n-1).
struct Tridiag {
  std::vector<double> d;
  std::vector<double> e;
};

/// Number of eigenvalues of the pencil (K, M) below sigma: the count of
/// negative pivots of K - sigma M (Sylvester inertia), M positive definite.
inline std::size_t count_below(const Tridiag& k, const Tridiag& m, double sigma) {
  std::size_t neg = 0;
  double pivot = 0.0;
  double prev_off = 0.0;
  for (std::size_t i = 0; i < k.d.size(); ++i) {
    const double a = k.d[i] - sigma * m.d[i];
    pivot = i == 0 ? a : a - prev_off * prev_off / pivot;
    if (pivot == 0.0) pivot = -1e-300;
    if (pivot < 0.0) ++neg;
    if (i + 1 < k.d.size()) prev_off = k.e[i] - sigma * m.e[i];
  }
  return neg;
}

/// The k-th (1-based) smallest generalized eigenvalue by bisection.
inline double generalized_eigenvalue(const Tridiag& k, const Tridiag& m, std::size_t index,
                                     double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (count_below(k, m, mid) >= index)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}


/// 1D Dirichlet pencil on n nodes (n - 2 unknowns) for the corner-averaged mass:
/// K = tridiag(-1, 2, -1)/h, M = tridiag(1, 2, 1) h/4.
inline std::pair<Tridiag, Tridiag> laplace_pencil_1d(std::size_t nodes, double length) {
  const std::size_t n = nodes - 2;
  const double h = length / static_cast<double>(nodes - 1);
  Tridiag k{std::vector<double>(n, 2.0 / h), std::vector<double>(n - 1, -1.0 / h)};
  Tridiag m{std::vector<double>(n, 0.5 * h), std::vector<double>(n - 1, 0.25 * h)};
  return {k, m};
}

/// Illinois-modified regula falsi on a sign-changing bracket.
inline double find_root(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b);
  if (fa * fb > 0.0) throw std::invalid_argument("find_root: no sign change");
  int side = 0;
  for (int it = 0; it < 500 && std::fabs(b - a) > tol; ++it) {
    const double c = (a * fb - b * fa) / (fb - fa);
    const double fc = f(c);
    if (fc == 0.0) return c;
    if (fc * fb > 0.0) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  return 0.5 * (a + b);
}

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  const std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double a0, double b0, double fa, double fm, double fb, double whole, int depth) {
        const double m = 0.5 * (a0 + b0);
        const double lm = 0.5 * (a0 + m), rm = 0.5 * (m + b0);
        const double flm = f(lm), frm = f(rm);
        const double left = (m - a0) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b0 - m) / 6.0 * (fm + 4.0 * frm + fb);
        if (depth > 40 || std::fabs(left + right - whole) <= 15.0 * tol)
          return left + right + (left + right - whole) / 15.0;
        return rec(a0, m, fa, flm, fm, left, depth + 1) + rec(m, b0, fm, frm, fb, right, depth + 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 0);
}

inline std::vector<double> normal_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace oracle
