#pragma once
// Reference computations for the tests. Each one is written from scratch with
// plain loops (no Eigen decompositions, no library code) so that agreement
// with the library is evidence rather than tautology.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, std::vector<double>(c, 0.0)); }

// ---------------------------------------------------------------- eigenvalues

/// Roots of a monic polynomial z^n + c[n-1] z^{n-1} + ... + c[0] by Durand-Kerner.
inline std::vector<std::complex<double>> durand_kerner(const std::vector<double>& c) {
  const std::size_t n = c.size();
  auto p = [&](std::complex<double> z) {
    std::complex<double> v = 1.0;
    for (std::size_t i = n; i-- > 0;) v = v * z + c[i];
    return v;
  };
  std::vector<std::complex<double>> z(n);
  const std::complex<double> seed(0.4, 0.9);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(seed, static_cast<double>(i));
  for (int it = 0; it < 2000; ++it) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::complex<double> den = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= z[i] - z[j];
      const auto dz = p(z[i]) / den;
      z[i] -= dz;
      moved = std::max(moved, std::abs(dz));
    }
    if (moved < 1e-15) break;
  }
  return z;
}

/// Spectral radius of a 2x2 or 3x3 matrix from its characteristic polynomial.
inline double spectral_radius_small(const Mat& a) {
  std::vector<double> c;
  if (a.size() == 2) {
    const double tr = a[0][0] + a[1][1];
    const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    c = {det, -tr};
  } else if (a.size() == 3) {
    const double tr = a[0][0] + a[1][1] + a[2][2];
    const double minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] +
                          a[1][1] * a[2][2] - a[1][2] * a[2][1];
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    c = {-det, minors, -tr};
  } else {
    throw std::invalid_argument("spectral_radius_small: 2x2 or 3x3 only");
  }
  double r = 0.0;
  for (const auto& z : durand_kerner(c)) r = std::max(r, std::abs(z));
  return r;
}

// ---------------------------------------------------------------- linear algebra

/// Solve A x = b (A square) by Gaussian elimination with partial pivoting in long double.
inline std::vector<double> gauss_solve(Mat a, std::vector<double> b) {
  const std::size_t n = a.size();
  std::vector<std::vector<long double>> m(n, std::vector<long double>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = a[i][j];
    m[i][n] = b[i];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    if (m[col][col] == 0.0L) throw std::runtime_error("gauss_solve: singular");
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const long double f = m[r][col] / m[col][col];
      for (std::size_t j = col; j <= n; ++j) m[r][j] -= f * m[col][j];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(m[i][n] / m[i][i]);
  return x;
}

/// (X^T X + beta I)^{-1} X^T Y via the normal equations, one column of Y at a time.
inline Mat ridge_normal_equations(const Mat& x, const Mat& y, double beta) {
  const std::size_t rows = x.size(), n = x[0].size(), d = y[0].size();
  Mat g = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      long double s = 0.0L;
      for (std::size_t k = 0; k < rows; ++k) s += static_cast<long double>(x[k][i]) * x[k][j];
      g[i][j] = static_cast<double>(s) + (i == j ? beta : 0.0);
    }
  Mat out = zeros(n, d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      long double s = 0.0L;
      for (std::size_t k = 0; k < rows; ++k) s += static_cast<long double>(x[k][i]) * y[k][c];
      rhs[i] = static_cast<double>(s);
    }
    const auto sol = gauss_solve(g, rhs);
    for (std::size_t i = 0; i < n; ++i) out[i][c] = sol[i];
  }
  return out;
}

// ---------------------------------------------------------------- LESN update

/// x' = (1 - a) x + a tanh(rho W x + sigma W_in u), written with explicit loops.
inline std::vector<double> lesn_step(const Mat& w, const Mat& w_in, double a, double rho, double sigma,
                                     const std::vector<double>& x, const std::vector<double>& u) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pre = 0.0;
    for (std::size_t j = 0; j < n; ++j) pre += rho * w[i][j] * x[j];
    for (std::size_t j = 0; j < u.size(); ++j) pre += sigma * w_in[i][j] * u[j];
    out[i] = (1.0 - a) * x[i] + a * std::tanh(pre);
  }
  return out;
}

/// Central finite-difference Jacobian of f at x.
inline Mat fd_jacobian(const std::function<std::vector<double>(const std::vector<double>&)>& f,
                       const std::vector<double>& x, double h = 1e-6) {
  const std::size_t n = x.size();
  const std::size_t m = f(x).size();
  Mat j = zeros(m, n);
  for (std::size_t c = 0; c < n; ++c) {
    auto xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    const auto fp = f(xp), fm = f(xm);
    for (std::size_t r = 0; r < m; ++r) j[r][c] = (fp[r] - fm[r]) / (2.0 * h);
  }
  return j;
}

// ---------------------------------------------------------------- dynamics

/// Largest Lyapunov exponent of the Henon map (a = 1.4, b = 0.3) from the
/// divergence of two nearby trajectories, renormalised every step.
inline double henon_two_trajectory(std::size_t steps, double d0 = 1e-9) {
  double x = 0.1, y = 0.1;
  for (int i = 0; i < 1000; ++i) {
    const double nx = 1.0 - 1.4 * x * x + y;
    y = 0.3 * x;
    x = nx;
  }
  double px = x + d0, py = y;
  long double sum = 0.0L;
  for (std::size_t k = 0; k < steps; ++k) {
    const double nx = 1.0 - 1.4 * x * x + y, ny = 0.3 * x;
    const double npx = 1.0 - 1.4 * px * px + py, npy = 0.3 * px;
    x = nx, y = ny;
    const double dx = npx - x, dy = npy - y;
    const double d = std::hypot(dx, dy);
    sum += std::log(d / d0);
    px = x + dx * d0 / d;
    py = y + dy * d0 / d;
  }
  return static_cast<double>(sum / static_cast<long double>(steps));
}

/// Peak |x| on the Van der Pol limit cycle by plain RK4 with a very small step.
inline double van_der_pol_amplitude(double mu, double dt = 1e-4, double t_transient = 100.0, double t_measure = 20.0) {
  std::array<double, 2> s{1.0, 0.0};
  auto f = [mu](const std::array<double, 2>& v) {
    return std::array<double, 2>{v[1], mu * (1.0 - v[0] * v[0]) * v[1] - v[0]};
  };
  auto rk4 = [&](const std::array<double, 2>& v) {
    const auto k1 = f(v);
    const auto k2 = f({v[0] + 0.5 * dt * k1[0], v[1] + 0.5 * dt * k1[1]});
    const auto k3 = f({v[0] + 0.5 * dt * k2[0], v[1] + 0.5 * dt * k2[1]});
    const auto k4 = f({v[0] + dt * k3[0], v[1] + dt * k3[1]});
    return std::array<double, 2>{v[0] + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                                 v[1] + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
  };
  const auto n_tr = static_cast<std::size_t>(t_transient / dt);
  for (std::size_t i = 0; i < n_tr; ++i) s = rk4(s);
  double peak = 0.0;
  const auto n_m = static_cast<std::size_t>(t_measure / dt);
  for (std::size_t i = 0; i < n_m; ++i) {
    s = rk4(s);
    peak = std::max(peak, std::abs(s[0]));
  }
  return peak;
}

/// Period (1..max_period) of the attracting logistic-map orbit at r, or 0 if none.
inline std::size_t logistic_period(double r, std::size_t max_period = 64, double tol = 1e-9) {
  double x = 0.3;
  for (int i = 0; i < 200000; ++i) x = r * x * (1.0 - x);
  std::vector<double> orbit(max_period + 1);
  orbit[0] = x;
  for (std::size_t i = 1; i <= max_period; ++i) orbit[i] = r * orbit[i - 1] * (1.0 - orbit[i - 1]);
  for (std::size_t p = 1; p <= max_period; ++p)
    if (std::abs(orbit[p] - orbit[0]) < tol) return p;
  return 0;
}

/// O(n^2) one-sided periodogram, normalised so the bins sum to the population variance.
inline std::vector<double> naive_periodogram(const std::vector<double>& s) {
  const std::size_t n = s.size();
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> out;
  for (std::size_t j = 0; j <= n / 2; ++j) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
      const long double ang = -2.0L * 3.14159265358979323846264338327950288L * j * k / n;
      re += (s[k] - mean) * std::cos(ang);
      im += (s[k] - mean) * std::sin(ang);
    }
    const bool mirrored = j != 0 && !(n % 2 == 0 && j == n / 2);
    out.push_back(static_cast<double>((re * re + im * im) / (static_cast<long double>(n) * n)) * (mirrored ? 2.0 : 1.0));
  }
  return out;
}

/// Largest eigenvalue of a symmetric positive semi-definite matrix by power iteration.
inline double power_iteration(const Mat& a, int iters = 5000) {
  const std::size_t n = a.size();
  std::vector<double> v(n, 1.0), w(n);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) w[i] += a[i][j] * v[j];
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    lambda = norm;
  }
  return lambda;
}

}  // namespace oracle
