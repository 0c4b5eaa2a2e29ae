#pragma once

// Small dense numerics used by the measures and model modules: central
// finite-difference Jacobians, eigenvalues (closed forms up to 3x3, real
// Schur iteration above), linear solves, and a damped Newton root finder.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "basin/core.hpp"

namespace basin {

using Matrix = std::vector<std::vector<double>>;

/// Central-difference Jacobian of the model's rhs (mode 0) at x, with the
/// per-component step h_i = 1e-6 * (1 + |x_i|).
inline Matrix jacobian_fd(const SystemModel& model, std::span<const double> x) {
  const int n = model.dim;
  Matrix jac(n, std::vector<double>(n, 0.0));
  State xp(x.begin(), x.end()), xm(x.begin(), x.end());
  State fp(n), fm(n);
  for (int j = 0; j < n; ++j) {
    double h = 1e-6 * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    model.rhs(xp, 0.0, 0, fp);
    model.rhs(xm, 0.0, 0, fm);
    for (int i = 0; i < n; ++i) jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

struct EigenResult {
  std::vector<std::complex<double>> values;
  /// Set when the spectrum looks defective/ill-conditioned (nearly multiple
  /// roots) or the iteration hit its sweep budget.
  bool condition_warning = false;
};

namespace detail {

inline EigenResult eig2x2(double a, double b, double c, double d) {
  EigenResult r;
  double tr = a + d;
  double det = a * d - b * c;
  double disc = tr * tr - 4.0 * det;
  double scale = tr * tr + std::abs(det) + 1e-300;
  r.condition_warning = std::abs(disc) < 1e-10 * scale;
  if (disc >= 0.0) {
    double s = std::sqrt(disc);
    r.values = {{0.5 * (tr + s), 0.0}, {0.5 * (tr - s), 0.0}};
  } else {
    double s = std::sqrt(-disc);
    r.values = {{0.5 * tr, 0.5 * s}, {0.5 * tr, -0.5 * s}};
  }
  return r;
}

/// Roots of l^3 + a2 l^2 + a1 l + a0 (monic real cubic).
inline EigenResult cubic_roots(double a2, double a1, double a0) {
  EigenResult r;
  // Depressed form t^3 + p t + q with l = t - a2/3.
  double shift = a2 / 3.0;
  double p = a1 - a2 * a2 / 3.0;
  double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
  double half_q = 0.5 * q;
  double third_p = p / 3.0;
  double disc = half_q * half_q + third_p * third_p * third_p;
  double scale = std::pow(std::abs(p), 3) / 27.0 + q * q / 4.0 + 1e-300;
  r.condition_warning = std::abs(disc) < 1e-10 * scale;
  if (disc > 0.0) {
    // One real root t = u + v, plus the conjugate pair of
    // t^2 + (u+v) t + (u^2 - uv + v^2) in the depressed plane.
    double s = std::sqrt(disc);
    double u = std::cbrt(-half_q + s);
    double v = std::cbrt(-half_q - s);
    double real_root = u + v - shift;
    double re = -0.5 * (u + v) - shift;
    double im_sq = 0.75 * (u - v) * (u - v);
    double im = im_sq > 0.0 ? std::sqrt(im_sq) : 0.0;
    r.values = {{real_root, 0.0}, {re, im}, {re, -im}};
  } else {
    // Three real roots (trigonometric form).
    double rho = std::sqrt(-third_p * third_p * third_p);
    double theta = std::acos(std::clamp(-half_q / (rho + 1e-300), -1.0, 1.0));
    double mag = 2.0 * std::sqrt(-third_p);
    for (int k = 0; k < 3; ++k) {
      double t = mag * std::cos((theta + 2.0 * std::numbers::pi * k) / 3.0);
      r.values.push_back({t - shift, 0.0});
    }
  }
  return r;
}

/// Householder reduction to upper Hessenberg form, in place.
inline void hessenberg(Matrix& a) {
  const int n = static_cast<int>(a.size());
  for (int k = 0; k < n - 2; ++k) {
    double norm = 0.0;
    for (int i = k + 1; i < n; ++i) norm += a[i][k] * a[i][k];
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    if (a[k + 1][k] > 0.0) norm = -norm;
    std::vector<double> v(n, 0.0);
    v[k + 1] = a[k + 1][k] - norm;
    for (int i = k + 2; i < n; ++i) v[i] = a[i][k];
    double vnorm_sq = 0.0;
    for (int i = k + 1; i < n; ++i) vnorm_sq += v[i] * v[i];
    if (vnorm_sq == 0.0) continue;
    // A <- (I - 2 v v^T / v^T v) A (same from the right).
    for (int j = 0; j < n; ++j) {
      double dot = 0.0;
      for (int i = k + 1; i < n; ++i) dot += v[i] * a[i][j];
      double f = 2.0 * dot / vnorm_sq;
      for (int i = k + 1; i < n; ++i) a[i][j] -= f * v[i];
    }
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = k + 1; j < n; ++j) dot += a[i][j] * v[j];
      double f = 2.0 * dot / vnorm_sq;
      for (int j = k + 1; j < n; ++j) a[i][j] -= f * v[j];
    }
  }
}

/// Francis double-shift QR on an upper Hessenberg matrix; extracts eigenvalues
/// of deflated 1x1 / 2x2 trailing blocks.
inline EigenResult hessenberg_qr(Matrix h) {
  const int n = static_cast<int>(h.size());
  EigenResult result;
  int hi = n - 1;
  int sweeps = 0;
  const int max_sweeps = 60 * n;
  auto subdiag_small = [&](int i) {
    double s = std::abs(h[i - 1][i - 1]) + std::abs(h[i][i]);
    if (s == 0.0) s = 1.0;
    return std::abs(h[i][i - 1]) <= 1e-14 * s;
  };
  while (hi >= 0) {
    if (hi == 0) {
      result.values.push_back({h[0][0], 0.0});
      break;
    }
    if (subdiag_small(hi)) {
      result.values.push_back({h[hi][hi], 0.0});
      --hi;
      continue;
    }
    if (hi == 1 || subdiag_small(hi - 1)) {
      auto pair = eig2x2(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1],
                         h[hi][hi]);
      result.values.push_back(pair.values[0]);
      result.values.push_back(pair.values[1]);
      hi -= 2;
      continue;
    }
    if (++sweeps > max_sweeps) {
      // Give up gracefully: report diagonal entries for the stuck block.
      result.condition_warning = true;
      for (int i = 0; i <= hi; ++i) result.values.push_back({h[i][i], 0.0});
      break;
    }
    // Active block [lo, hi].
    int lo = hi - 1;
    while (lo > 0 && !subdiag_small(lo)) --lo;

    // Double-shift from the trailing 2x2 (occasionally perturbed to escape
    // cycles).
    double s = h[hi - 1][hi - 1] + h[hi][hi];
    double p = h[hi - 1][hi - 1] * h[hi][hi] - h[hi - 1][hi] * h[hi][hi - 1];
    if (sweeps % 16 == 0) {
      s = std::abs(h[hi][hi - 1]) + std::abs(h[hi - 1][hi - 2]);
      s *= 1.5;
      p = s * s * 0.25;
    }
    double x = h[lo][lo] * h[lo][lo] + h[lo][lo + 1] * h[lo + 1][lo] -
               s * h[lo][lo] + p;
    double y = h[lo + 1][lo] * (h[lo][lo] + h[lo + 1][lo + 1] - s);
    double z = (lo + 2 <= hi) ? h[lo + 1][lo] * h[lo + 2][lo + 1] : 0.0;

    for (int k = lo; k <= hi - 1; ++k) {
      // Householder on (x, y, z).
      double alpha = std::sqrt(x * x + y * y + z * z);
      if (alpha == 0.0) break;
      if (x > 0.0) alpha = -alpha;
      double v0 = x - alpha, v1 = y, v2 = z;
      double vnorm_sq = v0 * v0 + v1 * v1 + v2 * v2;
      if (vnorm_sq > 0.0) {
        int rows = (k + 2 <= hi) ? 3 : 2;
        // Left multiply rows k..k+rows-1.
        for (int j = std::max(0, k - 1); j <= hi; ++j) {
          double dot = v0 * h[k][j] + v1 * h[k + 1][j];
          if (rows == 3) dot += v2 * h[k + 2][j];
          double f = 2.0 * dot / vnorm_sq;
          h[k][j] -= f * v0;
          h[k + 1][j] -= f * v1;
          if (rows == 3) h[k + 2][j] -= f * v2;
        }
        // Right multiply columns k..k+rows-1.
        int row_end = std::min(hi, k + 3);
        for (int i = lo; i <= row_end; ++i) {
          double dot = v0 * h[i][k] + v1 * h[i][k + 1];
          if (rows == 3) dot += v2 * h[i][k + 2];
          double f = 2.0 * dot / vnorm_sq;
          h[i][k] -= f * v0;
          h[i][k + 1] -= f * v1;
          if (rows == 3) h[i][k + 2] -= f * v2;
        }
      }
      if (k < hi - 1) {
        x = h[k + 1][k];
        y = h[k + 2][k];
        z = (k + 3 <= hi) ? h[k + 3][k] : 0.0;
        if (k > lo) {
          h[k + 2][k - 1] = 0.0;
          // Restore the Hessenberg zeros the bulge introduced below.
        }
      }
    }
    // Clean numerical fuzz below the first subdiagonal inside the block.
    for (int i = lo + 2; i <= hi; ++i)
      for (int j = lo; j <= i - 2; ++j) h[i][j] = 0.0;
  }
  return result;
}

}  // namespace detail

/// All eigenvalues of a dense real matrix. Dimensions up to 3 use closed
/// forms of the characteristic polynomial; larger ones a real Schur iteration.
inline EigenResult eigenvalues(const Matrix& a) {
  const int n = static_cast<int>(a.size());
  if (n == 0) throw UsageError("eigenvalues of an empty matrix");
  if (n == 1) return {{{a[0][0], 0.0}}, false};
  if (n == 2) return detail::eig2x2(a[0][0], a[0][1], a[1][0], a[1][1]);
  if (n == 3) {
    double tr = a[0][0] + a[1][1] + a[2][2];
    double m01 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    double m02 = a[0][0] * a[2][2] - a[0][2] * a[2][0];
    double m12 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                 a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                 a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    // det(lI - A) = l^3 - tr l^2 + (sum of principal minors) l - det.
    return detail::cubic_roots(-tr, m01 + m02 + m12, -det);
  }
  Matrix h = a;
  detail::hessenberg(h);
  return detail::hessenberg_qr(std::move(h));
}

/// Solve a dense linear system by Gaussian elimination with partial pivoting.
/// Throws SolveError on (numerical) singularity.
inline State solve_linear(Matrix a, State b) {
  const int n = static_cast<int>(a.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    if (std::abs(a[piv][k]) < 1e-300)
      throw SolveError("singular matrix in linear solve", 0.0);
    std::swap(a[piv], a[k]);
    std::swap(b[piv], b[k]);
    for (int i = k + 1; i < n; ++i) {
      double f = a[i][k] / a[k][k];
      for (int j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  State x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Damped Newton iteration on the model's rhs (mode 0): finds x with
/// ||rhs(x)||_inf < 1e-10, backtracking when a full step fails to shrink the
/// residual. Throws SolveError (with the last residual) after 200 iterations.
inline State find_equilibrium(const SystemModel& model, State guess) {
  const int n = model.dim;
  if (static_cast<int>(guess.size()) != n)
    throw UsageError("equilibrium guess dimension does not match the model");
  constexpr double kTol = 1e-10;
  constexpr int kMaxIter = 200;
  State f(n), f_trial(n), trial(n);
  model.rhs(guess, 0.0, 0, f);
  double res = max_abs(f);
  for (int it = 0; it < kMaxIter; ++it) {
    if (res < kTol) return guess;
    Matrix jac = jacobian_fd(model, guess);
    State neg_f(n);
    for (int i = 0; i < n; ++i) neg_f[i] = -f[i];
    State delta;
    try {
      delta = solve_linear(std::move(jac), std::move(neg_f));
    } catch (const SolveError&) {
      throw SolveError("equilibrium solve hit a singular Jacobian", res);
    }
    double alpha = 1.0;
    bool improved = false;
    while (alpha >= 1.0 / 1024.0) {
      for (int i = 0; i < n; ++i) trial[i] = guess[i] + alpha * delta[i];
      model.rhs(trial, 0.0, 0, f_trial);
      double trial_res = max_abs(f_trial);
      if (std::isfinite(trial_res) && trial_res < res) {
        guess = trial;
        f = f_trial;
        res = trial_res;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved)
      throw SolveError("equilibrium iteration stalled (no descent step)", res);
  }
  if (res < kTol) return guess;
  throw SolveError("equilibrium iteration did not converge in 200 steps", res);
}

}  // namespace basin
