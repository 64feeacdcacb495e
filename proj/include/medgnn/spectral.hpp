#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "medgnn/common.hpp"
#include "medgnn/graph.hpp"
#include "medgnn/matrix.hpp"

namespace medgnn {

namespace detail {

inline void normalize_inplace(std::vector<double>& v) {
  double n = norm2(v.data(), v.size());
  if (n > 0.0)
    for (double& x : v) x /= n;
}

// Power iteration on A + I for sign-uniform A (|A| taken entrywise when the
// matrix is nonpositive; magnitudes of the spectrum are unchanged). The shift
// makes the iteration aperiodic, so bipartite patterns converge too.
inline double radius_nonnegative(const DenseMatrix& a, bool flip_sign, double tol,
                                 int max_iter, Rng& rng) {
  const int n = a.rows();
  std::vector<double> v(n), w(n);
  for (double& x : v) x = rng.uniform(0.5, 1.5);
  normalize_inplace(v);

  double est = 0.0, prev = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    a.matvec(v.data(), w.data());
    if (flip_sign)
      for (int i = 0; i < n; ++i) w[i] = -w[i] + v[i];
    else
      for (int i = 0; i < n; ++i) w[i] += v[i];
    double nw = norm2(w.data(), n);
    est = nw - 1.0;
    if (nw == 0.0) return 0.0;
    for (int i = 0; i < n; ++i) v[i] = w[i] / nw;
    if (it > 0 && std::abs(est - prev) <= tol * std::max(1.0, std::abs(est)))
      return std::abs(est);
    prev = est;
  }
  throw ConvergenceError("spectral_radius: power iteration did not converge; last estimate " +
                             format_double(std::abs(est)),
                         std::abs(est));
}

// General case: fit the dominant quadratic S^2 v = alpha S v + beta v and take
// the largest root magnitude. Handles a dominant real eigenvalue, a +/- pair
// and a complex conjugate pair.
inline double radius_general(const DenseMatrix& a, double tol, int max_iter, Rng& rng) {
  const int n = a.rows();
  std::vector<double> v(n), w(n), u(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  normalize_inplace(v);

  double est = 0.0, prev = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    a.matvec(v.data(), w.data());
    double nw = norm2(w.data(), n);
    if (nw < 1e-300) return 0.0;  // iterate annihilated: nilpotent direction
    a.matvec(w.data(), u.data());

    const double ww = dot(w.data(), w.data(), n);
    const double wv = dot(w.data(), v.data(), n);
    const double vv = dot(v.data(), v.data(), n);
    const double wu = dot(w.data(), u.data(), n);
    const double vu = dot(v.data(), u.data(), n);
    const double det = ww * vv - wv * wv;
    double alpha, beta;
    if (std::abs(det) < 1e-300) {
      // w is parallel to v: v is already an eigenvector.
      alpha = wv / vv;
      beta = 0.0;
    } else {
      alpha = (wu * vv - vu * wv) / det;
      beta = (ww * vu - wv * wu) / det;
    }
    const double disc = alpha * alpha + 4.0 * beta;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      est = std::max(std::abs((alpha + s) / 2.0), std::abs((alpha - s) / 2.0));
    } else {
      est = std::sqrt(-beta);  // complex pair: |roots|^2 = -beta
    }

    double nu = norm2(u.data(), n);
    if (nu < 1e-300) return 0.0;
    for (int i = 0; i < n; ++i) v[i] = u[i] / nu;
    if (it > 0 && std::abs(est - prev) <= tol * std::max(1.0, std::abs(est))) return est;
    prev = est;
  }
  throw ConvergenceError("spectral_radius: power iteration did not converge; last estimate " +
                             format_double(est),
                         est);
}

}  // namespace detail

// Largest eigenvalue magnitude of a square matrix, by seeded power iteration.
inline double spectral_radius(const ShiftMatrix& s, double tol = 1e-9,
                              int max_iter = 5000) {
  if (s.rows() != s.cols()) throw ShapeError("spectral_radius: matrix not square");
  if (tol <= 0.0) throw ValidationError("spectral_radius: tol must be positive");
  if (s.rows() == 0 || s.is_zero())
    throw ValidationError("spectral_radius: no spectral radius for zero matrix");

  bool nonneg = true, nonpos = true;
  for (double v : s.data()) {
    if (v < 0.0) nonneg = false;
    if (v > 0.0) nonpos = false;
  }
  Rng rng(0x5eed5eedULL);
  if (nonneg || nonpos)
    return detail::radius_nonnegative(s, nonpos, tol, max_iter, rng);
  return detail::radius_general(s, tol, max_iter, rng);
}

// Adjacency scaled so its spectral radius is 1 within tol.
inline ShiftMatrix normalized_adjacency(const Graph& g, double tol = 1e-9) {
  if (g.edges.empty())
    throw ValidationError("normalized_adjacency: graph has no edges");
  ShiftMatrix w = adjacency(g);
  double rho = spectral_radius(w, tol);
  if (rho < 1e-12 * std::max(1.0, w.max_abs()))
    throw NumericalError("normalized_adjacency: spectral radius is numerically zero");
  w.scale(1.0 / rho);
  return w;
}

}  // namespace medgnn
