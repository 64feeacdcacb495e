#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "medgnn/common.hpp"
#include "medgnn/matrix.hpp"
#include "medgnn/signal.hpp"

namespace medgnn {

// Coefficients of a bank of polynomial graph filters: output feature g is
// sum over input features f and taps k of h[g][f][k] * S^k x[f].
struct FilterBankParams {
  int f_in = 0;
  int f_out = 0;
  int taps = 0;
  std::vector<double> h;  // [f_out][f_in][taps]

  FilterBankParams() = default;
  FilterBankParams(int in, int out, int k)
      : f_in(in), f_out(out), taps(k),
        h(static_cast<std::size_t>(in) * out * k, 0.0) {}

  std::size_t index(int g, int f, int k) const {
    return (static_cast<std::size_t>(g) * f_in + f) * taps + k;
  }
  double& coeff(int g, int f, int k) { return h[index(g, f, k)]; }
  double coeff(int g, int f, int k) const { return h[index(g, f, k)]; }

  long param_count() const { return static_cast<long>(h.size()); }
};

// Shifted input powers S^k x saved by the forward pass.
struct FilterCache {
  bool valid = false;
  int batch = 0, f_in = 0, taps = 0, nodes = 0;
  std::vector<double> shifted;  // [batch][f_in][taps][node]

  std::size_t index(int b, int f, int k, int n) const {
    return ((static_cast<std::size_t>(b) * f_in + f) * taps + k) * nodes + n;
  }
  double* slice(int b, int f, int k) { return shifted.data() + index(b, f, k, 0); }
  const double* slice(int b, int f, int k) const { return shifted.data() + index(b, f, k, 0); }
};

// Applies the filter bank by repeated shifting: z_0 = x, z_k = S z_{k-1}.
// S^k is never formed.
inline SignalBatch filter_forward(const FilterBankParams& p, const ShiftMatrix& s,
                                  const SignalBatch& x, FilterCache& cache) {
  if (x.features != p.f_in)
    throw ShapeError("filter_forward: input features " + std::to_string(x.features) +
                     " != f_in " + std::to_string(p.f_in));
  if (x.nodes != s.rows())
    throw ShapeError("filter_forward: signal nodes != shift matrix size");

  const int n = x.nodes;
  cache.valid = true;
  cache.batch = x.batch;
  cache.f_in = p.f_in;
  cache.taps = p.taps;
  cache.nodes = n;
  cache.shifted.assign(static_cast<std::size_t>(x.batch) * p.f_in * p.taps * n, 0.0);

  SignalBatch out(x.batch, p.f_out, n);
  for (int b = 0; b < x.batch; ++b) {
    for (int f = 0; f < p.f_in; ++f) {
      const double* src = x.slice(b, f);
      double* z0 = cache.slice(b, f, 0);
      for (int i = 0; i < n; ++i) z0[i] = src[i];
      for (int k = 1; k < p.taps; ++k)
        s.matvec(cache.slice(b, f, k - 1), cache.slice(b, f, k));
    }
    for (int g = 0; g < p.f_out; ++g) {
      double* dst = out.slice(b, g);
      for (int f = 0; f < p.f_in; ++f) {
        for (int k = 0; k < p.taps; ++k) {
          const double c = p.coeff(g, f, k);
          if (c == 0.0) continue;
          const double* zk = cache.slice(b, f, k);
          for (int i = 0; i < n; ++i) dst[i] += c * zk[i];
        }
      }
    }
  }
  return out;
}

struct FilterGradients {
  std::vector<double> grad_h;  // same layout as FilterBankParams::h
  SignalBatch grad_x;
};

inline FilterGradients filter_backward(const FilterBankParams& p, const ShiftMatrix& s,
                                       const FilterCache& cache, const SignalBatch& grad_out) {
  if (!cache.valid) throw ShapeError("filter_backward: cache not produced by a forward pass");
  if (cache.f_in != p.f_in || cache.taps != p.taps)
    throw ShapeError("filter_backward: cache does not match filter parameters");
  if (grad_out.batch != cache.batch || grad_out.features != p.f_out ||
      grad_out.nodes != cache.nodes)
    throw ShapeError("filter_backward: gradient shape does not match cache");

  const int n = cache.nodes;
  FilterGradients g;
  g.grad_h.assign(p.h.size(), 0.0);
  g.grad_x = SignalBatch(cache.batch, p.f_in, n);

  // d loss / d h[g][f][k] = sum_b <grad_out[b][g], S^k x[b][f]>
  for (int gi = 0; gi < p.f_out; ++gi)
    for (int f = 0; f < p.f_in; ++f)
      for (int k = 0; k < p.taps; ++k) {
        double acc = 0.0;
        for (int b = 0; b < cache.batch; ++b)
          acc += dot(grad_out.slice(b, gi), cache.slice(b, f, k), n);
        g.grad_h[p.index(gi, f, k)] = acc;
      }

  // d loss / d x[b][f] = sum_g sum_k h[g][f][k] (S^T)^k grad_out[b][g]
  std::vector<double> t(n), t_next(n);
  for (int b = 0; b < cache.batch; ++b) {
    for (int gi = 0; gi < p.f_out; ++gi) {
      const double* go = grad_out.slice(b, gi);
      for (int i = 0; i < n; ++i) t[i] = go[i];
      for (int k = 0; k < p.taps; ++k) {
        if (k > 0) {
          s.matvec_transpose(t.data(), t_next.data());
          std::swap(t, t_next);
        }
        for (int f = 0; f < p.f_in; ++f) {
          const double c = p.coeff(gi, f, k);
          if (c == 0.0) continue;
          double* dst = g.grad_x.slice(b, f);
          for (int i = 0; i < n; ++i) dst[i] += c * t[i];
        }
      }
    }
  }
  return g;
}

}  // namespace medgnn
