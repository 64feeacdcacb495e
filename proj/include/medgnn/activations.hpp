#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "medgnn/common.hpp"
#include "medgnn/neighborhood.hpp"
#include "medgnn/signal.hpp"

namespace medgnn {

// ---------------------------------------------------------------------------
// ReLU baseline

struct ReluCache {
  bool valid = false;
  int batch = 0, features = 0, nodes = 0;
  std::vector<std::uint8_t> mask;  // 1 where input > 0
};

inline SignalBatch relu_forward(const SignalBatch& x, ReluCache& cache) {
  cache.valid = true;
  cache.batch = x.batch;
  cache.features = x.features;
  cache.nodes = x.nodes;
  cache.mask.resize(x.values.size());
  SignalBatch out(x.batch, x.features, x.nodes);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const bool pos = x.values[i] > 0.0;  // subgradient 0 at the kink
    cache.mask[i] = pos;
    out.values[i] = pos ? x.values[i] : 0.0;
  }
  return out;
}

inline SignalBatch relu_backward(const ReluCache& cache, const SignalBatch& grad_out) {
  if (!cache.valid) throw ShapeError("relu_backward: cache not produced by a forward pass");
  if (grad_out.batch != cache.batch || grad_out.features != cache.features ||
      grad_out.nodes != cache.nodes)
    throw ShapeError("relu_backward: gradient shape does not match cache");
  SignalBatch grad_x(grad_out.batch, grad_out.features, grad_out.nodes);
  for (std::size_t i = 0; i < grad_out.values.size(); ++i)
    grad_x.values[i] = cache.mask[i] ? grad_out.values[i] : 0.0;
  return grad_x;
}

// ---------------------------------------------------------------------------
// Median selection

namespace detail {

// Median of values over a sorted member id list. Odd m: middle element.
// Even m: the (m/2 + 1)-th order statistic (upper median). Both are the
// 0-based rank m/2, picked with introselect. Returns the median value and the
// smallest member id holding it, so tie routing is deterministic.
inline std::pair<double, int> median_select(std::span<const int> members,
                                            const double* values,
                                            std::vector<double>& scratch) {
  const std::size_t m = members.size();
  if (m == 1) return {values[members[0]], members[0]};
  scratch.resize(m);
  for (std::size_t t = 0; t < m; ++t) scratch[t] = values[members[t]];
  auto mid = scratch.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(scratch.begin(), mid, scratch.end());
  const double med = *mid;
  for (int j : members)
    if (values[j] == med) return {med, j};
  throw NumericalError("median_select: selected value not found among members");
}

}  // namespace detail

// Selected member node id per (sample, feature, node).
struct StaticMedianCache {
  bool valid = false;
  int batch = 0, features = 0, nodes = 0, hop = 0;
  std::vector<std::int32_t> selected;

  std::size_t index(int b, int f, int i) const {
    return (static_cast<std::size_t>(b) * features + f) * nodes + i;
  }
};

// Output at node i is the median of the input over the extended hop-r
// neighborhood of i, per sample and per feature.
inline SignalBatch static_median_forward(const SignalBatch& x, const NeighborhoodTable& tbl,
                                         int r, StaticMedianCache& cache) {
  if (r < 0 || r > tbl.max_hop())
    throw ShapeError("static_median_forward: hop " + std::to_string(r) +
                     " exceeds table max_hop " + std::to_string(tbl.max_hop()));
  if (x.nodes != tbl.n_nodes())
    throw ShapeError("static_median_forward: signal nodes != table nodes");

  cache.valid = true;
  cache.batch = x.batch;
  cache.features = x.features;
  cache.nodes = x.nodes;
  cache.hop = r;
  cache.selected.resize(x.values.size());

  SignalBatch out(x.batch, x.features, x.nodes);
  std::vector<double> scratch(static_cast<std::size_t>(tbl.max_size()));
  for (int b = 0; b < x.batch; ++b)
    for (int f = 0; f < x.features; ++f) {
      const double* v = x.slice(b, f);
      double* o = out.slice(b, f);
      for (int i = 0; i < x.nodes; ++i) {
        auto [med, sel] = detail::median_select(tbl.members(i, r), v, scratch);
        o[i] = med;
        cache.selected[cache.index(b, f, i)] = sel;
      }
    }
  return out;
}

// Routes each node's upstream gradient to the member whose value was
// selected, as with max pooling.
inline SignalBatch static_median_backward(const NeighborhoodTable& tbl, int r,
                                          const StaticMedianCache& cache,
                                          const SignalBatch& grad_out) {
  if (!cache.valid)
    throw ShapeError("static_median_backward: cache not produced by a forward pass");
  if (cache.hop != r || cache.nodes != tbl.n_nodes())
    throw ShapeError("static_median_backward: cache does not match table/hop");
  if (grad_out.batch != cache.batch || grad_out.features != cache.features ||
      grad_out.nodes != cache.nodes)
    throw ShapeError("static_median_backward: gradient shape does not match cache");

  SignalBatch grad_x(grad_out.batch, grad_out.features, grad_out.nodes);
  for (int b = 0; b < grad_out.batch; ++b)
    for (int f = 0; f < grad_out.features; ++f) {
      const double* go = grad_out.slice(b, f);
      double* gx = grad_x.slice(b, f);
      for (int i = 0; i < grad_out.nodes; ++i)
        gx[cache.selected[cache.index(b, f, i)]] += go[i];
    }
  return grad_x;
}

// ---------------------------------------------------------------------------
// Dynamic median: trainable mixture of medians at hops 0..reach

struct DynamicMedianParams {
  int reach = 0;
  std::vector<double> omega;  // length reach + 1, shared across features

  DynamicMedianParams() = default;
  explicit DynamicMedianParams(int r) : reach(r), omega(r + 1, 0.0) {
    omega[0] = 1.0;  // start as the identity activation
  }

  long param_count() const { return static_cast<long>(omega.size()); }
};

// Median stack z and selected ids per (sample, feature, node, hop).
struct DynamicMedianCache {
  bool valid = false;
  int batch = 0, features = 0, nodes = 0, reach = 0;
  std::vector<double> z;
  std::vector<std::int32_t> selected;

  std::size_t index(int b, int f, int i, int r) const {
    return ((static_cast<std::size_t>(b) * features + f) * nodes + i) * (reach + 1) + r;
  }
};

inline SignalBatch dynamic_median_forward(const SignalBatch& x, const NeighborhoodTable& tbl,
                                          const DynamicMedianParams& p,
                                          DynamicMedianCache& cache) {
  if (static_cast<int>(p.omega.size()) != p.reach + 1)
    throw ShapeError("dynamic_median_forward: omega length != reach + 1");
  if (p.reach > tbl.max_hop())
    throw ShapeError("dynamic_median_forward: reach exceeds table max_hop");
  if (x.nodes != tbl.n_nodes())
    throw ShapeError("dynamic_median_forward: signal nodes != table nodes");

  cache.valid = true;
  cache.batch = x.batch;
  cache.features = x.features;
  cache.nodes = x.nodes;
  cache.reach = p.reach;
  const std::size_t stacked = x.values.size() * (p.reach + 1);
  cache.z.resize(stacked);
  cache.selected.resize(stacked);

  SignalBatch out(x.batch, x.features, x.nodes);
  std::vector<double> scratch(static_cast<std::size_t>(tbl.max_size()));
  for (int b = 0; b < x.batch; ++b)
    for (int f = 0; f < x.features; ++f) {
      const double* v = x.slice(b, f);
      double* o = out.slice(b, f);
      for (int i = 0; i < x.nodes; ++i) {
        double acc = 0.0;
        const std::size_t base = cache.index(b, f, i, 0);
        for (int r = 0; r <= p.reach; ++r) {
          auto [med, sel] = detail::median_select(tbl.members(i, r), v, scratch);
          cache.z[base + r] = med;
          cache.selected[base + r] = sel;
          acc += p.omega[r] * med;
        }
        o[i] = acc;
      }
    }
  return out;
}

struct DynamicMedianGradients {
  std::vector<double> grad_omega;
  SignalBatch grad_x;
};

// The output is linear in omega, so grad_omega is exact; grad_x routes
// omega_r-weighted gradient to each hop's selected member.
inline DynamicMedianGradients dynamic_median_backward(const NeighborhoodTable& tbl,
                                                      const DynamicMedianParams& p,
                                                      const DynamicMedianCache& cache,
                                                      const SignalBatch& grad_out) {
  if (!cache.valid)
    throw ShapeError("dynamic_median_backward: cache not produced by a forward pass");
  if (cache.reach != p.reach || cache.nodes != tbl.n_nodes())
    throw ShapeError("dynamic_median_backward: cache does not match table/params");
  if (grad_out.batch != cache.batch || grad_out.features != cache.features ||
      grad_out.nodes != cache.nodes)
    throw ShapeError("dynamic_median_backward: gradient shape does not match cache");

  DynamicMedianGradients g;
  g.grad_omega.assign(p.omega.size(), 0.0);
  g.grad_x = SignalBatch(grad_out.batch, grad_out.features, grad_out.nodes);
  for (int b = 0; b < grad_out.batch; ++b)
    for (int f = 0; f < grad_out.features; ++f) {
      const double* go = grad_out.slice(b, f);
      double* gx = g.grad_x.slice(b, f);
      for (int i = 0; i < grad_out.nodes; ++i) {
        const std::size_t base = cache.index(b, f, i, 0);
        const double gi = go[i];
        for (int r = 0; r <= p.reach; ++r) {
          g.grad_omega[r] += gi * cache.z[base + r];
          gx[cache.selected[base + r]] += p.omega[r] * gi;
        }
      }
    }
  return g;
}

}  // namespace medgnn
