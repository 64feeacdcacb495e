#pragma once

// Shared test utilities: independent oracles and random input generators.
// Oracles here deliberately avoid the library's compute paths: the BFS oracle
// scans the raw edge list, the median oracle fully sorts.

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "medgnn/graph.hpp"
#include "medgnn/model.hpp"
#include "medgnn/signal.hpp"
#include "medgnn/spectral.hpp"

namespace testutil {

// Truncated breadth-first search by repeated frontier expansion over the raw
// edge list. Returns nodes with hop distance exactly dist[j], -1 unreachable.
inline std::vector<int> bfs_oracle_distances(const medgnn::Graph& g, int start, int max_hop,
                                             medgnn::NeighborhoodDirection dir) {
  std::vector<int> dist(g.n_nodes, -1);
  dist[start] = 0;
  std::set<int> frontier = {start};
  for (int hop = 1; hop <= max_hop && !frontier.empty(); ++hop) {
    std::set<int> next;
    for (const medgnn::Edge& e : g.edges) {
      const int from = dir == medgnn::NeighborhoodDirection::In ? e.dst : e.src;
      const int to = dir == medgnn::NeighborhoodDirection::In ? e.src : e.dst;
      if (frontier.count(from) && dist[to] < 0) next.insert(to);
    }
    for (int v : next) dist[v] = hop;
    frontier = std::move(next);
  }
  return dist;
}

inline std::vector<int> bfs_oracle_extended(const medgnn::Graph& g, int start, int r,
                                            medgnn::NeighborhoodDirection dir) {
  auto dist = bfs_oracle_distances(g, start, r, dir);
  std::vector<int> out;
  for (int j = 0; j < g.n_nodes; ++j)
    if (dist[j] >= 0 && dist[j] <= r) out.push_back(j);
  return out;
}

// Full-sort median with the upper rule for even counts: sorted[(m-1)/2] for
// odd m, sorted[m/2] for even m (the (m/2+1)-th order statistic).
inline double sort_median_oracle(const std::vector<double>& values) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  return m % 2 == 1 ? sorted[(m - 1) / 2] : sorted[m / 2];
}

inline medgnn::Graph random_graph(int n, double edge_prob, bool directed, std::uint64_t seed) {
  medgnn::Rng rng(seed);
  std::vector<medgnn::Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = directed ? 0 : i + 1; j < n; ++j) {
      if (i == j) continue;
      if (rng.uniform() < edge_prob) edges.push_back({i, j, rng.uniform(0.2, 2.0)});
    }
  return medgnn::make_graph(n, std::move(edges), directed);
}

inline medgnn::SignalBatch random_batch(int b, int f, int n, std::uint64_t seed,
                                        double lo = -2.0, double hi = 2.0) {
  medgnn::SignalBatch x(b, f, n);
  medgnn::Rng rng(seed);
  for (double& v : x.values) v = rng.uniform(lo, hi);
  return x;
}

// Relative error with an absolute floor, for comparing analytic gradients
// against finite differences whose noise floor is around 1e-9.
inline bool grad_close(double analytic, double numeric, double rtol = 1e-5,
                       double atol = 1e-7) {
  const double diff = std::abs(analytic - numeric);
  return diff <= atol || diff <= rtol * std::max(std::abs(analytic), std::abs(numeric));
}

// Central finite difference of a scalar function at *param.
inline double central_difference(const std::function<double()>& f, double* param,
                                 double step = 1e-6) {
  const double saved = *param;
  *param = saved + step;
  const double up = f();
  *param = saved - step;
  const double down = f();
  *param = saved;
  return (up - down) / (2.0 * step);
}

// Checks every entry of an analytic gradient tensor against central finite
// differences of the loss closure. Returns the number of failures.
inline int check_gradient_tensor(const std::function<double()>& loss, double* params,
                                 const double* analytic, std::size_t size,
                                 double step = 1e-6, double rtol = 1e-5) {
  int failures = 0;
  for (std::size_t i = 0; i < size; ++i) {
    const double numeric = central_difference(loss, params + i, step);
    if (!grad_close(analytic[i], numeric, rtol)) ++failures;
  }
  return failures;
}

// A model/input draw whose conv outputs keep every neighborhood window
// tie-free (and clear of the relu kink), so the composed loss is
// differentiable at the drawn point and finite differences are meaningful.
struct FdSetup {
  medgnn::Graph graph;
  medgnn::ShiftMatrix shift;
  medgnn::NeighborhoodTable table;
  medgnn::ModelParams model;
  medgnn::SignalBatch x;
  std::vector<int> labels;
};

inline FdSetup make_non_tie_setup(const medgnn::ActivationSpec& activation,
                                  std::uint64_t seed, int nodes = 6) {
  using namespace medgnn;
  const int f_out = 3, taps = 3, classes = 3, batch = 2;
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t s = mix_seed(seed, attempt);
    FdSetup setup;
    setup.graph = random_graph(nodes, 0.5, false, mix_seed(s, 1));
    if (setup.graph.edges.empty()) continue;
    setup.shift = normalized_adjacency(setup.graph);
    setup.table =
        build_neighborhood_table(setup.graph, std::max(1, activation.required_hops()));
    setup.model = init_model(activation, 1, f_out, taps, nodes, classes, mix_seed(s, 2));
    if (activation.kind == ActivationKind::DynamicMedian) {
      Rng rng(mix_seed(s, 3));
      for (double& w : setup.model.median.omega) w = rng.uniform(-1.0, 1.0);
    }
    setup.x = random_batch(batch, 1, nodes, mix_seed(s, 4));
    setup.labels.clear();
    Rng lrng(mix_seed(s, 5));
    for (int b = 0; b < batch; ++b)
      setup.labels.push_back(static_cast<int>(lrng.uniform_index(classes)));

    FilterCache fc;
    SignalBatch conv = filter_forward(setup.model.filter, setup.shift, setup.x, fc);
    bool ok = true;
    const int hops = activation.required_hops();
    for (int b = 0; b < batch && ok; ++b)
      for (int f = 0; f < f_out && ok; ++f)
        for (int i = 0; i < nodes && ok; ++i) {
          if (std::abs(conv.at(b, f, i)) < 1e-3) ok = false;
          for (int r = 0; r <= hops && ok; ++r) {
            auto members = setup.table.members(i, r);
            for (std::size_t a = 0; a < members.size() && ok; ++a)
              for (std::size_t c = a + 1; c < members.size() && ok; ++c)
                if (std::abs(conv.at(b, f, members[a]) - conv.at(b, f, members[c])) < 1e-3)
                  ok = false;
          }
        }
    if (ok) return setup;
  }
}

// Permutation helpers: perm[i] is the new id of original node i.
inline medgnn::Graph permute_graph(const medgnn::Graph& g, const std::vector<int>& perm) {
  std::vector<medgnn::Edge> edges;
  for (const medgnn::Edge& e : g.edges) edges.push_back({perm[e.src], perm[e.dst], e.weight});
  medgnn::Graph out;
  out.n_nodes = g.n_nodes;
  out.directed = g.directed;
  out.edges = std::move(edges);
  medgnn::validate_graph(out);
  return out;
}

}  // namespace testutil
