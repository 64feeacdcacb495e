#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "medgnn/common.hpp"
#include "medgnn/dataset.hpp"
#include "medgnn/graph.hpp"
#include "medgnn/matrix.hpp"
#include "medgnn/neighborhood.hpp"
#include "medgnn/spectral.hpp"

namespace medgnn {

// The c highest-degree nodes, ties broken by smaller id.
inline std::vector<int> top_degree_nodes(const Graph& g, int c) {
  if (c < 0 || c > g.n_nodes)
    throw ValidationError("top_degree_nodes: requested " + std::to_string(c) +
                          " nodes from a graph with " + std::to_string(g.n_nodes));
  std::vector<int> deg = node_degrees(g);
  std::vector<int> ids(g.n_nodes);
  std::iota(ids.begin(), ids.end(), 0);
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (deg[a] != deg[b]) return deg[a] > deg[b];
    return a < b;
  });
  ids.resize(c);
  return ids;
}

// x(t) = W^t e_source via t matrix-vector products.
inline std::vector<double> diffuse(const ShiftMatrix& w, int source, int t) {
  if (source < 0 || source >= w.rows())
    throw ValidationError("diffuse: invalid source node " + std::to_string(source));
  if (t < 0) throw ValidationError("diffuse: negative time");
  std::vector<double> x(w.rows(), 0.0), next(w.rows());
  x[source] = 1.0;
  for (int step = 0; step < t; ++step) {
    w.matvec(x.data(), next.data());
    std::swap(x, next);
  }
  return x;
}

enum class DiffusionGso { Normalized, Raw };

inline DiffusionGso parse_diffusion_gso(const std::string& s) {
  if (s == "normalized") return DiffusionGso::Normalized;
  if (s == "raw") return DiffusionGso::Raw;
  throw ConfigError("diffusion_gso must be 'normalized' or 'raw', got '" + s + "'");
}

struct DiffusionOptions {
  int t_max = 4;  // diffusion time drawn uniformly from {0, ..., t_max}
  DiffusionGso gso = DiffusionGso::Normalized;
};

// Labeled diffusion processes: each sample picks a source class and a time
// uniformly at random and observes x(t). Sample i draws from the sub-seed
// mix_seed(seed, i), so generation is order-independent.
inline Dataset generate_diffusion_dataset(const Graph& g, const std::vector<int>& classes,
                                          int n_samples, std::uint64_t seed,
                                          const DiffusionOptions& opt = {}) {
  if (classes.empty()) throw ValidationError("generate_diffusion_dataset: no classes");
  if (n_samples < 1) throw ValidationError("generate_diffusion_dataset: no samples");
  if (opt.t_max < 0) throw ValidationError("generate_diffusion_dataset: negative t_max");
  for (int c : classes)
    if (c < 0 || c >= g.n_nodes)
      throw ValidationError("generate_diffusion_dataset: class node out of range");

  const ShiftMatrix w =
      opt.gso == DiffusionGso::Normalized ? normalized_adjacency(g) : adjacency(g);

  Dataset d;
  d.n = g.n_nodes;
  d.classes = static_cast<int>(classes.size());
  d.seed = seed;
  for (int c : classes) d.class_map.push_back("node:" + std::to_string(c));
  d.samples.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    const int label = static_cast<int>(rng.uniform_index(classes.size()));
    const int t = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(opt.t_max) + 1));
    d.samples[i].signal = diffuse(w, classes[label], t);
    d.samples[i].label = label;
  }
  return d;
}

// Directed variant of an undirected graph: each edge keeps exactly one of its
// two arcs, chosen by a seeded coin. Weak connectivity is preserved.
inline Graph orient_randomly(const Graph& g, std::uint64_t seed) {
  if (g.directed) throw ValidationError("orient_randomly: graph is already directed");
  Rng rng(seed);
  std::vector<Edge> arcs;
  for (const Edge& e : g.edges) {
    if (e.src > e.dst) continue;
    arcs.push_back(rng.uniform() < 0.5 ? Edge{e.src, e.dst, e.weight}
                                       : Edge{e.dst, e.src, e.weight});
  }
  return make_graph(g.n_nodes, std::move(arcs), /*directed=*/true);
}

// Connected random geometric graph on the unit square: nodes within the given
// radius are joined. Deterministic; the position seed advances until the
// graph is connected.
inline Graph random_geometric_graph(int n, double radius, std::uint64_t seed,
                                    int max_attempts = 100) {
  if (n < 1) throw ValidationError("random_geometric_graph: need at least one node");
  if (radius <= 0.0) throw ValidationError("random_geometric_graph: radius must be positive");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<double> px(n), py(n);
    for (int i = 0; i < n; ++i) {
      px[i] = rng.uniform();
      py[i] = rng.uniform();
    }
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double dx = px[i] - px[j], dy = py[i] - py[j];
        if (dx * dx + dy * dy <= radius * radius) edges.push_back({i, j, 1.0});
      }
    Graph g = make_graph(n, std::move(edges), /*directed=*/false);
    if (static_cast<int>(extended_neighborhood(g, 0, n).size()) == n) return g;
  }
  throw ValidationError("random_geometric_graph: no connected sample within attempt budget");
}

}  // namespace medgnn
