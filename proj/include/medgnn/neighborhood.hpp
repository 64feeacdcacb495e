#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "medgnn/common.hpp"
#include "medgnn/graph.hpp"

namespace medgnn {

// Adjacency lists oriented for neighborhood traversal. For direction In,
// neighbors(v) are the sources of arcs into v, so hop distance from i counts
// steps against the arc direction (the direction a shift aggregates over).
inline std::vector<std::vector<int>> neighbor_lists(const Graph& g,
                                                    NeighborhoodDirection dir) {
  std::vector<std::vector<int>> adj(g.n_nodes);
  for (const Edge& e : g.edges) {
    if (dir == NeighborhoodDirection::In)
      adj[e.dst].push_back(e.src);
    else
      adj[e.src].push_back(e.dst);
  }
  for (auto& v : adj) std::sort(v.begin(), v.end());
  return adj;
}

namespace detail {

// BFS from i to depth max_hop; dist[j] = hop distance, -1 if unreached.
inline void bfs_distances(const std::vector<std::vector<int>>& adj, int i,
                          int max_hop, std::vector<int>& dist,
                          std::vector<int>& queue) {
  dist.assign(adj.size(), -1);
  queue.clear();
  dist[i] = 0;
  queue.push_back(i);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int u = queue[head];
    if (dist[u] == max_hop) continue;
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
}

}  // namespace detail

// Nodes at shortest-path distance exactly r from i. r = 0 yields {i}.
inline std::vector<int> exact_hop_set(const Graph& g, int i, int r,
                                      NeighborhoodDirection dir = NeighborhoodDirection::In) {
  if (i < 0 || i >= g.n_nodes) throw ValidationError("exact_hop_set: invalid node id");
  if (r < 0) throw ValidationError("exact_hop_set: negative hop count");
  auto adj = neighbor_lists(g, dir);
  std::vector<int> dist, queue;
  detail::bfs_distances(adj, i, r, dist, queue);
  std::vector<int> out;
  for (int j = 0; j < g.n_nodes; ++j)
    if (dist[j] == r) out.push_back(j);
  return out;
}

// Union of the exact hop sets for k = 0..r; always contains i.
inline std::vector<int> extended_neighborhood(const Graph& g, int i, int r,
                                              NeighborhoodDirection dir = NeighborhoodDirection::In) {
  if (i < 0 || i >= g.n_nodes) throw ValidationError("extended_neighborhood: invalid node id");
  if (r < 0) throw ValidationError("extended_neighborhood: negative hop count");
  auto adj = neighbor_lists(g, dir);
  std::vector<int> dist, queue;
  detail::bfs_distances(adj, i, r, dist, queue);
  std::vector<int> out;
  for (int j = 0; j < g.n_nodes; ++j)
    if (dist[j] >= 0 && dist[j] <= r) out.push_back(j);
  return out;
}

// Per node and per hop r in 0..max_hop, the extended r-hop neighborhood as a
// sorted id list. Built once per graph with one BFS sweep per node.
class NeighborhoodTable {
 public:
  NeighborhoodTable() = default;

  NeighborhoodTable(const Graph& g, int max_hop, NeighborhoodDirection dir)
      : n_nodes_(g.n_nodes), max_hop_(max_hop), direction_(dir) {
    if (max_hop < 0) throw ValidationError("neighborhood table: negative max_hop");
    auto adj = neighbor_lists(g, dir);
    members_.resize(static_cast<std::size_t>(n_nodes_) * (max_hop_ + 1));
    std::vector<int> dist, queue;
    for (int i = 0; i < n_nodes_; ++i) {
      detail::bfs_distances(adj, i, max_hop_, dist, queue);
      for (int r = 0; r <= max_hop_; ++r) {
        auto& m = members_[slot(i, r)];
        for (int j = 0; j < n_nodes_; ++j)
          if (dist[j] >= 0 && dist[j] <= r) m.push_back(j);
      }
    }
  }

  int n_nodes() const { return n_nodes_; }
  int max_hop() const { return max_hop_; }
  NeighborhoodDirection direction() const { return direction_; }

  std::span<const int> members(int i, int r) const {
    if (i < 0 || i >= n_nodes_ || r < 0 || r > max_hop_)
      throw ValidationError("neighborhood table: (node, hop) out of range");
    const auto& m = members_[slot(i, r)];
    return {m.data(), m.size()};
  }

  int size(int i, int r) const { return static_cast<int>(members(i, r).size()); }

  // Largest neighborhood in the table; used to size gather scratch buffers.
  int max_size() const {
    std::size_t m = 0;
    for (const auto& v : members_) m = std::max(m, v.size());
    return static_cast<int>(m);
  }

 private:
  std::size_t slot(int i, int r) const {
    return static_cast<std::size_t>(i) * (max_hop_ + 1) + r;
  }

  int n_nodes_ = 0;
  int max_hop_ = 0;
  NeighborhoodDirection direction_ = NeighborhoodDirection::In;
  std::vector<std::vector<int>> members_;
};

inline NeighborhoodTable build_neighborhood_table(
    const Graph& g, int max_hop, NeighborhoodDirection dir = NeighborhoodDirection::In) {
  return NeighborhoodTable(g, max_hop, dir);
}

}  // namespace medgnn
