#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "medgnn/common.hpp"
#include "medgnn/matrix.hpp"

namespace medgnn {

inline constexpr int kMaxNodes = 10000;

struct Edge {
  int src = 0;
  int dst = 0;
  double weight = 1.0;
};

// Directed weighted graph over 0-based node ids. Undirected graphs are kept
// symmetric-closed: (i,j,w) implies (j,i,w). Self-loops are excluded from the
// edge list; self-membership of neighborhoods comes from the 0-hop term.
struct Graph {
  int n_nodes = 0;
  std::vector<Edge> edges;
  bool directed = false;
};

inline void validate_graph(const Graph& g) {
  if (g.n_nodes < 0 || g.n_nodes > kMaxNodes)
    throw ValidationError("graph: node count out of range [0, " +
                          std::to_string(kMaxNodes) + "]");
  std::map<std::pair<int, int>, double> seen;
  for (const Edge& e : g.edges) {
    if (e.src < 0 || e.dst < 0)
      throw ValidationError("graph: negative node id");
    if (e.src >= g.n_nodes || e.dst >= g.n_nodes)
      throw ValidationError("graph: node id " +
                            std::to_string(std::max(e.src, e.dst)) +
                            " >= n_nodes");
    if (e.src == e.dst)
      throw ValidationError("graph: self-loop at node " + std::to_string(e.src));
    if (!seen.emplace(std::make_pair(e.src, e.dst), e.weight).second)
      throw ValidationError("graph: duplicate edge (" + std::to_string(e.src) +
                            ", " + std::to_string(e.dst) + ")");
  }
  if (!g.directed) {
    for (const auto& [key, w] : seen) {
      auto rev = seen.find({key.second, key.first});
      if (rev == seen.end() || rev->second != w)
        throw ValidationError("graph: undirected edge list not symmetric at (" +
                              std::to_string(key.first) + ", " +
                              std::to_string(key.second) + ")");
    }
  }
}

// Builds a validated graph from raw arcs; for undirected graphs, missing
// reverse arcs are added with the same weight.
inline Graph make_graph(int n_nodes, std::vector<Edge> edges, bool directed) {
  Graph g;
  g.n_nodes = n_nodes;
  g.directed = directed;
  if (!directed) {
    std::map<std::pair<int, int>, double> seen;
    for (const Edge& e : edges) seen.emplace(std::make_pair(e.src, e.dst), e.weight);
    const std::size_t given = edges.size();
    for (std::size_t i = 0; i < given; ++i) {
      const Edge e = edges[i];
      auto rev = seen.find({e.dst, e.src});
      if (rev == seen.end()) {
        edges.push_back({e.dst, e.src, e.weight});
        seen.emplace(std::make_pair(e.dst, e.src), e.weight);
      } else if (rev->second != e.weight) {
        throw ValidationError("graph: conflicting weights on undirected edge (" +
                              std::to_string(e.src) + ", " + std::to_string(e.dst) + ")");
      }
    }
  }
  g.edges = std::move(edges);
  validate_graph(g);
  return g;
}

// Parses whitespace-separated "src dst [weight]" lines; '#' lines are
// comments; weight defaults to 1. Node count is 1 + max id seen.
inline Graph load_edge_list(std::istream& in, bool directed) {
  std::vector<Edge> edges;
  int max_id = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long src = 0, dst = 0;
    double w = 1.0;
    if (!(ls >> src >> dst))
      throw ParseError("edge list: malformed line " + std::to_string(line_no));
    if (!ls.eof()) {
      if (!(ls >> w)) {
        // Distinguish a bad weight token from trailing whitespace.
        ls.clear();
        std::string rest;
        if (ls >> rest)
          throw ParseError("edge list: malformed line " + std::to_string(line_no));
      }
      std::string extra;
      if (ls >> extra)
        throw ParseError("edge list: trailing tokens on line " + std::to_string(line_no));
    }
    if (src < 0 || dst < 0)
      throw ValidationError("edge list: negative node id on line " + std::to_string(line_no));
    if (src >= kMaxNodes || dst >= kMaxNodes)
      throw ValidationError("edge list: node id exceeds " + std::to_string(kMaxNodes - 1) +
                            " on line " + std::to_string(line_no));
    edges.push_back({static_cast<int>(src), static_cast<int>(dst), w});
    max_id = std::max(max_id, static_cast<int>(std::max(src, dst)));
  }
  return make_graph(max_id + 1, std::move(edges), directed);
}

inline void save_edge_list(std::ostream& out, const Graph& g) {
  for (const Edge& e : g.edges)
    out << e.src << ' ' << e.dst << ' ' << format_double(e.weight) << '\n';
}

// Adjacency with the transpose convention: entry (i, j) holds the weight of
// arc (j, i), so a matrix-vector product aggregates over in-edges.
inline ShiftMatrix adjacency(const Graph& g) {
  ShiftMatrix m(g.n_nodes, g.n_nodes);
  for (const Edge& e : g.edges) m(e.dst, e.src) = e.weight;
  return m;
}

// Which arcs a node's neighborhood follows on a directed graph.
enum class NeighborhoodDirection { In, Out };

inline NeighborhoodDirection parse_direction(const std::string& s) {
  if (s == "in") return NeighborhoodDirection::In;
  if (s == "out") return NeighborhoodDirection::Out;
  throw ConfigError("neighborhood_direction must be 'in' or 'out', got '" + s + "'");
}

// 0/1 matrix with the edge sparsity pattern, oriented to match the chosen
// neighborhood direction. Used only for neighborhood bookkeeping.
inline ShiftMatrix binary_gso(const Graph& g,
                              NeighborhoodDirection dir = NeighborhoodDirection::In) {
  ShiftMatrix m(g.n_nodes, g.n_nodes);
  for (const Edge& e : g.edges) {
    if (dir == NeighborhoodDirection::In)
      m(e.dst, e.src) = 1.0;
    else
      m(e.src, e.dst) = 1.0;
  }
  return m;
}

// Undirected: incident edge count. Directed: in-degree + out-degree.
inline std::vector<int> node_degrees(const Graph& g) {
  std::vector<int> deg(g.n_nodes, 0);
  if (g.directed) {
    for (const Edge& e : g.edges) {
      deg[e.src] += 1;
      deg[e.dst] += 1;
    }
  } else {
    for (const Edge& e : g.edges) deg[e.src] += 1;
  }
  return deg;
}

}  // namespace medgnn
