#pragma once

// Directed periodic multi-graph built by periodic k-nearest neighbours. An
// edge (src, dst, image) connects atom src in the home cell to atom dst in the
// cell translated by image[0] l1 + image[1] l2 + image[2] l3.

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <tuple>
#include <vector>

#include "xtalgen/core/crystal.hpp"

namespace xtalgen {

using Image = std::array<int, 3>;

struct PeriodicEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  Image image{0, 0, 0};
  double distance = 0.0;  // Angstrom
};

struct PeriodicGraph {
  std::size_t num_nodes = 0;
  std::size_t k = 0;
  std::vector<PeriodicEdge> edges;  // sorted by (src, distance, dst, image)

  // Edges leaving `node`, in order of increasing distance.
  std::vector<PeriodicEdge> out_edges(std::size_t node) const {
    std::vector<PeriodicEdge> out;
    for (const auto& e : edges)
      if (e.src == node) out.push_back(e);
    return out;
  }
};

namespace detail {

inline bool edge_less(const PeriodicEdge& a, const PeriodicEdge& b) {
  return std::tie(a.distance, a.dst, a.image) < std::tie(b.distance, b.dst, b.image);
}

// k nearest (dst, image) candidates for atom `src`, considering images with
// |image[d]| <= reach[d].
inline std::vector<PeriodicEdge> nearest_candidates(const Crystal& crystal, std::size_t src,
                                                    std::size_t k, const std::array<int, 3>& reach) {
  const auto& frac = crystal.frac_coords();
  const Lattice& lattice = crystal.lattice();
  std::vector<PeriodicEdge> cand;
  for (std::size_t dst = 0; dst < crystal.size(); ++dst) {
    const Vec3 base = frac[dst] - frac[src];
    for (int i = -reach[0]; i <= reach[0]; ++i)
      for (int j = -reach[1]; j <= reach[1]; ++j)
        for (int l = -reach[2]; l <= reach[2]; ++l) {
          if (dst == src && i == 0 && j == 0 && l == 0) continue;
          const double d = lattice.to_cart(base + Vec3(i, j, l)).norm();
          cand.push_back({src, dst, {i, j, l}, d});
        }
  }
  const std::size_t keep = std::min(k, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(),
                    edge_less);
  cand.resize(keep);
  return cand;
}

// Image reach along each axis guaranteeing that every point within `radius`
// of any home-cell point is enumerated (fractional differences lie in (-1, 1)).
inline std::array<int, 3> reach_for_radius(const Lattice& lattice, double radius) {
  std::array<int, 3> r{};
  for (int d = 0; d < 3; ++d)
    r[d] = static_cast<int>(std::ceil(radius * lattice.reciprocal_length(d))) + 1;
  return r;
}

}  // namespace detail

// Periodic KNN graph. The candidate image set starts at one shell and grows
// until it covers the sphere through the current k-th neighbour, so the
// result does not depend on cell skew. `extra_shells` widens the final search
// (used to verify that the image set was sufficient).
inline PeriodicGraph knn_graph(const Crystal& crystal, std::size_t k, int extra_shells = 0) {
  if (k < 1) throw Error("knn_graph requires k >= 1");
  PeriodicGraph graph;
  graph.num_nodes = crystal.size();
  graph.k = k;
  graph.edges.reserve(crystal.size() * k);
  for (std::size_t src = 0; src < crystal.size(); ++src) {
    std::array<int, 3> reach{1, 1, 1};
    std::vector<PeriodicEdge> best;
    for (;;) {
      best = detail::nearest_candidates(crystal, src, k, reach);
      if (best.size() < k) {
        for (int& r : reach) ++r;
        continue;
      }
      const auto need = detail::reach_for_radius(crystal.lattice(), best.back().distance);
      bool covered = true;
      for (int d = 0; d < 3; ++d)
        if (need[d] > reach[d]) {
          reach[d] = need[d];
          covered = false;
        }
      if (covered) break;
    }
    if (extra_shells > 0) {
      for (int& r : reach) r += extra_shells;
      best = detail::nearest_candidates(crystal, src, k, reach);
    }
    graph.edges.insert(graph.edges.end(), best.begin(), best.end());
  }
  return graph;
}

// Per-node sorted lists of outgoing edge distances.
inline std::vector<std::vector<double>> graph_distance_multiset(const PeriodicGraph& graph) {
  std::vector<std::vector<double>> out(graph.num_nodes);
  for (const auto& e : graph.edges) out[e.src].push_back(e.distance);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

// Debug export: src,dst,k1,k2,k3,distance
inline void write_edge_csv(const PeriodicGraph& graph, std::ostream& out) {
  out << "src,dst,k1,k2,k3,distance\n";
  const auto old_precision = out.precision(12);
  for (const auto& e : graph.edges)
    out << e.src << ',' << e.dst << ',' << e.image[0] << ',' << e.image[1] << ',' << e.image[2]
        << ',' << e.distance << '\n';
  out.precision(old_precision);
}

}  // namespace xtalgen
