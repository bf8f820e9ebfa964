#pragma once

#include "sinrmac/sinr.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sinrmac {

// Undirected simple graph over an arbitrary set of NodeIds.
class Graph {
public:
    Graph() = default;
    explicit Graph(std::vector<NodeId> vertices);

    /// Graph on the dense vertex set [0, n).
    static Graph with_vertices(std::size_t n);

    void add_edge(NodeId u, NodeId v);
    bool has_vertex(NodeId v) const { return index_.contains(v); }
    bool has_edge(NodeId u, NodeId v) const;
    const std::vector<NodeId>& neighbors(NodeId v) const;
    std::size_t degree(NodeId v) const { return neighbors(v).size(); }

    const std::vector<NodeId>& vertices() const { return vertices_; }
    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t edge_count() const { return edge_count_; }

    /// Edges as (u, v) with u < v, sorted.
    std::vector<std::pair<NodeId, NodeId>> edges() const;

    bool operator==(const Graph& other) const;

private:
    std::size_t slot(NodeId v) const;

    std::vector<NodeId> vertices_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::size_t edge_count_ = 0;
};

struct GraphStats {
    std::size_t max_degree = 0;
    /// Hop diameter; nullopt when the graph is disconnected.
    std::optional<std::size_t> diameter;
    /// Max over min Euclidean edge length; nullopt without edges.
    std::optional<double> edge_length_ratio;
};

// Polynomial f(r) = sum_k coeff[k] r^k with nonnegative coefficients, hence
// nondecreasing on r >= 0.
class GrowthBound {
public:
    explicit GrowthBound(std::vector<double> coefficients);

    /// (1 + 2 r Lambda)^2: discs of diameter d_min packed in a disc of radius r Lambda d_min.
    static GrowthBound disc_packing(double lambda);

    double operator()(double r) const;
    const std::vector<double>& coefficients() const { return coefficients_; }

private:
    std::vector<double> coefficients_;
};

struct GrowthViolation {
    NodeId vertex;
    std::size_t radius;
    std::vector<NodeId> independent_set;
    double bound;
};

struct GrowthReport {
    bool passed = true;
    std::optional<GrowthViolation> violation;
    std::size_t balls_checked = 0;
    /// Balls too large for exact search, checked with a greedy witness only.
    std::size_t balls_greedy_only = 0;
};

/// Edge (u, v) iff d(u, v) <= a * r_weak (closed).
Graph induced_graph(const Topology& topology, const SinrParams& params, double a);

/// Induced graph restricted to a vertex subset.
Graph induced_graph(const Topology& topology, std::span<const NodeId> subset, double range);

/// Hop ball of radius r around v, including v, sorted.
std::vector<NodeId> neighborhood(const Graph& graph, NodeId v, std::size_t r);

GraphStats graph_stats(const Graph& graph, const Topology& topology);

/// Greedy maximal independent set scanning vertices in `priority` order.
/// An empty priority means ascending NodeId.
std::vector<NodeId> greedy_mis(const Graph& graph, std::span<const NodeId> priority = {});

bool is_independent(const Graph& graph, std::span<const NodeId> set);
/// Every vertex is in the set or adjacent to it.
bool is_dominating(const Graph& graph, std::span<const NodeId> set);

/// Exact maximum independent set of the subgraph induced by `subset`.
std::vector<NodeId> maximum_independent_set(const Graph& graph, std::span<const NodeId> subset);

inline constexpr std::size_t kExactIndependentSetLimit = 20;

GrowthReport check_growth_bound(const Graph& graph, const GrowthBound& f, std::size_t r_max);

/// Minimum pairwise distance within a subset; nullopt for fewer than two nodes.
std::optional<double> min_pairwise_distance(const Topology& topology, std::span<const NodeId> subset);

} // namespace sinrmac
