#include "sinrmac/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>

namespace sinrmac {

Graph::Graph(std::vector<NodeId> vertices) : vertices_(std::move(vertices))
{
    std::sort(vertices_.begin(), vertices_.end());
    if (std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end())
        throw std::invalid_argument("Graph: duplicate vertex");
    index_.reserve(vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        index_.emplace(vertices_[i], i);
    adjacency_.resize(vertices_.size());
}

Graph Graph::with_vertices(std::size_t n)
{
    std::vector<NodeId> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = static_cast<NodeId>(i);
    return Graph(std::move(v));
}

std::size_t Graph::slot(NodeId v) const
{
    auto it = index_.find(v);
    if (it == index_.end())
        throw std::out_of_range("Graph: unknown vertex " + std::to_string(v));
    return it->second;
}

void Graph::add_edge(NodeId u, NodeId v)
{
    if (u == v)
        throw std::invalid_argument("Graph: self-loop");
    auto& nu = adjacency_[slot(u)];
    auto pos = std::lower_bound(nu.begin(), nu.end(), v);
    if (pos != nu.end() && *pos == v)
        return;
    nu.insert(pos, v);
    auto& nv = adjacency_[slot(v)];
    nv.insert(std::lower_bound(nv.begin(), nv.end(), u), u);
    ++edge_count_;
}

bool Graph::has_edge(NodeId u, NodeId v) const
{
    if (!has_vertex(u) || !has_vertex(v))
        return false;
    const auto& nu = adjacency_[slot(u)];
    return std::binary_search(nu.begin(), nu.end(), v);
}

const std::vector<NodeId>& Graph::neighbors(NodeId v) const
{
    return adjacency_[slot(v)];
}

std::vector<std::pair<NodeId, NodeId>> Graph::edges() const
{
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(edge_count_);
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        for (NodeId w : adjacency_[i])
            if (vertices_[i] < w)
                out.emplace_back(vertices_[i], w);
    return out;
}

bool Graph::operator==(const Graph& other) const
{
    return vertices_ == other.vertices_ && adjacency_ == other.adjacency_;
}

GrowthBound::GrowthBound(std::vector<double> coefficients) : coefficients_(std::move(coefficients))
{
    if (coefficients_.empty())
        throw std::invalid_argument("GrowthBound: no coefficients");
    for (double c : coefficients_)
        if (!(c >= 0.0) || !std::isfinite(c))
            throw std::invalid_argument("GrowthBound: coefficients must be finite and nonnegative");
}

GrowthBound GrowthBound::disc_packing(double lambda)
{
    return GrowthBound({1.0, 4.0 * lambda, 4.0 * lambda * lambda});
}

double GrowthBound::operator()(double r) const
{
    double acc = 0.0;
    for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it)
        acc = acc * r + *it;
    return acc;
}

Graph induced_graph(const Topology& topology, const SinrParams& params, double a)
{
    if (!(a > 0.0 && a <= 1.0))
        throw std::invalid_argument("induced_graph: scale must lie in (0, 1]");
    std::vector<NodeId> all(topology.size());
    for (NodeId i = 0; i < topology.size(); ++i)
        all[i] = i;
    return induced_graph(topology, all, a * transmission_range(params).r_weak);
}

Graph induced_graph(const Topology& topology, std::span<const NodeId> subset, double range)
{
    Graph g(std::vector<NodeId>(subset.begin(), subset.end()));
    for (std::size_t i = 0; i < subset.size(); ++i)
        for (std::size_t j = i + 1; j < subset.size(); ++j)
            if (within_range(topology.distance(subset[i], subset[j]), range))
                g.add_edge(subset[i], subset[j]);
    return g;
}

namespace {

// BFS hop distances from v; unreachable vertices are absent.
std::unordered_map<NodeId, std::size_t> bfs(const Graph& graph, NodeId v, std::size_t limit)
{
    std::unordered_map<NodeId, std::size_t> dist;
    dist.emplace(v, 0);
    std::deque<NodeId> queue{v};
    while (!queue.empty()) {
        NodeId x = queue.front();
        queue.pop_front();
        const std::size_t dx = dist[x];
        if (dx == limit)
            continue;
        for (NodeId y : graph.neighbors(x)) {
            if (dist.emplace(y, dx + 1).second)
                queue.push_back(y);
        }
    }
    return dist;
}

} // namespace

std::vector<NodeId> neighborhood(const Graph& graph, NodeId v, std::size_t r)
{
    if (!graph.has_vertex(v))
        throw std::out_of_range("neighborhood: unknown vertex " + std::to_string(v));
    auto dist = bfs(graph, v, r);
    std::vector<NodeId> out;
    out.reserve(dist.size());
    for (const auto& [node, d] : dist)
        out.push_back(node);
    std::sort(out.begin(), out.end());
    return out;
}

GraphStats graph_stats(const Graph& graph, const Topology& topology)
{
    GraphStats stats;
    for (NodeId v : graph.vertices())
        stats.max_degree = std::max(stats.max_degree, graph.degree(v));

    std::size_t diameter = 0;
    bool connected = true;
    for (NodeId v : graph.vertices()) {
        auto dist = bfs(graph, v, std::numeric_limits<std::size_t>::max());
        if (dist.size() != graph.vertex_count()) {
            connected = false;
            break;
        }
        for (const auto& [node, d] : dist)
            diameter = std::max(diameter, d);
    }
    if (connected)
        stats.diameter = diameter;

    double shortest = std::numeric_limits<double>::infinity();
    double longest = 0.0;
    for (auto [u, v] : graph.edges()) {
        const double d = topology.distance(u, v);
        shortest = std::min(shortest, d);
        longest = std::max(longest, d);
    }
    if (graph.edge_count() > 0)
        stats.edge_length_ratio = longest / shortest;
    return stats;
}

std::vector<NodeId> greedy_mis(const Graph& graph, std::span<const NodeId> priority)
{
    std::vector<NodeId> order(priority.begin(), priority.end());
    if (order.empty())
        order = graph.vertices();
    if (order.size() != graph.vertex_count())
        throw std::invalid_argument("greedy_mis: priority must list every vertex once");

    std::unordered_map<NodeId, char> blocked;
    std::vector<NodeId> out;
    for (NodeId v : order) {
        if (!graph.has_vertex(v))
            throw std::invalid_argument("greedy_mis: priority names an unknown vertex");
        if (blocked[v])
            continue;
        out.push_back(v);
        blocked[v] = 1;
        for (NodeId w : graph.neighbors(v))
            blocked[w] = 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool is_independent(const Graph& graph, std::span<const NodeId> set)
{
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j)
            if (graph.has_edge(set[i], set[j]))
                return false;
    return true;
}

bool is_dominating(const Graph& graph, std::span<const NodeId> set)
{
    std::unordered_map<NodeId, char> covered;
    for (NodeId v : set) {
        covered[v] = 1;
        for (NodeId w : graph.neighbors(v))
            covered[w] = 1;
    }
    for (NodeId v : graph.vertices())
        if (!covered.contains(v))
            return false;
    return true;
}

namespace {

struct MisSearch {
    std::vector<std::vector<char>> adj;
    std::vector<std::size_t> best;
    std::vector<std::size_t> current;

    void run(std::vector<std::size_t> candidates)
    {
        if (candidates.empty()) {
            if (current.size() > best.size())
                best = current;
            return;
        }
        if (current.size() + candidates.size() <= best.size())
            return;
        // Branch on the first candidate: take it, or drop it.
        const std::size_t v = candidates.front();
        std::vector<std::size_t> rest;
        rest.reserve(candidates.size());
        for (std::size_t i = 1; i < candidates.size(); ++i)
            if (!adj[v][candidates[i]])
                rest.push_back(candidates[i]);
        current.push_back(v);
        run(std::move(rest));
        current.pop_back();
        candidates.erase(candidates.begin());
        run(std::move(candidates));
    }
};

} // namespace

std::vector<NodeId> maximum_independent_set(const Graph& graph, std::span<const NodeId> subset)
{
    const std::size_t k = subset.size();
    MisSearch search;
    search.adj.assign(k, std::vector<char>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j && graph.has_edge(subset[i], subset[j]))
                search.adj[i][j] = 1;
    std::vector<std::size_t> candidates(k);
    for (std::size_t i = 0; i < k; ++i)
        candidates[i] = i;
    // Low-degree vertices first tightens the bound early.
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        auto deg = [&](std::size_t x) { return std::count(search.adj[x].begin(), search.adj[x].end(), 1); };
        return deg(a) < deg(b);
    });
    search.run(std::move(candidates));
    std::vector<NodeId> out;
    for (std::size_t i : search.best)
        out.push_back(subset[i]);
    std::sort(out.begin(), out.end());
    return out;
}

GrowthReport check_growth_bound(const Graph& graph, const GrowthBound& f, std::size_t r_max)
{
    GrowthReport report;
    for (std::size_t r = 0; r <= r_max; ++r) {
        const double bound = f(static_cast<double>(r));
        for (NodeId v : graph.vertices()) {
            const auto ball = neighborhood(graph, v, r);
            ++report.balls_checked;
            std::vector<NodeId> witness;
            if (ball.size() <= kExactIndependentSetLimit) {
                witness = maximum_independent_set(graph, ball);
            } else {
                ++report.balls_greedy_only;
                // Greedy on the ball, lowest-degree first: a lower-bound witness.
                std::vector<NodeId> order = ball;
                std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
                    return graph.degree(a) < graph.degree(b) || (graph.degree(a) == graph.degree(b) && a < b);
                });
                std::unordered_map<NodeId, char> blocked;
                for (NodeId x : order) {
                    if (blocked[x])
                        continue;
                    witness.push_back(x);
                    for (NodeId y : graph.neighbors(x))
                        blocked[y] = 1;
                }
                std::sort(witness.begin(), witness.end());
            }
            if (static_cast<double>(witness.size()) > bound) {
                report.passed = false;
                report.violation = GrowthViolation{v, r, std::move(witness), bound};
                return report;
            }
        }
    }
    return report;
}

std::optional<double> min_pairwise_distance(const Topology& topology, std::span<const NodeId> subset)
{
    if (subset.size() < 2)
        return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < subset.size(); ++i)
        for (std::size_t j = i + 1; j < subset.size(); ++j)
            best = std::min(best, topology.distance(subset[i], subset[j]));
    return best;
}

} // namespace sinrmac
