#include "sinrmac/reliability.hpp"

#include "sinrmac/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sinrmac {

ReliabilityParams::ReliabilityParams(double p_, double mu_, double gamma_) : p(p_), mu(mu_), gamma(gamma_)
{
    if (!(p > 0.0 && p <= 0.5))
        throw std::invalid_argument("ReliabilityParams: p must lie in (0, 1/2]");
    if (!(mu > 0.0 && mu < p))
        throw std::invalid_argument("ReliabilityParams: mu must lie in (0, p)");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("ReliabilityParams: gamma must lie in (0, 1)");
}

namespace {

void check_pair(std::span<const NodeId> S, NodeId u, NodeId v)
{
    if (u == v)
        throw std::invalid_argument("edge reliability: u equals v");
    const bool has_u = std::find(S.begin(), S.end(), u) != S.end();
    const bool has_v = std::find(S.begin(), S.end(), v) != S.end();
    if (!has_u || !has_v)
        throw std::invalid_argument("edge reliability: u and v must belong to S");
}

void check_probability(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("edge reliability: p must lie in (0, 1)");
}

// Depth-first enumeration of interferer subsets. Interference is monotone in
// the subset, so a failing prefix prunes its subtree and a prefix that
// succeeds even with every remaining interferer adds its whole mass.
struct ExactReliability {
    double signal;
    double p;
    const SinrParams* params;
    std::vector<double> gains;  // descending
    std::vector<double> suffix; // suffix[i] = sum of gains[i..]

    double mass(std::size_t i, double interference, double weight) const
    {
        if (!sinr_meets_threshold(signal, interference, *params))
            return 0.0;
        if (i == gains.size() || sinr_meets_threshold(signal, interference + suffix[i], *params))
            return weight;
        return mass(i + 1, interference + gains[i], weight * p) +
               mass(i + 1, interference, weight * (1.0 - p));
    }
};

} // namespace

double edge_reliability_exact(const Topology& topology, std::span<const NodeId> S, NodeId u, NodeId v,
                              double p, const SinrParams& params, std::size_t limit)
{
    check_pair(S, u, v);
    check_probability(p);
    if (S.size() > limit)
        throw std::length_error("edge_reliability_exact: |S| = " + std::to_string(S.size()) +
                                " exceeds the enumeration bound " + std::to_string(limit) +
                                "; use edge_reliability_mc");

    const Position at = topology.position(u);
    ExactReliability calc;
    calc.signal = params.gain(topology.distance(u, v));
    calc.p = p;
    calc.params = &params;
    for (NodeId w : S)
        if (w != u && w != v)
            calc.gains.push_back(params.gain(distance(topology.position(w), at)));
    std::sort(calc.gains.begin(), calc.gains.end(), std::greater<>());
    calc.suffix.assign(calc.gains.size() + 1, 0.0);
    for (std::size_t i = calc.gains.size(); i-- > 0;)
        calc.suffix[i] = calc.suffix[i + 1] + calc.gains[i];

    return p * (1.0 - p) * calc.mass(0, 0.0, 1.0);
}

double edge_reliability_mc(const Topology& topology, std::span<const NodeId> S, NodeId u, NodeId v,
                           double p, const SinrParams& params, std::uint64_t trials, std::uint64_t seed)
{
    check_pair(S, u, v);
    check_probability(p);
    if (trials == 0)
        throw std::invalid_argument("edge_reliability_mc: trials must be at least 1");

    const Position at = topology.position(u);
    const double signal = params.gain(topology.distance(u, v));
    std::vector<double> gains;
    for (NodeId w : S)
        if (w != u && w != v)
            gains.push_back(params.gain(distance(topology.position(w), at)));

    std::uint64_t hits = 0;
    std::uint64_t done = 0;
    for (std::uint64_t block = 0; done < trials; ++block) {
        Rng rng = substream(seed, block);
        const std::uint64_t n = std::min(kTrialBlock, trials - done);
        for (std::uint64_t t = 0; t < n; ++t) {
            // Draw order is fixed: v, u, then the others in S order.
            const bool v_sends = rng.bernoulli(p);
            const bool u_sends = rng.bernoulli(p);
            double interference = 0.0;
            for (double g : gains)
                if (rng.bernoulli(p))
                    interference += g;
            if (v_sends && !u_sends && sinr_meets_threshold(signal, interference, params))
                ++hits;
        }
        done += n;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

std::vector<std::vector<double>> reliability_matrix_mc(const Topology& topology,
                                                       std::span<const NodeId> S, double p,
                                                       const SinrParams& params,
                                                       std::uint64_t trials, std::uint64_t seed)
{
    check_probability(p);
    if (trials == 0)
        throw std::invalid_argument("reliability_matrix_mc: trials must be at least 1");
    const std::size_t k = S.size();
    std::vector<std::vector<double>> gain(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j)
                gain[i][j] = params.gain(topology.distance(S[i], S[j]));

    std::vector<std::vector<std::uint64_t>> hits(k, std::vector<std::uint64_t>(k, 0));
    std::vector<std::size_t> senders;
    std::vector<char> sending(k, 0);
    std::uint64_t done = 0;
    for (std::uint64_t block = 0; done < trials; ++block) {
        Rng rng = substream(seed, block);
        const std::uint64_t n = std::min(kTrialBlock, trials - done);
        for (std::uint64_t t = 0; t < n; ++t) {
            senders.clear();
            for (std::size_t i = 0; i < k; ++i) {
                sending[i] = rng.bernoulli(p) ? 1 : 0;
                if (sending[i])
                    senders.push_back(i);
            }
            if (senders.empty())
                continue;
            for (std::size_t i = 0; i < k; ++i) {
                if (sending[i])
                    continue;
                double total = 0.0;
                double best = -1.0;
                std::size_t best_j = 0;
                for (std::size_t j : senders) {
                    total += gain[i][j];
                    if (gain[i][j] > best) {
                        best = gain[i][j];
                        best_j = j;
                    }
                }
                if (sinr_meets_threshold(best, total - best, params))
                    ++hits[i][best_j];
            }
        }
        done += n;
    }
    std::vector<std::vector<double>> rel(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            rel[i][j] = static_cast<double>(hits[i][j]) / static_cast<double>(trials);
    return rel;
}

std::vector<std::vector<double>> reliability_matrix_exact(const Topology& topology,
                                                          std::span<const NodeId> S, double p,
                                                          const SinrParams& params, std::size_t limit)
{
    const std::size_t k = S.size();
    const double r_weak = transmission_range(params).r_weak;
    std::vector<std::vector<double>> rel(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j && within_range(topology.distance(S[i], S[j]), r_weak))
                rel[i][j] = edge_reliability_exact(topology, S, S[i], S[j], p, params, limit);
    return rel;
}

Graph h_graph_from_matrix(std::span<const NodeId> S, const std::vector<std::vector<double>>& rel,
                          double mu)
{
    Graph g(std::vector<NodeId>(S.begin(), S.end()));
    for (std::size_t i = 0; i < S.size(); ++i)
        for (std::size_t j = i + 1; j < S.size(); ++j)
            if (rel[i][j] >= mu && rel[j][i] >= mu)
                g.add_edge(S[i], S[j]);
    return g;
}

Graph h_graph(const Topology& topology, std::span<const NodeId> S, double p, double mu,
              const SinrParams& params, std::size_t limit)
{
    if (S.size() > limit)
        throw std::length_error("h_graph: |S| exceeds the enumeration bound");
    return h_graph_from_matrix(S, reliability_matrix_exact(topology, S, p, params, limit), mu);
}

bool approx_sandwich_check(const Graph& lower, const Graph& candidate, const Graph& upper)
{
    if (lower.vertices() != candidate.vertices() || candidate.vertices() != upper.vertices())
        throw std::invalid_argument("approx_sandwich_check: vertex sets differ");
    for (auto [u, v] : lower.edges())
        if (!candidate.has_edge(u, v))
            return false;
    for (auto [u, v] : candidate.edges())
        if (!upper.has_edge(u, v))
            return false;
    return true;
}

std::vector<std::pair<NodeId, NodeId>> close_pairs(const Topology& topology, std::span<const NodeId> S,
                                                   const SinrParams& params)
{
    std::vector<std::pair<NodeId, NodeId>> out;
    const auto d_min = min_pairwise_distance(topology, S);
    if (!d_min)
        return out;
    const double reach = std::min(2.0 * *d_min, transmission_range(params).r_strong);
    for (std::size_t i = 0; i < S.size(); ++i)
        for (std::size_t j = i + 1; j < S.size(); ++j)
            if (within_range(topology.distance(S[i], S[j]), reach))
                out.emplace_back(S[i], S[j]);
    return out;
}

MuCalibration calibrate_mu(std::span<const ReliabilitySample> samples, double p,
                           const SinrParams& params, double tolerance)
{
    // Weaker direction of every close pair, across all samples.
    std::vector<double> weakest;
    for (const auto& sample : samples) {
        for (auto [a, b] : close_pairs(sample.topology, sample.members, params)) {
            const double ab = edge_reliability_exact(sample.topology, sample.members, a, b, p, params);
            const double ba = edge_reliability_exact(sample.topology, sample.members, b, a, p, params);
            weakest.push_back(std::min(ab, ba));
        }
    }
    MuCalibration result{0.0, 0.0, weakest.size(), 0};
    if (weakest.empty()) {
        result.mu_star = p * (1.0 - p);
        result.direct_minimum = result.mu_star;
        return result;
    }
    result.direct_minimum = *std::min_element(weakest.begin(), weakest.end());

    auto keeps_all = [&](double mu) {
        return std::all_of(weakest.begin(), weakest.end(), [mu](double r) { return r >= mu; });
    };
    double lo = 0.0;
    double hi = p * (1.0 - p);
    if (keeps_all(hi)) {
        result.mu_star = hi;
        return result;
    }
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (keeps_all(mid))
            lo = mid;
        else
            hi = mid;
        ++result.iterations;
    }
    result.mu_star = lo;
    return result;
}

} // namespace sinrmac
