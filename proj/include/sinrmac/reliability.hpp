#pragma once

#include "sinrmac/graph.hpp"
#include "sinrmac/sinr.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sinrmac {

// Reliability-graph parameters: every node of S transmits with probability p
// per slot; an edge needs reception probability >= mu in both directions.
struct ReliabilityParams {
    double p;
    double mu;
    double gamma;

    ReliabilityParams(double p, double mu, double gamma);
};

/// Default cap on |S| for exact enumeration (2^(|S|-2) outcomes).
inline constexpr std::size_t kExactEnumerationLimit = 22;

/// P(u receives v) when each node of S sends independently with probability p
/// and nodes outside S are silent. Exact; throws past `limit` nodes.
double edge_reliability_exact(const Topology& topology, std::span<const NodeId> S, NodeId u, NodeId v,
                              double p, const SinrParams& params,
                              std::size_t limit = kExactEnumerationLimit);

/// Frequency estimate over `trials` sampled slots. Trials are split into blocks
/// of kTrialBlock with block i drawn from substream(seed, i).
double edge_reliability_mc(const Topology& topology, std::span<const NodeId> S, NodeId u, NodeId v,
                           double p, const SinrParams& params, std::uint64_t trials,
                           std::uint64_t seed);

inline constexpr std::uint64_t kTrialBlock = 1u << 16;

/// All directed reliabilities of S at once: entry [i][j] estimates
/// P(S[i] receives S[j]). Each trial samples one slot and resolves it.
std::vector<std::vector<double>> reliability_matrix_mc(const Topology& topology,
                                                       std::span<const NodeId> S, double p,
                                                       const SinrParams& params,
                                                       std::uint64_t trials, std::uint64_t seed);

/// H_p^mu[S] from exact reliabilities.
Graph h_graph(const Topology& topology, std::span<const NodeId> S, double p, double mu,
              const SinrParams& params, std::size_t limit = kExactEnumerationLimit);

/// H_p^mu[S] from a reliability matrix (exact or estimated).
Graph h_graph_from_matrix(std::span<const NodeId> S, const std::vector<std::vector<double>>& rel,
                          double mu);

/// Exact reliability matrix; same layout as reliability_matrix_mc.
std::vector<std::vector<double>> reliability_matrix_exact(const Topology& topology,
                                                          std::span<const NodeId> S, double p,
                                                          const SinrParams& params,
                                                          std::size_t limit = kExactEnumerationLimit);

/// edges(lower) ⊆ edges(candidate) ⊆ edges(upper). Throws on vertex-set mismatch.
bool approx_sandwich_check(const Graph& lower, const Graph& candidate, const Graph& upper);

/// Pairs of S at distance <= min(2 d_min(S), r_strong).
std::vector<std::pair<NodeId, NodeId>> close_pairs(const Topology& topology, std::span<const NodeId> S,
                                                   const SinrParams& params);

struct ReliabilitySample {
    Topology topology;
    std::vector<NodeId> members;
};

struct MuCalibration {
    double mu_star;        // bisection result
    double direct_minimum; // min over close pairs of the weaker direction
    std::size_t pairs;
    std::size_t iterations;
};

/// Largest mu for which H_p^mu[S] keeps every close pair on every sample,
/// found by bisection against the exact oracle.
MuCalibration calibrate_mu(std::span<const ReliabilitySample> samples, double p,
                           const SinrParams& params, double tolerance = 1e-6);

} // namespace sinrmac
