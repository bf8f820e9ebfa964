#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sinrmac {

using NodeId = std::uint32_t;

/// Relative tolerance applied at analytic boundaries (SINR = beta, d = range).
inline constexpr double kBoundaryTolerance = 1e-9;

struct Position {
    double x = 0.0;
    double y = 0.0;
};

double distance(Position a, Position b);

// Physical-layer constants of the SINR model. Construction validates
// alpha > 2, beta > 1, noise > 0, power > 0 and 0 < eps < 1/2.
class SinrParams {
public:
    SinrParams(double alpha, double beta, double noise, double power, double eps);

    /// Solves for the transmit power that makes (1 - eps) * R_1 equal r_strong.
    static SinrParams for_strong_range(double alpha, double beta, double noise, double eps,
                                       double r_strong);

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double noise() const { return noise_; }
    double power() const { return power_; }
    double eps() const { return eps_; }

    /// Same decisions, different absolute scale: power and noise multiplied by k.
    SinrParams scaled(double k) const;

    /// Received power P / d^alpha.
    double gain(double d) const;

private:
    double alpha_;
    double beta_;
    double noise_;
    double power_;
    double eps_;
};

struct DerivedRanges {
    double r_weak;   // R_1 = (P / (beta N))^(1/alpha)
    double r_strong; // (1 - eps) R_1
    double r_approx; // (1 - 2 eps) R_1
};

DerivedRanges transmission_range(const SinrParams& params);

/// d <= range, closed, with relative tolerance at the boundary.
bool within_range(double d, double range);

// Node placement in the plane. NodeIds are the dense indices [0, n).
// Pairwise distances must be at least 1.
class Topology {
public:
    Topology() = default;
    explicit Topology(std::vector<Position> positions);

    std::size_t size() const { return positions_.size(); }
    Position position(NodeId id) const;
    const std::vector<Position>& positions() const { return positions_; }
    double distance(NodeId u, NodeId v) const;
    bool contains(NodeId id) const { return id < positions_.size(); }

    /// Smallest pairwise distance; nullopt for fewer than two nodes.
    std::optional<double> min_distance() const;

private:
    std::vector<Position> positions_;
};

double interference_at(Position point, std::span<const NodeId> senders, const Topology& topology,
                       const SinrParams& params);

double sinr_at(NodeId receiver, NodeId sender, std::span<const NodeId> senders,
               const Topology& topology, const SinrParams& params);

bool is_received(NodeId receiver, NodeId sender, std::span<const NodeId> senders,
                 const Topology& topology, const SinrParams& params);

/// SINR decision from already-computed quantities.
bool sinr_meets_threshold(double signal, double interference, const SinrParams& params);

/// Lambda = r_strong / (minimum pairwise node distance). Throws when no pair is
/// within r_strong.
double lambda_ratio(const Topology& topology, const SinrParams& params);

struct Reception {
    NodeId receiver;
    NodeId sender;
};

/// Resolves one slot: every node not in `senders` receives the unique sender
/// that meets the SINR threshold, if any. Output is ordered by receiver.
std::vector<Reception> resolve_slot(std::span<const NodeId> senders, const Topology& topology,
                                    const SinrParams& params);

} // namespace sinrmac
