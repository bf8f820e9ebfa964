#include "sinrmac/sinr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sinrmac {

double distance(Position a, Position b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

SinrParams::SinrParams(double alpha, double beta, double noise, double power, double eps)
    : alpha_(alpha), beta_(beta), noise_(noise), power_(power), eps_(eps)
{
    if (!(alpha > 2.0))
        throw std::invalid_argument("SinrParams: alpha must exceed 2");
    if (!(beta > 1.0))
        throw std::invalid_argument("SinrParams: beta must exceed 1");
    if (!(noise > 0.0) || !std::isfinite(noise))
        throw std::invalid_argument("SinrParams: noise must be positive");
    if (!(power > 0.0) || !std::isfinite(power))
        throw std::invalid_argument("SinrParams: power must be positive");
    if (!(eps > 0.0 && eps < 0.5))
        throw std::invalid_argument("SinrParams: eps must lie in (0, 1/2)");
}

SinrParams SinrParams::for_strong_range(double alpha, double beta, double noise, double eps,
                                        double r_strong)
{
    if (!(r_strong > 0.0))
        throw std::invalid_argument("SinrParams: strong range must be positive");
    const double r_weak = r_strong / (1.0 - eps);
    return SinrParams(alpha, beta, noise, beta * noise * std::pow(r_weak, alpha), eps);
}

SinrParams SinrParams::scaled(double k) const
{
    return SinrParams(alpha_, beta_, noise_ * k, power_ * k, eps_);
}

double SinrParams::gain(double d) const
{
    return power_ / std::pow(d, alpha_);
}

DerivedRanges transmission_range(const SinrParams& params)
{
    const double r = std::pow(params.power() / (params.beta() * params.noise()), 1.0 / params.alpha());
    return {r, (1.0 - params.eps()) * r, (1.0 - 2.0 * params.eps()) * r};
}

bool within_range(double d, double range)
{
    return d <= range * (1.0 + kBoundaryTolerance);
}

Topology::Topology(std::vector<Position> positions) : positions_(std::move(positions))
{
    for (const auto& p : positions_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("Topology: non-finite coordinate");
    }
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        for (std::size_t j = i + 1; j < positions_.size(); ++j) {
            if (sinrmac::distance(positions_[i], positions_[j]) < 1.0 - kBoundaryTolerance)
                throw std::invalid_argument("Topology: nodes " + std::to_string(i) + " and " +
                                            std::to_string(j) + " closer than 1");
        }
    }
}

Position Topology::position(NodeId id) const
{
    if (!contains(id))
        throw std::out_of_range("Topology: unknown node " + std::to_string(id));
    return positions_[id];
}

double Topology::distance(NodeId u, NodeId v) const
{
    return sinrmac::distance(position(u), position(v));
}

std::optional<double> Topology::min_distance() const
{
    if (positions_.size() < 2)
        return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < positions_.size(); ++i)
        for (std::size_t j = i + 1; j < positions_.size(); ++j)
            best = std::min(best, sinrmac::distance(positions_[i], positions_[j]));
    return best;
}

double interference_at(Position point, std::span<const NodeId> senders, const Topology& topology,
                       const SinrParams& params)
{
    double sum = 0.0;
    for (NodeId w : senders)
        sum += params.gain(sinrmac::distance(topology.position(w), point));
    return sum;
}

bool sinr_meets_threshold(double signal, double interference, const SinrParams& params)
{
    return signal / (interference + params.noise()) >= params.beta() * (1.0 - kBoundaryTolerance);
}

double sinr_at(NodeId receiver, NodeId sender, std::span<const NodeId> senders,
               const Topology& topology, const SinrParams& params)
{
    if (!topology.contains(receiver) || !topology.contains(sender))
        throw std::out_of_range("sinr_at: unknown node");
    if (receiver == sender)
        throw std::invalid_argument("sinr_at: receiver equals sender");
    bool sender_present = false;
    for (NodeId w : senders) {
        if (w == receiver)
            throw std::invalid_argument("sinr_at: receiver is transmitting (half-duplex)");
        if (w == sender)
            sender_present = true;
    }
    if (!sender_present)
        throw std::invalid_argument("sinr_at: sender not in sender set");

    const Position at = topology.position(receiver);
    const double signal = params.gain(topology.distance(sender, receiver));
    double interference = 0.0;
    for (NodeId w : senders) {
        if (w != sender)
            interference += params.gain(sinrmac::distance(topology.position(w), at));
    }
    return signal / (interference + params.noise());
}

bool is_received(NodeId receiver, NodeId sender, std::span<const NodeId> senders,
                 const Topology& topology, const SinrParams& params)
{
    return sinr_at(receiver, sender, senders, topology, params) >=
           params.beta() * (1.0 - kBoundaryTolerance);
}

double lambda_ratio(const Topology& topology, const SinrParams& params)
{
    const double r_strong = transmission_range(params).r_strong;
    const auto d_min = topology.min_distance();
    if (!d_min || !within_range(*d_min, r_strong))
        throw std::invalid_argument("lambda_ratio: no pair of nodes within the strong range");
    return r_strong / *d_min;
}

std::vector<Reception> resolve_slot(std::span<const NodeId> senders, const Topology& topology,
                                    const SinrParams& params)
{
    std::vector<Reception> out;
    if (senders.empty())
        return out;
    std::vector<char> sending(topology.size(), 0);
    for (NodeId s : senders) {
        if (!topology.contains(s))
            throw std::out_of_range("resolve_slot: unknown node");
        sending[s] = 1;
    }

    for (NodeId u = 0; u < topology.size(); ++u) {
        if (sending[u])
            continue;
        const Position at = topology.position(u);
        double total = 0.0;
        double best = -1.0;
        NodeId best_sender = 0;
        for (NodeId s : senders) {
            const double g = params.gain(sinrmac::distance(topology.position(s), at));
            total += g;
            if (g > best) {
                best = g;
                best_sender = s;
            }
        }
        // beta > 1, so only the strongest sender can clear the threshold.
        if (sinr_meets_threshold(best, total - best, params))
            out.push_back({u, best_sender});
    }
    return out;
}

} // namespace sinrmac
