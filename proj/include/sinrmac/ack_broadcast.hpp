#pragma once

#include "sinrmac/engine.hpp"
#include "sinrmac/rng.hpp"

#include <cstdint>
#include <optional>
#include <unordered_map>

namespace sinrmac {

// Probability-doubling local broadcast with fallback (the acknowledgment
// algorithm). All logarithms are base 2.
struct AckParams {
    double n_tilde = 1.0;     // contention upper bound
    double eps_ack = 0.1;     // failure probability bound
    double delta = 12.0;      // inner loop length factor
    double gamma_prime = 8.0; // halting factor
    /// Hard slot budget; the node stops after this many steps regardless.
    std::uint64_t f_ack_budget = UINT64_MAX;

    void validate() const;

    /// Default contention bound 4 Lambda^2.
    static AckParams for_lambda(double lambda, double eps_ack);

    std::uint64_t inner_loop_length() const;
    double fallback_threshold() const;
    double halt_threshold() const;
    double min_probability() const { return 1.0 / (128.0 * n_tilde); }
    static constexpr double max_probability() { return 1.0 / 16.0; }
};

struct AckState {
    double p_y = 0.0;
    double tp_y = 0.0;
    std::uint64_t rc_y = 0;
    std::uint64_t inner_loop_pos = 0;
    std::uint64_t steps = 0;
    bool halted = false;
    /// Set by ack_init: the first step enters the outer loop (fallback line).
    bool enter_outer_loop = true;
};

struct AckStepResult {
    AckState state;
    bool transmit;
};

AckState ack_init(const AckParams& params);

/// Fallback line: max(1/(128 N), p/32).
double fallback_probability(double p_y, const AckParams& params);
/// Doubling line: min(1/16, 2p).
double doubled_probability(double p_y);

/// One slot. `received_message` reports a reception during the previous step.
/// Throws std::logic_error on a halted state and std::invalid_argument when p_y
/// lies outside [1/(128 N), 1/16] after the first step.
AckStepResult ack_step(const AckState& state, const AckParams& params, bool received_message, Rng& rng);

struct AckBoundConstants {
    double c1 = 32.0;
    double c2 = 32.0;
};

/// c1 Delta log(Lambda/eps) + c2 log(Lambda) log(Lambda/eps), rounded up.
std::uint64_t ack_bound(double lambda, double degree, double eps_ack, AckBoundConstants constants = {});

// Standalone node running only the acknowledgment algorithm for one message,
// started by a Bcast input. Records when the algorithm halted.
class AckNode final : public NodeAutomaton {
public:
    AckNode(NodeId id, AckParams params, std::uint64_t master_seed);

    SlotAction on_slot(Slot slot) override;
    void on_receive(Slot slot, const Payload& payload) override;
    void on_env_input(Slot slot, const EnvEvent& event) override;
    bool terminated() const override { return !active_; }

    bool started() const { return start_.has_value(); }
    std::optional<Slot> start_slot() const { return start_; }
    std::optional<Slot> halt_slot() const { return halt_; }
    const AckState& state() const { return state_; }
    /// Smallest and largest p_y seen in an active slot.
    double min_p_seen() const { return min_p_; }
    double max_p_seen() const { return max_p_; }
    /// First slot at which each sender's Data payload was heard (diagnostics).
    const std::unordered_map<NodeId, Slot>& first_heard() const { return first_heard_; }

private:
    NodeId id_;
    AckParams params_;
    Rng rng_;
    AckState state_;
    bool active_ = false;
    bool received_ = false;
    MessageId message_ = 0;
    std::optional<Slot> start_;
    std::optional<Slot> halt_;
    double min_p_ = 1.0;
    double max_p_ = 0.0;
    std::unordered_map<NodeId, Slot> first_heard_;
};

} // namespace sinrmac
