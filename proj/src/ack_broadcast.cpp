#include "sinrmac/ack_broadcast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sinrmac {

void AckParams::validate() const
{
    if (!(n_tilde >= 1.0))
        throw std::invalid_argument("AckParams: n_tilde must be at least 1");
    if (!(eps_ack > 0.0 && eps_ack < 1.0))
        throw std::invalid_argument("AckParams: eps_ack must lie in (0, 1)");
    if (!(delta > 0.0) || !(gamma_prime > 0.0))
        throw std::invalid_argument("AckParams: delta and gamma_prime must be positive");
    if (f_ack_budget == 0)
        throw std::invalid_argument("AckParams: slot budget must be positive");
}

AckParams AckParams::for_lambda(double lambda, double eps_ack)
{
    AckParams p;
    p.n_tilde = std::max(1.0, 4.0 * lambda * lambda);
    p.eps_ack = eps_ack;
    return p;
}

std::uint64_t AckParams::inner_loop_length() const
{
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(delta * std::log2(n_tilde / eps_ack))));
}

double AckParams::fallback_threshold() const
{
    return 8.0 * std::log2(2.0 * n_tilde / eps_ack);
}

double AckParams::halt_threshold() const
{
    return gamma_prime * std::log2(n_tilde / eps_ack);
}

AckState ack_init(const AckParams& params)
{
    params.validate();
    AckState s;
    s.p_y = 1.0 / (4.0 * params.n_tilde);
    s.tp_y = 0.0;
    s.enter_outer_loop = true;
    return s;
}

double fallback_probability(double p_y, const AckParams& params)
{
    return std::max(params.min_probability(), p_y / 32.0);
}

double doubled_probability(double p_y)
{
    return std::min(AckParams::max_probability(), 2.0 * p_y);
}

AckStepResult ack_step(const AckState& state, const AckParams& params, bool received_message, Rng& rng)
{
    if (state.halted)
        throw std::logic_error("ack_step: state has halted");
    if (!state.enter_outer_loop &&
        !(state.p_y >= params.min_probability() * (1 - 1e-12) && state.p_y <= AckParams::max_probability()))
        throw std::invalid_argument("ack_step: p_y outside [1/(128 N), 1/16]");
    AckState s = state;

    bool restart_inner = false;
    if (s.enter_outer_loop) {
        s.enter_outer_loop = false;
        restart_inner = true;
    } else if (received_message) {
        ++s.rc_y;
        if (static_cast<double>(s.rc_y) > params.fallback_threshold())
            restart_inner = true;
    }
    if (restart_inner) {
        // fallback, then the doubling that opens the inner loop
        s.p_y = fallback_probability(s.p_y, params);
        s.rc_y = 0;
        s.p_y = doubled_probability(s.p_y);
        s.inner_loop_pos = 0;
    } else if (s.inner_loop_pos >= params.inner_loop_length()) {
        s.p_y = doubled_probability(s.p_y);
        s.inner_loop_pos = 0;
    }

    const bool transmit = rng.bernoulli(s.p_y);
    s.tp_y += s.p_y;
    ++s.inner_loop_pos;
    ++s.steps;
    if (s.tp_y > params.halt_threshold() || s.steps >= params.f_ack_budget)
        s.halted = true;
    return {s, transmit};
}

std::uint64_t ack_bound(double lambda, double degree, double eps_ack, AckBoundConstants constants)
{
    if (!(lambda >= 1.0) || !(degree >= 1.0))
        throw std::invalid_argument("ack_bound: lambda and degree must be at least 1");
    if (!(eps_ack > 0.0 && eps_ack < 1.0))
        throw std::invalid_argument("ack_bound: eps must lie in (0, 1)");
    const double l = std::log2(lambda / eps_ack);
    const double value = constants.c1 * degree * l + constants.c2 * std::log2(lambda) * l;
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(value - 1e-9)));
}

AckNode::AckNode(NodeId id, AckParams params, std::uint64_t master_seed)
    : id_(id), params_(params), rng_(per_node_rng(master_seed, id, "ack"))
{
    params_.validate();
}

void AckNode::on_env_input(Slot slot, const EnvEvent& event)
{
    if (event.kind != EnvKind::Bcast || start_)
        return;
    start_ = slot;
    message_ = event.message;
    state_ = ack_init(params_);
    active_ = true;
    received_ = false;
}

SlotAction AckNode::on_slot(Slot slot)
{
    if (!active_)
        return start_ ? SlotAction::listen() : SlotAction::sleep();
    auto [next, transmit] = ack_step(state_, params_, received_, rng_);
    received_ = false;
    min_p_ = std::min(min_p_, next.p_y);
    max_p_ = std::max(max_p_, next.p_y);
    state_ = next;
    if (state_.halted) {
        active_ = false;
        halt_ = slot;
    }
    if (!transmit)
        return SlotAction::listen();
    Payload payload;
    payload.kind = PayloadKind::Data;
    payload.message = message_;
    return SlotAction::transmit(std::move(payload));
}

void AckNode::on_receive(Slot slot, const Payload& payload)
{
    if (payload.kind == PayloadKind::Data)
        first_heard_.try_emplace(payload.sender, slot);
    if (active_)
        received_ = true;
}

} // namespace sinrmac
