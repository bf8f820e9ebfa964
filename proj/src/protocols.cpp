#include "sinrmac/protocols.hpp"

#include <stdexcept>

namespace sinrmac {

bool on_arrive(ProtocolState& state, MessageId m)
{
    if (!state.rcvd.insert(m).second)
        return false;
    state.bcastq.push_back(m);
    return true;
}

bool on_mac_rcv(ProtocolState& state, MessageId m)
{
    // Same bookkeeping as an arrival: a message enters bcastq only once.
    return on_arrive(state, m);
}

std::optional<MessageId> on_mac_idle(ProtocolState& state)
{
    if (state.mac_busy || state.bcastq.empty())
        return std::nullopt;
    state.mac_busy = true;
    return state.bcastq.front();
}

void on_mac_ack(ProtocolState& state, MessageId m)
{
    if (!state.mac_busy || state.bcastq.empty() || state.bcastq.front() != m)
        throw std::logic_error("on_mac_ack: ack does not match the outstanding broadcast");
    state.bcastq.pop_front();
    state.mac_busy = false;
}

void BroadcastAutomaton::deliver(Slot slot, MessageId m)
{
    delivered_.push_back({slot, id_, m});
    if (log_)
        log_->append({slot, id_, MacEventKind::Deliver, m});
}

SlotAction BroadcastAutomaton::on_slot(Slot slot)
{
    if (auto acked = mac_.poll_ack(slot))
        on_mac_ack(state_, *acked);
    if (auto next = on_mac_idle(state_)) {
        mac_.bcast(slot, *next);
        bcast_order_.push_back(*next);
    }
    SlotAction a = mac_.slot(slot);
    return awake_ ? a : SlotAction::sleep();
}

void BroadcastAutomaton::on_receive(Slot slot, const Payload& payload)
{
    if (auto m = mac_.receive(slot, payload))
        if (on_mac_rcv(state_, *m))
            deliver(slot, *m);
}

void BroadcastAutomaton::on_env_input(Slot slot, const EnvEvent& event)
{
    if (event.kind == EnvKind::Arrive && on_arrive(state_, event.message))
        deliver(slot, event.message);
}

} // namespace sinrmac
