#pragma once

#include "sinrmac/absmac.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_set>
#include <vector>

namespace sinrmac {

// Basic single/multi-message broadcast: relay every new message once, in FIFO
// order, one outstanding MAC broadcast at a time.
struct ProtocolState {
    std::deque<MessageId> bcastq;
    std::unordered_set<MessageId> rcvd;
    bool mac_busy = false;
};

/// Environment arrival. Returns true when m must be delivered (first sight).
bool on_arrive(ProtocolState& state, MessageId m);
/// MAC reception; same contract as on_arrive.
bool on_mac_rcv(ProtocolState& state, MessageId m);
/// Head of the queue to hand to the MAC, if the MAC is idle.
std::optional<MessageId> on_mac_idle(ProtocolState& state);
/// Ack of the head: pops it and frees the MAC. Throws std::logic_error on a
/// mismatched ack.
void on_mac_ack(ProtocolState& state, MessageId m);

struct DeliverRecord {
    Slot slot;
    NodeId node;
    MessageId message;
};

class BroadcastAutomaton final : public NodeAutomaton {
public:
    BroadcastAutomaton(NodeId id, MacConfig config, std::uint64_t master_seed, MacEventLog* log)
        : id_(id), mac_(id, config, master_seed, log), log_(log) {}

    void on_wake(Slot) override { awake_ = true; }
    SlotAction on_slot(Slot slot) override;
    void on_receive(Slot slot, const Payload& payload) override;
    void on_env_input(Slot slot, const EnvEvent& event) override;
    void on_slot_end(Slot slot) override { mac_.end(slot); }
    bool terminated() const override { return state_.bcastq.empty() && !state_.mac_busy; }

    const ProtocolState& state() const { return state_; }
    const std::vector<DeliverRecord>& delivered() const { return delivered_; }
    /// Order in which messages were handed to the MAC.
    const std::vector<MessageId>& bcast_order() const { return bcast_order_; }
    MacNode& mac() { return mac_; }
    const MacNode& mac() const { return mac_; }

private:
    void deliver(Slot slot, MessageId m);

    NodeId id_;
    MacNode mac_;
    MacEventLog* log_;
    ProtocolState state_;
    std::vector<DeliverRecord> delivered_;
    std::vector<MessageId> bcast_order_;
    bool awake_ = false;
};

} // namespace sinrmac
