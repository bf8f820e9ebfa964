#pragma once

#include "sinrmac/sinr.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sinrmac {

using Slot = std::uint64_t;
using MessageId = std::uint64_t;

/// Message identity (origin, sequence number) packed into 64 bits.
constexpr MessageId make_message_id(NodeId origin, std::uint32_t seq)
{
    return (static_cast<MessageId>(origin) << 32) | seq;
}
constexpr NodeId message_origin(MessageId m) { return static_cast<NodeId>(m >> 32); }

enum class PayloadKind : std::uint8_t {
    Data,         // bcast message sent by the acknowledgment algorithm
    Label,        // neighbor discovery, first block
    NeighborList, // neighbor discovery, second block
    MisState,     // CONGEST round message of the MIS
    MisAck,       // acknowledgment sub-slot
    Burst,        // bcast message sent during a burst
};

std::string_view to_string(PayloadKind kind);

/// Opaque payload with structured metadata. Field counts are bounded.
struct Payload {
    PayloadKind kind = PayloadKind::Data;
    NodeId sender = 0; // stamped by the engine
    MessageId message = 0;
    std::uint32_t epoch = 0;
    std::uint32_t phase = 0;
    std::vector<std::uint64_t> fields;

    bool carries_message() const { return kind == PayloadKind::Data || kind == PayloadKind::Burst; }
};

inline constexpr std::size_t kMaxPayloadFields = 4096;

struct SlotAction {
    enum class Kind : std::uint8_t { Sleep, Listen, Transmit };

    Kind kind = Kind::Sleep;
    Payload payload;

    static SlotAction sleep() { return {}; }
    static SlotAction listen() { return {Kind::Listen, {}}; }
    static SlotAction transmit(Payload p) { return {Kind::Transmit, std::move(p)}; }
};

enum class EnvKind : std::uint8_t { Bcast, Abort, Arrive };

std::string_view to_string(EnvKind kind);

struct EnvEvent {
    Slot slot = 0;
    NodeId node = 0;
    EnvKind kind = EnvKind::Bcast;
    MessageId message = 0;
};

// Per-node protocol logic driven by the slot engine. Callbacks must be
// deterministic functions of internal state, the node's own RNG streams and
// their inputs.
class NodeAutomaton {
public:
    virtual ~NodeAutomaton() = default;

    virtual void on_wake(Slot slot) { (void)slot; }
    virtual SlotAction on_slot(Slot slot) = 0;
    virtual void on_receive(Slot slot, const Payload& payload) = 0;
    virtual void on_env_input(Slot slot, const EnvEvent& event)
    {
        (void)slot;
        (void)event;
    }
    /// Called for every node after the slot's receptions were delivered.
    virtual void on_slot_end(Slot slot) { (void)slot; }
    virtual bool terminated() const { return false; }
};

struct SimConfig {
    std::uint64_t master_seed = 0;
    Slot max_slots = 1;
    /// Drop message-carrying receptions (Data, Burst) whose sender is not a
    /// strong (G_{1-eps}) neighbor. Control payloads are unaffected.
    bool rcv_filter_strong_only = false;
    /// Keep per-slot records; the digest is maintained either way.
    bool record_trace = false;
};

struct TraceReception {
    NodeId receiver;
    NodeId sender;
    PayloadKind kind;
    MessageId message;
};

struct SlotRecord {
    Slot slot = 0;
    std::vector<NodeId> transmitters;
    std::vector<PayloadKind> tx_kinds; // aligned with transmitters
    std::vector<TraceReception> receptions;
    std::vector<EnvEvent> env;
};

struct Trace {
    std::uint64_t master_seed = 0;
    Slot slots_run = 0;
    std::uint64_t digest = 0;
    std::uint64_t transmissions = 0;
    std::uint64_t receptions = 0;
    std::optional<std::string> fault;
    /// Slots with any activity; empty slots are omitted.
    std::vector<SlotRecord> records;
};

// Radio medium: resolves the SINR outcome of a slot. Gains P/d^alpha are cached
// in a dense matrix up to kGainCacheLimit nodes.
class Medium {
public:
    Medium(const Topology& topology, const SinrParams& params, bool strong_only = false);
    // Keeps a pointer to the topology, so temporaries are refused.
    Medium(Topology&&, const SinrParams&, bool = false) = delete;

    /// Receptions of one slot, ordered by receiver. With strong_only set, weak
    /// receptions are dropped regardless of payload.
    void resolve(std::span<const NodeId> senders, std::vector<Reception>& out) const;
    std::vector<Reception> resolve(std::span<const NodeId> senders) const;

    double gain(NodeId from, NodeId to) const;
    bool is_strong_pair(NodeId u, NodeId v) const;
    const Topology& topology() const { return *topology_; }
    const SinrParams& params() const { return params_; }

private:
    const Topology* topology_;
    SinrParams params_;
    bool strong_only_;
    double r_strong_;
    std::vector<double> gains_;
};

inline constexpr std::size_t kGainCacheLimit = 4096;

// Slot-synchronous engine. Non-owning: automata outlive the simulator.
class Simulator {
public:
    Simulator(const Topology& topology, const SinrParams& params, std::vector<NodeAutomaton*> automata,
              std::vector<EnvEvent> env_schedule, SimConfig config);

    /// Runs one slot. Returns false once the run has finished.
    bool step();
    Trace run();
    /// Runs until `stop(slot)` holds after a slot, or the run finishes.
    Trace run_until(const std::function<bool(Slot)>& stop);

    Slot now() const { return now_; }
    bool finished() const { return finished_; }
    bool awake(NodeId id) const { return awake_.at(id) != 0; }
    /// First slot at which the node was awake; nullopt while dormant.
    std::optional<Slot> wake_slot(NodeId id) const;
    const Trace& trace() const { return trace_; }
    const Medium& medium() const { return medium_; }

private:
    void wake(NodeId id, Slot slot);
    void fault(std::string message);

    const Topology& topology_;
    Medium medium_;
    std::vector<NodeAutomaton*> automata_;
    std::vector<EnvEvent> env_;
    std::size_t env_pos_ = 0;
    SimConfig config_;
    std::vector<char> awake_;
    std::vector<Slot> wake_slot_;
    Slot now_ = 0;
    bool finished_ = false;
    Trace trace_;
    std::vector<NodeId> senders_;
    std::vector<Payload> outgoing_;
    std::vector<Reception> receptions_;
};

/// Convenience wrapper: build a Simulator and run it to completion.
Trace run(const Topology& topology, const SinrParams& params, std::vector<NodeAutomaton*> automata,
          std::vector<EnvEvent> env_schedule, const SimConfig& config);

/// One JSON object per line per recorded slot, then a summary line.
void write_trace_jsonl(const Trace& trace, std::ostream& out);

} // namespace sinrmac
