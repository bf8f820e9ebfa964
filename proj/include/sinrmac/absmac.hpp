#pragma once

#include "sinrmac/ack_broadcast.hpp"
#include "sinrmac/approg.hpp"
#include "sinrmac/engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace sinrmac {

enum class MacEventKind : std::uint8_t { Bcast, Ack, Rcv, Abort, Deliver };

std::string_view to_string(MacEventKind kind);

struct MacEvent {
    Slot slot;
    NodeId node;
    MacEventKind kind;
    MessageId message;
};

// Append-only event log shared by the nodes of one run.
class MacEventLog {
public:
    void append(MacEvent e) { events_.push_back(e); }
    const std::vector<MacEvent>& events() const { return events_; }
    /// One JSON object per line: {"slot","node","event","message"}.
    void write_jsonl(std::ostream& out) const;

private:
    std::vector<MacEvent> events_;
};

/// Per node and message the log must read Rcv? (Bcast (Ack | Abort)?)? with at
/// most one Deliver. Returns a description of the first violation.
std::optional<std::string> check_event_order(const std::vector<MacEvent>& events);

// Guarantees in physical slots. The ack algorithm owns even slots, so f_ack is
// twice the ack bound; an approximate-progress window must cover one aligned
// epoch of odd slots, hence four epoch lengths.
struct MacGuarantees {
    std::uint64_t f_ack;
    double eps_ack;
    std::uint64_t f_approg;
    double eps_approg;
};

MacGuarantees guarantees(const AckParams& ack, const ApprogParams& approg, double lambda, double max_degree,
                         AckBoundConstants constants = {});

struct MacConfig {
    AckParams ack;
    ApprogParams approg;
    /// Physical slots from Bcast to Ack.
    std::uint64_t f_ack = 1;

    /// f_ack from the guarantees, and the ack algorithm's step budget to match.
    static MacConfig make(AckParams ack, ApprogParams approg, double lambda, double max_degree,
                          AckBoundConstants constants = {});
};

// One node's MAC: the ack algorithm on even slots, the approximate-progress
// algorithm on odd slots (epoch clock k = (t - 1) / 2).
class MacNode {
public:
    MacNode(NodeId id, MacConfig config, std::uint64_t master_seed, MacEventLog* log);

    /// Throws std::logic_error while another broadcast is active.
    void bcast(Slot t, MessageId m);
    /// Ignored unless m is the active broadcast.
    void abort(Slot t, MessageId m);
    bool busy() const { return active_.has_value(); }
    std::optional<MessageId> active() const { return active_; }

    /// Emits the Ack due at slot t, if any. Call before slot().
    std::optional<MessageId> poll_ack(Slot t);
    SlotAction slot(Slot t);
    /// Returns a message to surface as Rcv (new to this node).
    std::optional<MessageId> receive(Slot t, const Payload& payload);
    void end(Slot t);

    ApprogNode& approg() { return approg_; }
    const ApprogNode& approg() const { return approg_; }
    const MacConfig& config() const { return config_; }
    /// Even-slot (Data) receptions, for diagnostics.
    std::uint64_t data_receptions() const { return data_receptions_; }
    std::optional<Slot> ack_algorithm_halt() const { return halt_; }

private:
    void log(Slot t, MacEventKind kind, MessageId m);

    NodeId id_;
    MacConfig config_;
    MacEventLog* log_;
    Rng ack_rng_;
    ApprogNode approg_;
    std::optional<MessageId> active_;
    Slot start_ = 0;
    bool alg1_running_ = false;
    AckState ack_state_;
    bool received_ = false;
    std::optional<Slot> halt_;
    std::unordered_set<MessageId> seen_;
    std::uint64_t data_receptions_ = 0;
};

// Standalone MAC driven by Bcast/Abort environment inputs.
class MacAutomaton final : public NodeAutomaton {
public:
    MacAutomaton(NodeId id, MacConfig config, std::uint64_t master_seed, MacEventLog* log)
        : mac_(id, config, master_seed, log) {}

    void on_wake(Slot) override { awake_ = true; }
    SlotAction on_slot(Slot slot) override;
    void on_receive(Slot slot, const Payload& payload) override { mac_.receive(slot, payload); }
    void on_env_input(Slot slot, const EnvEvent& event) override;
    void on_slot_end(Slot slot) override { mac_.end(slot); }
    bool terminated() const override { return !mac_.busy() && !mac_.approg().member(); }

    MacNode& mac() { return mac_; }
    const MacNode& mac() const { return mac_; }

private:
    MacNode mac_;
    bool awake_ = false;
};

} // namespace sinrmac
