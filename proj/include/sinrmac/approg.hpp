#pragma once

#include "sinrmac/engine.hpp"
#include "sinrmac/graph.hpp"
#include "sinrmac/reliability.hpp"
#include "sinrmac/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sinrmac {

/// Iterated base-2 logarithm; 0 for x <= 1.
std::uint32_t log_star(double x);

// Theta-constants of the approximate-progress algorithm. The algorithm is only
// specified up to these; defaults follow the asymptotic recipe.
struct ApprogConstants {
    double phi0 = 2.0;       // Phi = max(phi_min, ceil(phi0 log Lambda))
    std::uint32_t phi_min = 4;
    double q0 = 1.0;         // Q = max(q_hat, ceil(q0 log^alpha Lambda))
    std::uint64_t q_hat = 16;
    double t0 = 4.0;         // T = ceil(t0 log(f(h_1)/eps) / (gamma^2 mu))
    double lambda0 = 6.0;    // label range ceil(Lambda^lambda0 / eps)
    double b0 = 4.0;         // burst length ceil(b0 Q log(1/eps))
    std::uint32_t c = 4;     // MIS runtime factor in the h recursion
    std::uint32_t c_stages = 4;
};

struct HSequence {
    // Index 0 is phase 1.
    std::vector<std::uint64_t> h;
    std::vector<std::uint64_t> h_prime;
};

/// h_Phi = h'_Phi = 1, h'_phi = 3 h_{phi+1}, h_phi = h'_phi + c log*(label_range) + 1.
HSequence compute_h_sequence(std::uint32_t phi, std::uint64_t label_range, std::uint32_t c);

struct ApprogParams {
    double p = 0.25;
    double mu = 0.05;
    double gamma = 0.5;
    double eps_approg = 0.2;
    std::uint32_t phi = 4;
    std::uint64_t q = 16;
    std::uint64_t T = 64;
    std::uint64_t label_range = 1 << 20;
    std::uint32_t c_stages = 4;
    std::uint64_t burst_len = 64;

    /// Throws std::invalid_argument on inconsistent values.
    void validate() const;

    std::uint32_t rounds_per_stage() const;  // log*(label_range) + 2
    std::uint64_t mis_rounds() const;        // c_stages * rounds_per_stage
    std::uint64_t discovery_len() const { return 2 * T; }
    std::uint64_t mis_len() const { return 2 * T * mis_rounds(); }
    std::uint64_t phase_len() const { return discovery_len() + mis_len() + burst_len; }
    std::uint64_t epoch_len() const { return phi * phase_len(); }

    /// Labels heard at least this often become potential neighbors.
    double neighbor_threshold() const { return (1.0 - gamma / 2.0) * mu * static_cast<double>(T); }
    /// ceil(1 / ((1 - gamma/2) mu)).
    std::size_t neighbor_cap() const;
    double burst_probability() const { return p / static_cast<double>(q); }
};

/// Parameters from Lambda, alpha and the constants. T uses the disc-packing
/// growth bound evaluated at h_1.
ApprogParams derive_approg_params(double lambda, double alpha, double p, double mu, double gamma,
                                  double eps_approg, const ApprogConstants& constants = {});

/// Slots of one epoch with the given parameters.
std::uint64_t approg_bound(const ApprogParams& params);
std::uint64_t approg_bound(double lambda, double alpha, double p, double mu, double gamma, double eps_approg,
                           const ApprogConstants& constants = {});

enum class EpochBlock : std::uint8_t { Labels, Lists, Mis, Burst };

struct EpochPosition {
    std::uint64_t epoch = 0;
    std::uint64_t offset = 0;  // slot within the epoch
    std::uint32_t phase = 0;   // 0-based
    EpochBlock block = EpochBlock::Labels;
    std::uint64_t index = 0;   // slot within the block
    // MIS block only
    std::uint64_t round = 0;
    std::uint64_t logical = 0; // replayed schedule slot in [0, T)
    bool ack = false;          // acknowledgment sub-slot

    bool last_of_block(const ApprogParams& params) const;
};

EpochPosition locate(const ApprogParams& params, Slot k);

// ---- modified MIS with temporary labels ---------------------------------

enum class MisRole : std::uint8_t { Competitor, Ruler, Ruled, Dominator, Dominated };

std::string_view to_string(MisRole role);

struct MisView {
    MisRole role;
    std::uint64_t r;
};

struct MisNode {
    MisRole role = MisRole::Competitor;
    std::uint64_t label = 0;
    std::uint64_t r = 0;

    /// Stage start: rulers and ruled compete again, competitors reset r to the label.
    void start_stage();
    /// One synchronous round given the neighbors' states at the round start.
    void apply_round(std::span<const MisView> neighbors);
};

struct MisOutcome {
    std::vector<NodeId> dominators; // sorted
    std::vector<MisRole> roles;     // aligned with graph.vertices()
    std::uint64_t rounds = 0;
};

/// Centralized run with perfect communication; labels aligned with graph.vertices().
MisOutcome mis_modified(const Graph& graph, std::span<const std::uint64_t> labels, std::uint32_t c_stages,
                        std::uint64_t label_range);

// ---- per-node logic --------------------------------------------------------

struct PhaseRecord {
    std::uint64_t epoch = 0;
    std::uint32_t phase = 0;
    NodeId node = 0;
    std::uint64_t label = 0;
    std::vector<NodeId> potential;
    std::vector<NodeId> confirmed;
    bool dropped = false;
    /// Round in which the node dropped out, if it did.
    std::optional<std::uint64_t> drop_round;
    MisRole role = MisRole::Competitor;
    bool next_member = false;
};

// Collects phase records from all nodes of a run. Single-threaded.
class ApprogObserver {
public:
    void record(PhaseRecord rec) { records_.push_back(std::move(rec)); }
    const std::vector<PhaseRecord>& records() const { return records_; }

    /// (epoch, phase) pairs whose S_{phi+1} is not independent in the union of
    /// confirmed neighbor relations.
    std::vector<std::pair<std::uint64_t, std::uint32_t>> independence_violations() const;

    /// Potential-neighbor lists longer than the cap.
    std::size_t cap_violations(std::size_t cap) const;

private:
    std::vector<PhaseRecord> records_;
};

struct BurstHit {
    Slot slot;
    NodeId sender;
    MessageId message;
};

// Algorithm state of one node, driven by algorithm slots k = 0, 1, 2, ...
// Epochs are aligned to k = 0. Random choices come from per-node streams
// keyed by (epoch, phase), so the centralized drivers below can reproduce them.
class ApprogNode {
public:
    ApprogNode(NodeId id, ApprogParams params, std::uint64_t master_seed);

    /// Ongoing broadcast; sampled at the next epoch start.
    void set_message(std::optional<MessageId> m) { message_ = m; }
    std::optional<MessageId> message() const { return message_; }
    void set_observer(ApprogObserver* observer) { observer_ = observer; }

    SlotAction act(Slot k);
    /// Returns a message that is new to this node in the current epoch.
    std::optional<MessageId> hear(Slot k, const Payload& payload);
    void end_slot(Slot k);

    bool member() const { return member_ && !dropped_; }
    bool dropped() const { return dropped_; }
    std::optional<MessageId> latched() const { return latched_; }
    const std::vector<BurstHit>& burst_log() const { return burst_log_; }
    std::uint64_t epochs_joined() const { return epochs_joined_; }

private:
    void begin_epoch(const EpochPosition& pos);
    void begin_phase(const EpochPosition& pos);
    void finish_round(std::uint64_t round);
    void finish_phase();
    bool is_confirmed(NodeId v) const;
    Payload make_payload(PayloadKind kind) const;

    NodeId id_;
    ApprogParams params_;
    std::uint64_t seed_;
    ApprogObserver* observer_ = nullptr;
    std::optional<MessageId> message_;

    std::optional<std::uint64_t> epoch_;
    std::optional<MessageId> epoch_message_;
    std::uint64_t epochs_joined_ = 0;
    bool member_ = false;
    bool dropped_ = false;
    std::optional<std::uint64_t> drop_round_;
    std::optional<MessageId> latched_;
    std::vector<MessageId> epoch_rcv_;
    std::vector<BurstHit> burst_log_;

    std::optional<std::uint32_t> phase_;
    Rng tx_rng_{0};
    std::uint64_t label_ = 0;
    std::vector<char> schedule_; // own sends in the label block
    std::vector<std::pair<NodeId, std::uint64_t>> counts_;
    std::vector<NodeId> potential_;
    std::vector<NodeId> confirmed_;
    MisNode mis_;
    std::vector<NodeId> heard_;
    std::vector<MisView> views_;
    std::vector<NodeId> acked_;
    std::optional<NodeId> pending_ack_;
};

// Standalone automaton: one algorithm slot per engine slot. A Bcast input sets
// the ongoing broadcast; Abort clears it.
class ApprogAutomaton final : public NodeAutomaton {
public:
    ApprogAutomaton(NodeId id, ApprogParams params, std::uint64_t master_seed)
        : node_(id, params, master_seed) {}

    void on_wake(Slot) override { awake_ = true; }
    SlotAction on_slot(Slot slot) override;
    void on_receive(Slot slot, const Payload& payload) override;
    void on_env_input(Slot slot, const EnvEvent& event) override;
    void on_slot_end(Slot slot) override { node_.end_slot(slot); }

    ApprogNode& node() { return node_; }
    const ApprogNode& node() const { return node_; }

private:
    ApprogNode node_;
    bool awake_ = false;
};

// ---- centralized block drivers ---------------------------------------------
// These evaluate the blocks of one phase directly over the medium, drawing from
// the same per-node streams as ApprogNode.

/// Streams of one phase, aligned with `members`.
struct PhaseStreams {
    std::vector<Rng> tx;
    std::vector<std::uint64_t> labels;
};

PhaseStreams make_phase_streams(std::uint64_t master_seed, std::span<const NodeId> members, std::uint64_t epoch,
                                std::uint32_t phase, std::uint64_t label_range);

struct DiscoveryResult {
    std::vector<NodeId> members;
    std::vector<std::vector<NodeId>> potential;  // aligned with members
    std::vector<std::vector<NodeId>> confirmed;  // aligned with members
    Graph graph;                                 // mutual confirmations
    /// tau: sorted sender set of every label-block slot.
    std::vector<std::vector<NodeId>> schedule;
};

/// Both discovery blocks (2T slots). `members` must be sorted.
DiscoveryResult neighbor_discovery(const Medium& medium, std::span<const NodeId> members, const ApprogParams& params,
                                   PhaseStreams& streams);

struct CongestReport {
    /// received[i]: (sender, fields) pairs delivered to members[i], first copy only.
    std::vector<std::vector<std::pair<NodeId, std::vector<std::uint64_t>>>> received;
    std::vector<std::vector<NodeId>> acked_by;
    std::vector<char> dropped; // after this round, including earlier dropouts
};

/// One CONGEST round: replays the schedule over T (data, ack) sub-slot pairs.
/// `dropped` marks members already out; payload[i] is members[i]'s message.
CongestReport congest_round_simulate(const Medium& medium, const DiscoveryResult& discovery,
                                     std::span<const std::vector<std::uint64_t>> payload,
                                     std::span<const char> dropped);

struct BurstReception {
    std::uint64_t slot; // within the burst block
    NodeId receiver;
    NodeId sender;
    MessageId message;
};

/// burst_len slots; each member sends its message with probability p/Q.
std::vector<BurstReception> bcast_burst(const Medium& medium, std::span<const NodeId> members,
                                        std::span<const MessageId> messages, const ApprogParams& params,
                                        std::span<Rng> tx);

struct EpochPhaseReport {
    std::vector<NodeId> members;      // S_phi
    Graph graph;                      // discovered graph
    std::vector<NodeId> dropped;      // dropped out in this phase
    std::vector<NodeId> next_members; // S_{phi+1}
};

struct EpochReport {
    std::vector<EpochPhaseReport> phases;
    /// First burst reception of every node in the epoch: (epoch offset, sender, message).
    std::vector<std::optional<BurstHit>> latched;
    std::uint64_t slots = 0;
};

/// One full epoch for the broadcasters S_1 (sorted, with their messages).
/// Throws std::logic_error if some S_{phi+1} is not independent.
EpochReport epoch_run(const Medium& medium, std::span<const NodeId> broadcasters, std::span<const MessageId> messages,
                      const ApprogParams& params, std::uint64_t master_seed, std::uint64_t epoch = 0);

// ---- oracle substitution ----------------------------------------------------

struct OracleOptions {
    /// Above this size the reliability matrix is estimated by sampling.
    std::size_t exact_limit = kExactEnumerationLimit;
    std::uint64_t mc_trials = 100000;
};

struct OraclePhase {
    std::vector<NodeId> members;
    Graph graph;
    std::vector<NodeId> dominators;
    std::optional<double> d_min;
};

/// Phases with the discovered graph replaced by H_p^mu[S_phi] and unique
/// labels; MIS under perfect communication.
std::vector<OraclePhase> oracle_substitution_run(const Topology& topology, const SinrParams& sinr,
                                                 std::span<const NodeId> broadcasters, const ApprogParams& params,
                                                 std::uint64_t seed, const OracleOptions& options = {});

} // namespace sinrmac
