#include "sinrmac/engine.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <ostream>
#include <stdexcept>

namespace sinrmac {

std::string_view to_string(PayloadKind kind)
{
    switch (kind) {
    case PayloadKind::Data: return "data";
    case PayloadKind::Label: return "label";
    case PayloadKind::NeighborList: return "neighbor_list";
    case PayloadKind::MisState: return "mis_state";
    case PayloadKind::MisAck: return "mis_ack";
    case PayloadKind::Burst: return "burst";
    }
    return "unknown";
}

std::string_view to_string(EnvKind kind)
{
    switch (kind) {
    case EnvKind::Bcast: return "bcast";
    case EnvKind::Abort: return "abort";
    case EnvKind::Arrive: return "arrive";
    }
    return "unknown";
}

Medium::Medium(const Topology& topology, const SinrParams& params, bool strong_only)
    : topology_(&topology), params_(params), strong_only_(strong_only),
      r_strong_(transmission_range(params).r_strong)
{
    const std::size_t n = topology.size();
    if (n <= kGainCacheLimit) {
        gains_.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double g = params_.gain(topology.distance(static_cast<NodeId>(i), static_cast<NodeId>(j)));
                gains_[i * n + j] = g;
                gains_[j * n + i] = g;
            }
    }
}

double Medium::gain(NodeId from, NodeId to) const
{
    if (!gains_.empty())
        return gains_[static_cast<std::size_t>(from) * topology_->size() + to];
    return params_.gain(topology_->distance(from, to));
}

bool Medium::is_strong_pair(NodeId u, NodeId v) const
{
    return within_range(topology_->distance(u, v), r_strong_);
}

void Medium::resolve(std::span<const NodeId> senders, std::vector<Reception>& out) const
{
    out.clear();
    if (senders.empty())
        return;
    const std::size_t n = topology_->size();
    std::vector<char> sending(n, 0);
    for (NodeId s : senders)
        sending[s] = 1;
    for (NodeId u = 0; u < n; ++u) {
        if (sending[u])
            continue;
        double total = 0.0;
        double best = -1.0;
        NodeId best_sender = 0;
        if (!gains_.empty()) {
            const double* row = gains_.data() + static_cast<std::size_t>(u) * n;
            for (NodeId s : senders) {
                const double g = row[s];
                total += g;
                if (g > best) {
                    best = g;
                    best_sender = s;
                }
            }
        } else {
            for (NodeId s : senders) {
                const double g = gain(s, u);
                total += g;
                if (g > best) {
                    best = g;
                    best_sender = s;
                }
            }
        }
        if (!sinr_meets_threshold(best, total - best, params_))
            continue;
        if (strong_only_ && !is_strong_pair(u, best_sender))
            continue;
        out.push_back({u, best_sender});
    }
}

std::vector<Reception> Medium::resolve(std::span<const NodeId> senders) const
{
    std::vector<Reception> out;
    resolve(senders, out);
    return out;
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x00000100000001b3ULL;

void fnv(std::uint64_t& h, std::uint64_t value)
{
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xffu;
        h *= kFnvPrime;
    }
}

} // namespace

Simulator::Simulator(const Topology& topology, const SinrParams& params, std::vector<NodeAutomaton*> automata,
                     std::vector<EnvEvent> env_schedule, SimConfig config)
    : topology_(topology), medium_(topology, params, false),
      automata_(std::move(automata)), env_(std::move(env_schedule)), config_(config),
      awake_(topology.size(), 0), wake_slot_(topology.size(), 0)
{
    if (automata_.size() != topology.size())
        throw std::invalid_argument("Simulator: one automaton per node required");
    if (config_.max_slots < 1)
        throw std::invalid_argument("Simulator: max_slots must be at least 1");
    for (const auto& ev : env_)
        if (!topology.contains(ev.node))
            throw std::invalid_argument("Simulator: env event for unknown node");
    std::stable_sort(env_.begin(), env_.end(), [](const EnvEvent& a, const EnvEvent& b) {
        return a.slot < b.slot || (a.slot == b.slot && a.node < b.node);
    });
    trace_.master_seed = config_.master_seed;
    trace_.digest = kFnvOffset;
}

std::optional<Slot> Simulator::wake_slot(NodeId id) const
{
    if (!awake_.at(id))
        return std::nullopt;
    return wake_slot_[id];
}

void Simulator::wake(NodeId id, Slot slot)
{
    if (awake_[id])
        return;
    awake_[id] = 1;
    wake_slot_[id] = slot;
    automata_[id]->on_wake(slot);
}

void Simulator::fault(std::string message)
{
    trace_.fault = std::move(message);
    finished_ = true;
}

bool Simulator::step()
{
    if (finished_)
        return false;
    const Slot t = now_;
    SlotRecord record;
    record.slot = t;

    // (1) environment inputs, ascending node id
    while (env_pos_ < env_.size() && env_[env_pos_].slot <= t) {
        const EnvEvent& ev = env_[env_pos_++];
        wake(ev.node, t);
        automata_[ev.node]->on_env_input(t, ev);
        if (config_.record_trace)
            record.env.push_back(ev);
        fnv(trace_.digest, 0xe0000000ULL | static_cast<std::uint64_t>(ev.kind));
        fnv(trace_.digest, ev.node);
        fnv(trace_.digest, ev.message);
    }

    // (2) actions
    senders_.clear();
    outgoing_.clear();
    for (NodeId id = 0; id < automata_.size(); ++id) {
        SlotAction action = automata_[id]->on_slot(t);
        if (!awake_[id] && action.kind != SlotAction::Kind::Sleep) {
            fault("node " + std::to_string(id) + " acted while dormant at slot " + std::to_string(t));
            return false;
        }
        if (action.kind == SlotAction::Kind::Transmit) {
            if (action.payload.fields.size() > kMaxPayloadFields) {
                fault("node " + std::to_string(id) + " exceeded the payload field bound");
                return false;
            }
            action.payload.sender = id;
            senders_.push_back(id);
            outgoing_.push_back(std::move(action.payload));
        }
    }

    // (3) receptions
    medium_.resolve(senders_, receptions_);
    fnv(trace_.digest, t);
    for (NodeId s : senders_)
        fnv(trace_.digest, s);
    trace_.transmissions += senders_.size();
    NodeId last_receiver = 0;
    bool any = false;
    for (const Reception& r : receptions_) {
        if (any && r.receiver <= last_receiver) {
            fault("multiple receptions at one listener");
            return false;
        }
        any = true;
        last_receiver = r.receiver;
        const auto pos = std::lower_bound(senders_.begin(), senders_.end(), r.sender);
        const Payload& payload = outgoing_[static_cast<std::size_t>(pos - senders_.begin())];
        if (config_.rcv_filter_strong_only && payload.carries_message() &&
            !medium_.is_strong_pair(r.receiver, r.sender))
            continue;
        if (!awake_[r.receiver])
            wake(r.receiver, t + 1);
        automata_[r.receiver]->on_receive(t, payload);
        fnv(trace_.digest, (static_cast<std::uint64_t>(r.receiver) << 32) | r.sender);
        fnv(trace_.digest, payload.message);
        ++trace_.receptions;
        if (config_.record_trace)
            record.receptions.push_back({r.receiver, r.sender, payload.kind, payload.message});
    }
    for (NodeId id = 0; id < automata_.size(); ++id)
        automata_[id]->on_slot_end(t);

    if (config_.record_trace && (!senders_.empty() || !record.env.empty())) {
        record.transmitters = senders_;
        for (const Payload& p : outgoing_)
            record.tx_kinds.push_back(p.kind);
        trace_.records.push_back(std::move(record));
    }

    ++now_;
    trace_.slots_run = now_;
    if (now_ >= config_.max_slots) {
        finished_ = true;
    } else if (env_pos_ == env_.size()) {
        finished_ = std::all_of(automata_.begin(), automata_.end(),
                                [](const NodeAutomaton* a) { return a->terminated(); });
    }
    return !finished_;
}

Trace Simulator::run()
{
    while (step()) {
    }
    return trace_;
}

Trace Simulator::run_until(const std::function<bool(Slot)>& stop)
{
    while (step()) {
        if (stop(now_ - 1))
            break;
    }
    return trace_;
}

Trace run(const Topology& topology, const SinrParams& params, std::vector<NodeAutomaton*> automata,
          std::vector<EnvEvent> env_schedule, const SimConfig& config)
{
    Simulator sim(topology, params, std::move(automata), std::move(env_schedule), config);
    return sim.run();
}

void write_trace_jsonl(const Trace& trace, std::ostream& out)
{
    using nlohmann::ordered_json;
    for (const auto& rec : trace.records) {
        ordered_json line;
        line["slot"] = rec.slot;
        line["tx"] = rec.transmitters;
        auto kinds = ordered_json::array();
        for (PayloadKind k : rec.tx_kinds)
            kinds.push_back(std::string(to_string(k)));
        line["tx_kind"] = std::move(kinds);
        auto rx = ordered_json::array();
        for (const auto& r : rec.receptions)
            rx.push_back(ordered_json::array({r.receiver, r.sender, std::string(to_string(r.kind)), r.message}));
        line["rx"] = std::move(rx);
        auto env = ordered_json::array();
        for (const auto& e : rec.env)
            env.push_back(ordered_json::array({e.node, std::string(to_string(e.kind)), e.message}));
        line["env"] = std::move(env);
        out << line.dump() << '\n';
    }
    ordered_json summary;
    summary["summary"] = true;
    summary["seed"] = trace.master_seed;
    summary["slots"] = trace.slots_run;
    summary["transmissions"] = trace.transmissions;
    summary["receptions"] = trace.receptions;
    summary["digest"] = trace.digest;
    summary["fault"] = trace.fault ? ordered_json(*trace.fault) : ordered_json(nullptr);
    out << summary.dump() << '\n';
}

} // namespace sinrmac
