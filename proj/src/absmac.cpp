#include "sinrmac/absmac.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace sinrmac {

std::string_view to_string(MacEventKind kind)
{
    switch (kind) {
    case MacEventKind::Bcast: return "bcast";
    case MacEventKind::Ack: return "ack";
    case MacEventKind::Rcv: return "rcv";
    case MacEventKind::Abort: return "abort";
    case MacEventKind::Deliver: return "deliver";
    }
    return "unknown";
}

void MacEventLog::write_jsonl(std::ostream& out) const
{
    for (const auto& e : events_) {
        nlohmann::ordered_json line;
        line["slot"] = e.slot;
        line["node"] = e.node;
        line["event"] = std::string(to_string(e.kind));
        line["message"] = e.message;
        out << line.dump() << '\n';
    }
}

std::optional<std::string> check_event_order(const std::vector<MacEvent>& events)
{
    struct Seen {
        int rcv = 0, bcast = 0, closed = 0, deliver = 0;
    };
    std::map<std::pair<NodeId, MessageId>, Seen> state;
    Slot last = 0;
    for (const auto& e : events) {
        auto describe = [&](const char* what) {
            return std::string(what) + " at node " + std::to_string(e.node) + ", slot " + std::to_string(e.slot) +
                   ", message " + std::to_string(e.message);
        };
        if (e.slot < last)
            return describe("events out of slot order");
        last = e.slot;
        Seen& s = state[{e.node, e.message}];
        switch (e.kind) {
        case MacEventKind::Rcv:
            if (s.rcv || s.bcast)
                return describe("rcv after rcv or bcast");
            ++s.rcv;
            break;
        case MacEventKind::Bcast:
            if (s.bcast)
                return describe("second bcast");
            ++s.bcast;
            break;
        case MacEventKind::Ack:
        case MacEventKind::Abort:
            if (!s.bcast || s.closed)
                return describe(e.kind == MacEventKind::Ack ? "ack without open bcast" : "abort without open bcast");
            ++s.closed;
            break;
        case MacEventKind::Deliver:
            if (s.deliver)
                return describe("second deliver");
            ++s.deliver;
            break;
        }
    }
    return std::nullopt;
}

MacGuarantees guarantees(const AckParams& ack, const ApprogParams& approg, double lambda, double max_degree,
                         AckBoundConstants constants)
{
    ack.validate();
    approg.validate();
    MacGuarantees g;
    g.f_ack = 2 * ack_bound(lambda, std::max(1.0, max_degree), ack.eps_ack, constants);
    g.eps_ack = ack.eps_ack;
    g.f_approg = 4 * approg_bound(approg);
    g.eps_approg = approg.eps_approg;
    return g;
}

MacConfig MacConfig::make(AckParams ack, ApprogParams approg, double lambda, double max_degree,
                          AckBoundConstants constants)
{
    const MacGuarantees g = guarantees(ack, approg, lambda, max_degree, constants);
    MacConfig c;
    ack.f_ack_budget = g.f_ack / 2;
    c.ack = ack;
    c.approg = approg;
    c.f_ack = g.f_ack;
    return c;
}

MacNode::MacNode(NodeId id, MacConfig config, std::uint64_t master_seed, MacEventLog* log)
    : id_(id), config_(config), log_(log), ack_rng_(per_node_rng(master_seed, id, "ack")),
      approg_(id, config.approg, master_seed)
{
    config_.ack.validate();
    if (config_.f_ack < 1)
        throw std::invalid_argument("MacNode: f_ack must be at least 1");
}

void MacNode::log(Slot t, MacEventKind kind, MessageId m)
{
    if (log_)
        log_->append({t, id_, kind, m});
}

void MacNode::bcast(Slot t, MessageId m)
{
    if (active_)
        throw std::logic_error("MacNode: bcast while another broadcast is active");
    active_ = m;
    start_ = t;
    alg1_running_ = true;
    ack_state_ = ack_init(config_.ack);
    received_ = false;
    halt_.reset();
    seen_.insert(m);
    approg_.set_message(m);
    log(t, MacEventKind::Bcast, m);
}

void MacNode::abort(Slot t, MessageId m)
{
    if (!active_ || *active_ != m)
        return;
    active_.reset();
    alg1_running_ = false;
    approg_.set_message(std::nullopt); // the current epoch runs to its end
    log(t, MacEventKind::Abort, m);
}

std::optional<MessageId> MacNode::poll_ack(Slot t)
{
    if (!active_ || t < start_ + config_.f_ack)
        return std::nullopt;
    const MessageId m = *active_;
    active_.reset();
    alg1_running_ = false;
    approg_.set_message(std::nullopt);
    log(t, MacEventKind::Ack, m);
    return m;
}

SlotAction MacNode::slot(Slot t)
{
    if (t % 2 == 1)
        return approg_.act((t - 1) / 2);
    if (!alg1_running_)
        return SlotAction::listen();
    auto [next, transmit] = ack_step(ack_state_, config_.ack, received_, ack_rng_);
    received_ = false;
    ack_state_ = next;
    if (ack_state_.halted) {
        alg1_running_ = false;
        halt_ = t;
    }
    if (!transmit)
        return SlotAction::listen();
    Payload p;
    p.kind = PayloadKind::Data;
    p.message = *active_;
    return SlotAction::transmit(std::move(p));
}

std::optional<MessageId> MacNode::receive(Slot t, const Payload& payload)
{
    std::optional<MessageId> fresh;
    if (t % 2 == 1) {
        fresh = approg_.hear((t - 1) / 2, payload);
    } else if (payload.kind == PayloadKind::Data) {
        ++data_receptions_;
        if (alg1_running_)
            received_ = true;
        fresh = payload.message;
    }
    if (!fresh || seen_.contains(*fresh))
        return std::nullopt;
    seen_.insert(*fresh);
    log(t, MacEventKind::Rcv, *fresh);
    return fresh;
}

void MacNode::end(Slot t)
{
    if (t % 2 == 1)
        approg_.end_slot((t - 1) / 2);
}

SlotAction MacAutomaton::on_slot(Slot slot)
{
    mac_.poll_ack(slot);
    SlotAction a = mac_.slot(slot);
    return awake_ ? a : SlotAction::sleep();
}

void MacAutomaton::on_env_input(Slot slot, const EnvEvent& event)
{
    if (event.kind == EnvKind::Bcast)
        mac_.bcast(slot, event.message);
    else if (event.kind == EnvKind::Abort)
        mac_.abort(slot, event.message);
}

} // namespace sinrmac
