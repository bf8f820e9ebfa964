#include "sinrmac/approg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>

namespace sinrmac {

std::uint32_t log_star(double x)
{
    std::uint32_t n = 0;
    while (x > 1.0) {
        x = std::log2(x);
        ++n;
    }
    return n;
}

HSequence compute_h_sequence(std::uint32_t phi, std::uint64_t label_range, std::uint32_t c)
{
    if (phi < 1)
        throw std::invalid_argument("compute_h_sequence: Phi must be at least 1");
    const std::uint64_t step = static_cast<std::uint64_t>(c) * log_star(static_cast<double>(label_range)) + 1;
    HSequence seq;
    seq.h.assign(phi, 1);
    seq.h_prime.assign(phi, 1);
    constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t i = phi - 1; i-- > 0;) {
        if (seq.h[i + 1] > (kMax - step) / 3)
            throw std::overflow_error("compute_h_sequence: h_1 does not fit in 64 bits");
        seq.h_prime[i] = 3 * seq.h[i + 1];
        seq.h[i] = seq.h_prime[i] + step;
    }
    return seq;
}

void ApprogParams::validate() const
{
    ReliabilityParams(p, mu, gamma); // throws on violation
    if (!(eps_approg > 0.0 && eps_approg < 1.0))
        throw std::invalid_argument("ApprogParams: eps_approg must lie in (0, 1)");
    if (phi < 1 || q < 1 || T < 1 || label_range < 1 || c_stages < 1 || burst_len < 1)
        throw std::invalid_argument("ApprogParams: Phi, Q, T, label range, stages and burst length must be positive");
    if (phase_len() > std::numeric_limits<std::uint64_t>::max() / phi)
        throw std::invalid_argument("ApprogParams: epoch length overflows");
}

std::uint32_t ApprogParams::rounds_per_stage() const
{
    return log_star(static_cast<double>(label_range)) + 2;
}

std::uint64_t ApprogParams::mis_rounds() const
{
    return static_cast<std::uint64_t>(c_stages) * rounds_per_stage();
}

std::size_t ApprogParams::neighbor_cap() const
{
    return static_cast<std::size_t>(std::ceil(1.0 / ((1.0 - gamma / 2.0) * mu) - 1e-9));
}

namespace {

std::uint64_t ceil_to_u64(double x, const char* what)
{
    if (!(x < 9.2e18))
        throw std::invalid_argument(std::string("derive_approg_params: ") + what + " out of range");
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(x - 1e-9)));
}

} // namespace

ApprogParams derive_approg_params(double lambda, double alpha, double p, double mu, double gamma, double eps_approg,
                                  const ApprogConstants& k)
{
    if (!(lambda >= 1.0))
        throw std::invalid_argument("derive_approg_params: Lambda must be at least 1");
    if (!(eps_approg > 0.0 && eps_approg < 1.0))
        throw std::invalid_argument("derive_approg_params: eps must lie in (0, 1)");
    const double log_lambda = std::log2(lambda);

    ApprogParams a;
    a.p = p;
    a.mu = mu;
    a.gamma = gamma;
    a.eps_approg = eps_approg;
    a.phi = std::max<std::uint32_t>(std::max<std::uint32_t>(k.phi_min, 1),
                                    static_cast<std::uint32_t>(ceil_to_u64(k.phi0 * log_lambda, "Phi")));
    a.q = std::max<std::uint64_t>(std::max<std::uint64_t>(k.q_hat, 1),
                                  ceil_to_u64(k.q0 * std::pow(log_lambda, alpha), "Q"));
    a.label_range = ceil_to_u64(std::pow(lambda, k.lambda0) / eps_approg, "label range");
    a.c_stages = std::max<std::uint32_t>(1, k.c_stages);
    a.burst_len = ceil_to_u64(k.b0 * static_cast<double>(a.q) * std::log2(1.0 / eps_approg), "burst length");

    const HSequence h = compute_h_sequence(a.phi, a.label_range, k.c);
    const double f_h1 = GrowthBound::disc_packing(lambda)(static_cast<double>(h.h.front()));
    a.T = ceil_to_u64(k.t0 * std::log2(f_h1 / eps_approg) / (gamma * gamma * mu), "T");
    a.validate();
    return a;
}

std::uint64_t approg_bound(const ApprogParams& params)
{
    params.validate();
    return params.epoch_len();
}

std::uint64_t approg_bound(double lambda, double alpha, double p, double mu, double gamma, double eps_approg,
                           const ApprogConstants& constants)
{
    return approg_bound(derive_approg_params(lambda, alpha, p, mu, gamma, eps_approg, constants));
}

bool EpochPosition::last_of_block(const ApprogParams& params) const
{
    switch (block) {
    case EpochBlock::Labels:
    case EpochBlock::Lists: return index + 1 == params.T;
    case EpochBlock::Mis: return index + 1 == params.mis_len();
    case EpochBlock::Burst: return index + 1 == params.burst_len;
    }
    return false;
}

EpochPosition locate(const ApprogParams& params, Slot k)
{
    EpochPosition pos;
    const std::uint64_t epoch_len = params.epoch_len();
    const std::uint64_t phase_len = params.phase_len();
    pos.epoch = k / epoch_len;
    pos.offset = k % epoch_len;
    pos.phase = static_cast<std::uint32_t>(pos.offset / phase_len);
    std::uint64_t in = pos.offset % phase_len;
    const std::uint64_t T = params.T;
    if (in < T) {
        pos.block = EpochBlock::Labels;
        pos.index = in;
    } else if (in < 2 * T) {
        pos.block = EpochBlock::Lists;
        pos.index = in - T;
    } else if (in < 2 * T + params.mis_len()) {
        pos.block = EpochBlock::Mis;
        pos.index = in - 2 * T;
        pos.round = pos.index / (2 * T);
        const std::uint64_t sub = pos.index % (2 * T);
        pos.logical = sub / 2;
        pos.ack = (sub % 2) == 1;
    } else {
        pos.block = EpochBlock::Burst;
        pos.index = in - 2 * T - params.mis_len();
    }
    return pos;
}

// ---- MIS -------------------------------------------------------------------

std::string_view to_string(MisRole role)
{
    switch (role) {
    case MisRole::Competitor: return "competitor";
    case MisRole::Ruler: return "ruler";
    case MisRole::Ruled: return "ruled";
    case MisRole::Dominator: return "dominator";
    case MisRole::Dominated: return "dominated";
    }
    return "unknown";
}

void MisNode::start_stage()
{
    if (role == MisRole::Ruler || role == MisRole::Ruled)
        role = MisRole::Competitor;
    if (role == MisRole::Competitor)
        r = label;
}

void MisNode::apply_round(std::span<const MisView> neighbors)
{
    if (role == MisRole::Dominator || role == MisRole::Dominated)
        return;
    auto any = [&](MisRole x) {
        return std::any_of(neighbors.begin(), neighbors.end(), [x](const MisView& v) { return v.role == x; });
    };
    if (any(MisRole::Dominator)) {
        role = MisRole::Dominated;
        return;
    }
    if (role != MisRole::Competitor)
        return; // rulers and ruled wait for the stage to end
    if (any(MisRole::Ruler)) {
        role = MisRole::Ruled;
        return;
    }
    std::optional<std::uint64_t> min_r;
    for (const MisView& v : neighbors)
        if (v.role == MisRole::Competitor)
            min_r = min_r ? std::min(*min_r, v.r) : v.r;
    if (!min_r || r < *min_r) {
        role = MisRole::Dominator;
    } else if (r == *min_r) {
        role = MisRole::Ruler;
    } else {
        // index of the highest differing bit, in [1, width]
        r = static_cast<std::uint64_t>(std::bit_width(r ^ *min_r));
    }
}

MisOutcome mis_modified(const Graph& graph, std::span<const std::uint64_t> labels, std::uint32_t c_stages,
                        std::uint64_t label_range)
{
    const auto& vs = graph.vertices();
    if (labels.size() != vs.size())
        throw std::invalid_argument("mis_modified: one label per vertex required");
    std::vector<MisNode> nodes(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i) {
        nodes[i].label = labels[i];
        nodes[i].r = labels[i];
    }
    std::vector<std::vector<std::size_t>> adj(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (NodeId w : graph.neighbors(vs[i]))
            adj[i].push_back(static_cast<std::size_t>(std::lower_bound(vs.begin(), vs.end(), w) - vs.begin()));

    const std::uint32_t rps = log_star(static_cast<double>(label_range)) + 2;
    MisOutcome out;
    std::vector<MisView> snapshot(vs.size());
    std::vector<MisView> views;
    for (std::uint32_t stage = 0; stage < c_stages; ++stage) {
        for (auto& n : nodes)
            n.start_stage();
        for (std::uint32_t round = 0; round < rps; ++round) {
            for (std::size_t i = 0; i < vs.size(); ++i)
                snapshot[i] = {nodes[i].role, nodes[i].r};
            for (std::size_t i = 0; i < vs.size(); ++i) {
                views.clear();
                for (std::size_t j : adj[i])
                    views.push_back(snapshot[j]);
                nodes[i].apply_round(views);
            }
            ++out.rounds;
        }
    }
    for (std::size_t i = 0; i < vs.size(); ++i) {
        out.roles.push_back(nodes[i].role);
        if (nodes[i].role == MisRole::Dominator)
            out.dominators.push_back(vs[i]);
    }
    return out;
}

std::vector<std::pair<std::uint64_t, std::uint32_t>> ApprogObserver::independence_violations() const
{
    // Group by (epoch, phase); records arrive in phase order but nodes interleave.
    std::vector<const PhaseRecord*> sorted;
    for (const auto& r : records_)
        sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const PhaseRecord* a, const PhaseRecord* b) {
        return std::tie(a->epoch, a->phase, a->node) < std::tie(b->epoch, b->phase, b->node);
    });
    std::vector<std::pair<std::uint64_t, std::uint32_t>> bad;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j]->epoch == sorted[i]->epoch && sorted[j]->phase == sorted[i]->phase)
            ++j;
        auto next = [&](NodeId v) {
            auto it = std::lower_bound(sorted.begin() + static_cast<std::ptrdiff_t>(i),
                                       sorted.begin() + static_cast<std::ptrdiff_t>(j), v,
                                       [](const PhaseRecord* r, NodeId x) { return r->node < x; });
            return it != sorted.begin() + static_cast<std::ptrdiff_t>(j) && (*it)->node == v && (*it)->next_member;
        };
        bool ok = true;
        for (std::size_t a = i; a < j && ok; ++a) {
            if (!sorted[a]->next_member)
                continue;
            for (NodeId w : sorted[a]->confirmed)
                if (next(w)) {
                    ok = false;
                    break;
                }
        }
        if (!ok)
            bad.emplace_back(sorted[i]->epoch, sorted[i]->phase);
        i = j;
    }
    return bad;
}

std::size_t ApprogObserver::cap_violations(std::size_t cap) const
{
    return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(),
                                                  [cap](const PhaseRecord& r) { return r.potential.size() > cap; }));
}

// ---- ApprogNode ------------------------------------------------------------

ApprogNode::ApprogNode(NodeId id, ApprogParams params, std::uint64_t master_seed)
    : id_(id), params_(params), seed_(master_seed)
{
    params_.validate();
}

namespace {

Rng label_stream(std::uint64_t seed, NodeId id, std::uint64_t epoch, std::uint32_t phase)
{
    return per_node_rng(seed, id, "label", epoch, phase);
}

Rng tx_stream(std::uint64_t seed, NodeId id, std::uint64_t epoch, std::uint32_t phase)
{
    return per_node_rng(seed, id, "approg", epoch, phase);
}

bool contains_sorted(const std::vector<NodeId>& v, NodeId x)
{
    return std::binary_search(v.begin(), v.end(), x);
}

void insert_sorted(std::vector<NodeId>& v, NodeId x)
{
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x)
        v.insert(it, x);
}

} // namespace

void ApprogNode::begin_epoch(const EpochPosition& pos)
{
    epoch_ = pos.epoch;
    epoch_rcv_.clear();
    latched_.reset();
    dropped_ = false;
    drop_round_.reset();
    member_ = pos.offset == 0 && message_.has_value();
    epoch_message_ = member_ ? message_ : std::nullopt;
    if (member_)
        ++epochs_joined_;
    phase_.reset();
}

void ApprogNode::begin_phase(const EpochPosition& pos)
{
    phase_ = pos.phase;
    counts_.clear();
    potential_.clear();
    confirmed_.clear();
    heard_.clear();
    views_.clear();
    acked_.clear();
    pending_ack_.reset();
    schedule_.assign(params_.T, 0);
    mis_ = MisNode{};
    if (member_ && !dropped_) {
        label_ = label_stream(seed_, id_, pos.epoch, pos.phase).uniform_int(1, params_.label_range);
        tx_rng_ = tx_stream(seed_, id_, pos.epoch, pos.phase);
        mis_.label = label_;
        mis_.r = label_;
    }
}

bool ApprogNode::is_confirmed(NodeId v) const
{
    return contains_sorted(confirmed_, v);
}

Payload ApprogNode::make_payload(PayloadKind kind) const
{
    Payload p;
    p.kind = kind;
    p.epoch = static_cast<std::uint32_t>(*epoch_);
    p.phase = *phase_;
    return p;
}

SlotAction ApprogNode::act(Slot k)
{
    const EpochPosition pos = locate(params_, k);
    if (!epoch_ || *epoch_ != pos.epoch)
        begin_epoch(pos);
    if (!phase_ || *phase_ != pos.phase)
        begin_phase(pos);
    if (!member_ || dropped_)
        return SlotAction::listen();

    switch (pos.block) {
    case EpochBlock::Labels: {
        const bool send = tx_rng_.bernoulli(params_.p);
        schedule_[pos.index] = send ? 1 : 0;
        if (!send)
            break;
        Payload p = make_payload(PayloadKind::Label);
        p.fields = {id_, label_};
        return SlotAction::transmit(std::move(p));
    }
    case EpochBlock::Lists: {
        if (!tx_rng_.bernoulli(params_.p))
            break;
        Payload p = make_payload(PayloadKind::NeighborList);
        p.fields.reserve(potential_.size() + 1);
        p.fields.push_back(id_);
        p.fields.insert(p.fields.end(), potential_.begin(), potential_.end());
        return SlotAction::transmit(std::move(p));
    }
    case EpochBlock::Mis: {
        if (!pos.ack) {
            if (pos.logical == 0) {
                if (pos.round % params_.rounds_per_stage() == 0)
                    mis_.start_stage();
                heard_.clear();
                views_.clear();
                acked_.clear();
            }
            if (!schedule_[pos.logical])
                break;
            Payload p = make_payload(PayloadKind::MisState);
            p.fields = {id_, static_cast<std::uint64_t>(mis_.role), mis_.r};
            return SlotAction::transmit(std::move(p));
        }
        if (!pending_ack_)
            break;
        Payload p = make_payload(PayloadKind::MisAck);
        p.fields = {id_, *pending_ack_};
        return SlotAction::transmit(std::move(p));
    }
    case EpochBlock::Burst: {
        if (!tx_rng_.bernoulli(params_.burst_probability()))
            break;
        Payload p = make_payload(PayloadKind::Burst);
        p.message = *epoch_message_;
        return SlotAction::transmit(std::move(p));
    }
    }
    return SlotAction::listen();
}

std::optional<MessageId> ApprogNode::hear(Slot k, const Payload& payload)
{
    const EpochPosition pos = locate(params_, k);
    if (!epoch_ || *epoch_ != pos.epoch)
        begin_epoch(pos);

    if (payload.kind == PayloadKind::Burst) {
        burst_log_.push_back({k, payload.sender, payload.message});
        if (!latched_)
            latched_ = payload.message;
        if (std::find(epoch_rcv_.begin(), epoch_rcv_.end(), payload.message) != epoch_rcv_.end())
            return std::nullopt;
        epoch_rcv_.push_back(payload.message);
        return payload.message;
    }
    if (!member_ || dropped_ || !phase_ || *phase_ != pos.phase || payload.fields.empty())
        return std::nullopt;
    if (payload.epoch != static_cast<std::uint32_t>(pos.epoch) || payload.phase != pos.phase)
        return std::nullopt;
    const NodeId from = static_cast<NodeId>(payload.fields[0]);

    switch (payload.kind) {
    case PayloadKind::Label:
        if (pos.block == EpochBlock::Labels) {
            auto it = std::find_if(counts_.begin(), counts_.end(), [from](const auto& c) { return c.first == from; });
            if (it == counts_.end())
                counts_.emplace_back(from, 1);
            else
                ++it->second;
        }
        break;
    case PayloadKind::NeighborList:
        if (pos.block == EpochBlock::Lists && contains_sorted(potential_, from) &&
            std::find(payload.fields.begin() + 1, payload.fields.end(), id_) != payload.fields.end())
            insert_sorted(confirmed_, from);
        break;
    case PayloadKind::MisState:
        if (pos.block == EpochBlock::Mis && !pos.ack && is_confirmed(from) && payload.fields.size() >= 3) {
            if (!contains_sorted(heard_, from)) {
                insert_sorted(heard_, from);
                views_.push_back({static_cast<MisRole>(payload.fields[1]), payload.fields[2]});
            }
            pending_ack_ = from;
        }
        break;
    case PayloadKind::MisAck:
        if (pos.block == EpochBlock::Mis && pos.ack && is_confirmed(from) && payload.fields.size() >= 2 &&
            payload.fields[1] == id_)
            insert_sorted(acked_, from);
        break;
    default: break;
    }
    return std::nullopt;
}

void ApprogNode::end_slot(Slot k)
{
    const EpochPosition pos = locate(params_, k);
    if (!epoch_ || *epoch_ != pos.epoch || !phase_ || *phase_ != pos.phase)
        return;
    switch (pos.block) {
    case EpochBlock::Labels:
        if (pos.last_of_block(params_) && member_ && !dropped_) {
            const double threshold = params_.neighbor_threshold();
            for (const auto& [v, c] : counts_)
                if (static_cast<double>(c) >= threshold * (1.0 - 1e-12))
                    potential_.push_back(v);
            std::sort(potential_.begin(), potential_.end());
        }
        break;
    case EpochBlock::Lists: break;
    case EpochBlock::Mis:
        if (pos.ack) {
            pending_ack_.reset();
            if (pos.logical + 1 == params_.T)
                finish_round(pos.round);
        }
        break;
    case EpochBlock::Burst:
        if (pos.last_of_block(params_))
            finish_phase();
        break;
    }
}

void ApprogNode::finish_round(std::uint64_t round)
{
    if (!member_ || dropped_)
        return;
    const bool complete = std::includes(heard_.begin(), heard_.end(), confirmed_.begin(), confirmed_.end()) &&
                          std::includes(acked_.begin(), acked_.end(), confirmed_.begin(), confirmed_.end());
    if (!complete) {
        dropped_ = true;
        drop_round_ = round;
        return;
    }
    mis_.apply_round(views_);
}

void ApprogNode::finish_phase()
{
    if (!member_)
        return;
    const bool next = !dropped_ && mis_.role == MisRole::Dominator;
    if (observer_) {
        PhaseRecord rec;
        rec.epoch = *epoch_;
        rec.phase = *phase_;
        rec.node = id_;
        rec.label = label_;
        rec.potential = potential_;
        rec.confirmed = confirmed_;
        rec.dropped = dropped_;
        rec.drop_round = drop_round_;
        rec.role = mis_.role;
        rec.next_member = next;
        observer_->record(std::move(rec));
    }
    member_ = next;
}

SlotAction ApprogAutomaton::on_slot(Slot slot)
{
    SlotAction a = node_.act(slot);
    if (!awake_)
        return SlotAction::sleep();
    return a;
}

void ApprogAutomaton::on_receive(Slot slot, const Payload& payload)
{
    node_.hear(slot, payload);
}

void ApprogAutomaton::on_env_input(Slot slot, const EnvEvent& event)
{
    (void)slot;
    if (event.kind == EnvKind::Bcast)
        node_.set_message(event.message);
    else if (event.kind == EnvKind::Abort)
        node_.set_message(std::nullopt);
}

// ---- centralized drivers -----------------------------------------------------

PhaseStreams make_phase_streams(std::uint64_t master_seed, std::span<const NodeId> members, std::uint64_t epoch,
                                std::uint32_t phase, std::uint64_t label_range)
{
    PhaseStreams s;
    s.tx.reserve(members.size());
    for (NodeId v : members) {
        s.tx.push_back(tx_stream(master_seed, v, epoch, phase));
        s.labels.push_back(label_stream(master_seed, v, epoch, phase).uniform_int(1, label_range));
    }
    return s;
}

namespace {

// Position of v in the sorted member list, or npos.
struct MemberIndex {
    explicit MemberIndex(std::span<const NodeId> members, std::size_t n) : slot(n, npos)
    {
        for (std::size_t i = 0; i < members.size(); ++i)
            slot.at(members[i]) = i;
    }
    std::size_t operator[](NodeId v) const { return slot[v]; }
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> slot;
};

} // namespace

DiscoveryResult neighbor_discovery(const Medium& medium, std::span<const NodeId> members, const ApprogParams& params,
                                   PhaseStreams& streams)
{
    if (!std::is_sorted(members.begin(), members.end()))
        throw std::invalid_argument("neighbor_discovery: members must be sorted");
    if (streams.tx.size() != members.size())
        throw std::invalid_argument("neighbor_discovery: one stream per member required");
    const std::size_t k = members.size();
    const MemberIndex index(members, medium.topology().size());

    DiscoveryResult out;
    out.members.assign(members.begin(), members.end());
    out.potential.assign(k, {});
    out.confirmed.assign(k, {});
    out.schedule.assign(params.T, {});

    std::vector<std::vector<std::pair<NodeId, std::uint64_t>>> counts(k);
    std::vector<Reception> rx;
    for (std::uint64_t t = 0; t < params.T; ++t) {
        auto& senders = out.schedule[t];
        for (std::size_t i = 0; i < k; ++i)
            if (streams.tx[i].bernoulli(params.p))
                senders.push_back(members[i]);
        medium.resolve(senders, rx);
        for (const Reception& r : rx) {
            const std::size_t ri = index[r.receiver];
            if (ri == MemberIndex::npos)
                continue;
            auto& c = counts[ri];
            auto it = std::find_if(c.begin(), c.end(), [&](const auto& e) { return e.first == r.sender; });
            if (it == c.end())
                c.emplace_back(r.sender, 1);
            else
                ++it->second;
        }
    }
    const double threshold = params.neighbor_threshold();
    for (std::size_t i = 0; i < k; ++i) {
        for (const auto& [v, c] : counts[i])
            if (static_cast<double>(c) >= threshold * (1.0 - 1e-12))
                out.potential[i].push_back(v);
        std::sort(out.potential[i].begin(), out.potential[i].end());
    }

    std::vector<NodeId> senders;
    for (std::uint64_t t = 0; t < params.T; ++t) {
        senders.clear();
        for (std::size_t i = 0; i < k; ++i)
            if (streams.tx[i].bernoulli(params.p))
                senders.push_back(members[i]);
        medium.resolve(senders, rx);
        for (const Reception& r : rx) {
            const std::size_t ri = index[r.receiver];
            if (ri == MemberIndex::npos)
                continue;
            const std::size_t si = index[r.sender];
            if (contains_sorted(out.potential[ri], r.sender) && contains_sorted(out.potential[si], r.receiver))
                insert_sorted(out.confirmed[ri], r.sender);
        }
    }

    out.graph = Graph(out.members);
    for (std::size_t i = 0; i < k; ++i)
        for (NodeId w : out.confirmed[i])
            if (members[i] < w && contains_sorted(out.confirmed[index[w]], members[i]))
                out.graph.add_edge(members[i], w);
    return out;
}

CongestReport congest_round_simulate(const Medium& medium, const DiscoveryResult& discovery,
                                     std::span<const std::vector<std::uint64_t>> payload,
                                     std::span<const char> dropped)
{
    const auto& members = discovery.members;
    const std::size_t k = members.size();
    if (payload.size() != k || dropped.size() != k)
        throw std::invalid_argument("congest_round_simulate: one payload and flag per member required");
    const MemberIndex index(members, medium.topology().size());

    CongestReport rep;
    rep.received.assign(k, {});
    rep.acked_by.assign(k, {});
    rep.dropped.assign(dropped.begin(), dropped.end());
    std::vector<std::vector<NodeId>> heard(k);
    std::vector<std::optional<NodeId>> pending(k);
    std::vector<NodeId> senders;
    std::vector<Reception> rx;

    for (const auto& slot_senders : discovery.schedule) {
        senders.clear();
        for (NodeId v : slot_senders)
            if (!dropped[index[v]])
                senders.push_back(v);
        medium.resolve(senders, rx);
        for (const Reception& r : rx) {
            const std::size_t ri = index[r.receiver];
            if (ri == MemberIndex::npos || dropped[ri] || !contains_sorted(discovery.confirmed[ri], r.sender))
                continue;
            if (!contains_sorted(heard[ri], r.sender)) {
                insert_sorted(heard[ri], r.sender);
                rep.received[ri].emplace_back(r.sender, payload[index[r.sender]]);
            }
            pending[ri] = r.sender;
        }

        senders.clear();
        for (std::size_t i = 0; i < k; ++i)
            if (pending[i])
                senders.push_back(members[i]);
        medium.resolve(senders, rx);
        for (const Reception& r : rx) {
            const std::size_t ri = index[r.receiver];
            if (ri == MemberIndex::npos || dropped[ri] || !contains_sorted(discovery.confirmed[ri], r.sender))
                continue;
            if (pending[index[r.sender]] == r.receiver)
                insert_sorted(rep.acked_by[ri], r.sender);
        }
        std::fill(pending.begin(), pending.end(), std::nullopt);
    }

    for (std::size_t i = 0; i < k; ++i) {
        if (dropped[i])
            continue;
        const auto& c = discovery.confirmed[i];
        if (!std::includes(heard[i].begin(), heard[i].end(), c.begin(), c.end()) ||
            !std::includes(rep.acked_by[i].begin(), rep.acked_by[i].end(), c.begin(), c.end()))
            rep.dropped[i] = 1;
    }
    return rep;
}

std::vector<BurstReception> bcast_burst(const Medium& medium, std::span<const NodeId> members,
                                        std::span<const MessageId> messages, const ApprogParams& params,
                                        std::span<Rng> tx)
{
    if (messages.size() != members.size() || tx.size() != members.size())
        throw std::invalid_argument("bcast_burst: one message and stream per member required");
    std::vector<BurstReception> out;
    std::vector<NodeId> senders;
    std::vector<MessageId> sent;
    std::vector<Reception> rx;
    const double q = params.burst_probability();
    for (std::uint64_t s = 0; s < params.burst_len; ++s) {
        senders.clear();
        sent.clear();
        for (std::size_t i = 0; i < members.size(); ++i)
            if (tx[i].bernoulli(q)) {
                senders.push_back(members[i]);
                sent.push_back(messages[i]);
            }
        if (senders.empty())
            continue;
        if (!std::is_sorted(senders.begin(), senders.end()))
            throw std::invalid_argument("bcast_burst: members must be sorted");
        medium.resolve(senders, rx);
        for (const Reception& r : rx) {
            const auto pos = std::lower_bound(senders.begin(), senders.end(), r.sender) - senders.begin();
            out.push_back({s, r.receiver, r.sender, sent[static_cast<std::size_t>(pos)]});
        }
    }
    return out;
}

EpochReport epoch_run(const Medium& medium, std::span<const NodeId> broadcasters, std::span<const MessageId> messages,
                      const ApprogParams& params, std::uint64_t master_seed, std::uint64_t epoch)
{
    params.validate();
    if (messages.size() != broadcasters.size())
        throw std::invalid_argument("epoch_run: one message per broadcaster required");
    if (!std::is_sorted(broadcasters.begin(), broadcasters.end()))
        throw std::invalid_argument("epoch_run: broadcasters must be sorted");
    const std::size_t n = medium.topology().size();
    std::vector<std::optional<MessageId>> message_of(n);
    for (std::size_t i = 0; i < broadcasters.size(); ++i)
        message_of.at(broadcasters[i]) = messages[i];

    EpochReport report;
    report.latched.assign(n, std::nullopt);
    report.slots = params.epoch_len();
    std::vector<NodeId> members(broadcasters.begin(), broadcasters.end());
    const std::uint32_t rps = params.rounds_per_stage();

    for (std::uint32_t phase = 0; phase < params.phi; ++phase) {
        EpochPhaseReport ph;
        ph.members = members;
        const std::size_t k = members.size();
        PhaseStreams streams = make_phase_streams(master_seed, members, epoch, phase, params.label_range);
        DiscoveryResult disc = neighbor_discovery(medium, members, params, streams);

        std::vector<MisNode> mis(k);
        for (std::size_t i = 0; i < k; ++i) {
            mis[i].label = streams.labels[i];
            mis[i].r = streams.labels[i];
        }
        std::vector<char> dropped(k, 0);
        std::vector<std::vector<std::uint64_t>> payload(k);
        std::vector<MisView> views;
        for (std::uint64_t round = 0; round < params.mis_rounds(); ++round) {
            if (round % rps == 0)
                for (auto& m : mis)
                    m.start_stage();
            for (std::size_t i = 0; i < k; ++i)
                payload[i] = {members[i], static_cast<std::uint64_t>(mis[i].role), mis[i].r};
            const CongestReport rep = congest_round_simulate(medium, disc, payload, dropped);
            for (std::size_t i = 0; i < k; ++i) {
                if (dropped[i])
                    continue;
                if (rep.dropped[i]) {
                    dropped[i] = 1;
                    ph.dropped.push_back(members[i]);
                    continue;
                }
                views.clear();
                for (const auto& [from, fields] : rep.received[i])
                    views.push_back({static_cast<MisRole>(fields[1]), fields[2]});
                mis[i].apply_round(views);
            }
        }

        std::vector<NodeId> next;
        for (std::size_t i = 0; i < k; ++i)
            if (!dropped[i] && mis[i].role == MisRole::Dominator)
                next.push_back(members[i]);
        // Independence in the union of the directed confirmations.
        for (std::size_t i = 0; i < k; ++i) {
            if (!std::binary_search(next.begin(), next.end(), members[i]))
                continue;
            for (NodeId w : disc.confirmed[i])
                if (std::binary_search(next.begin(), next.end(), w))
                    throw std::logic_error("epoch_run: S_{phi+1} is not independent in phase " +
                                           std::to_string(phase + 1));
        }

        std::vector<NodeId> active;
        std::vector<MessageId> active_messages;
        std::vector<Rng> active_tx;
        for (std::size_t i = 0; i < k; ++i)
            if (!dropped[i]) {
                active.push_back(members[i]);
                active_messages.push_back(*message_of[members[i]]);
                active_tx.push_back(std::move(streams.tx[i]));
            }
        const std::uint64_t burst_start =
            static_cast<std::uint64_t>(phase) * params.phase_len() + params.discovery_len() + params.mis_len();
        for (const BurstReception& r : bcast_burst(medium, active, active_messages, params, active_tx))
            if (!report.latched[r.receiver])
                report.latched[r.receiver] = BurstHit{burst_start + r.slot, r.sender, r.message};

        ph.graph = std::move(disc.graph);
        ph.next_members = next;
        report.phases.push_back(std::move(ph));
        members = std::move(next);
    }
    return report;
}

std::vector<OraclePhase> oracle_substitution_run(const Topology& topology, const SinrParams& sinr,
                                                 std::span<const NodeId> broadcasters, const ApprogParams& params,
                                                 std::uint64_t seed, const OracleOptions& options)
{
    params.validate();
    std::vector<NodeId> members(broadcasters.begin(), broadcasters.end());
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    std::vector<OraclePhase> out;
    Rng rng = substream(seed, 0);
    for (std::uint32_t phase = 0; phase < params.phi; ++phase) {
        OraclePhase ph;
        ph.members = members;
        ph.d_min = min_pairwise_distance(topology, members);
        if (members.size() <= options.exact_limit) {
            ph.graph = h_graph(topology, members, params.p, params.mu, sinr, options.exact_limit);
        } else {
            const auto rel = reliability_matrix_mc(topology, members, params.p, sinr, options.mc_trials,
                                                   combine_seed(seed, phase + 1));
            ph.graph = h_graph_from_matrix(members, rel, params.mu);
        }
        // Unique labels: a random permutation of 1..k.
        std::vector<std::uint64_t> labels(members.size());
        for (std::size_t i = 0; i < labels.size(); ++i)
            labels[i] = i + 1;
        for (std::size_t i = labels.size(); i > 1; --i)
            std::swap(labels[i - 1], labels[rng.uniform_int(0, i - 1)]);
        const MisOutcome mis =
            mis_modified(ph.graph, labels, params.c_stages, std::max<std::uint64_t>(params.label_range, labels.size()));
        if (!is_independent(ph.graph, mis.dominators))
            throw std::logic_error("oracle_substitution_run: dominators not independent");
        ph.dominators = mis.dominators;
        members = mis.dominators;
        out.push_back(std::move(ph));
    }
    return out;
}

} // namespace sinrmac
