#include "sinrmac/approg.hpp"
#include "sinrmac/harness.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace sinrmac;

namespace {

// Small hand-set parameters that keep an epoch short.
ApprogParams small_params()
{
    ApprogParams a;
    a.p = 0.25;
    a.mu = 0.2;
    a.gamma = 0.5;
    a.eps_approg = 0.2;
    a.phi = 3;
    a.q = 4;
    a.T = 40;
    a.label_range = 1000;
    a.c_stages = 1;
    a.burst_len = 40;
    return a;
}

Graph edgeless(std::size_t n)
{
    return Graph::with_vertices(n);
}

// Reference CONGEST round written against resolve_slot.
std::vector<char> ref_dropouts(const Topology& t, const SinrParams& p, const DiscoveryResult& d,
                               const std::vector<char>& dropped)
{
    const auto& m = d.members;
    auto idx = [&](NodeId v) { return static_cast<std::size_t>(std::find(m.begin(), m.end(), v) - m.begin()); };
    auto confirmed = [&](std::size_t i, NodeId v) {
        return std::find(d.confirmed[i].begin(), d.confirmed[i].end(), v) != d.confirmed[i].end();
    };
    std::vector<std::set<NodeId>> heard(m.size()), acked(m.size());
    for (const auto& slot : d.schedule) {
        std::vector<NodeId> tx;
        for (NodeId v : slot)
            if (!dropped[idx(v)])
                tx.push_back(v);
        std::map<NodeId, NodeId> ack_to;
        for (const auto& r : resolve_slot(tx, t, p)) {
            const std::size_t ri = idx(r.receiver);
            if (ri == m.size() || dropped[ri] || !confirmed(ri, r.sender))
                continue;
            heard[ri].insert(r.sender);
            ack_to[r.receiver] = r.sender;
        }
        std::vector<NodeId> ackers;
        for (auto [who, _] : ack_to)
            ackers.push_back(who);
        for (const auto& r : resolve_slot(ackers, t, p)) {
            const std::size_t ri = idx(r.receiver);
            if (ri == m.size() || dropped[ri] || !confirmed(ri, r.sender))
                continue;
            if (ack_to[r.sender] == r.receiver)
                acked[ri].insert(r.sender);
        }
    }
    std::vector<char> out = dropped;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (dropped[i])
            continue;
        for (NodeId v : d.confirmed[i])
            if (!heard[i].contains(v) || !acked[i].contains(v))
                out[i] = 1;
    }
    return out;
}

} // namespace

TEST_CASE("log star")
{
    CHECK(log_star(0.5) == 0);
    CHECK(log_star(1) == 0);
    CHECK(log_star(2) == 1);
    CHECK(log_star(4) == 2);
    CHECK(log_star(16) == 3);
    CHECK(log_star(65536) == 4);
    CHECK(log_star(65537) == 5);
}

TEST_CASE("h sequence examples")
{
    const HSequence one = compute_h_sequence(1, 1000, 4);
    CHECK(one.h == std::vector<std::uint64_t>{1});
    CHECK(one.h_prime == std::vector<std::uint64_t>{1});

    // c = 1 and log*(4) = 2
    const HSequence three = compute_h_sequence(3, 4, 1);
    CHECK(three.h == std::vector<std::uint64_t>{21, 6, 1});
    CHECK(three.h_prime == std::vector<std::uint64_t>{18, 3, 1});

    CHECK(compute_h_sequence(5, 1, 0).h.front() >= 81);
    CHECK_THROWS_AS(compute_h_sequence(0, 4, 1), std::invalid_argument);
}

TEST_CASE("h sequence recursion and the 3^(Phi-1) bound")
{
    for (std::uint32_t phi = 1; phi <= 25; ++phi)
        for (std::uint32_t c : {0u, 1u, 4u})
            for (std::uint64_t range : {1ull, 16ull, 1000000ull}) {
                const HSequence s = compute_h_sequence(phi, range, c);
                REQUIRE(s.h.size() == phi);
                REQUIRE(s.h.back() == 1);
                REQUIRE(s.h_prime.back() == 1);
                for (std::size_t i = 0; i + 1 < phi; ++i) {
                    REQUIRE(s.h_prime[i] == 3 * s.h[i + 1]);
                    REQUIRE(s.h[i] == s.h_prime[i] + c * log_star(static_cast<double>(range)) + 1);
                    REQUIRE(s.h[i] > s.h[i + 1]);
                }
                REQUIRE(static_cast<double>(s.h.front()) >= std::pow(3.0, phi - 1));
            }
}

TEST_CASE("epoch length closed form and locate")
{
    const ApprogParams a = small_params();
    const std::uint64_t rps = log_star(1000) + 2;
    const std::uint64_t closed = a.phi * (2 * a.T + 2 * a.T * (a.c_stages * rps) + a.burst_len);
    CHECK(a.epoch_len() == closed);
    CHECK(approg_bound(a) == closed);

    std::map<EpochBlock, std::uint64_t> per_block;
    std::uint64_t acks = 0;
    for (Slot k = 0; k < a.epoch_len(); ++k) {
        const EpochPosition pos = locate(a, k);
        REQUIRE(pos.epoch == 0);
        REQUIRE(pos.offset == k);
        ++per_block[pos.block];
        acks += pos.block == EpochBlock::Mis && pos.ack;
        if (pos.block == EpochBlock::Mis) {
            REQUIRE(pos.logical < a.T);
            REQUIRE(pos.round < a.mis_rounds());
        }
    }
    CHECK(per_block[EpochBlock::Labels] == a.phi * a.T);
    CHECK(per_block[EpochBlock::Lists] == a.phi * a.T);
    CHECK(per_block[EpochBlock::Mis] == a.phi * a.mis_len());
    CHECK(per_block[EpochBlock::Burst] == a.phi * a.burst_len);
    CHECK(acks * 2 == per_block[EpochBlock::Mis]);
    CHECK(locate(a, a.epoch_len()).epoch == 1);
    CHECK(locate(a, a.epoch_len()).offset == 0);
}

TEST_CASE("approg bound with unit constants")
{
    ApprogConstants unit;
    unit.phi0 = 1;
    unit.phi_min = 1;
    unit.q0 = 1;
    unit.q_hat = 1;
    unit.t0 = 1;
    unit.lambda0 = 1;
    unit.b0 = 1;
    unit.c = 1;
    unit.c_stages = 1;
    // Phi = 1, Q = 1, label range 4, burst 1, h_1 = 1, f(1) = 25,
    // T = ceil(log2(50) / (0.25 * 0.1)) = 226, MIS rounds = log*(4) + 2 = 4
    // epoch = 2 * 226 + 2 * 226 * 4 + 1 = 2261
    CHECK(approg_bound(2, 3, 0.25, 0.1, 0.5, 0.5, unit) == 2261);

    // halving eps grows the bound by less than a factor 2 here
    for (double eps : {0.4, 0.2, 0.1}) {
        const double big = static_cast<double>(approg_bound(4, 3, 0.25, 0.05, 0.5, eps / 2));
        const double small = static_cast<double>(approg_bound(4, 3, 0.25, 0.05, 0.5, eps));
        CHECK(big >= small);
        CHECK(big <= 2 * small);
    }
}

TEST_CASE("derived parameters follow the recipe")
{
    const ApprogParams a = derive_approg_params(8, 3, 0.25, 0.05, 0.5, 0.2);
    CHECK(a.phi == 6);                       // ceil(2 * 3)
    CHECK(a.q == 27);                        // max(16, 3^3)
    CHECK(a.label_range == 1310720);         // 8^6 / 0.2
    CHECK(a.burst_len == static_cast<std::uint64_t>(std::ceil(4 * 27 * std::log2(5.0))));
    CHECK(a.neighbor_cap() == 27);           // ceil(1 / (0.75 * 0.05))
    CHECK_THROWS_AS(derive_approg_params(0.5, 3, 0.25, 0.05, 0.5, 0.2), std::invalid_argument);
}

TEST_CASE("MIS rule examples")
{
    const std::vector<std::uint64_t> l3{5, 2, 9};
    CHECK(mis_modified(edgeless(3), l3, 1, 16).dominators == std::vector<NodeId>{0, 1, 2});

    Graph pair = Graph::with_vertices(2);
    pair.add_edge(0, 1);
    const std::vector<std::uint64_t> distinct{7, 3};
    const MisOutcome o = mis_modified(pair, distinct, 1, 16);
    CHECK(o.dominators == std::vector<NodeId>{1});
    CHECK(o.roles[0] == MisRole::Dominated);

    // persistent ties leave both unresolved
    const std::vector<std::uint64_t> same{4, 4};
    const MisOutcome tie = mis_modified(pair, same, 3, 16);
    CHECK(tie.dominators.empty());
    CHECK(tie.roles[0] == MisRole::Ruler);
    CHECK(tie.roles[1] == MisRole::Ruler);

    CHECK_THROWS_AS(mis_modified(pair, l3, 1, 16), std::invalid_argument);
    CHECK(to_string(MisRole::Dominated) == "dominated");
}

TEST_CASE("MIS with unique labels is maximal on SINR graphs")
{
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const Topology t = gen_uniform(30, 10.0, seed);
        const Graph g = induced_graph(t, SinrParams::for_strong_range(3, 2, 1, 0.1, 2.5), 0.9);
        std::vector<std::uint64_t> labels(30);
        for (std::size_t i = 0; i < 30; ++i)
            labels[i] = i + 1;
        Rng rng(seed);
        for (std::size_t i = 30; i > 1; --i)
            std::swap(labels[i - 1], labels[rng.uniform_int(0, i - 1)]);
        const MisOutcome o = mis_modified(g, labels, 4, 30);
        REQUIRE(is_independent(g, o.dominators));
        REQUIRE(is_dominating(g, o.dominators));
        for (MisRole r : o.roles)
            REQUIRE((r == MisRole::Dominator || r == MisRole::Dominated));
    }
}

TEST_CASE("neighbor discovery")
{
    const SinrParams sp(3, 2, 1, 54, 0.1); // r_weak = 3
    const Topology single({{0, 0}});
    const Medium one_medium(single, sp);
    ApprogParams a = small_params();
    {
        const std::vector<NodeId> m{0};
        PhaseStreams s = make_phase_streams(1, m, 0, 0, a.label_range);
        const DiscoveryResult d = neighbor_discovery(one_medium, m, a, s);
        CHECK(d.potential[0].empty());
        CHECK(d.graph.edge_count() == 0);
    }

    const Topology two({{0, 0}, {1, 0}});
    const Medium medium(two, sp);
    const std::vector<NodeId> m{0, 1};
    a.T = 400;
    a.p = 0.5;
    int edges = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        PhaseStreams s = make_phase_streams(seed, m, 0, 0, a.label_range);
        edges += neighbor_discovery(medium, m, a, s).graph.edge_count() == 1;
    }
    CHECK(edges >= 99);

    // mu above p(1 - p): the exact graph has no edge and discovery rarely finds one
    a.mu = 0.4;
    CHECK(h_graph(two, m, a.p, a.mu, sp).edge_count() == 0);
    int spurious = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        PhaseStreams s = make_phase_streams(seed, m, 0, 0, a.label_range);
        spurious += neighbor_discovery(medium, m, a, s).graph.edge_count();
    }
    CHECK(spurious <= 2);

    const std::vector<NodeId> unsorted{1, 0};
    PhaseStreams s = make_phase_streams(1, unsorted, 0, 0, a.label_range);
    CHECK_THROWS_AS(neighbor_discovery(medium, unsorted, a, s), std::invalid_argument);
}

TEST_CASE("CONGEST round examples")
{
    const SinrParams sp(3, 2, 1, 54, 0.1);
    const Topology two({{0, 0}, {1, 0}});
    const Medium medium(two, sp);
    DiscoveryResult d;
    d.members = {0, 1};
    d.confirmed = {{1}, {0}};
    d.potential = d.confirmed;
    d.schedule = {{0}, {1}};
    const std::vector<std::vector<std::uint64_t>> payload{{10}, {11}};
    const std::vector<char> none(2, 0);
    const CongestReport ok = congest_round_simulate(medium, d, payload, none);
    CHECK(ok.dropped == std::vector<char>{0, 0});
    REQUIRE(ok.received[0].size() == 1);
    CHECK(ok.received[0][0].second == std::vector<std::uint64_t>{11});
    CHECK(ok.acked_by[1] == std::vector<NodeId>{0});

    d.schedule = {{0}, {0}};
    const CongestReport bad = congest_round_simulate(medium, d, payload, none);
    CHECK(bad.dropped[0] == 1); // never hears node 1
}

TEST_CASE("CONGEST dropouts match a reference recomputation")
{
    const SinrParams sp = SinrParams::for_strong_range(3, 2, 1, 0.1, 3.0);
    ApprogParams a = small_params();
    a.T = 30;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Topology t = gen_uniform(10, 5.0, seed);
        const Medium medium(t, sp);
        std::vector<NodeId> m(10);
        for (NodeId i = 0; i < 10; ++i)
            m[i] = i;
        PhaseStreams s = make_phase_streams(seed, m, 0, 0, a.label_range);
        const DiscoveryResult d = neighbor_discovery(medium, m, a, s);
        std::vector<std::vector<std::uint64_t>> payload(10, std::vector<std::uint64_t>{1});
        std::vector<char> dropped(10, 0);
        dropped[seed % 10] = 1;
        const CongestReport rep = congest_round_simulate(medium, d, payload, dropped);
        REQUIRE(rep.dropped == ref_dropouts(t, sp, d, dropped));
    }
}

TEST_CASE("burst examples")
{
    const SinrParams sp(3, 2, 1, 54, 0.1);
    const Topology pair({{0, 0}, {1, 0}});
    const Medium medium(pair, sp);
    ApprogParams a = small_params();
    a.p = 0.5;
    a.q = 4;
    a.burst_len = 64;
    const std::vector<NodeId> m{0};
    const std::vector<MessageId> msg{42};
    int got = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        std::vector<Rng> tx{Rng(seed)};
        const auto rx = bcast_burst(medium, m, msg, a, tx);
        got += !rx.empty();
        for (const auto& r : rx) {
            REQUIRE(r.receiver == 1);
            REQUIRE(r.message == 42);
        }
    }
    CHECK(got >= 999);

    std::vector<Rng> no_tx;
    CHECK(bcast_burst(medium, {}, {}, a, no_tx).empty());
}

TEST_CASE("epoch_run examples")
{
    const SinrParams sp = SinrParams::for_strong_range(3, 2, 1, 0.1, 3.0);
    const Topology t({{0, 0}, {2, 0}});
    const Medium medium(t, sp);
    const ApprogParams a = small_params();

    const EpochReport empty = epoch_run(medium, {}, {}, a, 1);
    CHECK(std::none_of(empty.latched.begin(), empty.latched.end(), [](const auto& x) { return x.has_value(); }));
    CHECK(empty.slots == a.epoch_len());

    // 2 <= r_approx = 0.8 * R_1, so the listener is an approximation neighbor
    CHECK(t.distance(0, 1) <= transmission_range(sp).r_approx);
    const std::vector<NodeId> b{0};
    const std::vector<MessageId> msg{7};
    int latched = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const EpochReport r = epoch_run(medium, b, msg, a, seed);
        if (r.latched[1]) {
            ++latched;
            REQUIRE(r.latched[1]->message == 7);
        }
    }
    CHECK(latched >= 160);
}

TEST_CASE("S_{phi+1} stays independent and lists stay capped")
{
    const SinrParams sp = SinrParams::for_strong_range(3, 2, 1, 0.1, 3.0);
    const ApprogParams a = small_params();
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Topology t = gen_uniform(25, 9.0, seed);
        const Medium medium(t, sp);
        std::vector<NodeId> b;
        std::vector<MessageId> msg;
        for (NodeId v = 0; v < 25; v += 2) {
            b.push_back(v);
            msg.push_back(v);
        }
        const EpochReport r = epoch_run(medium, b, msg, a, seed); // throws on a violation
        for (const auto& ph : r.phases) {
            REQUIRE(is_independent(ph.graph, ph.next_members));
            for (NodeId v : ph.members)
                REQUIRE(ph.graph.degree(v) <= a.neighbor_cap());
        }
    }
}

TEST_CASE("per-node automata reproduce the centralized epoch")
{
    const SinrParams sp = SinrParams::for_strong_range(3, 2, 1, 0.1, 3.0);
    const ApprogParams a = small_params();
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const Topology t = gen_uniform(20, 8.0, 100 + seed);
        const std::size_t n = t.size();
        std::vector<NodeId> b;
        std::vector<MessageId> msg;
        for (NodeId v = seed % 3; v < n; v += 3) {
            b.push_back(v);
            msg.push_back(1000 + v);
        }
        const EpochReport central = epoch_run(Medium(t, sp), b, msg, a, seed);

        ApprogObserver obs;
        std::vector<ApprogAutomaton> nodes;
        nodes.reserve(n);
        for (NodeId v = 0; v < n; ++v) {
            nodes.emplace_back(v, a, seed);
            nodes.back().node().set_observer(&obs);
        }
        std::vector<NodeAutomaton*> ptrs;
        for (auto& x : nodes)
            ptrs.push_back(&x);
        std::vector<EnvEvent> env;
        for (std::size_t i = 0; i < b.size(); ++i)
            env.push_back({0, b[i], EnvKind::Bcast, msg[i]});
        SimConfig c;
        c.master_seed = seed;
        c.max_slots = a.epoch_len();
        c.record_trace = true;
        Simulator sim(t, sp, ptrs, env, c);
        sim.run();

        for (NodeId u = 0; u < n; ++u) {
            const auto& log = nodes[u].node().burst_log();
            REQUIRE(log.empty() == !central.latched[u].has_value());
            if (!log.empty()) {
                CHECK(log.front().slot == central.latched[u]->slot);
                CHECK(log.front().sender == central.latched[u]->sender);
                CHECK(log.front().message == central.latched[u]->message);
            }
        }
        for (std::uint32_t ph = 0; ph < a.phi; ++ph) {
            std::vector<NodeId> next, dropped;
            for (const auto& r : obs.records())
                if (r.phase == ph) {
                    if (r.next_member)
                        next.push_back(r.node);
                    if (r.dropped)
                        dropped.push_back(r.node);
                }
            std::sort(next.begin(), next.end());
            std::vector<NodeId> cd = central.phases[ph].dropped;
            std::sort(cd.begin(), cd.end());
            std::sort(dropped.begin(), dropped.end());
            CHECK(next == central.phases[ph].next_members);
            CHECK(dropped == cd);
        }
        CHECK(obs.independence_violations().empty());
        CHECK(obs.cap_violations(a.neighbor_cap()) == 0);

        // dropped nodes stay silent for the rest of the epoch
        for (const auto& r : obs.records()) {
            if (!r.drop_round)
                continue;
            const Slot silent_from = r.phase * a.phase_len() + a.discovery_len() + (*r.drop_round + 1) * 2 * a.T;
            for (const auto& rec : sim.trace().records)
                if (rec.slot >= silent_from)
                    REQUIRE(std::find(rec.transmitters.begin(), rec.transmitters.end(), r.node) ==
                            rec.transmitters.end());
        }
    }
}
