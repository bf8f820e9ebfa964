#include "sinrmac/harness.hpp"

#include "sinrmac/graph.hpp"
#include "sinrmac/protocols.hpp"
#include "sinrmac/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sinrmac {

using nlohmann::json;
using nlohmann::ordered_json;

// ---- generators -------------------------------------------------------------------

Topology gen_uniform(std::size_t n, double side, std::uint64_t seed)
{
    if (n == 0)
        throw std::invalid_argument("gen_uniform: n must be positive");
    if (!(side >= 0.0) || !std::isfinite(side))
        throw std::invalid_argument("gen_uniform: side length must be finite and nonnegative");
    // Unit-distance points in a square of side s fit in (s+1)^2 with hexagonal
    // density at best; anything denser cannot be placed.
    const double capacity = (side + 1.0) * (side + 1.0) * 2.0 / std::sqrt(3.0);
    if (static_cast<double>(n) > capacity)
        throw std::runtime_error("gen_uniform: " + std::to_string(n) + " nodes cannot keep distance 1 in side " +
                                 std::to_string(side));

    Rng rng(combine_seed(seed, hash_tag("gen_uniform")));
    std::vector<Position> pts;
    pts.reserve(n);
    const std::uint64_t max_attempts = 2000 * static_cast<std::uint64_t>(n) + 1000;
    std::uint64_t attempts = 0;
    while (pts.size() < n) {
        if (++attempts > max_attempts)
            throw std::runtime_error("gen_uniform: rejection sampling gave up after " + std::to_string(max_attempts) +
                                     " attempts (" + std::to_string(pts.size()) + " of " + std::to_string(n) +
                                     " placed); use a larger side");
        const Position c{rng.uniform() * side, rng.uniform() * side};
        const bool ok =
            std::none_of(pts.begin(), pts.end(), [&](const Position& q) { return distance(c, q) < 1.0; });
        if (ok)
            pts.push_back(c);
    }
    return Topology(std::move(pts));
}

Topology gen_grid(std::size_t rows, std::size_t cols, double spacing)
{
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("gen_grid: rows and cols must be positive");
    if (!(spacing >= 1.0))
        throw std::invalid_argument("gen_grid: spacing below the minimum distance 1");
    std::vector<Position> pts;
    pts.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            pts.push_back({static_cast<double>(c) * spacing, static_cast<double>(r) * spacing});
    return Topology(std::move(pts));
}

Topology gen_line(std::size_t n, double spacing)
{
    return gen_grid(1, n, spacing);
}

LowerBoundInstance gen_two_line_lb(std::size_t delta, double alpha, double beta, double noise, double eps)
{
    if (delta < 2)
        throw std::invalid_argument("gen_two_line_lb: delta must be at least 2");
    const double gap = 10.0 * static_cast<double>(delta);
    std::vector<Position> pts;
    LowerBoundInstance inst{Topology{}, SinrParams::for_strong_range(alpha, beta, noise, eps, gap), {}, {}};
    for (std::size_t i = 0; i < delta; ++i) {
        pts.push_back({static_cast<double>(i), 0.0});
        inst.v_line.push_back(static_cast<NodeId>(i));
    }
    for (std::size_t i = 0; i < delta; ++i) {
        pts.push_back({static_cast<double>(i), gap});
        inst.u_line.push_back(static_cast<NodeId>(delta + i));
    }
    inst.topology = Topology(std::move(pts));
    return inst;
}

LowerBoundResult brute_force_progress_lb(const Topology& topology, const SinrParams& params,
                                         std::span<const NodeId> v_line, std::span<const NodeId> u_line)
{
    std::vector<NodeId> nodes(v_line.begin(), v_line.end());
    nodes.insert(nodes.end(), u_line.begin(), u_line.end());
    if (nodes.size() > kLowerBoundNodeLimit)
        throw std::invalid_argument("brute_force_progress_lb: " + std::to_string(nodes.size()) +
                                    " nodes exceed the exhaustive limit of " + std::to_string(kLowerBoundNodeLimit));
    for (NodeId v : nodes)
        if (!topology.contains(v))
            throw std::invalid_argument("brute_force_progress_lb: node outside the topology");

    const double r_strong = transmission_range(params).r_strong;
    const std::set<NodeId> v_set(v_line.begin(), v_line.end());
    const std::set<NodeId> u_set(u_line.begin(), u_line.end());
    // Nodes outside V u U stay silent but could still listen; only U counts.

    LowerBoundResult result;
    std::vector<NodeId> senders;
    const std::uint64_t total = std::uint64_t{1} << nodes.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        senders.clear();
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (mask >> i & 1)
                senders.push_back(nodes[i]);
        std::sort(senders.begin(), senders.end());
        std::size_t count = 0;
        for (const Reception& r : resolve_slot(senders, topology, params))
            if (u_set.contains(r.receiver) && v_set.contains(r.sender) &&
                within_range(topology.distance(r.receiver, r.sender), r_strong))
                ++count;
        if (count > result.max_receivers || (mask == 0 && count == 0)) {
            result.max_receivers = count;
            result.witness = senders;
        }
    }
    result.subsets = total;
    return result;
}

LowerBoundResult brute_force_progress_lb(const LowerBoundInstance& instance)
{
    return brute_force_progress_lb(instance.topology, instance.params, instance.v_line, instance.u_line);
}

// ---- statistics -----------------------------------------------------------------

Interval wilson_interval(std::size_t k, std::size_t n, double z)
{
    if (k > n)
        throw std::invalid_argument("wilson_interval: more successes than trials");
    if (n == 0)
        return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double ph = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (ph + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty())
        throw std::invalid_argument("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("quantile: q must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values)
{
    return quantile(std::move(values), 0.5);
}

// ---- configuration ----------------------------------------------------------------

namespace {

constexpr std::pair<ExperimentKind, std::string_view> kKindNames[] = {
    {ExperimentKind::AckLatency, "ack-latency"},
    {ExperimentKind::ApprogLatency, "approg-latency"},
    {ExperimentKind::Smb, "smb"},
    {ExperimentKind::Mmb, "mmb"},
    {ExperimentKind::LowerBound, "lower-bound"},
    {ExperimentKind::OracleSubstitution, "oracle-substitution"},
};

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where)
{
    if (!j.is_object())
        throw std::invalid_argument(where + ": expected an object");
    for (const auto& item : j.items())
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw std::invalid_argument(where + ": unknown key \"" + item.key() + "\"");
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (auto it = j.find(key); it != j.end())
        out = it->get<T>();
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& out)
{
    if (auto it = j.find(key); it != j.end() && !it->is_null())
        out = it->get<T>();
}

template <typename T>
void write_opt(ordered_json& j, const char* key, const std::optional<T>& v)
{
    if (v)
        j[key] = *v;
}

} // namespace

std::string_view to_string(ExperimentKind kind)
{
    for (const auto& [k, name] : kKindNames)
        if (k == kind)
            return name;
    return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name)
{
    for (const auto& [k, n] : kKindNames)
        if (n == name)
            return k;
    throw std::invalid_argument("unknown experiment kind \"" + std::string(name) + "\"");
}

Topology TopologySpec::make(std::uint64_t run_seed) const
{
    if (generator == "uniform")
        return gen_uniform(n, side, seed.value_or(combine_seed(run_seed, hash_tag("topology"))));
    if (generator == "grid")
        return gen_grid(rows, cols, spacing);
    if (generator == "line")
        return gen_line(n, spacing);
    if (generator == "two-line")
        return gen_two_line_lb(delta).topology;
    if (generator == "inline")
        return Topology(positions);
    throw std::invalid_argument("unknown topology generator \"" + generator + "\"");
}

SinrParams SinrSpec::make() const
{
    if (power && r_strong)
        throw std::invalid_argument("sinr: give either power or r_strong, not both");
    if (power)
        return SinrParams(alpha, beta, noise, *power, eps);
    return SinrParams::for_strong_range(alpha, beta, noise, eps, r_strong.value_or(5.0));
}

AckParams AckSpec::make(double lambda) const
{
    AckParams p = AckParams::for_lambda(lambda, eps_ack);
    if (n_tilde)
        p.n_tilde = *n_tilde;
    p.delta = delta;
    p.gamma_prime = gamma_prime;
    p.validate();
    return p;
}

ApprogParams ApprogSpec::make(double lambda, double alpha) const
{
    ApprogParams a = derive_approg_params(lambda, alpha, p, mu, gamma, eps_approg, constants);
    if (label_range) {
        a.label_range = *label_range;
    }
    if (T)
        a.T = *T;
    if (phi)
        a.phi = *phi;
    if (q)
        a.q = *q;
    if (burst_len)
        a.burst_len = *burst_len;
    a.validate();
    return a;
}

ExperimentConfig ExperimentConfig::from_json(const json& j)
{
    check_keys(j,
               {"version", "kind", "topology", "sinr", "ack", "approg", "seeds", "broadcast_fraction", "messages",
                "source", "max_slots", "deltas", "rcv_filter_strong_only", "record_traces", "diagnostics", "oracle",
                "jobs", "output"},
               "config");
    if (auto it = j.find("version"); it != j.end() && it->get<int>() != kSchemaVersion)
        throw std::invalid_argument("config: unsupported schema version " + it->dump());

    ExperimentConfig c;
    if (auto it = j.find("kind"); it != j.end())
        c.kind = parse_experiment_kind(it->get<std::string>());

    if (auto it = j.find("topology"); it != j.end()) {
        const json& t = *it;
        check_keys(t, {"generator", "n", "side", "rows", "cols", "spacing", "delta", "seed", "positions"},
                   "config.topology");
        read(t, "generator", c.topology.generator);
        read(t, "n", c.topology.n);
        read(t, "side", c.topology.side);
        read(t, "rows", c.topology.rows);
        read(t, "cols", c.topology.cols);
        read(t, "spacing", c.topology.spacing);
        read(t, "delta", c.topology.delta);
        read(t, "seed", c.topology.seed);
        if (auto p = t.find("positions"); p != t.end())
            for (const auto& xy : *p) {
                if (!xy.is_array() || xy.size() != 2)
                    throw std::invalid_argument("config.topology.positions: expected [x, y] pairs");
                c.topology.positions.push_back({xy[0].get<double>(), xy[1].get<double>()});
            }
    }
    if (auto it = j.find("sinr"); it != j.end()) {
        check_keys(*it, {"alpha", "beta", "noise", "eps", "power", "r_strong"}, "config.sinr");
        read(*it, "alpha", c.sinr.alpha);
        read(*it, "beta", c.sinr.beta);
        read(*it, "noise", c.sinr.noise);
        read(*it, "eps", c.sinr.eps);
        read(*it, "power", c.sinr.power);
        read(*it, "r_strong", c.sinr.r_strong);
    }
    if (auto it = j.find("ack"); it != j.end()) {
        check_keys(*it, {"eps_ack", "delta", "gamma_prime", "n_tilde", "c1", "c2"}, "config.ack");
        read(*it, "eps_ack", c.ack.eps_ack);
        read(*it, "delta", c.ack.delta);
        read(*it, "gamma_prime", c.ack.gamma_prime);
        read(*it, "n_tilde", c.ack.n_tilde);
        read(*it, "c1", c.ack.bound.c1);
        read(*it, "c2", c.ack.bound.c2);
    }
    if (auto it = j.find("approg"); it != j.end()) {
        const json& a = *it;
        check_keys(a, {"p", "mu", "gamma", "eps_approg", "constants", "T", "phi", "q", "burst_len", "label_range"},
                   "config.approg");
        read(a, "p", c.approg.p);
        read(a, "mu", c.approg.mu);
        read(a, "gamma", c.approg.gamma);
        read(a, "eps_approg", c.approg.eps_approg);
        read(a, "T", c.approg.T);
        read(a, "phi", c.approg.phi);
        read(a, "q", c.approg.q);
        read(a, "burst_len", c.approg.burst_len);
        read(a, "label_range", c.approg.label_range);
        if (auto k = a.find("constants"); k != a.end()) {
            check_keys(*k, {"phi0", "phi_min", "q0", "q_hat", "t0", "lambda0", "b0", "c", "c_stages"},
                       "config.approg.constants");
            ApprogConstants& ac = c.approg.constants;
            read(*k, "phi0", ac.phi0);
            read(*k, "phi_min", ac.phi_min);
            read(*k, "q0", ac.q0);
            read(*k, "q_hat", ac.q_hat);
            read(*k, "t0", ac.t0);
            read(*k, "lambda0", ac.lambda0);
            read(*k, "b0", ac.b0);
            read(*k, "c", ac.c);
            read(*k, "c_stages", ac.c_stages);
        }
    }
    read(j, "seeds", c.seeds);
    read(j, "broadcast_fraction", c.broadcast_fraction);
    read(j, "messages", c.messages);
    read(j, "source", c.source);
    read(j, "max_slots", c.max_slots);
    read(j, "deltas", c.deltas);
    read(j, "rcv_filter_strong_only", c.rcv_filter_strong_only);
    read(j, "record_traces", c.record_traces);
    read(j, "diagnostics", c.diagnostics);
    read(j, "jobs", c.jobs);
    read(j, "output", c.output);
    if (auto it = j.find("oracle"); it != j.end()) {
        check_keys(*it, {"exact_limit", "mc_trials"}, "config.oracle");
        read(*it, "exact_limit", c.oracle.exact_limit);
        read(*it, "mc_trials", c.oracle.mc_trials);
    }
    c.validate();
    return c;
}

ordered_json ExperimentConfig::to_json() const
{
    ordered_json j;
    j["version"] = kSchemaVersion;
    j["kind"] = std::string(to_string(kind));

    ordered_json t;
    t["generator"] = topology.generator;
    t["n"] = topology.n;
    t["side"] = topology.side;
    t["rows"] = topology.rows;
    t["cols"] = topology.cols;
    t["spacing"] = topology.spacing;
    t["delta"] = topology.delta;
    write_opt(t, "seed", topology.seed);
    if (!topology.positions.empty()) {
        auto pts = ordered_json::array();
        for (const auto& p : topology.positions)
            pts.push_back(ordered_json::array({p.x, p.y}));
        t["positions"] = std::move(pts);
    }
    j["topology"] = std::move(t);

    ordered_json s;
    s["alpha"] = sinr.alpha;
    s["beta"] = sinr.beta;
    s["noise"] = sinr.noise;
    s["eps"] = sinr.eps;
    write_opt(s, "power", sinr.power);
    write_opt(s, "r_strong", sinr.r_strong);
    j["sinr"] = std::move(s);

    ordered_json a;
    a["eps_ack"] = ack.eps_ack;
    a["delta"] = ack.delta;
    a["gamma_prime"] = ack.gamma_prime;
    write_opt(a, "n_tilde", ack.n_tilde);
    a["c1"] = ack.bound.c1;
    a["c2"] = ack.bound.c2;
    j["ack"] = std::move(a);

    ordered_json g;
    g["p"] = approg.p;
    g["mu"] = approg.mu;
    g["gamma"] = approg.gamma;
    g["eps_approg"] = approg.eps_approg;
    const ApprogConstants& ac = approg.constants;
    g["constants"] = {{"phi0", ac.phi0}, {"phi_min", ac.phi_min}, {"q0", ac.q0},   {"q_hat", ac.q_hat},
                      {"t0", ac.t0},     {"lambda0", ac.lambda0}, {"b0", ac.b0}, {"c", ac.c},
                      {"c_stages", ac.c_stages}};
    write_opt(g, "T", approg.T);
    write_opt(g, "phi", approg.phi);
    write_opt(g, "q", approg.q);
    write_opt(g, "burst_len", approg.burst_len);
    write_opt(g, "label_range", approg.label_range);
    j["approg"] = std::move(g);

    j["seeds"] = seeds;
    j["broadcast_fraction"] = broadcast_fraction;
    j["messages"] = messages;
    j["source"] = source;
    j["max_slots"] = max_slots;
    j["deltas"] = deltas;
    j["rcv_filter_strong_only"] = rcv_filter_strong_only;
    j["record_traces"] = record_traces;
    j["diagnostics"] = diagnostics;
    j["oracle"] = {{"exact_limit", oracle.exact_limit}, {"mc_trials", oracle.mc_trials}};
    j["jobs"] = jobs;
    if (!output.empty())
        j["output"] = output;
    return j;
}

void ExperimentConfig::validate() const
{
    if (seeds.empty())
        throw std::invalid_argument("config: seeds must be nonempty");
    if (!(broadcast_fraction > 0.0 && broadcast_fraction <= 1.0))
        throw std::invalid_argument("config: broadcast_fraction must lie in (0, 1]");
    if (jobs == 0)
        throw std::invalid_argument("config: jobs must be at least 1");
    if (kind == ExperimentKind::Mmb && messages == 0)
        throw std::invalid_argument("config: mmb needs at least one message");
    if (kind == ExperimentKind::LowerBound) {
        if (deltas.empty())
            throw std::invalid_argument("config: lower-bound needs a nonempty deltas list");
        for (std::size_t d : deltas)
            if (d < 2 || 2 * d > kLowerBoundNodeLimit)
                throw std::invalid_argument("config: lower-bound delta " + std::to_string(d) +
                                            " outside [2, " + std::to_string(kLowerBoundNodeLimit / 2) + "]");
        return;
    }
    // Parameters that do not depend on the topology are checked up front.
    (void)sinr.make();
    AckSpec a = ack;
    (void)a.make(1.0);
    (void)ReliabilityParams(approg.p, approg.mu, approg.gamma);
    if (!(approg.eps_approg > 0.0 && approg.eps_approg < 1.0))
        throw std::invalid_argument("config: eps_approg must lie in (0, 1)");
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("cannot parse config " + path.string() + ": " + e.what());
    }
    try {
        return ExperimentConfig::from_json(j);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
}

// ---- runs -------------------------------------------------------------------------

namespace {

struct Setting {
    Topology topology;
    SinrParams sinr;
    DerivedRanges ranges;
    double lambda;
    Graph strong;  // G_{1-eps}
    Graph approx;  // G_{1-2eps}
    GraphStats stats;
};

Setting make_setting(const ExperimentConfig& config, std::uint64_t seed)
{
    Topology topo = config.topology.make(seed);
    SinrParams sinr = config.sinr.make();
    const double lambda = lambda_ratio(topo, sinr);
    Graph strong = induced_graph(topo, sinr, 1.0 - sinr.eps());
    Graph approx = induced_graph(topo, sinr, 1.0 - 2.0 * sinr.eps());
    GraphStats stats = graph_stats(strong, topo);
    return {std::move(topo), sinr, transmission_range(sinr), lambda, std::move(strong), std::move(approx), stats};
}

std::vector<NodeId> choose_broadcasters(std::size_t n, double fraction, std::uint64_t seed)
{
    std::vector<NodeId> out;
    if (fraction >= 1.0) {
        out.resize(n);
        std::iota(out.begin(), out.end(), NodeId{0});
        return out;
    }
    Rng rng(combine_seed(seed, hash_tag("broadcasters")));
    for (NodeId v = 0; v < n; ++v)
        if (rng.bernoulli(fraction))
            out.push_back(v);
    if (out.empty())
        out.push_back(static_cast<NodeId>(rng.uniform_int(0, n - 1)));
    return out;
}

std::uint64_t count_some(const std::vector<std::optional<std::uint64_t>>& v)
{
    return static_cast<std::uint64_t>(std::count_if(v.begin(), v.end(), [](const auto& x) { return x.has_value(); }));
}

void note_failure(MetricsRecord& rec, const std::string& what)
{
    if (!rec.invariant_failure)
        rec.invariant_failure = what;
}

void check_trace(MetricsRecord& rec, const Trace& trace)
{
    if (trace.fault)
        note_failure(rec, "engine fault: " + *trace.fault);
}

void check_observer(MetricsRecord& rec, const ApprogObserver& obs)
{
    const auto bad = obs.independence_violations();
    std::set<std::pair<std::uint64_t, std::uint32_t>> phases;
    for (const auto& r : obs.records())
        phases.insert({r.epoch, r.phase});
    rec.extra["mis_phases_checked"] = static_cast<double>(phases.size());
    rec.extra["mis_independence_violations"] = static_cast<double>(bad.size());
    if (!bad.empty())
        note_failure(rec, "S_{phi+1} not independent in epoch " + std::to_string(bad.front().first) + ", phase " +
                              std::to_string(bad.front().second));
}

ordered_json phase_record_json(const PhaseRecord& r)
{
    ordered_json j;
    j["epoch"] = r.epoch;
    j["phase"] = r.phase;
    j["node"] = r.node;
    j["label"] = r.label;
    j["potential"] = r.potential;
    j["confirmed"] = r.confirmed;
    j["dropped"] = r.dropped;
    j["drop_round"] = r.drop_round ? ordered_json(*r.drop_round) : ordered_json(nullptr);
    j["role"] = std::string(to_string(r.role));
    j["next_member"] = r.next_member;
    return j;
}

void put_setting(MetricsRecord& rec, const Setting& s)
{
    rec.extra["nodes"] = static_cast<double>(s.topology.size());
    rec.extra["lambda"] = s.lambda;
    rec.extra["max_degree"] = static_cast<double>(s.stats.max_degree);
    rec.extra["diameter"] = s.stats.diameter ? static_cast<double>(*s.stats.diameter) : -1.0;
}

MetricsRecord run_ack_latency(const ExperimentConfig& config, std::uint64_t seed, RunArtifacts* art)
{
    const Setting s = make_setting(config, seed);
    const std::size_t n = s.topology.size();
    MetricsRecord rec;
    rec.seed = seed;
    put_setting(rec, s);

    AckParams ap = config.ack.make(s.lambda);
    ap.f_ack_budget = ack_bound(s.lambda, std::max<double>(1.0, s.stats.max_degree), ap.eps_ack, config.ack.bound);
    const auto broadcasters = choose_broadcasters(n, config.broadcast_fraction, seed);

    std::vector<AckNode> nodes;
    nodes.reserve(n);
    for (NodeId v = 0; v < n; ++v)
        nodes.emplace_back(v, ap, seed);
    std::vector<NodeAutomaton*> automata;
    for (auto& a : nodes)
        automata.push_back(&a);
    std::vector<EnvEvent> env;
    for (NodeId v : broadcasters)
        env.push_back({0, v, EnvKind::Bcast, make_message_id(v, 0)});

    SimConfig sc;
    sc.master_seed = seed;
    sc.max_slots = config.max_slots ? config.max_slots : ap.f_ack_budget + 1;
    sc.rcv_filter_strong_only = config.rcv_filter_strong_only;
    sc.record_trace = config.record_traces;
    Simulator sim(s.topology, s.sinr, automata, env, sc);
    sim.run();
    check_trace(rec, sim.trace());

    rec.slots_to_ack.assign(n, std::nullopt);
    rec.slots_to_first_rcv.assign(n, std::nullopt);
    rec.slots_to_delivery.assign(n, std::nullopt);
    std::size_t ok = 0;
    Slot last = 0;
    // one outcome per run: the broadcaster of highest degree (lowest id on ties)
    NodeId probe = broadcasters.front();
    for (NodeId v : broadcasters)
        if (s.strong.degree(v) > s.strong.degree(probe))
            probe = v;
    bool probe_ok = false;
    for (NodeId v : broadcasters) {
        const AckNode& a = nodes[v];
        if (!a.halt_slot())
            continue; // ran out of slots: not achieved
        const Slot halt = *a.halt_slot();
        rec.slots_to_ack[v] = halt - *a.start_slot() + 1;
        last = std::max(last, halt);
        bool all = true;
        Slot reached = 0;
        for (NodeId u : s.strong.neighbors(v)) {
            const auto& heard = nodes[u].first_heard();
            auto it = heard.find(v);
            if (it == heard.end() || it->second > halt) {
                all = false;
                break;
            }
            reached = std::max(reached, it->second);
        }
        if (all) {
            ++ok;
            rec.slots_to_delivery[v] = reached + 1 - *a.start_slot();
            probe_ok = probe_ok || v == probe;
        }
        if (art && config.diagnostics) {
            ordered_json d;
            d["node"] = v;
            d["degree"] = s.strong.degree(v);
            d["halt"] = halt;
            d["all_neighbors_reached"] = all;
            d["min_p"] = a.min_p_seen();
            d["max_p"] = a.max_p_seen();
            art->diagnostics.push_back(std::move(d));
        }
    }
    for (NodeId u = 0; u < n; ++u) {
        const auto& heard = nodes[u].first_heard();
        if (heard.empty())
            continue;
        Slot first = UINT64_MAX;
        for (const auto& [_, t] : heard)
            first = std::min(first, t);
        rec.slots_to_first_rcv[u] = first + 1;
    }
    rec.success = ok == broadcasters.size();
    rec.completion_slot = count_some(rec.slots_to_ack) == broadcasters.size() ? std::optional<std::uint64_t>(last + 1)
                                                                              : std::nullopt;
    rec.extra["broadcasters"] = static_cast<double>(broadcasters.size());
    rec.extra["ack_successes"] = static_cast<double>(ok);
    rec.extra["f_ack_budget"] = static_cast<double>(ap.f_ack_budget);
    rec.extra["probe_node"] = static_cast<double>(probe);
    rec.extra["probe_degree"] = static_cast<double>(s.strong.degree(probe));
    rec.extra["probe_success"] = probe_ok ? 1.0 : 0.0;
    if (art)
        art->trace = sim.trace();
    return rec;
}

MetricsRecord run_approg_latency(const ExperimentConfig& config, std::uint64_t seed, RunArtifacts* art)
{
    const Setting s = make_setting(config, seed);
    const std::size_t n = s.topology.size();
    MetricsRecord rec;
    rec.seed = seed;
    put_setting(rec, s);

    const ApprogParams params = config.approg.make(s.lambda, s.sinr.alpha());
    const auto broadcasters = choose_broadcasters(n, config.broadcast_fraction, seed);
    std::vector<char> is_b(n, 0);
    for (NodeId v : broadcasters)
        is_b[v] = 1;

    ApprogObserver obs;
    std::vector<ApprogAutomaton> nodes;
    nodes.reserve(n);
    for (NodeId v = 0; v < n; ++v) {
        nodes.emplace_back(v, params, seed);
        nodes.back().node().set_observer(&obs);
    }
    std::vector<NodeAutomaton*> automata;
    for (auto& a : nodes)
        automata.push_back(&a);
    std::vector<EnvEvent> env;
    for (NodeId v : broadcasters)
        env.push_back({0, v, EnvKind::Bcast, make_message_id(v, 0)});

    SimConfig sc;
    sc.master_seed = seed;
    sc.max_slots = config.max_slots ? config.max_slots : params.epoch_len();
    sc.rcv_filter_strong_only = config.rcv_filter_strong_only;
    sc.record_trace = config.record_traces;
    Simulator sim(s.topology, s.sinr, automata, env, sc);
    sim.run();
    check_trace(rec, sim.trace());
    check_observer(rec, obs);

    rec.slots_to_first_rcv.assign(n, std::nullopt);
    rec.slots_to_ack.assign(n, std::nullopt);
    std::size_t listeners = 0, ok = 0;
    std::vector<NodeId> listener_ids;
    Slot last = 0;
    for (NodeId u = 0; u < n; ++u) {
        const auto& log = nodes[u].node().burst_log();
        // first burst from a G_{1-eps} neighbor
        for (const BurstHit& h : log)
            if (s.strong.has_edge(u, h.sender)) {
                rec.slots_to_first_rcv[u] = h.slot + 1;
                break;
            }
        if (is_b[u])
            continue;
        const auto& nb = s.approx.neighbors(u);
        if (std::none_of(nb.begin(), nb.end(), [&](NodeId v) { return is_b[v] != 0; }))
            continue;
        ++listeners;
        listener_ids.push_back(u);
        if (rec.slots_to_first_rcv[u]) {
            ++ok;
            last = std::max(last, *rec.slots_to_first_rcv[u]);
        }
    }
    rec.success = ok == listeners;
    if (rec.success)
        rec.completion_slot = last;
    rec.extra["broadcasters"] = static_cast<double>(broadcasters.size());
    rec.extra["listeners"] = static_cast<double>(listeners);
    rec.extra["listener_successes"] = static_cast<double>(ok);
    rec.extra["epoch_len"] = static_cast<double>(params.epoch_len());
    if (!listener_ids.empty()) {
        // one outcome per run from a seeded listener
        Rng rng(combine_seed(seed, hash_tag("probe")));
        const NodeId probe = listener_ids[rng.uniform_int(0, listener_ids.size() - 1)];
        rec.extra["probe_node"] = static_cast<double>(probe);
        rec.extra["probe_success"] = rec.slots_to_first_rcv[probe] ? 1.0 : 0.0;
    }
    if (art) {
        art->trace = sim.trace();
        if (config.diagnostics)
            for (const auto& r : obs.records())
                art->diagnostics.push_back(phase_record_json(r));
    }
    return rec;
}

MetricsRecord run_broadcast(const ExperimentConfig& config, std::uint64_t seed, RunArtifacts* art, bool multi)
{
    const Setting s = make_setting(config, seed);
    const std::size_t n = s.topology.size();
    MetricsRecord rec;
    rec.seed = seed;
    put_setting(rec, s);

    const MacConfig mc = MacConfig::make(config.ack.make(s.lambda), config.approg.make(s.lambda, s.sinr.alpha()),
                                         s.lambda, static_cast<double>(s.stats.max_degree), config.ack.bound);

    std::vector<EnvEvent> env;
    if (multi) {
        if (config.messages > n)
            throw std::invalid_argument("mmb: more messages than nodes");
        std::vector<NodeId> order(n);
        std::iota(order.begin(), order.end(), NodeId{0});
        Rng rng(combine_seed(seed, hash_tag("sources")));
        for (std::size_t i = 0; i + 1 < n; ++i)
            std::swap(order[i], order[i + rng.uniform_int(0, n - 1 - i)]);
        std::vector<NodeId> sources(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.messages));
        std::sort(sources.begin(), sources.end());
        for (NodeId v : sources)
            env.push_back({0, v, EnvKind::Arrive, make_message_id(v, 0)});
    } else {
        if (config.source >= n)
            throw std::invalid_argument("smb: source outside the topology");
        env.push_back({0, config.source, EnvKind::Arrive, make_message_id(config.source, 0)});
    }
    const std::size_t k = env.size();

    MacEventLog log;
    ApprogObserver obs;
    std::vector<BroadcastAutomaton> nodes;
    nodes.reserve(n);
    for (NodeId v = 0; v < n; ++v) {
        nodes.emplace_back(v, mc, seed, &log);
        nodes.back().mac().approg().set_observer(&obs);
    }
    std::vector<NodeAutomaton*> automata;
    for (auto& a : nodes)
        automata.push_back(&a);

    SimConfig sc;
    sc.master_seed = seed;
    const std::uint64_t d = s.stats.diameter ? *s.stats.diameter : n;
    sc.max_slots = config.max_slots ? config.max_slots : 2 * (d + k + 1) * mc.f_ack;
    sc.rcv_filter_strong_only = config.rcv_filter_strong_only;
    sc.record_trace = config.record_traces;
    Simulator sim(s.topology, s.sinr, automata, env, sc);
    auto all_delivered = [&](Slot) {
        return std::all_of(nodes.begin(), nodes.end(), [k](const BroadcastAutomaton& a) { return a.delivered().size() == k; });
    };
    sim.run_until(all_delivered);
    check_trace(rec, sim.trace());
    check_observer(rec, obs);
    if (auto bad = check_event_order(log.events()))
        note_failure(rec, "event order: " + *bad);

    rec.slots_to_first_rcv.assign(n, std::nullopt);
    rec.slots_to_ack.assign(n, std::nullopt);
    std::size_t complete = 0;
    Slot last = 0;
    for (NodeId v = 0; v < n; ++v) {
        const auto& dl = nodes[v].delivered();
        // bcast_order must be a prefix of the delivery order (FIFO relay)
        const auto& bo = nodes[v].bcast_order();
        for (std::size_t i = 0; i < bo.size(); ++i)
            if (i >= dl.size() || dl[i].message != bo[i]) {
                note_failure(rec, "FIFO order broken at node " + std::to_string(v));
                break;
            }
        if (!dl.empty())
            rec.slots_to_first_rcv[v] = dl.front().slot + 1;
        if (dl.size() == k) {
            ++complete;
            last = std::max(last, dl.back().slot);
        }
    }
    for (const MacEvent& e : log.events())
        if (e.kind == MacEventKind::Ack) {
            // first ack per node, as slots from slot 0
            auto& slot = rec.slots_to_ack[e.node];
            if (!slot)
                slot = e.slot + 1;
        }
    rec.success = complete == n;
    if (rec.success)
        rec.completion_slot = last + 1;
    rec.extra["messages"] = static_cast<double>(k);
    rec.extra["complete_nodes"] = static_cast<double>(complete);
    rec.extra["f_ack"] = static_cast<double>(mc.f_ack);
    rec.extra["slots_run"] = static_cast<double>(sim.trace().slots_run);
    if (art) {
        art->trace = sim.trace();
        art->events = log.events();
        if (config.diagnostics)
            for (const auto& r : obs.records())
                art->diagnostics.push_back(phase_record_json(r));
    }
    return rec;
}

MetricsRecord run_lower_bound(const ExperimentConfig& config, std::uint64_t seed, RunArtifacts* art)
{
    MetricsRecord rec;
    rec.seed = seed;
    rec.success = true;
    for (std::size_t d : config.deltas) {
        const LowerBoundInstance inst = gen_two_line_lb(d, config.sinr.alpha, config.sinr.beta, config.sinr.noise,
                                                        config.sinr.eps);
        const LowerBoundResult r = brute_force_progress_lb(inst);
        rec.extra["max_receivers_delta_" + std::to_string(d)] = static_cast<double>(r.max_receivers);
        rec.success = rec.success && r.max_receivers == 1;
        if (art && config.diagnostics) {
            ordered_json j;
            j["delta"] = d;
            j["subsets"] = r.subsets;
            j["max_simultaneous_receivers"] = r.max_receivers;
            j["witness"] = r.witness;
            art->diagnostics.push_back(std::move(j));
        }
    }
    return rec;
}

MetricsRecord run_oracle(const ExperimentConfig& config, std::uint64_t seed, RunArtifacts* art)
{
    const Setting s = make_setting(config, seed);
    MetricsRecord rec;
    rec.seed = seed;
    put_setting(rec, s);
    const ApprogParams params = config.approg.make(s.lambda, s.sinr.alpha());
    const auto broadcasters = choose_broadcasters(s.topology.size(), config.broadcast_fraction, seed);
    const auto phases = oracle_substitution_run(s.topology, s.sinr, broadcasters, params, seed, config.oracle);

    std::size_t doubling_bad = 0, maximal_bad = 0, independent_bad = 0, checked = 0;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const OraclePhase& ph = phases[i];
        if (!is_independent(ph.graph, ph.dominators))
            ++independent_bad;
        if (!ph.members.empty() && !is_dominating(ph.graph, ph.dominators))
            ++maximal_bad;
        const auto next = min_pairwise_distance(s.topology, ph.dominators);
        bool doubled = true;
        if (ph.d_min && *ph.d_min <= s.ranges.r_strong) {
            ++checked;
            doubled = !next || *next > std::min(2.0 * *ph.d_min, s.ranges.r_strong);
            if (!doubled)
                ++doubling_bad;
        }
        if (art && config.diagnostics) {
            ordered_json j;
            j["phase"] = i;
            j["members"] = ph.members.size();
            j["edges"] = ph.graph.edge_count();
            j["dominators"] = ph.dominators.size();
            j["d_min"] = ph.d_min ? ordered_json(*ph.d_min) : ordered_json(nullptr);
            j["d_min_next"] = next ? ordered_json(*next) : ordered_json(nullptr);
            j["doubled"] = doubled;
            art->diagnostics.push_back(std::move(j));
        }
    }
    if (independent_bad)
        note_failure(rec, "oracle MIS output not independent");
    rec.success = doubling_bad == 0 && maximal_bad == 0 && independent_bad == 0;
    rec.extra["phases"] = static_cast<double>(phases.size());
    rec.extra["doubling_checked"] = static_cast<double>(checked);
    rec.extra["doubling_violations"] = static_cast<double>(doubling_bad);
    rec.extra["maximality_violations"] = static_cast<double>(maximal_bad);
    rec.extra["mu"] = params.mu;
    return rec;
}

std::string fmt(double x)
{
    if (std::isnan(x))
        return "nan";
    if (x == std::floor(x) && std::fabs(x) < 1e15)
        return std::to_string(static_cast<long long>(x));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

struct Agg {
    std::vector<double> values;

    ordered_json to_json() const
    {
        ordered_json j;
        j["count"] = values.size();
        if (values.empty()) {
            j["mean"] = nullptr;
            j["median"] = nullptr;
            j["p95"] = nullptr;
            return j;
        }
        j["mean"] = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        j["median"] = median(values);
        j["p95"] = quantile(values, 0.95);
        return j;
    }
};

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

} // namespace

MetricsRecord run_single(const ExperimentConfig& config, std::uint64_t seed, RunArtifacts* artifacts)
{
    MetricsRecord rec;
    switch (config.kind) {
    case ExperimentKind::AckLatency: rec = run_ack_latency(config, seed, artifacts); break;
    case ExperimentKind::ApprogLatency: rec = run_approg_latency(config, seed, artifacts); break;
    case ExperimentKind::Smb: rec = run_broadcast(config, seed, artifacts, false); break;
    case ExperimentKind::Mmb: rec = run_broadcast(config, seed, artifacts, true); break;
    case ExperimentKind::LowerBound: rec = run_lower_bound(config, seed, artifacts); break;
    case ExperimentKind::OracleSubstitution: rec = run_oracle(config, seed, artifacts); break;
    }
    // completion slot >= every first-rcv slot
    if (rec.completion_slot)
        for (const auto& r : rec.slots_to_first_rcv)
            if (r && *r > *rec.completion_slot && config.kind != ExperimentKind::ApprogLatency)
                note_failure(rec, "completion slot precedes a first reception");
    return rec;
}

void write_metrics_csv(const std::vector<MetricsRecord>& records, std::ostream& out)
{
    std::set<std::string> keys;
    for (const auto& r : records)
        for (const auto& [k, _] : r.extra)
            keys.insert(k);
    out << "seed,success,completion_slot,nodes_acked,median_slots_to_ack,max_slots_to_ack,nodes_rcv,"
           "median_slots_to_first_rcv,max_slots_to_first_rcv";
    for (const auto& k : keys)
        out << ',' << k;
    out << ",invariant_failure\n";
    auto col = [&](const std::vector<std::optional<std::uint64_t>>& v) {
        std::vector<double> xs;
        for (const auto& x : v)
            if (x)
                xs.push_back(static_cast<double>(*x));
        out << ',' << xs.size();
        if (xs.empty()) {
            out << ",,";
            return;
        }
        out << ',' << fmt(median(xs)) << ',' << fmt(*std::max_element(xs.begin(), xs.end()));
    };
    for (const auto& r : records) {
        out << r.seed << ',' << (r.success ? 1 : 0) << ',';
        if (r.completion_slot)
            out << *r.completion_slot;
        col(r.slots_to_ack);
        col(r.slots_to_first_rcv);
        for (const auto& k : keys) {
            out << ',';
            if (auto it = r.extra.find(k); it != r.extra.end())
                out << fmt(it->second);
        }
        out << ',';
        if (r.invariant_failure) {
            std::string s = *r.invariant_failure;
            std::replace(s.begin(), s.end(), '"', '\'');
            out << '"' << s << '"';
        }
        out << '\n';
    }
}

ordered_json summarize(const ExperimentConfig& config, const std::vector<MetricsRecord>& records)
{
    ordered_json j;
    j["kind"] = std::string(to_string(config.kind));
    j["runs"] = records.size();
    std::size_t ok = 0, failures = 0;
    Agg completion, ack, rcv, delivery;
    std::map<std::string, Agg> extras;
    for (const auto& r : records) {
        ok += r.success ? 1 : 0;
        failures += r.invariant_failure ? 1 : 0;
        if (r.completion_slot)
            completion.values.push_back(static_cast<double>(*r.completion_slot));
        for (const auto& x : r.slots_to_ack)
            if (x)
                ack.values.push_back(static_cast<double>(*x));
        for (const auto& x : r.slots_to_first_rcv)
            if (x)
                rcv.values.push_back(static_cast<double>(*x));
        for (const auto& x : r.slots_to_delivery)
            if (x)
                delivery.values.push_back(static_cast<double>(*x));
        for (const auto& [k, v] : r.extra)
            extras[k].values.push_back(v);
    }
    j["successes"] = ok;
    j["success_rate"] = records.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(records.size());
    const Interval ci = wilson_interval(ok, records.size());
    j["success_ci95"] = {ci.lo, ci.hi};
    j["invariant_failures"] = failures;
    j["completion_slot"] = completion.to_json();
    j["slots_to_ack"] = ack.to_json();
    j["slots_to_first_rcv"] = rcv.to_json();
    if (config.kind == ExperimentKind::AckLatency)
        j["slots_to_delivery"] = delivery.to_json();
    ordered_json ex;
    for (const auto& [k, a] : extras)
        ex[k] = a.to_json();
    j["extra"] = std::move(ex);

    if (config.kind == ExperimentKind::AckLatency || config.kind == ExperimentKind::ApprogLatency) {
        // pooled per-node success over all runs
        const char* num = config.kind == ExperimentKind::AckLatency ? "ack_successes" : "listener_successes";
        const char* den = config.kind == ExperimentKind::AckLatency ? "broadcasters" : "listeners";
        double k = 0, n = 0;
        for (const auto& r : records) {
            k += r.extra.count(num) ? r.extra.at(num) : 0.0;
            n += r.extra.count(den) ? r.extra.at(den) : 0.0;
        }
        const auto kk = static_cast<std::size_t>(k), nn = static_cast<std::size_t>(n);
        j["node_success_rate"] = nn ? k / n : 0.0;
        const Interval c = wilson_interval(kk, nn);
        j["node_success_ci95"] = {c.lo, c.hi};
        // probe outcomes are independent across runs, unlike the pooled rate
        std::size_t pk = 0, pn = 0;
        for (const auto& r : records)
            if (auto it = r.extra.find("probe_success"); it != r.extra.end()) {
                ++pn;
                pk += it->second > 0.5 ? 1 : 0;
            }
        j["probe_success_rate"] = pn ? static_cast<double>(pk) / static_cast<double>(pn) : 0.0;
        const Interval pc = wilson_interval(pk, pn);
        j["probe_success_ci95"] = {pc.lo, pc.hi};
    }
    if (config.kind == ExperimentKind::LowerBound) {
        ordered_json lb = ordered_json::array();
        for (std::size_t d : config.deltas) {
            const std::string key = "max_receivers_delta_" + std::to_string(d);
            const double m = records.empty() || !records.front().extra.count(key) ? -1.0 : records.front().extra.at(key);
            ordered_json e;
            e["delta"] = d;
            e["max_simultaneous_receivers"] = m;
            if (m == 1.0)
                e["implied_f_prog_lower_bound"] = d;
            lb.push_back(std::move(e));
        }
        j["lower_bound"] = std::move(lb);
        j["limitation"] = "uniform transmit power only; arbitrary power assignments are not enumerated";
    }
    j["config"] = config.to_json();
    return j;
}

std::filesystem::path default_output_root()
{
    if (const char* env = std::getenv("SINRMAC_OUT"); env && *env)
        return env;
    return "sinrmac-out";
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir)
{
    config.validate();
    const std::size_t runs = config.seeds.size();
    std::vector<MetricsRecord> records(runs);
    std::vector<std::exception_ptr> errors(runs);
    const bool write = !out_dir.empty();
    const bool want_artifacts = write && (config.record_traces || config.diagnostics ||
                                          config.kind == ExperimentKind::Smb || config.kind == ExperimentKind::Mmb);
    if (write) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec)
            throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
        for (const char* sub : {"traces", "events", "diagnostics"}) {
            std::filesystem::create_directories(out_dir / sub, ec);
            if (ec)
                throw std::runtime_error("cannot create " + (out_dir / sub).string() + ": " + ec.message());
        }
    }

    auto work = [&](std::size_t i) {
        try {
            RunArtifacts art;
            records[i] = run_single(config, config.seeds[i], want_artifacts ? &art : nullptr);
            if (!want_artifacts)
                return;
            const std::string stem = "seed-" + std::to_string(config.seeds[i]) + ".jsonl";
            if (config.record_traces && art.trace) {
                std::ostringstream os;
                write_trace_jsonl(*art.trace, os);
                write_file(out_dir / "traces" / stem, os.str());
            }
            if (!art.events.empty()) {
                MacEventLog log;
                for (const auto& e : art.events)
                    log.append(e);
                std::ostringstream os;
                log.write_jsonl(os);
                write_file(out_dir / "events" / stem, os.str());
            }
            if (config.diagnostics && !art.diagnostics.empty()) {
                std::string s;
                for (const auto& d : art.diagnostics)
                    s += d.dump() + '\n';
                write_file(out_dir / "diagnostics" / stem, s);
            }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const std::size_t jobs = std::min(config.jobs, runs);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < runs; ++i)
            work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < jobs; ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < runs;)
                    work(i);
            });
        for (auto& t : pool)
            t.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    ExperimentResult result;
    result.records = std::move(records);
    result.summary = summarize(config, result.records);
    result.invariants_ok = std::none_of(result.records.begin(), result.records.end(),
                                        [](const MetricsRecord& r) { return r.invariant_failure.has_value(); });
    if (write) {
        std::ostringstream csv;
        write_metrics_csv(result.records, csv);
        write_file(out_dir / "metrics.csv", csv.str());
        std::ostringstream per_node;
        per_node << "seed,node,slots_to_ack,slots_to_first_rcv,slots_to_delivery\n";
        for (const auto& r : result.records)
            for (std::size_t v = 0; v < std::max(r.slots_to_ack.size(), r.slots_to_first_rcv.size()); ++v) {
                per_node << r.seed << ',' << v << ',';
                if (v < r.slots_to_ack.size() && r.slots_to_ack[v])
                    per_node << *r.slots_to_ack[v];
                per_node << ',';
                if (v < r.slots_to_first_rcv.size() && r.slots_to_first_rcv[v])
                    per_node << *r.slots_to_first_rcv[v];
                per_node << ',';
                if (v < r.slots_to_delivery.size() && r.slots_to_delivery[v])
                    per_node << *r.slots_to_delivery[v];
                per_node << '\n';
            }
        write_file(out_dir / "per_node.csv", per_node.str());
        write_file(out_dir / "summary.json", result.summary.dump(2) + '\n');
    }
    return result;
}

} // namespace sinrmac
