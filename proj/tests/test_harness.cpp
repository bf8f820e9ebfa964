#include "sinrmac/graph.hpp"
#include "sinrmac/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace sinrmac;

namespace {

// Brute force written from the SINR formula alone: signal P/d^alpha over
// noise plus the sum of all other senders' signals.
std::size_t oracle_max_receivers(const LowerBoundInstance& in)
{
    const Topology& t = in.topology;
    const SinrParams& p = in.params;
    const double rs = (1.0 - p.eps()) * std::pow(p.power() / (p.beta() * p.noise()), 1.0 / p.alpha());
    const std::size_t n = t.size();
    std::size_t best = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::size_t count = 0;
        for (NodeId u : in.u_line) {
            if (mask >> u & 1)
                continue;
            bool got = false;
            for (NodeId v : in.v_line) {
                if (!(mask >> v & 1) || t.distance(u, v) > rs * (1 + 1e-9))
                    continue;
                double interference = 0;
                for (NodeId w = 0; w < n; ++w)
                    if ((mask >> w & 1) && w != v)
                        interference += p.power() / std::pow(t.distance(u, w), p.alpha());
                const double s = p.power() / std::pow(t.distance(u, v), p.alpha());
                got = got || s / (p.noise() + interference) >= p.beta() * (1 - 1e-9);
            }
            count += got;
        }
        best = std::max(best, count);
    }
    return best;
}

bool same_positions(const Topology& a, const Topology& b)
{
    if (a.size() != b.size())
        return false;
    for (NodeId v = 0; v < a.size(); ++v)
        if (a.position(v).x != b.position(v).x || a.position(v).y != b.position(v).y)
            return false;
    return true;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_ack_config()
{
    ExperimentConfig c;
    c.kind = ExperimentKind::AckLatency;
    c.topology.generator = "uniform";
    c.topology.n = 20;
    c.topology.side = 10.0;
    c.topology.seed = 3;
    c.sinr.r_strong = 3.0;
    c.broadcast_fraction = 0.3;
    for (std::uint64_t s = 1; s <= 20; ++s)
        c.seeds.push_back(s);
    return c;
}

} // namespace

TEST_CASE("uniform generator")
{
    const Topology one = gen_uniform(1, 5.0, 9);
    CHECK(one.size() == 1);
    CHECK(one.position(0).x >= 0.0);
    CHECK(one.position(0).x <= 5.0);

    const Topology t = gen_uniform(50, 40.0, 1);
    REQUIRE(t.size() == 50);
    for (NodeId u = 0; u < 50; ++u) {
        CHECK(t.position(u).x >= 0.0);
        CHECK(t.position(u).y <= 40.0);
        for (NodeId v = u + 1; v < 50; ++v)
            REQUIRE(t.distance(u, v) >= 1.0);
    }
    CHECK(same_positions(gen_uniform(50, 40.0, 1), t));
    CHECK_FALSE(same_positions(gen_uniform(50, 40.0, 2), t));
    CHECK_THROWS_AS(gen_uniform(100, 3.0, 1), std::runtime_error);
}

TEST_CASE("grid and line generators")
{
    const Topology g = gen_grid(3, 4, 2.0);
    CHECK(g.size() == 12);
    CHECK(g.min_distance() == doctest::Approx(2.0));
    const Topology l = gen_line(5, 1.5);
    CHECK(l.distance(0, 4) == doctest::Approx(6.0));
    CHECK_THROWS_AS(gen_grid(2, 2, 0.5), std::invalid_argument);
}

TEST_CASE("two-line lower-bound construction")
{
    for (std::size_t delta : {2u, 3u, 5u}) {
        const LowerBoundInstance in = gen_two_line_lb(delta);
        CHECK(in.topology.size() == 2 * delta);
        CHECK(transmission_range(in.params).r_strong == doctest::Approx(10.0 * delta).epsilon(1e-12));
        const Graph g = induced_graph(in.topology, in.params, 1.0 - in.params.eps());
        for (NodeId v = 0; v < 2 * delta; ++v)
            CHECK(g.degree(v) == delta);
        // the cross pair sits exactly at r_strong and is an edge
        CHECK(in.topology.distance(in.v_line[0], in.u_line[0]) == doctest::Approx(10.0 * delta));
    }
    CHECK_THROWS_AS(gen_two_line_lb(1), std::invalid_argument);
}

TEST_CASE("at most one simultaneous cross reception on the two-line instance")
{
    for (std::size_t delta : {2u, 3u, 4u, 5u}) {
        const LowerBoundInstance in = gen_two_line_lb(delta);
        const LowerBoundResult r = brute_force_progress_lb(in);
        CHECK(r.max_receivers == 1);
        CHECK(r.max_receivers == oracle_max_receivers(in));
        CHECK(r.subsets == (std::uint64_t{1} << (2 * delta)));
        CHECK_FALSE(r.witness.empty());
    }
    // single cross pair analog
    const Topology pair({{0, 0}, {0, 5}});
    const SinrParams p = SinrParams::for_strong_range(3, 2, 1, 0.1, 5.0);
    const std::vector<NodeId> v{0}, u{1};
    CHECK(brute_force_progress_lb(pair, p, v, u).max_receivers == 1);
    // 2 * 9 nodes exceed the exhaustive limit
    CHECK_THROWS_AS(brute_force_progress_lb(gen_two_line_lb(9)), std::invalid_argument);
}

TEST_CASE("statistics")
{
    // Wilson 95% interval for 0/10 and 10/10: [0, 0.27753] and [0.72247, 1]
    CHECK(wilson_interval(0, 10).lo == doctest::Approx(0.0));
    CHECK(wilson_interval(0, 10).hi == doctest::Approx(0.27753).epsilon(1e-4));
    CHECK(wilson_interval(10, 10).lo == doctest::Approx(0.72247).epsilon(1e-4));
    // 8/10 from the closed form
    const double z = 1.96, n = 10, ph = 0.8;
    const double centre = (ph + z * z / (2 * n)) / (1 + z * z / n);
    const double half = z * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / (1 + z * z / n);
    CHECK(wilson_interval(8, 10).lo == doctest::Approx(centre - half));
    CHECK(wilson_interval(8, 10).hi == doctest::Approx(centre + half));
    CHECK_THROWS_AS(wilson_interval(3, 2), std::invalid_argument);

    CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({4, 1, 3, 2}, 0.95) == doctest::Approx(3.85));
    CHECK(quantile({7}, 0.3) == 7);
    CHECK(median({5, 1, 3}) == 3);
    CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile({1}, 1.5), std::invalid_argument);
}

TEST_CASE("config json")
{
    ExperimentConfig c = small_ack_config();
    c.approg.T = 40;
    c.deltas = {2, 3};
    const auto j = c.to_json();
    CHECK(j["version"] == ExperimentConfig::kSchemaVersion);
    CHECK(ExperimentConfig::from_json(j).to_json() == j);

    for (const char* kind : {"ack-latency", "approg-latency", "smb", "mmb", "lower-bound", "oracle-substitution"})
        CHECK(to_string(parse_experiment_kind(kind)) == kind);
    CHECK_THROWS_AS(parse_experiment_kind("gossip"), std::invalid_argument);

    auto bad = nlohmann::json::parse(R"({"kind":"smb","seeds":[1],"colour":3})");
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);
    bad = nlohmann::json::parse(R"({"version":99,"kind":"smb","seeds":[1]})");
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);
    bad = nlohmann::json::parse(R"({"kind":"smb","seeds":[1],"sinr":{"power":4,"r_strong":2}})");
    CHECK_THROWS(ExperimentConfig::from_json(bad).sinr.make());

    ExperimentConfig empty;
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("run_experiment writes deterministic, consistent output")
{
    const auto base = std::filesystem::temp_directory_path() / "sinrmac-test-harness";
    std::filesystem::remove_all(base);
    ExperimentConfig c = small_ack_config();
    c.diagnostics = true;

    const ExperimentResult a = run_experiment(c, base / "a");
    c.jobs = 2;
    const ExperimentResult b = run_experiment(c, base / "b");

    REQUIRE(a.records.size() == 20);
    CHECK(a.invariants_ok);
    CHECK(a.summary["runs"] == 20);
    CHECK(a.summary["slots_to_ack"]["count"].get<std::size_t>() > 0);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(a.records[i].seed == c.seeds[i]);
        const auto& r = a.records[i];
        for (const auto& x : r.slots_to_ack)
            if (x)
                CHECK(*x >= 1);
        if (r.completion_slot)
            for (const auto& x : r.slots_to_first_rcv)
                if (x)
                    CHECK(*x <= *r.completion_slot);
    }

    // identical apart from the jobs field echoed in the summary
    CHECK(slurp(base / "a" / "metrics.csv") == slurp(base / "b" / "metrics.csv"));
    CHECK(slurp(base / "a" / "per_node.csv") == slurp(base / "b" / "per_node.csv"));
    for (const auto& e : std::filesystem::directory_iterator(base / "a" / "diagnostics"))
        CHECK(slurp(e.path()) == slurp(base / "b" / "diagnostics" / e.path().filename()));
    c.jobs = 1;
    run_experiment(c, base / "c");
    CHECK(slurp(base / "a" / "summary.json") == slurp(base / "c" / "summary.json"));

    std::istringstream csv(slurp(base / "a" / "metrics.csv"));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(csv, line))
        ++rows;
    CHECK(rows == 21);
    std::filesystem::remove_all(base);
}

TEST_CASE("lower-bound experiment summary")
{
    ExperimentConfig c;
    c.kind = ExperimentKind::LowerBound;
    c.deltas = {5};
    c.seeds = {1};
    const ExperimentResult r = run_experiment(c);
    const auto& lb = r.summary["lower_bound"][0];
    CHECK(lb["max_simultaneous_receivers"] == 1.0);
    CHECK(lb["implied_f_prog_lower_bound"] == 5);
    CHECK(r.summary.contains("limitation"));
}

TEST_CASE("output root")
{
    ::setenv("SINRMAC_OUT", "/tmp/sinrmac-x", 1);
    CHECK(default_output_root() == "/tmp/sinrmac-x");
    ::unsetenv("SINRMAC_OUT");
    CHECK(default_output_root() == "sinrmac-out");
}
