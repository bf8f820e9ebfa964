// sinrmac: command-line front end for topology generation and experiments.

#include "sinrmac/harness.hpp"
#include "sinrmac/reliability.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace sinrmac;
using nlohmann::ordered_json;

namespace {

// Accepts "1,2,3", "1..50" and mixtures such as "1..3,10".
std::vector<std::uint64_t> parse_seed_list(const std::string& text)
{
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    auto number = [](std::string_view s) {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            throw CLI::ValidationError("--seeds", "not a seed: \"" + std::string(s) + "\"");
        return v;
    };
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        if (auto dots = item.find(".."); dots != std::string::npos) {
            const std::uint64_t a = number(std::string_view(item).substr(0, dots));
            const std::uint64_t b = number(std::string_view(item).substr(dots + 2));
            if (b < a || b - a > 1'000'000)
                throw CLI::ValidationError("--seeds", "bad range \"" + item + "\"");
            for (std::uint64_t s = a; s <= b; ++s)
                out.push_back(s);
        } else {
            out.push_back(number(item));
        }
    }
    return out;
}

std::vector<std::uint64_t> read_seed_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open seed list " + path);
    std::string all, line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        for (char& c : line)
            if (c == ' ' || c == '\t')
                c = ',';
        all += line + ',';
    }
    return parse_seed_list(all);
}

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string read_text(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct SeedOptions {
    std::string seeds;
    std::string seed_file;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--seeds", seeds, "Seed list, e.g. 1..20 or 3,5,8");
        cmd->add_option("--seed-file", seed_file, "File with whitespace- or comma-separated seeds")
            ->check(CLI::ExistingFile);
    }
    std::optional<std::vector<std::uint64_t>> get() const
    {
        if (!seed_file.empty())
            return read_seed_file(seed_file);
        if (!seeds.empty())
            return parse_seed_list(seeds);
        return std::nullopt;
    }
};

int cmd_gen(const std::string& generator, std::size_t n, double side, std::size_t rows, std::size_t cols,
            double spacing, std::size_t delta, std::uint64_t seed, const std::string& out)
{
    TopologySpec spec;
    spec.generator = generator;
    spec.n = n;
    spec.side = side;
    spec.rows = rows;
    spec.cols = cols;
    spec.spacing = spacing;
    spec.delta = delta;
    spec.seed = seed;
    const Topology topo = spec.make(seed);
    ordered_json j;
    j["generator"] = "inline";
    auto pts = ordered_json::array();
    for (const auto& p : topo.positions())
        pts.push_back(ordered_json::array({p.x, p.y}));
    j["positions"] = std::move(pts);
    emit(out, j.dump() + '\n');
    if (!out.empty() && out != "-")
        std::cerr << "wrote " << topo.size() << " nodes to " << out << '\n';
    return 0;
}

int cmd_run(const std::string& params, const SeedOptions& seeds, std::string out, std::size_t jobs)
{
    ExperimentConfig config = load_config(params);
    if (auto s = seeds.get())
        config.seeds = *s;
    if (jobs)
        config.jobs = jobs;
    if (out.empty())
        out = config.output.empty()
                  ? (default_output_root() / (std::string(to_string(config.kind)) + "-" +
                                              std::filesystem::path(params).stem().string()))
                        .string()
                  : config.output;
    config.validate();
    const ExperimentResult r = run_experiment(config, out);
    std::cout << to_string(config.kind) << ": " << r.summary["successes"].get<std::size_t>() << "/"
              << r.records.size() << " runs succeeded; output in " << out << '\n';
    if (!r.invariants_ok) {
        for (const auto& rec : r.records)
            if (rec.invariant_failure)
                std::cerr << "seed " << rec.seed << ": invariant failure: " << *rec.invariant_failure << '\n';
        return 2;
    }
    return 0;
}

int cmd_verify_lb(const std::vector<std::size_t>& deltas, const std::string& out)
{
    ordered_json j = ordered_json::array();
    bool ok = true;
    for (std::size_t d : deltas) {
        const LowerBoundResult r = brute_force_progress_lb(gen_two_line_lb(d));
        std::printf("delta=%zu subsets=%llu max_simultaneous_receivers=%zu%s\n", d,
                    static_cast<unsigned long long>(r.subsets), r.max_receivers,
                    r.max_receivers == 1 ? " => f_prog >= delta" : " (unexpected)");
        ok = ok && r.max_receivers == 1;
        ordered_json e;
        e["delta"] = d;
        e["subsets"] = r.subsets;
        e["max_simultaneous_receivers"] = r.max_receivers;
        e["witness"] = r.witness;
        j.push_back(std::move(e));
    }
    std::puts("note: uniform transmit power only; arbitrary power assignments are not enumerated");
    if (!out.empty())
        emit(out, j.dump(2) + '\n');
    return ok ? 0 : 1;
}

int cmd_calibrate_mu(const std::string& params, const SeedOptions& seeds, double p, double tolerance,
                     const std::string& out)
{
    ExperimentConfig config = load_config(params);
    if (auto s = seeds.get())
        config.seeds = *s;
    const SinrParams sinr = config.sinr.make();
    std::vector<ReliabilitySample> samples;
    for (std::uint64_t seed : config.seeds) {
        Topology topo = config.topology.make(seed);
        std::vector<NodeId> members(topo.size());
        for (NodeId v = 0; v < topo.size(); ++v)
            members[v] = v;
        if (members.size() > kExactEnumerationLimit)
            throw std::invalid_argument("calibrate-mu: exact calibration needs at most " +
                                        std::to_string(kExactEnumerationLimit) + " nodes per sample");
        samples.push_back({std::move(topo), std::move(members)});
    }
    const MuCalibration c = calibrate_mu(samples, p, sinr, tolerance);
    ordered_json j;
    j["p"] = p;
    j["mu_star"] = c.mu_star;
    j["direct_minimum"] = c.direct_minimum;
    j["close_pairs"] = c.pairs;
    j["iterations"] = c.iterations;
    j["samples"] = samples.size();
    emit(out, j.dump(2) + '\n');
    return 0;
}

int cmd_report(const std::vector<std::string>& dirs)
{
    for (const auto& d : dirs) {
        const auto summary = nlohmann::json::parse(read_text(std::filesystem::path(d) / "summary.json"));
        std::cout << d << '\n';
        std::cout << "  kind            " << summary["kind"].get<std::string>() << '\n';
        std::cout << "  runs            " << summary["runs"] << " (" << summary["successes"] << " succeeded, CI95 "
                  << summary["success_ci95"].dump() << ")\n";
        if (summary.contains("node_success_rate"))
            std::cout << "  node success    " << summary["node_success_rate"] << " (CI95 "
                      << summary["node_success_ci95"].dump() << ")\n";
        for (const char* key : {"completion_slot", "slots_to_ack", "slots_to_first_rcv", "slots_to_delivery"}) {
            if (!summary.contains(key))
                continue;
            const auto& a = summary[key];
            if (a["count"].get<std::size_t>() == 0)
                continue;
            std::printf("  %-15s median %.1f  mean %.1f  p95 %.1f  (n=%zu)\n", key, a["median"].get<double>(),
                        a["mean"].get<double>(), a["p95"].get<double>(), a["count"].get<std::size_t>());
        }
        if (summary.contains("lower_bound"))
            for (const auto& e : summary["lower_bound"])
                std::cout << "  delta " << e["delta"] << ": max simultaneous receivers "
                          << e["max_simultaneous_receivers"] << '\n';
        std::cout << "  invariant failures " << summary["invariant_failures"] << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Slot-synchronous SINR MAC simulator and experiment harness"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "Generate a topology (JSON, usable as an inline topology)");
    std::string generator = "uniform", gen_out;
    std::size_t n = 50, rows = 5, cols = 5, delta = 5;
    double side = 20.0, spacing = 1.0;
    std::uint64_t gen_seed = 1;
    gen->add_option("--generator", generator)->check(CLI::IsMember({"uniform", "grid", "line", "two-line"}));
    gen->add_option("-n", n, "Node count (uniform, line)");
    gen->add_option("--side", side, "Square side length (uniform)");
    gen->add_option("--rows", rows);
    gen->add_option("--cols", cols);
    gen->add_option("--spacing", spacing);
    gen->add_option("--delta", delta, "Line length (two-line)");
    gen->add_option("--seed", gen_seed);
    gen->add_option("-o,--out", gen_out, "Output file; stdout if omitted");

    auto* run = app.add_subcommand("run", "Run an experiment described by a params file");
    std::string params, run_out;
    std::size_t jobs = 0;
    SeedOptions run_seeds;
    run->add_option("-p,--params", params, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run_seeds.add(run);
    run->add_option("-o,--out", run_out, "Output directory (default: $SINRMAC_OUT/<kind>-<params>)");
    run->add_option("-j,--jobs", jobs, "Seeds run concurrently");

    auto* lb = app.add_subcommand("verify-lb", "Exhaustive check of the two-line progress lower bound");
    std::vector<std::size_t> deltas{2, 3, 4, 5};
    std::string lb_out;
    lb->add_option("--delta", deltas, "Line lengths")->delimiter(',')->check(CLI::Range(2, 8));
    lb->add_option("-o,--out", lb_out, "Write results as JSON");

    auto* cal = app.add_subcommand("calibrate-mu", "Bisect the largest mu keeping close pairs in H_p^mu");
    std::string cal_params, cal_out;
    double cal_p = 0.25, tolerance = 1e-6;
    SeedOptions cal_seeds;
    cal->add_option("-p,--params", cal_params, "Config providing topology and SINR settings")
        ->required()
        ->check(CLI::ExistingFile);
    cal_seeds.add(cal);
    cal->add_option("--prob", cal_p, "Transmit probability p");
    cal->add_option("--tolerance", tolerance);
    cal->add_option("-o,--out", cal_out);

    auto* report = app.add_subcommand("report", "Summarize experiment output directories");
    std::vector<std::string> dirs;
    report->add_option("dirs", dirs, "Output directories")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen)
            return cmd_gen(generator, n, side, rows, cols, spacing, delta, gen_seed, gen_out);
        if (*run)
            return cmd_run(params, run_seeds, run_out, jobs);
        if (*lb)
            return cmd_verify_lb(deltas, lb_out);
        if (*cal)
            return cmd_calibrate_mu(cal_params, cal_seeds, cal_p, tolerance, cal_out);
        if (*report)
            return cmd_report(dirs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
