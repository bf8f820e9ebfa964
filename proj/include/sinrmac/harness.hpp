#pragma once

#include "sinrmac/absmac.hpp"
#include "sinrmac/ack_broadcast.hpp"
#include "sinrmac/approg.hpp"
#include "sinrmac/sinr.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sinrmac {

// ---- topology generators ------------------------------------------------------

/// n points in [0, side]^2 with pairwise distance >= 1, by rejection sampling.
/// Throws std::runtime_error when the density is infeasible.
Topology gen_uniform(std::size_t n, double side, std::uint64_t seed);
Topology gen_grid(std::size_t rows, std::size_t cols, double spacing);
Topology gen_line(std::size_t n, double spacing);

struct LowerBoundInstance {
    Topology topology;
    SinrParams params;
    std::vector<NodeId> v_line; // ids 0 .. delta-1
    std::vector<NodeId> u_line; // ids delta .. 2 delta-1, u_i faces v_i
};

/// Two parallel lines of delta unit-spaced nodes at distance r_strong = 10 delta;
/// the power is solved so (1 - eps) R_1 = 10 delta exactly.
LowerBoundInstance gen_two_line_lb(std::size_t delta, double alpha = 3.0, double beta = 2.0, double noise = 1.0,
                                   double eps = 0.1);

inline constexpr std::size_t kLowerBoundNodeLimit = 16;

struct LowerBoundResult {
    std::size_t max_receivers = 0;
    std::uint64_t subsets = 0;
    std::vector<NodeId> witness; // a sender set attaining the maximum
};

/// Over every sender subset of V u U, the number of U nodes that receive from a
/// V node adjacent to them in G_{1-eps}; returns the maximum.
LowerBoundResult brute_force_progress_lb(const Topology& topology, const SinrParams& params,
                                         std::span<const NodeId> v_line, std::span<const NodeId> u_line);
LowerBoundResult brute_force_progress_lb(const LowerBoundInstance& instance);

// ---- statistics -----------------------------------------------------------------

struct Interval {
    double lo;
    double hi;
};

/// Wilson score interval for k successes in n trials.
Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.96);
/// Linear-interpolated quantile, q in [0, 1]. Throws on empty input.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

// ---- experiment configuration ---------------------------------------------------

enum class ExperimentKind : std::uint8_t { AckLatency, ApprogLatency, Smb, Mmb, LowerBound, OracleSubstitution };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

struct TopologySpec {
    std::string generator = "uniform"; // uniform | grid | line | two-line | inline
    std::size_t n = 50;
    double side = 20.0;
    std::size_t rows = 5;
    std::size_t cols = 5;
    double spacing = 1.0;
    std::size_t delta = 5;
    /// Fixed generator seed; otherwise each run uses its own seed.
    std::optional<std::uint64_t> seed;
    std::vector<Position> positions; // generator "inline"

    Topology make(std::uint64_t run_seed) const;
};

struct SinrSpec {
    double alpha = 3.0;
    double beta = 2.0;
    double noise = 1.0;
    double eps = 0.1;
    std::optional<double> power;
    std::optional<double> r_strong;

    SinrParams make() const;
};

struct AckSpec {
    double eps_ack = 0.1;
    double delta = 12.0;
    double gamma_prime = 8.0;
    std::optional<double> n_tilde; // default 4 Lambda^2
    AckBoundConstants bound;

    AckParams make(double lambda) const;
};

struct ApprogSpec {
    double p = 0.25;
    double mu = 0.05;
    double gamma = 0.5;
    double eps_approg = 0.2;
    ApprogConstants constants;
    // Direct overrides of derived values.
    std::optional<std::uint64_t> T;
    std::optional<std::uint32_t> phi;
    std::optional<std::uint64_t> q;
    std::optional<std::uint64_t> burst_len;
    std::optional<std::uint64_t> label_range;

    ApprogParams make(double lambda, double alpha) const;
};

struct ExperimentConfig {
    static constexpr int kSchemaVersion = 1;

    ExperimentKind kind = ExperimentKind::AckLatency;
    TopologySpec topology;
    SinrSpec sinr;
    AckSpec ack;
    ApprogSpec approg;
    std::vector<std::uint64_t> seeds;

    double broadcast_fraction = 1.0; // ack-latency, approg-latency, oracle-substitution
    std::size_t messages = 4;        // mmb
    NodeId source = 0;               // smb
    std::uint64_t max_slots = 0;     // 0 picks a bound from the parameters
    std::vector<std::size_t> deltas{2, 3, 4, 5}; // lower-bound
    bool rcv_filter_strong_only = false;
    bool record_traces = false;
    bool diagnostics = false;
    OracleOptions oracle;
    std::size_t jobs = 1;
    /// Output directory; empty means the CLI picks one under the output root.
    std::string output;

    /// Missing keys take defaults. Throws std::invalid_argument on bad values.
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
    void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

// ---- metrics ----------------------------------------------------------------------

struct MetricsRecord {
    std::uint64_t seed = 0;
    bool success = false;
    std::optional<std::uint64_t> completion_slot;
    /// Per node; nullopt marks not achieved or not applicable.
    std::vector<std::optional<std::uint64_t>> slots_to_ack;
    std::vector<std::optional<std::uint64_t>> slots_to_first_rcv;
    /// ack-latency only: slots until every strong neighbor has the message.
    std::vector<std::optional<std::uint64_t>> slots_to_delivery;
    std::map<std::string, double> extra;
    std::optional<std::string> invariant_failure;
};

struct RunArtifacts {
    std::optional<Trace> trace;
    std::vector<MacEvent> events;
    std::vector<nlohmann::ordered_json> diagnostics;
};

/// One seed of an experiment.
MetricsRecord run_single(const ExperimentConfig& config, std::uint64_t seed, RunArtifacts* artifacts = nullptr);

struct ExperimentResult {
    std::vector<MetricsRecord> records; // in seed order
    nlohmann::ordered_json summary;
    bool invariants_ok = true;
};

/// Runs every seed (up to config.jobs at a time) and, if out_dir is nonempty,
/// writes metrics.csv, summary.json and per-seed JSONL artifacts there.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir = {});

void write_metrics_csv(const std::vector<MetricsRecord>& records, std::ostream& out);
nlohmann::ordered_json summarize(const ExperimentConfig& config, const std::vector<MetricsRecord>& records);

/// Output root: $SINRMAC_OUT if set, else "./sinrmac-out".
std::filesystem::path default_output_root();

} // namespace sinrmac
