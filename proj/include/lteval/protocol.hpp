#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lteval/core.hpp"
#include "lteval/energy.hpp"
#include "lteval/metrics.hpp"
#include "lteval/streams.hpp"

namespace lteval {

enum class ProtocolMode { batch, streaming };

const char* to_string(ProtocolMode mode);

struct ProtocolConfig {
    std::uint64_t n0 = 1000;
    double lambda = 2.0;
    std::size_t window_w = 1000;
    std::optional<std::uint64_t> max_instances;
    std::uint64_t seed = 1;
    // Off under deterministic metering so checkpoint rows are reproducible.
    bool record_wall_time = true;

    void validate() const;
};

/// Geometric checkpoint thresholds t_k = n0 * lambda^k. The growing n is kept
/// real-valued; each threshold is round-half-up(n) forced to exceed the
/// previous threshold by at least one.
class CheckpointSchedule {
public:
    CheckpointSchedule(std::uint64_t n0, double lambda);

    std::uint64_t current() const { return threshold_; }
    std::size_t index() const { return k_; }
    void advance();

    // First thresholds up to and including `limit`.
    static std::vector<std::uint64_t> until(std::uint64_t n0, double lambda, std::uint64_t limit);

private:
    double n_;
    double lambda_;
    std::uint64_t threshold_;
    std::size_t k_ = 0;
};

struct Checkpoint {
    std::size_t k = 0;
    std::uint64_t t_k = 0;
    std::uint64_t train_events = 0;
    double cumulative_joules = 0.0;
    double train_joules = 0.0;
    double predict_joules = 0.0;
    double gco2e = 0.0;
    MetricsBundle metrics;
    std::optional<double> wall_seconds;
};

struct RunTotals {
    std::uint64_t instances = 0;
    std::uint64_t train_events = 0;
    double joules = 0.0;
    double train_joules = 0.0;
    double predict_joules = 0.0;
    double gco2e = 0.0;
    double wall_seconds = 0.0;
};

struct RunResult {
    ProtocolMode mode = ProtocolMode::streaming;
    ProtocolConfig config;
    CarbonConfig carbon;
    std::string model_id;
    std::string stream_id;
    std::vector<Checkpoint> checkpoints;
    RunTotals totals;
};

/// Thrown when a run cannot complete; carries everything recorded before the
/// failure.
class RunAborted : public std::runtime_error {
public:
    RunAborted(const std::string& what, RunResult partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const RunResult& partial() const { return partial_; }

private:
    RunResult partial_;
};

using CheckpointSink = std::function<void(const Checkpoint&)>;

/// Batch protocol: predict, record, store; refit from scratch on everything
/// stored whenever the store reaches the next threshold.
RunResult run_batch(StreamSource& stream, Model& model, const ProtocolConfig& config, EnergyMeter& meter,
                    const CarbonConfig& carbon, const CheckpointSink& sink = {});

/// Streaming protocol: prequential test-then-train, checkpoints when the
/// processed count reaches the next threshold.
RunResult run_streaming(StreamSource& stream, Model& model, const ProtocolConfig& config, EnergyMeter& meter,
                        const CarbonConfig& carbon, const CheckpointSink& sink = {});

RunResult run_protocol(ProtocolMode mode, StreamSource& stream, Model& model, const ProtocolConfig& config,
                       EnergyMeter& meter, const CarbonConfig& carbon, const CheckpointSink& sink = {});

// ---------------------------------------------------------------------------

struct SweepJob {
    std::function<StreamPtr()> make_stream;
    std::function<std::unique_ptr<Model>(const Schema&)> make_model;
    std::function<std::unique_ptr<EnergyMeter>()> make_meter;
    ProtocolMode mode = ProtocolMode::streaming;
    ProtocolConfig config;
    CarbonConfig carbon;
    CheckpointSink sink;
};

struct SweepOutcome {
    std::optional<RunResult> result;
    std::optional<RunResult> partial;  // set when the run aborted midway
    std::string error;

    bool ok() const { return result.has_value(); }
};

/// Runs every job with a fresh stream, model and meter. Jobs run in parallel
/// only when every meter is deterministic; otherwise strictly one after the
/// other. Results keep input order; one failure does not stop the others.
std::vector<SweepOutcome> sweep(const std::vector<SweepJob>& jobs, unsigned max_threads = 0);

} // namespace lteval
