#include "lteval/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "lteval/error.hpp"

namespace lteval {

const char* to_string(ProtocolMode mode) { return mode == ProtocolMode::batch ? "batch" : "streaming"; }

void ProtocolConfig::validate() const {
    if (n0 < 1) throw ConfigError("protocol.n0 must be >= 1");
    if (!(lambda > 1.0) || !std::isfinite(lambda))
        throw ConfigError("protocol.lambda must be > 1 so the checkpoint schedule grows");
    if (window_w < 1) throw ConfigError("protocol.window_w must be >= 1");
    if (max_instances && *max_instances < 1) throw ConfigError("protocol.max_instances must be >= 1");
}

CheckpointSchedule::CheckpointSchedule(std::uint64_t n0, double lambda)
    : n_(static_cast<double>(n0)), lambda_(lambda), threshold_(n0) {
    if (n0 < 1) throw ConfigError("protocol.n0 must be >= 1");
    if (!(lambda > 1.0) || !std::isfinite(lambda))
        throw ConfigError("protocol.lambda must be > 1 so the checkpoint schedule grows");
}

void CheckpointSchedule::advance() {
    constexpr double kCeiling = 9.0e18;
    n_ *= lambda_;
    std::uint64_t next = n_ >= kCeiling ? std::numeric_limits<std::uint64_t>::max()
                                        : static_cast<std::uint64_t>(std::floor(n_ + 0.5));
    if (next <= threshold_) {
        next = threshold_ + 1;
        n_ = static_cast<double>(next);
    }
    threshold_ = next;
    ++k_;
}

std::vector<std::uint64_t> CheckpointSchedule::until(std::uint64_t n0, double lambda, std::uint64_t limit) {
    std::vector<std::uint64_t> out;
    CheckpointSchedule s(n0, lambda);
    while (s.current() <= limit) {
        out.push_back(s.current());
        if (s.current() == std::numeric_limits<std::uint64_t>::max()) break;
        s.advance();
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

class Recorder {
public:
    Recorder(ProtocolMode mode, const StreamSource& stream, const Model& model, const ProtocolConfig& config,
             const EnergyMeter& meter, const CarbonConfig& carbon, const CheckpointSink& sink)
        : meter_(meter), sink_(sink), start_(Clock::now()) {
        config.validate();
        carbon.validate();
        const auto& ss = stream.schema();
        const auto& ms = model.schema();
        if (ss.num_features != ms.num_features || ss.num_classes != ms.num_classes)
            throw ContractError("model schema (" + std::to_string(ms.num_features) + " features, " +
                                std::to_string(ms.num_classes) + " classes) does not match stream schema (" +
                                std::to_string(ss.num_features) + ", " + std::to_string(ss.num_classes) + ")");
        result_.mode = mode;
        result_.config = config;
        result_.carbon = carbon;
        result_.model_id = model.id();
        result_.stream_id = stream.id();
    }

    void emit(std::uint64_t t, std::uint64_t train_events, const EvalWindow& window) {
        Checkpoint cp;
        cp.k = result_.checkpoints.size();
        cp.t_k = t;
        cp.train_events = train_events;
        cp.train_joules = meter_.read(SpanKind::train);
        cp.predict_joules = meter_.read(SpanKind::predict);
        cp.cumulative_joules = meter_.read();
        cp.gco2e = to_gco2e(cp.cumulative_joules, result_.carbon);
        cp.metrics = window.snapshot();
        if (result_.config.record_wall_time) cp.wall_seconds = elapsed();
        result_.checkpoints.push_back(cp);
        if (sink_) sink_(cp);
    }

    RunResult finish(std::uint64_t instances, std::uint64_t train_events) {
        auto& t = result_.totals;
        t.instances = instances;
        t.train_events = train_events;
        t.joules = meter_.read();
        t.train_joules = meter_.read(SpanKind::train);
        t.predict_joules = meter_.read(SpanKind::predict);
        t.gco2e = to_gco2e(t.joules, result_.carbon);
        t.wall_seconds = elapsed();
        return result_;
    }

private:
    double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

    const EnergyMeter& meter_;
    const CheckpointSink& sink_;
    Clock::time_point start_;
    RunResult result_;
};

std::uint64_t instance_cap(const ProtocolConfig& config) {
    return config.max_instances.value_or(std::numeric_limits<std::uint64_t>::max());
}

} // namespace

RunResult run_batch(StreamSource& stream, Model& model, const ProtocolConfig& config, EnergyMeter& meter,
                    const CarbonConfig& carbon, const CheckpointSink& sink) {
    if (!model.supports_fit()) throw ContractError("batch protocol needs a model with fit: " + model.id());
    Recorder rec(ProtocolMode::batch, stream, model, config, meter, carbon, sink);
    const std::size_t classes = stream.schema().num_classes;
    EvalWindow window(config.window_w, classes);
    CheckpointSchedule schedule(config.n0, config.lambda);
    std::vector<Instance> store;
    std::vector<std::uint64_t> label_counts(classes, 0);
    bool fitted = false;
    std::uint64_t instances = 0, train_events = 0;
    const auto cap = instance_cap(config);

    try {
        while (instances < cap) {
            auto x = stream.next();
            if (!x) break;
            check_instance(stream.schema(), *x);
            Prediction yhat;
            {
                ScopedSpan span(meter, SpanKind::predict, 1);
                yhat = fitted ? model.predict(x->features) : fallback_predict(label_counts);
            }
            window.push(x->label, yhat.class_index);
            ++label_counts[x->label];
            store.push_back(std::move(*x));
            ++instances;

            if (store.size() == schedule.current()) {
                {
                    ScopedSpan span(meter, SpanKind::train, store.size());
                    model.fit(store);
                }
                fitted = true;
                ++train_events;
                rec.emit(store.size(), train_events, window);
                schedule.advance();
            }
        }
    } catch (const std::exception& e) {
        throw RunAborted(std::string("batch run aborted at instance ") + std::to_string(instances) + ": " + e.what(),
                         rec.finish(instances, train_events));
    }
    return rec.finish(instances, train_events);
}

RunResult run_streaming(StreamSource& stream, Model& model, const ProtocolConfig& config, EnergyMeter& meter,
                        const CarbonConfig& carbon, const CheckpointSink& sink) {
    if (!model.supports_learn_one())
        throw ContractError("streaming protocol needs a model with learn_one: " + model.id());
    Recorder rec(ProtocolMode::streaming, stream, model, config, meter, carbon, sink);
    EvalWindow window(config.window_w, stream.schema().num_classes);
    CheckpointSchedule schedule(config.n0, config.lambda);
    std::uint64_t instances = 0, train_events = 0;
    const auto cap = instance_cap(config);

    try {
        while (instances < cap) {
            auto x = stream.next();
            if (!x) break;
            check_instance(stream.schema(), *x);
            Prediction yhat;
            {
                ScopedSpan span(meter, SpanKind::predict, 1);
                yhat = model.predict(x->features);
            }
            window.push(x->label, yhat.class_index);
            {
                ScopedSpan span(meter, SpanKind::train, 1);
                model.learn_one(*x);
            }
            ++train_events;
            ++instances;

            if (instances == schedule.current()) {
                rec.emit(instances, train_events, window);
                schedule.advance();
            }
        }
    } catch (const std::exception& e) {
        throw RunAborted(std::string("streaming run aborted at instance ") + std::to_string(instances) + ": " +
                             e.what(),
                         rec.finish(instances, train_events));
    }
    return rec.finish(instances, train_events);
}

RunResult run_protocol(ProtocolMode mode, StreamSource& stream, Model& model, const ProtocolConfig& config,
                       EnergyMeter& meter, const CarbonConfig& carbon, const CheckpointSink& sink) {
    return mode == ProtocolMode::batch ? run_batch(stream, model, config, meter, carbon, sink)
                                       : run_streaming(stream, model, config, meter, carbon, sink);
}

// ---------------------------------------------------------------------------

std::vector<SweepOutcome> sweep(const std::vector<SweepJob>& jobs, unsigned max_threads) {
    if (jobs.empty()) throw ContractError("sweep: empty job list");

    std::vector<std::unique_ptr<EnergyMeter>> meters;
    std::vector<SweepOutcome> out(jobs.size());
    bool all_deterministic = true;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            meters.push_back(jobs[i].make_meter());
            all_deterministic = all_deterministic && meters.back()->deterministic();
        } catch (const std::exception& e) {
            meters.push_back(nullptr);
            out[i].error = e.what();
        }
    }

    auto run_one = [&](std::size_t i) {
        if (!meters[i]) return;
        const auto& job = jobs[i];
        try {
            auto stream = job.make_stream();
            auto model = job.make_model(stream->schema());
            model->set_parallel_fit(meters[i]->deterministic());
            out[i].result = run_protocol(job.mode, *stream, *model, job.config, *meters[i], job.carbon, job.sink);
        } catch (const RunAborted& e) {
            out[i].partial = e.partial();
            out[i].error = e.what();
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    };

    unsigned threads = max_threads ? max_threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
    if (!all_deterministic || threads <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < jobs.size(); i = next++) run_one(i);
        });
    for (auto& th : pool) th.join();
    return out;
}

} // namespace lteval
