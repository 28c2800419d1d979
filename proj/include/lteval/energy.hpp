#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lteval {

enum class SpanKind { train, predict };

const char* to_string(SpanKind kind);

struct CarbonConfig {
    double intensity_g_per_kwh = 190.0;
    std::string region_label = "ES";

    void validate() const;
};

inline constexpr double kJoulesPerKwh = 3.6e6;

/// Joules to grams of CO2-equivalent at the configured grid intensity.
double to_gco2e(double joules, const CarbonConfig& carbon);

struct CostTable {
    double joules_per_train_instance = 0.0;
    double joules_per_predict = 0.0;

    void validate() const;
};

/// Span-based energy accumulator. Spans nest; only the outermost span of a
/// nesting is charged, so nested spans never double count.
class EnergyMeter {
public:
    virtual ~EnergyMeter() = default;

    // `instances` is the number of examples the span processes. Required by
    // the deterministic meter for train spans.
    void begin_span(SpanKind kind, std::optional<std::uint64_t> instances = std::nullopt);
    void end_span(SpanKind kind);

    double read() const { return train_joules_ + predict_joules_; }
    double read(SpanKind kind) const { return kind == SpanKind::train ? train_joules_ : predict_joules_; }
    std::size_t open_spans() const { return stack_.size(); }

    virtual bool deterministic() const = 0;
    virtual std::string describe() const = 0;

protected:
    struct Frame {
        SpanKind kind;
        std::optional<std::uint64_t> instances;
        double start = 0.0;
    };

    virtual double start_token() const { return 0.0; }
    virtual void validate_span(const Frame&) const {}
    virtual double cost(const Frame& frame) const = 0;

private:
    std::vector<Frame> stack_;
    double train_joules_ = 0.0;
    double predict_joules_ = 0.0;
};

using CpuClock = std::function<double()>;

/// Process CPU time in seconds.
double process_cpu_seconds();

/// Energy = CPU seconds spent inside the span x constant power draw.
class CpuTimeMeter final : public EnergyMeter {
public:
    explicit CpuTimeMeter(double power_watts = 45.0, CpuClock clock = process_cpu_seconds);

    bool deterministic() const override { return false; }
    std::string describe() const override;
    double power_watts() const { return watts_; }

private:
    double start_token() const override { return clock_(); }
    double cost(const Frame& frame) const override;

    double watts_;
    CpuClock clock_;
};

/// Bit-exact, hardware independent meter driven by a fixed cost table.
class DeterministicMeter final : public EnergyMeter {
public:
    explicit DeterministicMeter(CostTable table);

    bool deterministic() const override { return true; }
    std::string describe() const override;
    const CostTable& table() const { return table_; }

private:
    void validate_span(const Frame& frame) const override;
    double cost(const Frame& frame) const override;

    CostTable table_;
};

std::unique_ptr<EnergyMeter> cpu_time_meter(double power_watts = 45.0);
std::unique_ptr<EnergyMeter> deterministic_meter(CostTable table);

/// RAII span. The destructor closes the span even during unwinding so the
/// meter stays balanced.
class ScopedSpan {
public:
    ScopedSpan(EnergyMeter& meter, SpanKind kind, std::optional<std::uint64_t> instances = std::nullopt)
        : meter_(meter), kind_(kind) {
        meter_.begin_span(kind, instances);
    }
    ~ScopedSpan() { meter_.end_span(kind_); }

    ScopedSpan(const ScopedSpan&) = delete;
    ScopedSpan& operator=(const ScopedSpan&) = delete;

private:
    EnergyMeter& meter_;
    SpanKind kind_;
};

} // namespace lteval
