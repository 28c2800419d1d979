#include "lteval/energy.hpp"

#include <cmath>
#include <ctime>
#include <sstream>

#include "lteval/error.hpp"

namespace lteval {

const char* to_string(SpanKind kind) { return kind == SpanKind::train ? "train" : "predict"; }

void CarbonConfig::validate() const {
    if (!(intensity_g_per_kwh > 0.0) || !std::isfinite(intensity_g_per_kwh))
        throw ConfigError("carbon.intensity_g_per_kwh must be a finite value > 0");
}

double to_gco2e(double joules, const CarbonConfig& carbon) {
    if (joules < 0.0) throw ContractError("to_gco2e: joules must be >= 0");
    return joules / kJoulesPerKwh * carbon.intensity_g_per_kwh;
}

void CostTable::validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!ok(joules_per_train_instance) || !ok(joules_per_predict))
        throw ConfigError("meter cost table entries must be finite and >= 0");
}

void EnergyMeter::begin_span(SpanKind kind, std::optional<std::uint64_t> instances) {
    Frame frame{kind, instances, 0.0};
    validate_span(frame);
    if (stack_.empty()) frame.start = start_token();
    stack_.push_back(frame);
}

void EnergyMeter::end_span(SpanKind kind) {
    if (stack_.empty()) throw ContractError(std::string("end_span(") + to_string(kind) + ") without open span");
    if (stack_.back().kind != kind)
        throw ContractError(std::string("end_span(") + to_string(kind) + ") closes a " +
                            to_string(stack_.back().kind) + " span");
    const Frame frame = stack_.back();
    stack_.pop_back();
    if (!stack_.empty()) return;
    const double joules = cost(frame);
    (frame.kind == SpanKind::train ? train_joules_ : predict_joules_) += joules;
}

double process_cpu_seconds() {
    timespec ts{};
    clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

CpuTimeMeter::CpuTimeMeter(double power_watts, CpuClock clock) : watts_(power_watts), clock_(std::move(clock)) {
    if (!(watts_ > 0.0) || !std::isfinite(watts_)) throw ConfigError("meter.watts must be a finite value > 0");
}

double CpuTimeMeter::cost(const Frame& frame) const {
    const double elapsed = clock_() - frame.start;
    return elapsed > 0.0 ? elapsed * watts_ : 0.0;
}

std::string CpuTimeMeter::describe() const {
    std::ostringstream os;
    os << "cpu_time(" << watts_ << " W)";
    return os.str();
}

DeterministicMeter::DeterministicMeter(CostTable table) : table_(table) { table_.validate(); }

void DeterministicMeter::validate_span(const Frame& frame) const {
    if (frame.kind == SpanKind::train && !frame.instances)
        throw ContractError("deterministic meter: train span needs an instance count");
}

double DeterministicMeter::cost(const Frame& frame) const {
    if (frame.kind == SpanKind::train)
        return static_cast<double>(*frame.instances) * table_.joules_per_train_instance;
    return static_cast<double>(frame.instances.value_or(1)) * table_.joules_per_predict;
}

std::string DeterministicMeter::describe() const {
    std::ostringstream os;
    os << "deterministic(train " << table_.joules_per_train_instance << " J/inst, predict "
       << table_.joules_per_predict << " J)";
    return os.str();
}

std::unique_ptr<EnergyMeter> cpu_time_meter(double power_watts) {
    return std::make_unique<CpuTimeMeter>(power_watts);
}

std::unique_ptr<EnergyMeter> deterministic_meter(CostTable table) {
    return std::make_unique<DeterministicMeter>(table);
}

} // namespace lteval
