#include "lteval/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lteval/error.hpp"

namespace lteval {

void MlpParams::validate() const {
    for (auto w : hidden)
        if (w < 1) throw ConfigError("mlp: hidden layer widths must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("mlp: learning_rate must be >= 0");
    if (batch_size < 1) throw ConfigError("mlp: batch_size must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 0.5))
        throw ConfigError("mlp: validation_fraction must lie in (0, 0.5)");
    if (!(min_delta >= 0.0)) throw ConfigError("mlp: min_delta must be >= 0");
}

std::vector<std::size_t> mlp_widths(std::size_t num_features, std::span<const std::size_t> hidden,
                                    std::size_t num_classes) {
    std::vector<std::size_t> widths{num_features};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(num_classes);
    return widths;
}

MlpState MlpState::zeros(std::span<const std::size_t> widths) {
    MlpState s;
    for (std::size_t l = 1; l < widths.size(); ++l) {
        DenseLayer layer;
        layer.in = widths[l - 1];
        layer.out = widths[l];
        layer.weights.assign(layer.in * layer.out, 0.0);
        layer.bias.assign(layer.out, 0.0);
        s.layers.push_back(std::move(layer));
    }
    return s;
}

MlpState MlpState::glorot(std::span<const std::size_t> widths, Rng& rng) {
    MlpState s = zeros(widths);
    for (auto& layer : s.layers) {
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
        for (auto& w : layer.weights) w = (2.0 * rng.uniform() - 1.0) * bound;
    }
    return s;
}

std::size_t MlpState::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

double& MlpState::parameter(std::size_t flat) {
    for (auto& l : layers) {
        if (flat < l.weights.size()) return l.weights[flat];
        flat -= l.weights.size();
        if (flat < l.bias.size()) return l.bias[flat];
        flat -= l.bias.size();
    }
    throw ContractError("mlp: parameter index out of range");
}

double MlpState::parameter(std::size_t flat) const { return const_cast<MlpState&>(*this).parameter(flat); }

bool MlpState::finite() const {
    for (const auto& l : layers) {
        for (double w : l.weights)
            if (!std::isfinite(w)) return false;
        for (double b : l.bias)
            if (!std::isfinite(b)) return false;
    }
    return true;
}

void MlpState::axpy(double scale, const MlpState& other) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& a = layers[l];
        const auto& b = other.layers[l];
        for (std::size_t i = 0; i < a.weights.size(); ++i) a.weights[i] += scale * b.weights[i];
        for (std::size_t i = 0; i < a.bias.size(); ++i) a.bias[i] += scale * b.bias[i];
    }
}

namespace {

// Pre-activations of every layer; the last entry holds the output logits.
struct Trace {
    std::vector<std::vector<double>> activations;  // a_0 = input, a_l = relu(z_l)
    std::vector<std::vector<double>> pre;          // z_l
};

void dense(const DenseLayer& layer, std::span<const double> in, std::vector<double>& out) {
    out.assign(layer.bias.begin(), layer.bias.end());
    for (std::size_t o = 0; o < layer.out; ++o) {
        const double* row = &layer.weights[o * layer.in];
        double acc = 0.0;
        for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * in[i];
        out[o] += acc;
    }
}

void run_forward(const MlpState& state, std::span<const double> x, Trace& trace) {
    const std::size_t depth = state.layers.size();
    trace.activations.resize(depth);
    trace.pre.resize(depth);
    trace.activations[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < depth; ++l) {
        dense(state.layers[l], trace.activations[l], trace.pre[l]);
        if (l + 1 < depth) {
            auto& a = trace.activations[l + 1];
            a = trace.pre[l];
            for (auto& v : a) v = std::max(v, 0.0);
        }
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += p[i] = std::exp(logits[i] - mx);
    for (auto& v : p) v /= sum;
    return p;
}

double cross_entropy(std::span<const double> logits, ClassIndex label) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - mx);
    return mx + std::log(sum) - logits[label];
}

void check_arity(const MlpState& state, std::span<const double> x) {
    if (state.layers.empty() || x.size() != state.layers.front().in)
        throw ContractError("mlp: feature arity mismatch");
    for (double v : x)
        if (!std::isfinite(v)) throw ContractError("mlp: non-finite input feature");
}

void accumulate_gradient(const MlpState& state, const Instance& x, MlpGradient& grad, Trace& trace) {
    check_arity(state, x.features);
    run_forward(state, x.features, trace);
    const std::size_t depth = state.layers.size();
    std::vector<double> delta = softmax(trace.pre[depth - 1]);
    delta[x.label] -= 1.0;
    std::vector<double> prev;
    for (std::size_t l = depth; l-- > 0;) {
        const auto& layer = state.layers[l];
        auto& g = grad.layers[l];
        const auto& a = trace.activations[l];
        for (std::size_t o = 0; o < layer.out; ++o) {
            g.bias[o] += delta[o];
            double* row = &g.weights[o * layer.in];
            for (std::size_t i = 0; i < layer.in; ++i) row[i] += delta[o] * a[i];
        }
        if (l == 0) break;
        prev.assign(layer.in, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double* row = &layer.weights[o * layer.in];
            for (std::size_t i = 0; i < layer.in; ++i) prev[i] += row[i] * delta[o];
        }
        const auto& z = trace.pre[l - 1];
        for (std::size_t i = 0; i < layer.in; ++i)
            if (!(z[i] > 0.0)) prev[i] = 0.0;
        delta.swap(prev);
    }
}

std::vector<std::size_t> widths_of(const MlpState& state) {
    std::vector<std::size_t> w{state.layers.front().in};
    for (const auto& l : state.layers) w.push_back(l.out);
    return w;
}

MlpGradient gradient_over(const MlpState& state, std::span<const Instance> data, std::span<const std::size_t> rows) {
    MlpGradient grad = MlpState::zeros(widths_of(state));
    Trace trace;
    for (auto r : rows) accumulate_gradient(state, data[r], grad, trace);
    const double scale = 1.0 / static_cast<double>(rows.size());
    for (auto& l : grad.layers) {
        for (auto& w : l.weights) w *= scale;
        for (auto& b : l.bias) b *= scale;
    }
    return grad;
}

double loss_over(const MlpState& state, std::span<const Instance> data, std::span<const std::size_t> rows) {
    Trace trace;
    double total = 0.0;
    for (auto r : rows) {
        check_arity(state, data[r].features);
        run_forward(state, data[r].features, trace);
        total += cross_entropy(trace.pre.back(), data[r].label);
    }
    return total / static_cast<double>(rows.size());
}

} // namespace

std::vector<double> mlp_forward(const MlpState& state, std::span<const double> features) {
    check_arity(state, features);
    Trace trace;
    run_forward(state, features, trace);
    return softmax(trace.pre.back());
}

double mlp_loss(const MlpState& state, std::span<const Instance> batch) {
    if (batch.empty()) throw ContractError("mlp_loss: empty batch");
    std::vector<std::size_t> rows(batch.size());
    std::iota(rows.begin(), rows.end(), 0);
    return loss_over(state, batch, rows);
}

MlpGradient mlp_gradient(const MlpState& state, std::span<const Instance> batch) {
    if (batch.empty()) throw ContractError("mlp_gradient: empty batch");
    std::vector<std::size_t> rows(batch.size());
    std::iota(rows.begin(), rows.end(), 0);
    return gradient_over(state, batch, rows);
}

MlpState mlp_fit(std::span<const Instance> data, std::size_t num_features, std::size_t num_classes,
                 const MlpParams& params) {
    params.validate();
    if (data.size() < 10) throw ContractError("mlp_fit: needs at least 10 instances, got " + std::to_string(data.size()));
    Rng rng(params.seed);
    const auto widths = mlp_widths(num_features, params.hidden, num_classes);
    MlpState state = MlpState::glorot(widths, rng);
    if (params.max_epochs == 0) return state;

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(params.validation_fraction * static_cast<double>(data.size()))));
    const std::vector<std::size_t> val(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
    std::vector<std::size_t> train(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));

    MlpState best = state;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    for (std::size_t epoch = 0; epoch < params.max_epochs; ++epoch) {
        for (std::size_t i = train.size(); i > 1; --i) std::swap(train[i - 1], train[rng.below(i)]);
        bool diverged = false;
        for (std::size_t start = 0; start < train.size(); start += params.batch_size) {
            const std::size_t end = std::min(train.size(), start + params.batch_size);
            const auto grad = gradient_over(state, data, std::span(train).subspan(start, end - start));
            state.axpy(-params.learning_rate, grad);
            if (!state.finite()) {
                diverged = true;
                break;
            }
        }
        if (diverged) break;
        const double val_loss = loss_over(state, data, val);
        if (val_loss < best_loss - params.min_delta) {
            best_loss = val_loss;
            best = state;
            stale = 0;
        } else if (++stale >= params.patience) {
            break;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

Mlp::Mlp(Schema schema, MlpParams params, Paradigm paradigm)
    : schema_(std::move(schema)), params_(std::move(params)), paradigm_(paradigm) {
    schema_.validate();
    params_.validate();
    reset();
}

std::string Mlp::id() const {
    switch (paradigm_) {
    case Paradigm::batch: return "mlp_batch";
    case Paradigm::streaming: return "mlp_streaming";
    case Paradigm::both: break;
    }
    return "mlp";
}

void Mlp::reset() {
    Rng rng(params_.seed);
    state_ = MlpState::glorot(mlp_widths(schema_.num_features, params_.hidden, schema_.num_classes), rng);
    skipped_ = 0;
}

Prediction Mlp::predict(std::span<const double> features) const {
    return Prediction::from_scores(mlp_forward(state_, features));
}

void Mlp::learn_one(const Instance& x) {
    check_instance(schema_, x);
    const auto grad = mlp_gradient(state_, std::span(&x, 1));
    MlpState backup = state_;
    state_.axpy(-params_.learning_rate, grad);
    if (!state_.finite()) {
        state_ = std::move(backup);
        ++skipped_;
    }
}

void Mlp::fit(std::span<const Instance> data) {
    for (const auto& x : data) check_instance(schema_, x);
    state_ = mlp_fit(data, schema_.num_features, schema_.num_classes, params_);
}

} // namespace lteval
