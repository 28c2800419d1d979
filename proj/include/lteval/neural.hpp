#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lteval/core.hpp"
#include "lteval/rng.hpp"

namespace lteval {

struct MlpParams {
    std::vector<std::size_t> hidden{32, 16};
    double learning_rate = 1e-3;
    std::size_t batch_size = 1024;
    std::size_t patience = 3;
    double min_delta = 1e-4;
    std::size_t max_epochs = 200;
    double validation_fraction = 0.1;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Dense layer, weights row-major [out][in].
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    double& w(std::size_t o, std::size_t i) { return weights[o * in + i]; }
    double w(std::size_t o, std::size_t i) const { return weights[o * in + i]; }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Parameters of the network; ReLU between layers, softmax at the output.
/// The gradient uses the same layout.
struct MlpState {
    std::vector<DenseLayer> layers;

    static MlpState zeros(std::span<const std::size_t> widths);
    // Uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
    static MlpState glorot(std::span<const std::size_t> widths, Rng& rng);

    std::size_t parameter_count() const;
    double& parameter(std::size_t flat_index);
    double parameter(std::size_t flat_index) const;
    bool finite() const;

    // this += scale * other
    void axpy(double scale, const MlpState& other);

    friend bool operator==(const MlpState&, const MlpState&) = default;
};

using MlpGradient = MlpState;

std::vector<double> mlp_forward(const MlpState& state, std::span<const double> features);

/// Mean cross-entropy over `batch`.
double mlp_loss(const MlpState& state, std::span<const Instance> batch);

/// Exact gradient of mlp_loss with respect to every parameter.
MlpGradient mlp_gradient(const MlpState& state, std::span<const Instance> batch);

/// Minibatch SGD with early stopping on a held-out validation tail; returns
/// the state with the best validation loss.
MlpState mlp_fit(std::span<const Instance> data, std::size_t num_features, std::size_t num_classes,
                 const MlpParams& params);

class Mlp final : public Model {
public:
    Mlp(Schema schema, MlpParams params, Paradigm paradigm = Paradigm::both);

    std::string id() const override;
    Paradigm paradigm() const override { return paradigm_; }
    const Schema& schema() const override { return schema_; }

    Prediction predict(std::span<const double> features) const override;
    void learn_one(const Instance& x) override;
    void fit(std::span<const Instance> data) override;
    void reset() override;

    const MlpState& state() const { return state_; }
    MlpState& mutable_state() { return state_; }
    const MlpParams& params() const { return params_; }
    std::uint64_t skipped_steps() const { return skipped_; }

private:
    Schema schema_;
    MlpParams params_;
    Paradigm paradigm_;
    MlpState state_;
    std::uint64_t skipped_ = 0;
};

std::vector<std::size_t> mlp_widths(std::size_t num_features, std::span<const std::size_t> hidden,
                                    std::size_t num_classes);

} // namespace lteval
