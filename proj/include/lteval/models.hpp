#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lteval/core.hpp"

namespace lteval {

/// Predicts the most frequent label seen so far. Supports both paradigms and
/// gives every dataset a floor line.
class MajorityBaseline final : public Model {
public:
    explicit MajorityBaseline(Schema schema);

    std::string id() const override { return "majority_baseline"; }
    Paradigm paradigm() const override { return Paradigm::both; }
    const Schema& schema() const override { return schema_; }

    Prediction predict(std::span<const double> features) const override;
    void learn_one(const Instance& x) override;
    void fit(std::span<const Instance> data) override;
    void reset() override;

    const std::vector<std::uint64_t>& counts() const { return counts_; }

private:
    Schema schema_;
    std::vector<std::uint64_t> counts_;
};

/// Model id plus raw hyperparameter overrides (values kept as text, parsed
/// and validated by the factory).
struct ModelSpec {
    std::string id;
    std::map<std::string, std::string> params;
};

const std::vector<std::string>& known_model_ids();

/// Paradigm a model id supports, without building it.
Paradigm model_paradigm(const std::string& id);

/// Hyperparameter names accepted for `id`.
std::vector<std::string> model_param_names(const std::string& id);

/// Builds a model; throws ConfigError for unknown ids, unknown parameter
/// names, or out-of-range values.
std::unique_ptr<Model> make_model(const ModelSpec& spec, const Schema& schema, std::uint64_t seed);

} // namespace lteval
