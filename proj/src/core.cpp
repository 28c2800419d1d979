#include "lteval/core.hpp"

#include <cmath>
#include <string>

#include "lteval/error.hpp"

namespace lteval {

void Schema::validate() const {
    if (num_features < 1) throw ContractError("schema: num_features must be >= 1");
    if (num_classes < 2) throw ContractError("schema: num_classes must be >= 2");
    if (!feature_names.empty() && feature_names.size() != num_features)
        throw ContractError("schema: feature_names length differs from num_features");
}

bool operator==(const Schema& a, const Schema& b) {
    return a.num_features == b.num_features && a.num_classes == b.num_classes &&
           a.feature_names == b.feature_names;
}

void check_instance(const Schema& schema, const Instance& x) {
    if (x.features.size() != schema.num_features)
        throw ContractError("instance " + std::to_string(x.seq) + ": expected " +
                            std::to_string(schema.num_features) + " features, got " +
                            std::to_string(x.features.size()));
    if (x.label >= schema.num_classes)
        throw ContractError("instance " + std::to_string(x.seq) + ": label " +
                            std::to_string(x.label) + " out of range");
}

std::size_t argmax_lowest(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

Prediction Prediction::from_scores(std::vector<double> scores) {
    Prediction p;
    p.class_index = static_cast<ClassIndex>(argmax_lowest(scores));
    p.scores = std::move(scores);
    return p;
}

const char* to_string(Paradigm p) {
    switch (p) {
    case Paradigm::batch: return "batch";
    case Paradigm::streaming: return "streaming";
    case Paradigm::both: return "both";
    }
    return "?";
}

void Model::learn_one(const Instance&) {
    throw ContractError(id() + " does not support incremental training");
}

void Model::fit(std::span<const Instance>) {
    throw ContractError(id() + " does not support batch training");
}

Prediction fallback_predict(std::span<const std::uint64_t> label_counts) {
    Prediction p;
    std::uint64_t best = 0;
    for (std::size_t c = 0; c < label_counts.size(); ++c) {
        if (label_counts[c] > best) {
            best = label_counts[c];
            p.class_index = static_cast<ClassIndex>(c);
        }
    }
    return p;
}

} // namespace lteval
