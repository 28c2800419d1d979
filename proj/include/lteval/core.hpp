#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lteval {

using ClassIndex = std::uint32_t;

struct Schema {
    std::size_t num_features = 0;
    std::size_t num_classes = 0;
    std::vector<std::string> feature_names;  // empty or num_features long

    // Throws ContractError when the invariants do not hold.
    void validate() const;
};

bool operator==(const Schema& a, const Schema& b);

/// One labeled example from a stream.
struct Instance {
    std::vector<double> features;
    ClassIndex label = 0;
    std::uint64_t seq = 0;
};

// Throws ContractError if `x` does not fit `schema`.
void check_instance(const Schema& schema, const Instance& x);

struct Prediction {
    ClassIndex class_index = 0;
    std::optional<std::vector<double>> scores;

    static Prediction from_scores(std::vector<double> scores);
};

/// argmax with ties resolved towards the lowest index.
std::size_t argmax_lowest(std::span<const double> values);

enum class Paradigm { batch, streaming, both };

const char* to_string(Paradigm p);

/// The model contract shared by every learner: inference, incremental
/// training and from-scratch batch training.
class Model {
public:
    virtual ~Model() = default;

    virtual std::string id() const = 0;
    virtual Paradigm paradigm() const = 0;
    virtual const Schema& schema() const = 0;

    virtual Prediction predict(std::span<const double> features) const = 0;

    // Streaming update with a single instance.
    virtual void learn_one(const Instance& x);

    // Discards everything learned so far and trains on `data` only.
    virtual void fit(std::span<const Instance> data);

    // Back to the exact post-construction state.
    virtual void reset() = 0;

    // Forest-style learners may parallelize their fit when allowed.
    virtual void set_parallel_fit(bool) {}

    bool supports_fit() const { return paradigm() != Paradigm::streaming; }
    bool supports_learn_one() const { return paradigm() != Paradigm::batch; }
};

/// Cold-start policy: majority label seen so far, lowest index on ties,
/// class 0 when nothing has been seen.
Prediction fallback_predict(std::span<const std::uint64_t> label_counts);

} // namespace lteval
