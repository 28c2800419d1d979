#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "lteval/core.hpp"
#include "lteval/rng.hpp"
#include "lteval/trees.hpp"

namespace lteval {

struct EnsembleParams {
    std::size_t size = 10;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Poisson(mean) by inverse transform over the harness generator.
std::uint32_t poisson_draw(double mean, Rng& rng);

// Replaces the Poisson sampler in the online ensembles (tests only).
using PoissonOverride = std::function<std::uint32_t(double mean)>;

/// Majority vote with lowest-index tie-break; scores are vote fractions.
Prediction majority_vote(std::span<const ClassIndex> votes, std::size_t num_classes);

// ---------------------------------------------------------------------------

class OzaBagging final : public Model {
public:
    OzaBagging(Schema schema, EnsembleParams params, HoeffdingParams base = {});

    std::string id() const override { return "oza_bagging"; }
    Paradigm paradigm() const override { return Paradigm::streaming; }
    const Schema& schema() const override { return schema_; }

    Prediction predict(std::span<const double> features) const override;
    void learn_one(const Instance& x) override;
    void reset() override;

    const std::vector<HoeffdingTree>& members() const { return members_; }
    void set_poisson_override(PoissonOverride f) { poisson_override_ = std::move(f); }

private:
    Schema schema_;
    EnsembleParams params_;
    HoeffdingParams base_;
    std::vector<HoeffdingTree> members_;
    Rng rng_;
    PoissonOverride poisson_override_;
};

// ---------------------------------------------------------------------------

struct BoostingMemberState {
    double lambda_sc = 0.0;  // Poisson mass on instances the member got right
    double lambda_sw = 0.0;  // ... and wrong
};

inline constexpr double kMaxVoteWeight = 10.0;

/// log(sc/sw) clamped to [0, kMaxVoteWeight]; members with no correct mass vote
/// with 0 and members with no wrong mass with the clamp maximum.
double oza_boost_vote_weight(const BoostingMemberState& state);

class OzaBoosting final : public Model {
public:
    OzaBoosting(Schema schema, EnsembleParams params, HoeffdingParams base = {});

    std::string id() const override { return "oza_boosting"; }
    Paradigm paradigm() const override { return Paradigm::streaming; }
    const Schema& schema() const override { return schema_; }

    Prediction predict(std::span<const double> features) const override;
    void learn_one(const Instance& x) override;
    void reset() override;

    const std::vector<HoeffdingTree>& members() const { return members_; }
    const std::vector<BoostingMemberState>& member_states() const { return states_; }
    // Sum of lambda_d routed to members since construction/reset.
    double dispatched_mass() const { return dispatched_; }
    // lambda_d values seen by each member for the most recent instance.
    const std::vector<double>& last_lambdas() const { return last_lambdas_; }
    void set_poisson_override(PoissonOverride f) { poisson_override_ = std::move(f); }

private:
    Schema schema_;
    EnsembleParams params_;
    HoeffdingParams base_;
    std::vector<HoeffdingTree> members_;
    std::vector<BoostingMemberState> states_;
    Rng rng_;
    double dispatched_ = 0.0;
    std::vector<double> last_lambdas_;
    PoissonOverride poisson_override_;
};

// ---------------------------------------------------------------------------

class RandomForest final : public Model {
public:
    RandomForest(Schema schema, EnsembleParams params, CartParams base = {});

    std::string id() const override { return "random_forest"; }
    Paradigm paradigm() const override { return Paradigm::batch; }
    const Schema& schema() const override { return schema_; }

    Prediction predict(std::span<const double> features) const override;
    void fit(std::span<const Instance> data) override;
    void reset() override { trees_.clear(); }
    void set_parallel_fit(bool allowed) override { parallel_ = allowed; }

    // Test hooks for the degenerate single-tree configuration.
    void set_bootstrap(bool enabled) { bootstrap_ = enabled; }
    void set_feature_subsample(std::optional<std::size_t> k) { subsample_override_ = k; }

    const std::vector<CartTree>& trees() const { return trees_; }

private:
    Schema schema_;
    EnsembleParams params_;
    CartParams base_;
    std::vector<CartTree> trees_;
    bool parallel_ = false;
    bool bootstrap_ = true;
    std::optional<std::optional<std::size_t>> subsample_override_;
};

// ---------------------------------------------------------------------------

/// log(1/beta) with beta = err/(1-err).
double adaboost_vote_weight(double weighted_error);

class AdaBoostM1 final : public Model {
public:
    AdaBoostM1(Schema schema, EnsembleParams params, std::size_t base_depth = 3);

    std::string id() const override { return "adaboost_m1"; }
    Paradigm paradigm() const override { return Paradigm::batch; }
    const Schema& schema() const override { return schema_; }

    Prediction predict(std::span<const double> features) const override;
    void fit(std::span<const Instance> data) override;
    void reset() override;

    std::size_t rounds() const { return members_.size(); }
    const std::vector<double>& vote_weights() const { return vote_weights_; }
    const std::vector<double>& round_errors() const { return errors_; }
    // Sum of instance weights after each completed round.
    const std::vector<double>& weight_sums() const { return weight_sums_; }

private:
    Schema schema_;
    EnsembleParams params_;
    std::size_t base_depth_;
    std::vector<CartTree> members_;
    std::vector<double> vote_weights_;
    std::vector<double> errors_;
    std::vector<double> weight_sums_;
};

} // namespace lteval
