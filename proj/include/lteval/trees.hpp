#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "lteval/core.hpp"
#include "lteval/rng.hpp"

namespace lteval {

// ---------------------------------------------------------------------------
// Batch CART (Gini)

struct CartParams {
    std::optional<std::size_t> max_depth;
    std::size_t min_leaf = 2;
    std::uint64_t seed = 0;
    // Number of randomly drawn features considered at each split; all when empty.
    std::optional<std::size_t> feature_subsample;

    void validate() const;
};

/// 1 - sum (c_i / N)^2. Throws ContractError on all-zero counts.
double gini(std::span<const double> counts);

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = 0.0;
};

/// Best Gini split over midpoints between consecutive distinct feature values.
/// Ties go to the lower feature index, then the lower threshold. Empty when no
/// split has positive decrease or every split would leave a child with fewer
/// than min_leaf instances. `weights` may be empty (uniform).
std::optional<Split> best_split(std::span<const Instance> data, std::span<const double> weights,
                                std::size_t num_classes, const CartParams& params);

class CartTree final : public Model {
public:
    CartTree(Schema schema, CartParams params);

    std::string id() const override { return "cart"; }
    Paradigm paradigm() const override { return Paradigm::batch; }
    const Schema& schema() const override { return schema_; }

    Prediction predict(std::span<const double> features) const override;
    void fit(std::span<const Instance> data) override;
    void reset() override { nodes_.clear(); }

    // Weighted fit. `weights` parallels `data`; must be non-negative.
    void fit_weighted(std::span<const Instance> data, std::span<const double> weights);

    // Fit on `rows` (indices into data, repeats allowed) with per-row weights
    // indexed by data position. Used for bootstrap samples.
    void fit_rows(std::span<const Instance> data, std::span<const double> weights, std::vector<std::size_t> rows);

    bool fitted() const { return !nodes_.empty(); }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t depth() const;
    const CartParams& params() const { return params_; }

    struct Node {
        bool leaf = true;
        std::size_t feature = 0;
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        std::vector<double> distribution;  // weighted class totals at the node
    };
    const std::vector<Node>& nodes() const { return nodes_; }

private:
    std::size_t build(std::span<const Instance> data, std::span<const double> weights, std::vector<std::size_t>& rows,
                      std::size_t depth, Rng& rng);

    Schema schema_;
    CartParams params_;
    std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Hoeffding tree (VFDT with Gaussian numeric observers)

struct HoeffdingParams {
    double delta = 1e-7;
    std::uint64_t grace_period = 200;
    double tie_tau = 0.05;
    std::size_t split_candidates = 10;

    void validate() const;
};

/// sqrt(R^2 ln(1/delta) / (2n)).
double hoeffding_bound(double range, double delta, double n);

/// Weighted running mean/variance (Welford).
class GaussianEstimator {
public:
    void add(double value, double weight = 1.0);
    double weight() const { return weight_; }
    double mean() const { return mean_; }
    double variance() const;
    double stddev() const;
    // Weight of observations <= value under the fitted normal.
    double weight_at_or_below(double value) const;

private:
    double weight_ = 0.0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Per-class Gaussian summary of one numeric feature at a leaf.
class NumericObserver {
public:
    explicit NumericObserver(std::size_t num_classes);

    void add(double value, ClassIndex label, double weight = 1.0);

    // Evenly spaced thresholds strictly between the observed min and max.
    std::vector<double> candidate_thresholds(std::size_t count) const;

    // Estimated class distributions on each side of `threshold`.
    std::pair<std::vector<double>, std::vector<double>> split_distributions(double threshold) const;

private:
    std::vector<GaussianEstimator> per_class_;
    std::vector<double> min_;
    std::vector<double> max_;
};

double entropy(std::span<const double> distribution);

/// Information gain of splitting `pre` into `branches`. Zero when fewer than
/// two branches carry at least 1% of the weight.
double info_gain(std::span<const double> pre, std::span<const std::vector<double>> branches);

class HoeffdingTree final : public Model {
public:
    HoeffdingTree(Schema schema, HoeffdingParams params = {});

    std::string id() const override { return "hoeffding_tree"; }
    Paradigm paradigm() const override { return Paradigm::streaming; }
    const Schema& schema() const override { return schema_; }

    Prediction predict(std::span<const double> features) const override;
    void learn_one(const Instance& x) override;
    void reset() override;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const;
    std::size_t split_count() const { return (nodes_.size() - 1) / 2; }

    struct SplitChoice {
        std::size_t feature = 0;
        double threshold = 0.0;
        double gain = 0.0;
        std::vector<double> left, right;
    };

    // Inspection hooks for tests.
    std::optional<std::size_t> root_split_feature() const;
    std::vector<double> leaf_distribution(std::span<const double> features) const;
    // Best candidate split per feature at the leaf reached by `features`.
    std::vector<std::optional<SplitChoice>> leaf_candidates(std::span<const double> features) const;

private:
    struct Node {
        bool leaf = true;
        std::size_t feature = 0;
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        std::vector<double> counts;
        std::vector<NumericObserver> observers;
        double weight_at_last_eval = 0.0;
    };

    std::size_t route(std::span<const double> features) const;
    std::vector<std::optional<SplitChoice>> candidates(const Node& leaf) const;
    void attempt_split(std::size_t leaf);
    Node make_leaf(std::vector<double> counts) const;

    Schema schema_;
    HoeffdingParams params_;
    std::vector<Node> nodes_;
};

} // namespace lteval
