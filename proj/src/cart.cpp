#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lteval/error.hpp"
#include "lteval/trees.hpp"

namespace lteval {

namespace {

constexpr double kMinDecrease = 1e-12;

double weight_of(std::span<const double> weights, std::size_t row) { return weights.empty() ? 1.0 : weights[row]; }

double gini_of(const std::vector<double>& counts, double total) {
    double sum_sq = 0.0;
    for (double c : counts) sum_sq += c * c;
    return 1.0 - sum_sq / (total * total);
}

std::optional<Split> search_split(std::span<const Instance> data, std::span<const double> weights,
                                  std::size_t num_classes, std::size_t min_leaf, const std::vector<std::size_t>& rows,
                                  const std::vector<std::size_t>& features) {
    const std::size_t n = rows.size();
    if (n < 2) return std::nullopt;

    std::vector<double> totals(num_classes, 0.0);
    for (auto r : rows) totals[data[r].label] += weight_of(weights, r);
    const double total_w = std::accumulate(totals.begin(), totals.end(), 0.0);
    if (total_w <= 0.0) return std::nullopt;
    const double parent = gini_of(totals, total_w);
    if (parent <= 0.0) return std::nullopt;

    std::optional<Split> best;
    std::vector<std::size_t> sorted(rows);
    std::vector<double> left(num_classes), right(num_classes);
    for (const auto f : features) {
        std::stable_sort(sorted.begin(), sorted.end(),
                         [&](std::size_t a, std::size_t b) { return data[a].features[f] < data[b].features[f]; });
        std::fill(left.begin(), left.end(), 0.0);
        double left_w = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto r = sorted[i];
            const double w = weight_of(weights, r);
            left[data[r].label] += w;
            left_w += w;
            const double v = data[r].features[f];
            const double v_next = data[sorted[i + 1]].features[f];
            if (!(v < v_next)) continue;
            const std::size_t left_n = i + 1;
            if (left_n < min_leaf || n - left_n < min_leaf) continue;
            const double right_w = total_w - left_w;
            if (left_w <= 0.0 || right_w <= 0.0) continue;
            for (std::size_t c = 0; c < num_classes; ++c) right[c] = totals[c] - left[c];
            const double decrease =
                parent - (left_w / total_w) * gini_of(left, left_w) - (right_w / total_w) * gini_of(right, right_w);
            // Near-equal decreases count as ties so rounding cannot reorder them.
            if (decrease > kMinDecrease && (!best || decrease > best->decrease + kMinDecrease))
                best = Split{f, v + (v_next - v) / 2.0, decrease};
        }
    }
    return best;
}

} // namespace

void CartParams::validate() const {
    if (min_leaf < 1) throw ConfigError("cart: min_leaf must be >= 1");
    if (feature_subsample && *feature_subsample < 1) throw ConfigError("cart: feature_subsample must be >= 1");
}

double gini(std::span<const double> counts) {
    double total = 0.0;
    for (double c : counts) {
        if (c < 0.0) throw ContractError("gini: negative count");
        total += c;
    }
    if (total <= 0.0) throw ContractError("gini: all counts are zero");
    return gini_of(std::vector<double>(counts.begin(), counts.end()), total);
}

std::optional<Split> best_split(std::span<const Instance> data, std::span<const double> weights,
                                std::size_t num_classes, const CartParams& params) {
    if (data.empty()) return std::nullopt;
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<std::size_t> features(data.front().features.size());
    std::iota(features.begin(), features.end(), 0);
    return search_split(data, weights, num_classes, params.min_leaf, rows, features);
}

CartTree::CartTree(Schema schema, CartParams params) : schema_(std::move(schema)), params_(params) {
    schema_.validate();
    params_.validate();
}

void CartTree::fit(std::span<const Instance> data) { fit_weighted(data, {}); }

void CartTree::fit_weighted(std::span<const Instance> data, std::span<const double> weights) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), 0);
    fit_rows(data, weights, std::move(rows));
}

void CartTree::fit_rows(std::span<const Instance> data, std::span<const double> weights,
                        std::vector<std::size_t> rows) {
    if (data.empty() || rows.empty()) throw ContractError("cart: cannot fit on empty data");
    if (!weights.empty() && weights.size() != data.size())
        throw ContractError("cart: weights must parallel the data");
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw ContractError("cart: weights must be finite and >= 0");
    for (const auto& x : data) check_instance(schema_, x);
    nodes_.clear();
    Rng rng(params_.seed);
    build(data, weights, rows, 0, rng);
}

std::size_t CartTree::build(std::span<const Instance> data, std::span<const double> weights,
                            std::vector<std::size_t>& rows, std::size_t depth, Rng& rng) {
    const std::size_t index = nodes_.size();
    nodes_.emplace_back();
    std::vector<double> dist(schema_.num_classes, 0.0);
    for (auto r : rows) dist[data[r].label] += weight_of(weights, r);
    const auto present = std::count_if(dist.begin(), dist.end(), [](double c) { return c > 0.0; });

    std::optional<Split> split;
    const bool depth_left = !params_.max_depth || depth < *params_.max_depth;
    if (depth_left && present > 1 && rows.size() >= 2 * params_.min_leaf) {
        const std::size_t d = schema_.num_features;
        std::vector<std::size_t> features(d);
        std::iota(features.begin(), features.end(), 0);
        if (params_.feature_subsample && *params_.feature_subsample < d) {
            const std::size_t k = *params_.feature_subsample;
            for (std::size_t i = 0; i < k; ++i) std::swap(features[i], features[i + rng.below(d - i)]);
            features.resize(k);
            std::sort(features.begin(), features.end());
        }
        split = search_split(data, weights, schema_.num_classes, params_.min_leaf, rows, features);
    }

    if (!split) {
        nodes_[index].distribution = std::move(dist);
        return index;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows) (data[r].features[split->feature] <= split->threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const auto left = build(data, weights, left_rows, depth + 1, rng);
    const auto right = build(data, weights, right_rows, depth + 1, rng);
    Node& node = nodes_[index];
    node.leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    node.distribution = std::move(dist);
    return index;
}

Prediction CartTree::predict(std::span<const double> features) const {
    if (nodes_.empty()) throw ContractError("cart: predict before fit");
    if (features.size() != schema_.num_features) throw ContractError("cart: feature arity mismatch");
    std::size_t i = 0;
    while (!nodes_[i].leaf) i = features[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    std::vector<double> scores = nodes_[i].distribution;
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    for (auto& s : scores) s = total > 0.0 ? s / total : 1.0 / static_cast<double>(scores.size());
    return Prediction::from_scores(std::move(scores));
}

std::size_t CartTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        const auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes_[i].leaf) {
            stack.emplace_back(nodes_[i].left, d + 1);
            stack.emplace_back(nodes_[i].right, d + 1);
        }
    }
    return deepest;
}

} // namespace lteval
