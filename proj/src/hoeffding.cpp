#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lteval/error.hpp"
#include "lteval/trees.hpp"

namespace lteval {

namespace {

constexpr double kMinBranchFraction = 0.01;

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

} // namespace

void HoeffdingParams::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("hoeffding_tree: delta must lie in (0, 1)");
    if (grace_period < 1) throw ConfigError("hoeffding_tree: grace_period must be >= 1");
    if (!(tie_tau >= 0.0)) throw ConfigError("hoeffding_tree: tie_tau must be >= 0");
    if (split_candidates < 1) throw ConfigError("hoeffding_tree: split_candidates must be >= 1");
}

double hoeffding_bound(double range, double delta, double n) {
    return std::sqrt(range * range * std::log(1.0 / delta) / (2.0 * n));
}

// ---------------------------------------------------------------------------

void GaussianEstimator::add(double value, double weight) {
    if (weight <= 0.0) return;
    weight_ += weight;
    const double delta = value - mean_;
    mean_ += delta * weight / weight_;
    m2_ += weight * delta * (value - mean_);
}

double GaussianEstimator::variance() const { return weight_ > 1.0 ? m2_ / (weight_ - 1.0) : 0.0; }

double GaussianEstimator::stddev() const { return std::sqrt(variance()); }

double GaussianEstimator::weight_at_or_below(double value) const {
    if (weight_ <= 0.0) return 0.0;
    const double sd = stddev();
    if (sd <= 0.0) return value >= mean_ ? weight_ : 0.0;
    const double z = (value - mean_) / sd;
    return weight_ * 0.5 * std::erfc(-z / std::sqrt(2.0));
}

NumericObserver::NumericObserver(std::size_t num_classes)
    : per_class_(num_classes),
      min_(num_classes, std::numeric_limits<double>::infinity()),
      max_(num_classes, -std::numeric_limits<double>::infinity()) {}

void NumericObserver::add(double value, ClassIndex label, double weight) {
    per_class_[label].add(value, weight);
    min_[label] = std::min(min_[label], value);
    max_[label] = std::max(max_[label], value);
}

std::vector<double> NumericObserver::candidate_thresholds(std::size_t count) const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t c = 0; c < per_class_.size(); ++c) {
        if (per_class_[c].weight() <= 0.0) continue;
        lo = std::min(lo, min_[c]);
        hi = std::max(hi, max_[c]);
    }
    std::vector<double> out;
    if (!(lo < hi)) return out;
    const double step = (hi - lo) / static_cast<double>(count + 1);
    for (std::size_t i = 1; i <= count; ++i) out.push_back(lo + step * static_cast<double>(i));
    return out;
}

std::pair<std::vector<double>, std::vector<double>> NumericObserver::split_distributions(double threshold) const {
    const std::size_t k = per_class_.size();
    std::vector<double> left(k, 0.0), right(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        const double w = per_class_[c].weight();
        if (w <= 0.0) continue;
        if (threshold < min_[c]) {
            right[c] = w;
        } else if (threshold >= max_[c]) {
            left[c] = w;
        } else {
            left[c] = std::clamp(per_class_[c].weight_at_or_below(threshold), 0.0, w);
            right[c] = w - left[c];
        }
    }
    return {std::move(left), std::move(right)};
}

double entropy(std::span<const double> distribution) {
    const double total = sum(distribution);
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : distribution)
        if (c > 0.0) h -= (c / total) * std::log2(c / total);
    return h;
}

double info_gain(std::span<const double> pre, std::span<const std::vector<double>> branches) {
    double total = 0.0;
    std::vector<double> weights;
    for (const auto& b : branches) {
        weights.push_back(sum(b));
        total += weights.back();
    }
    if (total <= 0.0) return 0.0;
    const auto substantial =
        std::count_if(weights.begin(), weights.end(), [&](double w) { return w / total >= kMinBranchFraction; });
    if (substantial < 2) return 0.0;
    double after = 0.0;
    for (std::size_t i = 0; i < branches.size(); ++i) after += weights[i] / total * entropy(branches[i]);
    return entropy(pre) - after;
}

// ---------------------------------------------------------------------------

HoeffdingTree::HoeffdingTree(Schema schema, HoeffdingParams params)
    : schema_(std::move(schema)), params_(params) {
    schema_.validate();
    params_.validate();
    reset();
}

void HoeffdingTree::reset() {
    nodes_.clear();
    nodes_.push_back(make_leaf(std::vector<double>(schema_.num_classes, 0.0)));
}

HoeffdingTree::Node HoeffdingTree::make_leaf(std::vector<double> counts) const {
    Node node;
    node.weight_at_last_eval = sum(counts);
    node.counts = std::move(counts);
    node.observers.assign(schema_.num_features, NumericObserver(schema_.num_classes));
    return node;
}

std::size_t HoeffdingTree::route(std::span<const double> features) const {
    if (features.size() != schema_.num_features) throw ContractError("hoeffding_tree: feature arity mismatch");
    std::size_t i = 0;
    while (!nodes_[i].leaf) i = features[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    return i;
}

Prediction HoeffdingTree::predict(std::span<const double> features) const {
    std::vector<double> scores = nodes_[route(features)].counts;
    const double total = sum(scores);
    for (auto& s : scores) s = total > 0.0 ? s / total : 1.0 / static_cast<double>(scores.size());
    return Prediction::from_scores(std::move(scores));
}

void HoeffdingTree::learn_one(const Instance& x) {
    check_instance(schema_, x);
    const std::size_t leaf = route(x.features);
    Node& node = nodes_[leaf];
    node.counts[x.label] += 1.0;
    for (std::size_t f = 0; f < schema_.num_features; ++f) node.observers[f].add(x.features[f], x.label);
    const double seen = sum(node.counts);
    if (seen - node.weight_at_last_eval >= static_cast<double>(params_.grace_period)) {
        attempt_split(leaf);
        nodes_[leaf].weight_at_last_eval = seen;
    }
}

std::vector<std::optional<HoeffdingTree::SplitChoice>> HoeffdingTree::candidates(const Node& leaf) const {
    std::vector<std::optional<SplitChoice>> out(schema_.num_features);
    for (std::size_t f = 0; f < schema_.num_features; ++f) {
        for (double t : leaf.observers[f].candidate_thresholds(params_.split_candidates)) {
            auto [left, right] = leaf.observers[f].split_distributions(t);
            const std::vector<double> branches[2] = {left, right};
            const double gain = info_gain(leaf.counts, branches);
            if (!out[f] || gain > out[f]->gain) out[f] = SplitChoice{f, t, gain, std::move(left), std::move(right)};
        }
    }
    return out;
}

void HoeffdingTree::attempt_split(std::size_t leaf) {
    const Node& node = nodes_[leaf];
    const auto present = std::count_if(node.counts.begin(), node.counts.end(), [](double c) { return c > 0.0; });
    if (present < 2) return;

    auto cands = candidates(node);
    std::vector<SplitChoice> ranked;
    for (auto& c : cands)
        if (c) ranked.push_back(std::move(*c));
    if (ranked.empty()) return;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const SplitChoice& a, const SplitChoice& b) { return a.gain > b.gain; });

    const double g1 = ranked[0].gain;
    const double g2 = ranked.size() > 1 ? ranked[1].gain : 0.0;
    const double range = std::log2(static_cast<double>(schema_.num_classes));
    const double eps = hoeffding_bound(range, params_.delta, sum(node.counts));
    if (!(g1 > 0.0) || !(g1 - g2 > eps || eps < params_.tie_tau)) return;

    SplitChoice& best = ranked[0];
    Node left = make_leaf(std::move(best.left));
    Node right = make_leaf(std::move(best.right));
    const std::size_t left_index = nodes_.size();
    nodes_.push_back(std::move(left));
    nodes_.push_back(std::move(right));

    Node& parent = nodes_[leaf];
    parent.leaf = false;
    parent.feature = best.feature;
    parent.threshold = best.threshold;
    parent.left = left_index;
    parent.right = left_index + 1;
    parent.observers.clear();
    parent.observers.shrink_to_fit();
}

std::size_t HoeffdingTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
}

std::optional<std::size_t> HoeffdingTree::root_split_feature() const {
    if (nodes_[0].leaf) return std::nullopt;
    return nodes_[0].feature;
}

std::vector<double> HoeffdingTree::leaf_distribution(std::span<const double> features) const {
    return nodes_[route(features)].counts;
}

std::vector<std::optional<HoeffdingTree::SplitChoice>> HoeffdingTree::leaf_candidates(
    std::span<const double> features) const {
    return candidates(nodes_[route(features)]);
}

} // namespace lteval
