#include "lteval/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "lteval/error.hpp"

namespace lteval {

void EnsembleParams::validate() const {
    if (size < 1) throw ConfigError("ensemble size must be >= 1");
}

std::uint32_t poisson_draw(double mean, Rng& rng) { return rng.poisson(mean); }

Prediction majority_vote(std::span<const ClassIndex> votes, std::size_t num_classes) {
    std::vector<double> scores(num_classes, 0.0);
    for (auto v : votes) scores[v] += 1.0;
    const double n = votes.empty() ? 1.0 : static_cast<double>(votes.size());
    for (auto& s : scores) s /= n;
    if (votes.empty()) std::fill(scores.begin(), scores.end(), 1.0 / static_cast<double>(num_classes));
    return Prediction::from_scores(std::move(scores));
}

namespace {

Prediction weighted_vote(const std::vector<double>& totals) {
    const double sum = std::accumulate(totals.begin(), totals.end(), 0.0);
    std::vector<double> scores(totals);
    for (auto& s : scores) s = sum > 0.0 ? s / sum : 1.0 / static_cast<double>(scores.size());
    return Prediction::from_scores(std::move(scores));
}

std::uint64_t member_seed(std::uint64_t seed, std::size_t member) {
    std::uint64_t state = seed ^ (0x632be59bd9b4e019ULL * (member + 1));
    return splitmix64(state);
}

} // namespace

// ---------------------------------------------------------------------------

OzaBagging::OzaBagging(Schema schema, EnsembleParams params, HoeffdingParams base)
    : schema_(std::move(schema)), params_(params), base_(base), rng_(params.seed) {
    params_.validate();
    reset();
}

void OzaBagging::reset() {
    members_.assign(params_.size, HoeffdingTree(schema_, base_));
    rng_ = Rng(params_.seed);
}

void OzaBagging::learn_one(const Instance& x) {
    check_instance(schema_, x);
    for (auto& member : members_) {
        const auto k = poisson_override_ ? poisson_override_(1.0) : poisson_draw(1.0, rng_);
        for (std::uint32_t i = 0; i < k; ++i) member.learn_one(x);
    }
}

Prediction OzaBagging::predict(std::span<const double> features) const {
    std::vector<ClassIndex> votes;
    votes.reserve(members_.size());
    for (const auto& m : members_) votes.push_back(m.predict(features).class_index);
    return majority_vote(votes, schema_.num_classes);
}

// ---------------------------------------------------------------------------

double oza_boost_vote_weight(const BoostingMemberState& s) {
    if (s.lambda_sc <= 0.0) return 0.0;
    if (s.lambda_sw <= 0.0) return kMaxVoteWeight;
    return std::clamp(std::log(s.lambda_sc / s.lambda_sw), 0.0, kMaxVoteWeight);
}

OzaBoosting::OzaBoosting(Schema schema, EnsembleParams params, HoeffdingParams base)
    : schema_(std::move(schema)), params_(params), base_(base), rng_(params.seed) {
    params_.validate();
    reset();
}

void OzaBoosting::reset() {
    members_.assign(params_.size, HoeffdingTree(schema_, base_));
    states_.assign(params_.size, {});
    rng_ = Rng(params_.seed);
    dispatched_ = 0.0;
    last_lambdas_.clear();
}

void OzaBoosting::learn_one(const Instance& x) {
    check_instance(schema_, x);
    last_lambdas_.assign(members_.size(), 0.0);
    double lambda_d = 1.0;
    for (std::size_t m = 0; m < members_.size(); ++m) {
        last_lambdas_[m] = lambda_d;
        dispatched_ += lambda_d;
        const auto k = poisson_override_ ? poisson_override_(lambda_d) : poisson_draw(lambda_d, rng_);
        for (std::uint32_t i = 0; i < k; ++i) members_[m].learn_one(x);

        auto& s = states_[m];
        if (members_[m].predict(x.features).class_index == x.label) {
            s.lambda_sc += lambda_d;
            lambda_d *= (s.lambda_sc + s.lambda_sw) / (2.0 * s.lambda_sc);
        } else {
            s.lambda_sw += lambda_d;
            lambda_d *= (s.lambda_sc + s.lambda_sw) / (2.0 * s.lambda_sw);
        }
    }
}

Prediction OzaBoosting::predict(std::span<const double> features) const {
    std::vector<double> totals(schema_.num_classes, 0.0);
    for (std::size_t m = 0; m < members_.size(); ++m)
        totals[members_[m].predict(features).class_index] += oza_boost_vote_weight(states_[m]);
    return weighted_vote(totals);
}

// ---------------------------------------------------------------------------

RandomForest::RandomForest(Schema schema, EnsembleParams params, CartParams base)
    : schema_(std::move(schema)), params_(params), base_(base) {
    schema_.validate();
    params_.validate();
    base_.validate();
}

void RandomForest::fit(std::span<const Instance> data) {
    if (data.empty()) throw ContractError("random_forest: cannot fit on empty data");
    const std::size_t n = data.size();
    const auto default_k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(schema_.num_features))));

    std::vector<CartTree> trees;
    trees.reserve(params_.size);
    for (std::size_t t = 0; t < params_.size; ++t) {
        CartParams p = base_;
        p.seed = member_seed(params_.seed, t);
        p.feature_subsample = subsample_override_ ? *subsample_override_ : std::optional<std::size_t>(default_k);
        trees.emplace_back(schema_, p);
    }

    auto fit_member = [&](std::size_t t) {
        std::vector<std::size_t> rows(n);
        if (bootstrap_) {
            Rng rng(member_seed(params_.seed ^ 0xb007ULL, t));
            for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        trees[t].fit_rows(data, {}, std::move(rows));
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (parallel_ && hw > 1 && params_.size > 1) {
        std::vector<std::thread> workers;
        const std::size_t nthreads = std::min<std::size_t>(hw, params_.size);
        for (std::size_t w = 0; w < nthreads; ++w)
            workers.emplace_back([&, w] {
                for (std::size_t t = w; t < params_.size; t += nthreads) fit_member(t);
            });
        for (auto& th : workers) th.join();
    } else {
        for (std::size_t t = 0; t < params_.size; ++t) fit_member(t);
    }
    trees_ = std::move(trees);
}

Prediction RandomForest::predict(std::span<const double> features) const {
    if (trees_.empty()) throw ContractError("random_forest: predict before fit");
    std::vector<ClassIndex> votes;
    votes.reserve(trees_.size());
    for (const auto& t : trees_) votes.push_back(t.predict(features).class_index);
    return majority_vote(votes, schema_.num_classes);
}

// ---------------------------------------------------------------------------

double adaboost_vote_weight(double weighted_error) {
    const double beta = weighted_error / (1.0 - weighted_error);
    return std::log(1.0 / beta);
}

AdaBoostM1::AdaBoostM1(Schema schema, EnsembleParams params, std::size_t base_depth)
    : schema_(std::move(schema)), params_(params), base_depth_(base_depth) {
    schema_.validate();
    params_.validate();
}

void AdaBoostM1::reset() {
    members_.clear();
    vote_weights_.clear();
    errors_.clear();
    weight_sums_.clear();
}

void AdaBoostM1::fit(std::span<const Instance> data) {
    if (data.empty()) throw ContractError("adaboost_m1: cannot fit on empty data");
    reset();
    const std::size_t n = data.size();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));

    for (std::size_t round = 0; round < params_.size; ++round) {
        CartParams p;
        p.max_depth = base_depth_;
        p.seed = member_seed(params_.seed, round);
        CartTree tree(schema_, p);
        tree.fit_weighted(data, w);

        std::vector<bool> correct(n);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            correct[i] = tree.predict(data[i].features).class_index == data[i].label;
            if (!correct[i]) err += w[i];
        }
        errors_.push_back(err);

        if (err >= 0.5) {
            if (round == 0) {
                CartParams stump;
                stump.max_depth = 0;
                CartTree majority(schema_, stump);
                majority.fit_weighted(data, w);
                members_.push_back(std::move(majority));
                vote_weights_.push_back(1.0);
                weight_sums_.push_back(std::accumulate(w.begin(), w.end(), 0.0));
            }
            break;
        }
        if (err <= 0.0) {
            members_.push_back(std::move(tree));
            vote_weights_.push_back(kMaxVoteWeight);
            weight_sums_.push_back(std::accumulate(w.begin(), w.end(), 0.0));
            break;
        }

        const double beta = err / (1.0 - err);
        for (std::size_t i = 0; i < n; ++i)
            if (correct[i]) w[i] *= beta;
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        for (auto& wi : w) wi /= total;

        members_.push_back(std::move(tree));
        vote_weights_.push_back(adaboost_vote_weight(err));
        weight_sums_.push_back(std::accumulate(w.begin(), w.end(), 0.0));
    }
}

Prediction AdaBoostM1::predict(std::span<const double> features) const {
    if (members_.empty()) throw ContractError("adaboost_m1: predict before fit");
    std::vector<double> totals(schema_.num_classes, 0.0);
    for (std::size_t m = 0; m < members_.size(); ++m)
        totals[members_[m].predict(features).class_index] += vote_weights_[m];
    return weighted_vote(totals);
}

} // namespace lteval
