#include "lteval/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "lteval/ensembles.hpp"
#include "lteval/error.hpp"
#include "lteval/neural.hpp"
#include "lteval/trees.hpp"

namespace lteval {

MajorityBaseline::MajorityBaseline(Schema schema) : schema_(std::move(schema)) {
    schema_.validate();
    reset();
}

Prediction MajorityBaseline::predict(std::span<const double>) const { return fallback_predict(counts_); }

void MajorityBaseline::learn_one(const Instance& x) {
    check_instance(schema_, x);
    ++counts_[x.label];
}

void MajorityBaseline::fit(std::span<const Instance> data) {
    reset();
    for (const auto& x : data) learn_one(x);
}

void MajorityBaseline::reset() { counts_.assign(schema_.num_classes, 0); }

// ---------------------------------------------------------------------------

namespace {

class ParamReader {
public:
    ParamReader(const ModelSpec& spec, std::vector<std::string> allowed) : spec_(spec) {
        for (const auto& [key, value] : spec.params)
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                throw ConfigError("model." + spec.id + ": unknown parameter '" + key + "'");
    }

    template <class T>
    void read(const std::string& key, T& out) const {
        auto it = spec_.params.find(key);
        if (it == spec_.params.end()) return;
        out = parse<T>(key, it->second);
    }

    void read_optional(const std::string& key, std::optional<std::size_t>& out) const {
        auto it = spec_.params.find(key);
        if (it == spec_.params.end()) return;
        if (it->second == "none" || it->second == "null" || it->second.empty())
            out.reset();
        else
            out = parse<std::size_t>(key, it->second);
    }

    void read_list(const std::string& key, std::vector<std::size_t>& out) const {
        auto it = spec_.params.find(key);
        if (it == spec_.params.end()) return;
        out.clear();
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse<std::size_t>(key, item));
        if (out.empty()) throw ConfigError("model." + spec_.id + "." + key + ": expected a list of widths");
    }

private:
    template <class T>
    T parse(const std::string& key, std::string text) const {
        text.erase(std::remove_if(text.begin(), text.end(), [](char c) { return c == ' ' || c == '[' || c == ']'; }),
                   text.end());
        T value{};
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size())
            throw ConfigError("model." + spec_.id + "." + key + ": cannot parse '" + text + "'");
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(value)) throw ConfigError("model." + spec_.id + "." + key + ": must be finite");
        }
        return value;
    }

    const ModelSpec& spec_;
};

const std::vector<std::string> kCartKeys{"max_depth", "min_leaf", "feature_subsample"};
const std::vector<std::string> kHoeffdingKeys{"delta", "grace_period", "tie_tau", "split_candidates"};
const std::vector<std::string> kMlpKeys{"hidden",    "learning_rate", "batch_size",          "patience",
                                        "min_delta", "max_epochs",    "validation_fraction"};

std::vector<std::string> join(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

CartParams read_cart(const ParamReader& r, CartParams p) {
    r.read_optional("max_depth", p.max_depth);
    r.read("min_leaf", p.min_leaf);
    r.read_optional("feature_subsample", p.feature_subsample);
    return p;
}

HoeffdingParams read_hoeffding(const ParamReader& r) {
    HoeffdingParams p;
    r.read("delta", p.delta);
    r.read("grace_period", p.grace_period);
    r.read("tie_tau", p.tie_tau);
    r.read("split_candidates", p.split_candidates);
    return p;
}

MlpParams read_mlp(const ParamReader& r, std::uint64_t seed) {
    MlpParams p;
    p.seed = seed;
    r.read_list("hidden", p.hidden);
    r.read("learning_rate", p.learning_rate);
    r.read("batch_size", p.batch_size);
    r.read("patience", p.patience);
    r.read("min_delta", p.min_delta);
    r.read("max_epochs", p.max_epochs);
    r.read("validation_fraction", p.validation_fraction);
    return p;
}

EnsembleParams read_ensemble(const ParamReader& r, std::uint64_t seed) {
    EnsembleParams p;
    p.seed = seed;
    r.read("size", p.size);
    return p;
}

} // namespace

const std::vector<std::string>& known_model_ids() {
    static const std::vector<std::string> ids{"cart",           "random_forest", "adaboost_m1",
                                              "mlp_batch",      "hoeffding_tree", "oza_bagging",
                                              "oza_boosting",   "mlp_streaming",  "majority_baseline"};
    return ids;
}

Paradigm model_paradigm(const std::string& id) {
    if (id == "cart" || id == "random_forest" || id == "adaboost_m1" || id == "mlp_batch") return Paradigm::batch;
    if (id == "hoeffding_tree" || id == "oza_bagging" || id == "oza_boosting" || id == "mlp_streaming")
        return Paradigm::streaming;
    if (id == "majority_baseline") return Paradigm::both;
    throw ConfigError("model.id: unknown model '" + id + "'");
}

std::vector<std::string> model_param_names(const std::string& id) {
    if (id == "cart") return kCartKeys;
    if (id == "random_forest") return join({"size"}, kCartKeys);
    if (id == "adaboost_m1") return {"size", "base_depth"};
    if (id == "hoeffding_tree") return kHoeffdingKeys;
    if (id == "oza_bagging" || id == "oza_boosting") return join({"size"}, kHoeffdingKeys);
    if (id == "mlp_batch" || id == "mlp_streaming") return kMlpKeys;
    if (id == "majority_baseline") return {};
    throw ConfigError("model.id: unknown model '" + id + "'");
}

std::unique_ptr<Model> make_model(const ModelSpec& spec, const Schema& schema, std::uint64_t seed) {
    const ParamReader r(spec, model_param_names(spec.id));
    try {
        if (spec.id == "cart") {
            CartParams p;
            p.seed = seed;
            return std::make_unique<CartTree>(schema, read_cart(r, p));
        }
        if (spec.id == "random_forest") {
            CartParams p;
            p.seed = seed;
            return std::make_unique<RandomForest>(schema, read_ensemble(r, seed), read_cart(r, p));
        }
        if (spec.id == "adaboost_m1") {
            std::size_t depth = 3;
            r.read("base_depth", depth);
            return std::make_unique<AdaBoostM1>(schema, read_ensemble(r, seed), depth);
        }
        if (spec.id == "hoeffding_tree") return std::make_unique<HoeffdingTree>(schema, read_hoeffding(r));
        if (spec.id == "oza_bagging")
            return std::make_unique<OzaBagging>(schema, read_ensemble(r, seed), read_hoeffding(r));
        if (spec.id == "oza_boosting")
            return std::make_unique<OzaBoosting>(schema, read_ensemble(r, seed), read_hoeffding(r));
        if (spec.id == "mlp_batch") return std::make_unique<Mlp>(schema, read_mlp(r, seed), Paradigm::batch);
        if (spec.id == "mlp_streaming")
            return std::make_unique<Mlp>(schema, read_mlp(r, seed), Paradigm::streaming);
        if (spec.id == "majority_baseline") return std::make_unique<MajorityBaseline>(schema);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    throw ConfigError("model.id: unknown model '" + spec.id + "'");
}

} // namespace lteval
