#include "lteval/lteval.h"

#include <exception>
#include <new>
#include <string>

#include "lteval/error.hpp"
#include "lteval/experiment.hpp"

struct lteval_experiment {
    lteval::ExperimentConfig config;
    std::optional<std::filesystem::path> out_dir;
    std::string last_dir;
    std::vector<lteval::Checkpoint> checkpoints;
};

namespace {

thread_local std::string g_last_error;

lteval_status fail(lteval_status status, const std::string& msg) {
    g_last_error = msg;
    return status;
}

template <class F>
lteval_status guarded(F&& body) {
    try {
        g_last_error.clear();
        return body();
    } catch (const lteval::ConfigError& e) {
        return fail(LTEVAL_ERR_CONFIG, e.what());
    } catch (const std::bad_alloc&) {
        return fail(LTEVAL_ERR_RUNTIME, "out of memory");
    } catch (const std::exception& e) {
        return fail(LTEVAL_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(LTEVAL_ERR_RUNTIME, "unknown error");
    }
}

} // namespace

extern "C" {

const char* lteval_version(void) { return lteval::kHarnessVersion; }

const char* lteval_last_error(void) { return g_last_error.c_str(); }

lteval_status lteval_experiment_open(const char* config_path, lteval_experiment** out) {
    if (!config_path || !out) return fail(LTEVAL_ERR_INVALID_ARG, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto exp = std::make_unique<lteval_experiment>();
        exp->config = lteval::load_config(config_path);
        *out = exp.release();
        return LTEVAL_OK;
    });
}

lteval_status lteval_experiment_open_text(const char* config_text, const char* origin, lteval_experiment** out) {
    if (!config_text || !out) return fail(LTEVAL_ERR_INVALID_ARG, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto exp = std::make_unique<lteval_experiment>();
        exp->config = lteval::parse_config(config_text, origin ? origin : "<text>");
        *out = exp.release();
        return LTEVAL_OK;
    });
}

void lteval_experiment_close(lteval_experiment* exp) { delete exp; }

lteval_status lteval_experiment_set_seed(lteval_experiment* exp, uint64_t seed) {
    if (!exp) return fail(LTEVAL_ERR_INVALID_ARG, "null experiment");
    return guarded([&] {
        exp->config = lteval::with_overrides(exp->config, {{"seed", std::to_string(seed)}});
        return LTEVAL_OK;
    });
}

lteval_status lteval_experiment_set_output_dir(lteval_experiment* exp, const char* dir) {
    if (!exp) return fail(LTEVAL_ERR_INVALID_ARG, "null experiment");
    if (dir && *dir)
        exp->out_dir = std::filesystem::path(dir);
    else
        exp->out_dir.reset();
    return LTEVAL_OK;
}

int lteval_experiment_is_sweep(const lteval_experiment* exp) { return exp && !exp->config.grid.empty() ? 1 : 0; }

lteval_status lteval_experiment_run(lteval_experiment* exp) {
    if (!exp) return fail(LTEVAL_ERR_INVALID_ARG, "null experiment");
    return guarded([&] {
        if (!exp->config.grid.empty())
            return fail(LTEVAL_ERR_CONFIG, exp->config.origin + ": grid: config defines a grid; use sweep");
        const auto dir = lteval::resolve_output_dir(exp->config, exp->out_dir);
        exp->checkpoints.clear();
        exp->last_dir = dir.string();
        const auto outcome = lteval::run_experiment(exp->config, dir);
        if (outcome.result) exp->checkpoints = outcome.result->checkpoints;
        if (!outcome.ok()) return fail(LTEVAL_ERR_RUNTIME, outcome.error);
        return LTEVAL_OK;
    });
}

lteval_status lteval_experiment_sweep(lteval_experiment* exp, size_t* cells, size_t* failures) {
    if (!exp) return fail(LTEVAL_ERR_INVALID_ARG, "null experiment");
    return guarded([&] {
        if (exp->config.grid.empty())
            return fail(LTEVAL_ERR_CONFIG, exp->config.origin + ": grid: missing or empty");
        const auto root = lteval::resolve_output_dir(exp->config, exp->out_dir);
        exp->checkpoints.clear();
        exp->last_dir = root.string();
        const auto report = lteval::run_sweep(exp->config, root);
        if (cells) *cells = report.cells.size();
        const auto failed = report.failures();
        if (failures) *failures = failed;
        if (failed > 0)
            return fail(LTEVAL_ERR_PARTIAL, std::to_string(failed) + " of " + std::to_string(report.cells.size()) +
                                                " sweep cells failed; see " + (root / "index.csv").string());
        return LTEVAL_OK;
    });
}

const char* lteval_experiment_output_dir(const lteval_experiment* exp) { return exp ? exp->last_dir.c_str() : ""; }

size_t lteval_experiment_checkpoint_count(const lteval_experiment* exp) { return exp ? exp->checkpoints.size() : 0; }

lteval_status lteval_experiment_checkpoint(const lteval_experiment* exp, size_t index, lteval_checkpoint* out) {
    if (!exp || !out) return fail(LTEVAL_ERR_INVALID_ARG, "null argument");
    if (index >= exp->checkpoints.size()) return fail(LTEVAL_ERR_INVALID_ARG, "checkpoint index out of range");
    const auto& cp = exp->checkpoints[index];
    *out = lteval_checkpoint{};
    out->k = cp.k;
    out->t_k = cp.t_k;
    out->train_events = cp.train_events;
    out->cumulative_joules = cp.cumulative_joules;
    out->train_joules = cp.train_joules;
    out->predict_joules = cp.predict_joules;
    out->gco2e = cp.gco2e;
    out->has_accuracy = cp.metrics.accuracy.has_value();
    out->accuracy = cp.metrics.accuracy.value_or(0.0);
    out->has_kappa = cp.metrics.kappa.has_value();
    out->kappa = cp.metrics.kappa.value_or(0.0);
    out->has_macro_f1 = cp.metrics.macro_f1.has_value();
    out->macro_f1 = cp.metrics.macro_f1.value_or(0.0);
    out->support = cp.metrics.support;
    return LTEVAL_OK;
}

lteval_status lteval_plot(const char* const* dirs, size_t count, const char* out_path) {
    if (!dirs || count == 0 || !out_path) return fail(LTEVAL_ERR_INVALID_ARG, "plot needs result directories and an output path");
    return guarded([&] {
        std::vector<std::filesystem::path> paths;
        for (size_t i = 0; i < count; ++i) {
            if (!dirs[i]) return fail(LTEVAL_ERR_INVALID_ARG, "null directory");
            paths.emplace_back(dirs[i]);
        }
        lteval::plot_runs(paths, out_path);
        return LTEVAL_OK;
    });
}

} // extern "C"
