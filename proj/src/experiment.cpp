#include "lteval/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <mutex>

#include "json.hpp"
#include "lteval/error.hpp"

namespace lteval {

using nlohmann::ordered_json;

std::string format_real(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

namespace {

std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string{}; }

ordered_json config_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["seed"] = cfg.seed;
    j["run_id"] = cfg.run_id;

    ordered_json ds;
    ds["kind"] = cfg.dataset.kind;
    if (cfg.dataset.kind == "csv") {
        ds["path"] = cfg.dataset.path.string();
        if (const auto* name = std::get_if<std::string>(&cfg.dataset.label_column))
            ds["label_column"] = *name;
        else
            ds["label_column"] = std::get<std::size_t>(cfg.dataset.label_column);
        ds["shuffle"] = cfg.dataset.shuffle;
    } else {
        ds["noise_features"] = cfg.dataset.noise_features;
    }
    if (cfg.dataset.limit) ds["limit"] = *cfg.dataset.limit;
    ds["seed"] = cfg.dataset.seed;
    j["dataset"] = ds;

    ordered_json md;
    md["id"] = cfg.model.id;
    md["seed"] = cfg.model_seed;
    md["params"] = ordered_json::object();
    for (const auto& [k, v] : cfg.model.params) md["params"][k] = v;
    j["model"] = md;

    ordered_json pr;
    pr["mode"] = to_string(cfg.mode);
    pr["n0"] = cfg.protocol.n0;
    pr["lambda"] = cfg.protocol.lambda;
    pr["window_w"] = cfg.protocol.window_w;
    if (cfg.protocol.max_instances) pr["max_instances"] = *cfg.protocol.max_instances;
    j["protocol"] = pr;

    ordered_json mt;
    mt["kind"] = cfg.meter.kind;
    if (cfg.meter.kind == "deterministic") {
        mt["joules_per_train_instance"] = cfg.meter.table.joules_per_train_instance;
        mt["joules_per_predict"] = cfg.meter.table.joules_per_predict;
    } else {
        mt["watts"] = cfg.meter.watts;
    }
    j["meter"] = mt;

    j["carbon"] = {{"intensity", cfg.carbon.intensity_g_per_kwh}, {"region", cfg.carbon.region_label}};
    return j;
}

} // namespace

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

CheckpointCsvWriter::CheckpointCsvWriter(const std::filesystem::path& file, std::string run_id)
    : out_(file, std::ios::binary | std::ios::trunc), run_id_(std::move(run_id)) {
    if (!out_) throw std::runtime_error("cannot write " + file.string());
    bool first = true;
    for (const char* col : kCheckpointColumns) {
        out_ << (first ? "" : ",") << col;
        first = false;
    }
    out_ << '\n';
    out_.flush();
}

void CheckpointCsvWriter::write(const Checkpoint& cp) {
    const auto& m = cp.metrics;
    out_ << run_id_ << ',' << cp.k << ',' << cp.t_k << ',' << cp.train_events << ',' << format_real(cp.cumulative_joules)
         << ',' << format_real(cp.train_joules) << ',' << format_real(cp.predict_joules) << ','
         << format_real(cp.gco2e) << ',' << opt_real(m.accuracy) << ',' << opt_real(m.kappa) << ','
         << opt_real(m.macro_f1) << ',' << m.support << ',' << opt_real(cp.wall_seconds) << '\n';
    out_.flush();
}

void write_manifest(const std::filesystem::path& file, const ExperimentConfig& cfg, const Schema& schema,
                    const RunResult& result, const ManifestInfo& info) {
    ordered_json j;
    j["manifest_version"] = 1;
    j["harness"] = std::string("lteval ") + kHarnessVersion;
    j["run_id"] = info.run_id;
    j["status"] = info.status;
    j["error"] = info.error.empty() ? ordered_json(nullptr) : ordered_json(info.error);
    j["started_utc"] = info.started_utc;
    j["finished_utc"] = info.finished_utc;
    j["config"] = config_json(cfg);
    if (!info.grid_assignments.empty()) {
        ordered_json g = ordered_json::object();
        for (const auto& [k, v] : info.grid_assignments) g[k] = v;
        j["grid_cell"] = g;
    }
    j["meter"] = info.meter;
    j["schema"] = {{"num_features", schema.num_features},
                   {"num_classes", schema.num_classes},
                   {"feature_names", schema.feature_names}};
    if (!info.label_names.empty()) {
        ordered_json labels = ordered_json::array();
        for (std::size_t i = 0; i < info.label_names.size(); ++i)
            labels.push_back({{"index", i}, {"label", info.label_names[i]}});
        j["label_mapping"] = labels;
    }
    const auto& t = result.totals;
    j["totals"] = {{"instances", t.instances},       {"train_events", t.train_events},
                   {"joules", t.joules},             {"train_joules", t.train_joules},
                   {"predict_joules", t.predict_joules}, {"gco2e", t.gco2e},
                   {"wall_seconds", t.wall_seconds}, {"checkpoints", result.checkpoints.size()}};

    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

namespace {

struct PreparedRun {
    StreamPtr stream;
    std::unique_ptr<Model> model;
    std::unique_ptr<EnergyMeter> meter;
    std::vector<std::string> labels;
};

PreparedRun prepare(const ExperimentConfig& cfg) {
    PreparedRun p;
    p.stream = make_stream(cfg);
    if (const auto* csv = dynamic_cast<const CsvStream*>(p.stream.get())) p.labels = csv->label_names();
    p.model = make_model(cfg.model, p.stream->schema(), cfg.model_seed);
    p.meter = make_meter(cfg.meter);
    p.model->set_parallel_fit(p.meter->deterministic());
    return p;
}

} // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    auto prepared = prepare(cfg);
    std::filesystem::create_directories(out_dir);

    RunOutcome outcome;
    outcome.directory = out_dir;
    ManifestInfo info;
    info.run_id = cfg.run_id;
    info.meter = prepared.meter->describe();
    info.label_names = prepared.labels;
    info.started_utc = utc_now();

    CheckpointCsvWriter writer(out_dir / "checkpoints.csv", cfg.run_id);
    const auto sink = [&](const Checkpoint& cp) { writer.write(cp); };
    RunResult result;
    try {
        result = run_protocol(cfg.mode, *prepared.stream, *prepared.model, cfg.protocol, *prepared.meter, cfg.carbon,
                              sink);
        info.status = "ok";
    } catch (const RunAborted& e) {
        result = e.partial();
        info.status = "aborted";
        info.error = e.what();
        outcome.error = e.what();
    } catch (const std::exception& e) {
        info.status = "aborted";
        info.error = e.what();
        outcome.error = e.what();
    }
    outcome.result = result;
    info.finished_utc = utc_now();
    write_manifest(out_dir / "manifest.json", cfg, prepared.stream->schema(), result, info);
    return outcome;
}

std::size_t SweepReport::failures() const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.ok() ? 0 : 1;
    return n;
}

SweepReport run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_root, unsigned max_threads) {
    SweepReport report;
    report.root = out_root;
    report.cells = expand_grid(cfg);
    std::filesystem::create_directories(out_root);

    const std::size_t n = report.cells.size();
    report.outcomes.resize(n);
    std::vector<std::unique_ptr<CheckpointCsvWriter>> writers(n);
    std::vector<ManifestInfo> infos(n);
    std::vector<Schema> schemas(n);
    std::vector<std::vector<std::string>> labels(n);
    std::mutex mu;

    std::vector<SweepJob> jobs;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& cell = report.cells[i];
        char name[32];
        std::snprintf(name, sizeof name, "cell_%03zu", i);
        const auto dir = out_root / name;
        std::filesystem::create_directories(dir);
        report.outcomes[i].directory = dir;
        writers[i] = std::make_unique<CheckpointCsvWriter>(dir / "checkpoints.csv", cell.config.run_id);
        infos[i].run_id = cell.config.run_id;
        infos[i].grid_assignments = cell.assignments;

        SweepJob job;
        const ExperimentConfig* c = &cell.config;
        job.make_stream = [c, i, &infos, &schemas, &labels, &mu] {
            auto s = make_stream(*c);
            std::lock_guard lock(mu);
            infos[i].started_utc = utc_now();
            schemas[i] = s->schema();
            if (const auto* csv = dynamic_cast<const CsvStream*>(s.get())) labels[i] = csv->label_names();
            return s;
        };
        job.make_model = [c](const Schema& schema) { return make_model(c->model, schema, c->model_seed); };
        job.make_meter = [c, i, &infos] {
            auto m = make_meter(c->meter);
            infos[i].meter = m->describe();
            return m;
        };
        job.mode = c->mode;
        job.config = c->protocol;
        job.carbon = c->carbon;
        auto* w = writers[i].get();
        job.sink = [w](const Checkpoint& cp) { w->write(cp); };
        jobs.push_back(std::move(job));
    }

    const auto outcomes = sweep(jobs, max_threads);

    std::ofstream index(out_root / "index.csv", std::ios::binary | std::ios::trunc);
    index << "cell,directory,status,run_id,assignments,error\n";
    for (std::size_t i = 0; i < n; ++i) {
        auto& out = report.outcomes[i];
        auto& info = infos[i];
        RunResult result;
        if (outcomes[i].ok()) {
            result = *outcomes[i].result;
            out.result = result;
            info.status = "ok";
        } else {
            if (outcomes[i].partial) result = *outcomes[i].partial;
            out.error = outcomes[i].error.empty() ? "unknown error" : outcomes[i].error;
            info.status = "aborted";
            info.error = out.error;
        }
        if (info.started_utc.empty()) info.started_utc = utc_now();
        info.finished_utc = utc_now();
        info.label_names = labels[i];
        write_manifest(out.directory / "manifest.json", report.cells[i].config, schemas[i], result, info);

        std::string assignments;
        for (const auto& [k, v] : report.cells[i].assignments) assignments += (assignments.empty() ? "" : ";") + k + "=" + v;
        std::replace(assignments.begin(), assignments.end(), ',', ' ');
        std::string error = out.error;
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
        index << i << ',' << out.directory.filename().string() << ',' << (out.ok() ? "ok" : "failed") << ','
              << report.cells[i].config.run_id << ',' << assignments << ',' << error << '\n';
    }
    return report;
}

} // namespace lteval
