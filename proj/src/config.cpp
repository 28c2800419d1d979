#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "lteval/error.hpp"
#include "lteval/experiment.hpp"

namespace lteval {

namespace {

class Reader {
public:
    explicit Reader(std::string origin) : origin_(std::move(origin)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& msg) const {
        std::string where = origin_;
        if (node.IsDefined() && node.Mark().line >= 0) where += ":" + std::to_string(node.Mark().line + 1);
        throw ConfigError(where + ": " + field + ": " + msg);
    }

    void check_keys(const YAML::Node& map, const std::string& section, const std::set<std::string>& allowed) const {
        if (!map.IsDefined() || map.IsNull()) return;
        if (!map.IsMap()) fail(map, section, "expected a mapping");
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.contains(key))
                fail(kv.first, section.empty() ? key : section + "." + key, "unknown key");
        }
    }

    std::string text(const YAML::Node& node, const std::string& field) const {
        if (!node.IsScalar()) fail(node, field, "expected a scalar value");
        return node.Scalar();
    }

    std::uint64_t uint(const YAML::Node& node, const std::string& field) const {
        const auto s = text(node, field);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
        // Accept integral reals such as 1e5.
        double d = 0.0;
        const auto [p2, e2] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (e2 == std::errc{} && p2 == s.data() + s.size() && d >= 0.0 && d == std::floor(d) && d < 1.8e19)
            return static_cast<std::uint64_t>(d);
        fail(node, field, "expected a non-negative integer, got '" + s + "'");
    }

    double real(const YAML::Node& node, const std::string& field) const {
        const auto s = text(node, field);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
            fail(node, field, "expected a real number, got '" + s + "'");
        return v;
    }

    bool boolean(const YAML::Node& node, const std::string& field) const {
        const auto s = text(node, field);
        if (s == "true" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "no" || s == "off") return false;
        fail(node, field, "expected true or false, got '" + s + "'");
    }

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
};

std::vector<std::string> split_key(const std::string& key) {
    std::vector<std::string> parts;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    return parts;
}

void set_path(YAML::Node root, const std::string& key, const std::string& value) {
    const auto parts = split_key(key);
    if (parts.empty()) throw ConfigError("override: empty key");
    YAML::Node node = root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node child = node[parts[i]];
        if (!child.IsDefined() || child.IsNull()) node[parts[i]] = YAML::Node(YAML::NodeType::Map);
        node.reset(node[parts[i]]);
    }
    node[parts.back()] = YAML::Load(value);
}

std::string node_text(const YAML::Node& node) {
    if (node.IsScalar()) return node.Scalar();
    YAML::Emitter em;
    em << YAML::Flow << node;
    return em.c_str();
}

std::string dataset_id(const DatasetSpec& d) {
    return d.kind == "csv" ? d.path.stem().string() : d.kind;
}

void sanitize(std::string& s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
}

} // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin,
                              const std::vector<Override>& overrides) {
    const Reader r(origin);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg);
    }
    if (!root.IsMap()) throw ConfigError(origin + ": config must be a mapping");
    if (root["manifest_version"]) {
        if (!root["config"] || !root["config"].IsMap()) r.fail(root, "config", "manifest has no config section");
        root = YAML::Clone(root["config"]);
    }
    for (const auto& [key, value] : overrides) {
        try {
            set_path(root, key, value);
        } catch (const YAML::Exception& e) {
            throw ConfigError("override " + key + "=" + value + ": " + e.msg);
        }
    }

    ExperimentConfig cfg;
    cfg.source = text;
    cfg.origin = origin;
    cfg.overrides = overrides;

    r.check_keys(root, "", {"seed", "run_id", "output_dir", "dataset", "model", "protocol", "meter", "carbon", "grid"});
    if (auto n = root["seed"]) cfg.seed = r.uint(n, "seed");

    // dataset
    const auto ds = root["dataset"];
    if (!ds || !ds.IsMap()) r.fail(root, "dataset", "missing dataset section");
    r.check_keys(ds, "dataset", {"kind", "path", "label_column", "shuffle", "noise_features", "limit", "seed"});
    if (!ds["kind"]) r.fail(ds, "dataset.kind", "missing");
    cfg.dataset.kind = r.text(ds["kind"], "dataset.kind");
    cfg.dataset.seed = ds["seed"] ? r.uint(ds["seed"], "dataset.seed") : cfg.seed;
    if (auto n = ds["limit"]) {
        cfg.dataset.limit = r.uint(n, "dataset.limit");
        if (*cfg.dataset.limit < 1) r.fail(n, "dataset.limit", "must be >= 1");
    }
    if (cfg.dataset.kind == "waveform40") {
        if (auto n = ds["noise_features"]) cfg.dataset.noise_features = r.uint(n, "dataset.noise_features");
        for (const char* k : {"path", "label_column", "shuffle"})
            if (ds[k]) r.fail(ds[k], std::string("dataset.") + k, "not valid for waveform40");
    } else if (cfg.dataset.kind == "csv") {
        if (!ds["path"]) r.fail(ds, "dataset.path", "missing (required for csv)");
        std::filesystem::path p = r.text(ds["path"], "dataset.path");
        if (p.is_relative() && origin.find('<') == std::string::npos) {
            const auto base = std::filesystem::path(origin).parent_path();
            if (!base.empty()) p = base / p;
        }
        cfg.dataset.path = std::filesystem::absolute(p).lexically_normal();
        if (auto n = ds["label_column"]) {
            const auto s = r.text(n, "dataset.label_column");
            std::size_t idx = 0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), idx);
            if (ec == std::errc{} && ptr == s.data() + s.size())
                cfg.dataset.label_column = idx;
            else
                cfg.dataset.label_column = s;
        }
        if (auto n = ds["shuffle"]) cfg.dataset.shuffle = r.boolean(n, "dataset.shuffle");
        if (ds["noise_features"]) r.fail(ds["noise_features"], "dataset.noise_features", "only valid for waveform40");
    } else {
        r.fail(ds["kind"], "dataset.kind", "expected 'waveform40' or 'csv', got '" + cfg.dataset.kind + "'");
    }

    // model
    const auto md = root["model"];
    if (!md || !md.IsMap()) r.fail(root, "model", "missing model section");
    r.check_keys(md, "model", {"id", "params", "seed"});
    if (!md["id"]) r.fail(md, "model.id", "missing");
    cfg.model.id = r.text(md["id"], "model.id");
    cfg.model_seed = md["seed"] ? r.uint(md["seed"], "model.seed") : cfg.seed;
    Paradigm paradigm;
    try {
        paradigm = model_paradigm(cfg.model.id);
    } catch (const ConfigError&) {
        std::string known;
        for (const auto& id : known_model_ids()) known += (known.empty() ? "" : ", ") + id;
        r.fail(md["id"], "model.id", "unknown model '" + cfg.model.id + "' (known: " + known + ")");
    }
    if (auto params = md["params"]) {
        if (!params.IsMap() && !params.IsNull()) r.fail(params, "model.params", "expected a mapping");
        const auto names = model_param_names(cfg.model.id);
        for (const auto& kv : params) {
            const auto key = kv.first.as<std::string>();
            if (std::find(names.begin(), names.end(), key) == names.end())
                r.fail(kv.first, "model.params." + key, "unknown parameter for " + cfg.model.id);
            std::string value;
            if (kv.second.IsSequence()) {
                for (const auto& item : kv.second)
                    value += (value.empty() ? "" : ",") + r.text(item, "model.params." + key);
            } else {
                value = r.text(kv.second, "model.params." + key);
            }
            cfg.model.params[key] = value;
        }
    }

    // protocol
    const auto pr = root["protocol"];
    if (!pr || !pr.IsMap()) r.fail(root, "protocol", "missing protocol section");
    r.check_keys(pr, "protocol", {"mode", "n0", "lambda", "window_w", "max_instances"});
    if (!pr["mode"]) r.fail(pr, "protocol.mode", "missing");
    const auto mode = r.text(pr["mode"], "protocol.mode");
    if (mode == "batch")
        cfg.mode = ProtocolMode::batch;
    else if (mode == "streaming")
        cfg.mode = ProtocolMode::streaming;
    else
        r.fail(pr["mode"], "protocol.mode", "expected 'batch' or 'streaming', got '" + mode + "'");
    if (cfg.mode == ProtocolMode::batch && paradigm == Paradigm::streaming)
        r.fail(pr["mode"], "protocol.mode", "model '" + cfg.model.id + "' has no batch fit");
    if (cfg.mode == ProtocolMode::streaming && paradigm == Paradigm::batch)
        r.fail(pr["mode"], "protocol.mode", "model '" + cfg.model.id + "' has no incremental learn_one");
    if (auto n = pr["n0"]) {
        cfg.protocol.n0 = r.uint(n, "protocol.n0");
        if (cfg.protocol.n0 < 1) r.fail(n, "protocol.n0", "must be >= 1");
    }
    if (cfg.mode == ProtocolMode::batch && cfg.model.id == "mlp_batch" && cfg.protocol.n0 < 10)
        r.fail(pr["n0"] ? pr["n0"] : pr, "protocol.n0", "mlp_batch needs at least 10 instances per fit");
    if (auto n = pr["lambda"]) {
        cfg.protocol.lambda = r.real(n, "protocol.lambda");
        if (!(cfg.protocol.lambda > 1.0))
            r.fail(n, "protocol.lambda", "must be > 1 so the checkpoint schedule grows");
    }
    if (auto n = pr["window_w"]) {
        cfg.protocol.window_w = r.uint(n, "protocol.window_w");
        if (cfg.protocol.window_w < 1) r.fail(n, "protocol.window_w", "must be >= 1");
    }
    if (auto n = pr["max_instances"]) {
        cfg.protocol.max_instances = r.uint(n, "protocol.max_instances");
        if (*cfg.protocol.max_instances < 1) r.fail(n, "protocol.max_instances", "must be >= 1");
    }
    cfg.protocol.seed = cfg.seed;

    // meter
    if (const auto mt = root["meter"]) {
        r.check_keys(mt, "meter", {"kind", "watts", "joules_per_train_instance", "joules_per_predict"});
        if (auto n = mt["kind"]) cfg.meter.kind = r.text(n, "meter.kind");
        if (cfg.meter.kind == "cpu_time") {
            if (auto n = mt["watts"]) cfg.meter.watts = r.real(n, "meter.watts");
            if (!(cfg.meter.watts > 0.0)) r.fail(mt["watts"], "meter.watts", "must be > 0");
            for (const char* k : {"joules_per_train_instance", "joules_per_predict"})
                if (mt[k]) r.fail(mt[k], std::string("meter.") + k, "only valid for the deterministic meter");
        } else if (cfg.meter.kind == "deterministic") {
            cfg.meter.table.joules_per_train_instance = 1.0;
            if (auto n = mt["joules_per_train_instance"])
                cfg.meter.table.joules_per_train_instance = r.real(n, "meter.joules_per_train_instance");
            if (auto n = mt["joules_per_predict"])
                cfg.meter.table.joules_per_predict = r.real(n, "meter.joules_per_predict");
            if (cfg.meter.table.joules_per_train_instance < 0.0 || cfg.meter.table.joules_per_predict < 0.0)
                r.fail(mt, "meter", "cost table entries must be >= 0");
            if (mt["watts"]) r.fail(mt["watts"], "meter.watts", "only valid for the cpu_time meter");
        } else {
            r.fail(mt["kind"], "meter.kind", "expected 'cpu_time' or 'deterministic', got '" + cfg.meter.kind + "'");
        }
    }
    cfg.protocol.record_wall_time = cfg.meter.kind != "deterministic";

    // carbon
    if (const auto cb = root["carbon"]) {
        r.check_keys(cb, "carbon", {"intensity", "region"});
        if (auto n = cb["intensity"]) {
            cfg.carbon.intensity_g_per_kwh = r.real(n, "carbon.intensity");
            if (!(cfg.carbon.intensity_g_per_kwh > 0.0)) r.fail(n, "carbon.intensity", "must be > 0");
        }
        if (auto n = cb["region"]) cfg.carbon.region_label = r.text(n, "carbon.region");
    }

    if (auto n = root["output_dir"]) cfg.output_dir = r.text(n, "output_dir");

    if (auto n = root["run_id"]) {
        cfg.run_id = r.text(n, "run_id");
    } else {
        cfg.run_id = cfg.model.id + "-" + to_string(cfg.mode) + "-" + dataset_id(cfg.dataset) + "-s" +
                     std::to_string(cfg.seed);
    }
    sanitize(cfg.run_id);

    // grid
    if (const auto g = root["grid"]) {
        if (!g.IsMap()) r.fail(g, "grid", "expected a mapping of dotted keys to value lists");
        for (const auto& kv : g) {
            GridAxis axis;
            axis.key = kv.first.as<std::string>();
            if (axis.key == "grid" || axis.key.rfind("grid.", 0) == 0) r.fail(kv.first, "grid", "cannot sweep the grid");
            if (!kv.second.IsSequence() || kv.second.size() == 0)
                r.fail(kv.second, "grid." + axis.key, "expected a non-empty list");
            for (const auto& v : kv.second) axis.values.push_back(node_text(v));
            cfg.grid.push_back(std::move(axis));
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<Override>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string(), overrides);
}

ExperimentConfig with_overrides(const ExperimentConfig& cfg, const std::vector<Override>& more) {
    auto all = cfg.overrides;
    all.insert(all.end(), more.begin(), more.end());
    return parse_config(cfg.source, cfg.origin, all);
}

std::vector<GridCell> expand_grid(const ExperimentConfig& cfg) {
    std::vector<GridCell> cells;
    std::vector<std::size_t> pos(cfg.grid.size(), 0);
    const std::string base_id = cfg.run_id;
    while (true) {
        GridCell cell;
        cell.index = cells.size();
        for (std::size_t a = 0; a < cfg.grid.size(); ++a)
            cell.assignments.emplace_back(cfg.grid[a].key, cfg.grid[a].values[pos[a]]);
        cell.config = with_overrides(cfg, cell.assignments);
        cell.config.grid.clear();
        if (!cfg.grid.empty()) {
            std::string tag;
            for (const auto& [k, v] : cell.assignments) tag += (tag.empty() ? "" : ";") + k + "=" + v;
            // Keep run ids distinct even when cells repeat.
            cell.config.run_id = cell.config.run_id + "[" + tag + "]#" + std::to_string(cell.index);
            sanitize(cell.config.run_id);
        }
        cells.push_back(std::move(cell));

        std::size_t a = cfg.grid.size();
        while (a > 0) {
            --a;
            if (++pos[a] < cfg.grid[a].values.size()) break;
            pos[a] = 0;
            if (a == 0) return cells;
        }
        if (cfg.grid.empty()) return cells;
    }
}

StreamPtr make_stream(const ExperimentConfig& cfg) {
    const auto& d = cfg.dataset;
    if (d.kind == "waveform40") {
        WaveformConfig wc;
        wc.seed = d.seed;
        wc.noise_features = d.noise_features;
        wc.limit = d.limit;
        return waveform40(wc);
    }
    CsvOptions opts;
    opts.path = d.path;
    opts.label_column = d.label_column;
    opts.limit = d.limit;
    opts.shuffle = d.shuffle;
    opts.shuffle_seed = d.seed;
    return std::make_unique<CsvStream>(std::move(opts));
}

std::unique_ptr<EnergyMeter> make_meter(const MeterSpec& spec) {
    if (spec.kind == "deterministic") return deterministic_meter(spec.table);
    return cpu_time_meter(spec.watts);
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg,
                                         const std::optional<std::filesystem::path>& override_dir) {
    if (override_dir) return *override_dir;
    std::filesystem::path root = ".";
    if (const char* env = std::getenv(kOutputRootEnv); env && *env) root = env;
    if (cfg.output_dir) return cfg.output_dir->is_absolute() ? *cfg.output_dir : root / *cfg.output_dir;
    std::string leaf = cfg.run_id;
    std::replace_if(leaf.begin(), leaf.end(), [](char c) { return c == '/' || c == '\\' || c == ' '; }, '_');
    return root / leaf;
}

} // namespace lteval
