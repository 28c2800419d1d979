#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lteval/energy.hpp"
#include "lteval/models.hpp"
#include "lteval/protocol.hpp"
#include "lteval/streams.hpp"

namespace lteval {

inline constexpr const char* kHarnessVersion = "1.0.0";
inline constexpr const char* kOutputRootEnv = "LTEVAL_OUTPUT_ROOT";

struct DatasetSpec {
    std::string kind;  // "waveform40" or "csv"
    std::filesystem::path path;
    std::variant<std::string, std::size_t> label_column = std::size_t{0};
    bool shuffle = false;
    std::size_t noise_features = 19;
    std::optional<std::uint64_t> limit;
    std::uint64_t seed = 1;  // generator / shuffle seed, defaults to the top-level seed
};

struct MeterSpec {
    std::string kind = "cpu_time";  // "cpu_time" or "deterministic"
    double watts = 45.0;
    CostTable table;
};

struct GridAxis {
    std::string key;                  // dotted path, e.g. "protocol.lambda"
    std::vector<std::string> values;  // YAML scalar text
};

using Override = std::pair<std::string, std::string>;

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string run_id;
    std::optional<std::filesystem::path> output_dir;
    DatasetSpec dataset;
    ModelSpec model;
    std::uint64_t model_seed = 1;
    ProtocolMode mode = ProtocolMode::streaming;
    ProtocolConfig protocol;
    MeterSpec meter;
    CarbonConfig carbon;
    std::vector<GridAxis> grid;

    // Source text and overrides, kept so grid cells can be re-derived.
    std::string source;
    std::string origin;
    std::vector<Override> overrides;
};

/// Parses a YAML experiment config. A manifest.json written by a previous run
/// is accepted too (its "config" section is used). Overrides are (dotted key,
/// YAML scalar) pairs applied before validation. Throws ConfigError naming
/// the field and line.
ExperimentConfig parse_config(const std::string& text, const std::string& origin,
                              const std::vector<Override>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<Override>& overrides = {});

/// Same config with one more override applied (re-validated).
ExperimentConfig with_overrides(const ExperimentConfig& cfg, const std::vector<Override>& more);

struct GridCell {
    std::size_t index = 0;
    std::vector<Override> assignments;
    ExperimentConfig config;
};

/// Cartesian product of the grid axes; first axis varies slowest.
std::vector<GridCell> expand_grid(const ExperimentConfig& cfg);

StreamPtr make_stream(const ExperimentConfig& cfg);
std::unique_ptr<EnergyMeter> make_meter(const MeterSpec& spec);

/// Output directory: explicit override, else config output_dir (relative
/// paths resolve against $LTEVAL_OUTPUT_ROOT when set), else
/// <root>/<run_id>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg,
                                         const std::optional<std::filesystem::path>& override_dir = std::nullopt);

// ---------------------------------------------------------------------------
// Reports

inline constexpr const char* kCheckpointColumns[] = {
    "run_id",       "k",        "t_k",      "train_events", "cumulative_joules", "train_joules", "predict_joules",
    "gco2e",        "accuracy", "kappa",    "macro_f1",     "support",           "wall_seconds"};

/// Reals with 9 significant digits.
std::string format_real(double value);

class CheckpointCsvWriter {
public:
    CheckpointCsvWriter(const std::filesystem::path& file, std::string run_id);
    void write(const Checkpoint& cp);

private:
    std::ofstream out_;
    std::string run_id_;
};

struct ManifestInfo {
    std::string run_id;
    std::string status;  // "ok" or "aborted"
    std::string error;
    std::string started_utc;
    std::string finished_utc;
    std::string meter;
    std::vector<std::string> label_names;
    std::vector<Override> grid_assignments;
};

/// Writes manifest.json with the resolved config, schema, label mapping and
/// run totals.
void write_manifest(const std::filesystem::path& file, const ExperimentConfig& cfg, const Schema& schema,
                    const RunResult& result, const ManifestInfo& info);

std::string utc_now();

// ---------------------------------------------------------------------------
// Commands

struct RunOutcome {
    std::filesystem::path directory;
    std::optional<RunResult> result;  // partial when the run aborted
    std::string error;
    bool ok() const { return error.empty(); }
};

/// Executes one configured run and writes checkpoints.csv and manifest.json.
/// Config and data errors throw before anything is written; a run that aborts
/// midway keeps its partial checkpoints and records the error in the manifest.
RunOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct SweepReport {
    std::filesystem::path root;
    std::vector<GridCell> cells;
    std::vector<RunOutcome> outcomes;
    std::size_t failures() const;
};

/// Runs every grid cell into <root>/cell_NNN and writes <root>/index.csv.
SweepReport run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_root,
                      unsigned max_threads = 0);

struct PlotOutputs {
    std::filesystem::path svg;
    std::filesystem::path csv;
};

/// Reads checkpoints.csv from every directory and writes the three trade-off
/// panels as an SVG plus a tidy CSV of every series.
PlotOutputs plot_runs(const std::vector<std::filesystem::path>& dirs, const std::filesystem::path& out_path);

/// Parsed checkpoints.csv, cells kept verbatim.
struct CheckpointTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};

CheckpointTable read_checkpoints(const std::filesystem::path& file);

} // namespace lteval
