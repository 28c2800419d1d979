#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lteval/core.hpp"
#include "lteval/rng.hpp"

namespace lteval {

/// A single-consumer source of instances with consecutive seq numbers.
class StreamSource {
public:
    virtual ~StreamSource() = default;

    virtual const Schema& schema() const = 0;
    virtual std::optional<Instance> next() = 0;
    virtual std::optional<std::uint64_t> total_hint() const { return std::nullopt; }
    virtual std::string id() const = 0;
};

using StreamPtr = std::unique_ptr<StreamSource>;

/// In-memory source, mostly for tests and for shuffled CSV data.
class VectorStream final : public StreamSource {
public:
    VectorStream(Schema schema, std::vector<Instance> data, std::string id = "memory");

    const Schema& schema() const override { return schema_; }
    std::optional<Instance> next() override;
    std::optional<std::uint64_t> total_hint() const override { return data_.size(); }
    std::string id() const override { return id_; }

private:
    Schema schema_;
    std::vector<Instance> data_;
    std::size_t pos_ = 0;
    std::string id_;
};

// ---------------------------------------------------------------------------
// CSV ingestion

struct CsvOptions {
    std::filesystem::path path;
    std::variant<std::string, std::size_t> label_column = std::size_t{0};
    std::optional<std::uint64_t> limit;
    bool shuffle = false;
    std::uint64_t shuffle_seed = 0;
};

class CsvStream final : public StreamSource {
public:
    // Validates the whole file up front so that data errors surface before a
    // run starts, then re-reads it lazily while streaming.
    explicit CsvStream(CsvOptions opts);

    const Schema& schema() const override { return schema_; }
    std::optional<Instance> next() override;
    std::optional<std::uint64_t> total_hint() const override { return rows_; }
    std::string id() const override;

    // Raw label strings in class-index order (first-seen order in the file).
    const std::vector<std::string>& label_names() const { return labels_; }
    std::size_t label_column_index() const { return label_col_; }

private:
    CsvOptions opts_;
    Schema schema_;
    std::vector<std::string> header_;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, ClassIndex> label_map_;
    std::size_t label_col_ = 0;
    std::uint64_t rows_ = 0;

    std::ifstream in_;
    std::uint64_t emitted_ = 0;
    std::uint64_t line_no_ = 0;
    std::unique_ptr<VectorStream> shuffled_;
};

std::unique_ptr<CsvStream> load_csv(const std::filesystem::path& path,
                                    std::variant<std::string, std::size_t> label_column,
                                    std::optional<std::uint64_t> limit = std::nullopt);

// ---------------------------------------------------------------------------
// Waveform-40 generator

struct WaveformConfig {
    std::uint64_t seed = 1;
    std::size_t noise_features = 19;
    std::optional<std::uint64_t> limit;
};

inline constexpr std::size_t kWaveformSignalFeatures = 21;

/// Triangular base wave value, `wave` in {0,1,2}, `i` the 0-based feature index.
double waveform_base(std::size_t wave, std::size_t i);

/// Pair of base waves mixed for each class.
inline constexpr std::size_t kWaveformPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};

class WaveformStream final : public StreamSource {
public:
    explicit WaveformStream(WaveformConfig cfg);

    const Schema& schema() const override { return schema_; }
    std::optional<Instance> next() override;
    std::optional<std::uint64_t> total_hint() const override { return cfg_.limit; }
    std::string id() const override;

private:
    WaveformConfig cfg_;
    Schema schema_;
    Rng rng_;
    std::uint64_t emitted_ = 0;
};

StreamPtr waveform40(WaveformConfig cfg);

// ---------------------------------------------------------------------------

class TakeStream final : public StreamSource {
public:
    TakeStream(StreamPtr inner, std::uint64_t count);

    const Schema& schema() const override { return inner_->schema(); }
    std::optional<Instance> next() override;
    std::optional<std::uint64_t> total_hint() const override;
    std::string id() const override { return inner_->id(); }

private:
    StreamPtr inner_;
    std::uint64_t count_;
    std::uint64_t emitted_ = 0;
};

StreamPtr take(StreamPtr source, std::uint64_t count);

} // namespace lteval
