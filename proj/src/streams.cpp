#include "lteval/streams.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string_view>
#include <unordered_map>

#include "lteval/error.hpp"

namespace lteval {

VectorStream::VectorStream(Schema schema, std::vector<Instance> data, std::string id)
    : schema_(std::move(schema)), data_(std::move(data)), id_(std::move(id)) {
    schema_.validate();
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i].seq = i;
        check_instance(schema_, data_[i]);
    }
}

std::optional<Instance> VectorStream::next() {
    if (pos_ >= data_.size()) return std::nullopt;
    return data_[pos_++];
}

// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

bool blank(std::string_view line) { return trim(line).empty(); }

std::optional<double> parse_real(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

struct ParsedRow {
    std::vector<double> features;
    std::string_view label;
};

ParsedRow parse_row(const std::vector<std::string_view>& cells, const std::vector<std::string>& header,
                    std::size_t label_col, std::uint64_t line_no) {
    if (cells.size() != header.size())
        throw DataError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " cells, got " + std::to_string(cells.size()));
    ParsedRow row;
    row.features.reserve(cells.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (c == label_col) {
            row.label = cells[c];
            continue;
        }
        auto v = parse_real(cells[c]);
        if (!v)
            throw DataError("csv line " + std::to_string(line_no) + ", column '" + header[c] +
                            "': cannot parse '" + std::string(cells[c]) + "' as a real number");
        row.features.push_back(*v);
    }
    return row;
}

} // namespace

CsvStream::CsvStream(CsvOptions opts) : opts_(std::move(opts)) {
    std::ifstream in(opts_.path);
    if (!in) throw DataError("cannot open csv file " + opts_.path.string());

    std::string line;
    std::uint64_t line_no = 0;
    auto& header = header_;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        for (auto cell : split_row(line)) header.emplace_back(cell);
        break;
    }
    if (header.empty()) throw DataError("csv file " + opts_.path.string() + " has no header row");

    if (const auto* name = std::get_if<std::string>(&opts_.label_column)) {
        auto it = std::find(header.begin(), header.end(), *name);
        if (it == header.end()) throw DataError("label column '" + *name + "' not found in csv header");
        label_col_ = static_cast<std::size_t>(it - header.begin());
    } else {
        label_col_ = std::get<std::size_t>(opts_.label_column);
        if (label_col_ >= header.size())
            throw DataError("label column index " + std::to_string(label_col_) + " out of range (header has " +
                            std::to_string(header.size()) + " columns)");
    }
    if (header.size() < 2) throw DataError("csv needs at least one feature column besides the label");

    auto& label_map = label_map_;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        if (opts_.limit && rows_ >= *opts_.limit) break;
        const auto row = parse_row(split_row(line), header, label_col_, line_no);
        std::string label(row.label);
        if (!label_map.contains(label)) {
            label_map.emplace(label, static_cast<ClassIndex>(labels_.size()));
            labels_.push_back(label);
        }
        ++rows_;
    }

    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_col_) schema_.feature_names.push_back(header[c]);
    schema_.num_features = header.size() - 1;
    // A stream that shows a single label still needs a binary output space.
    schema_.num_classes = std::max<std::size_t>(2, labels_.size());
    schema_.validate();

    // Second pass, either lazily (file order) or fully loaded and shuffled.
    auto reopen = [&] {
        in_.open(opts_.path);
        if (!in_) throw DataError("cannot reopen csv file " + opts_.path.string());
        line_no_ = 0;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!blank(line)) break;
        }
    };
    reopen();
    if (opts_.shuffle) {
        std::vector<Instance> all;
        all.reserve(rows_);
        while (auto x = next()) all.push_back(std::move(*x));
        Rng rng(opts_.shuffle_seed);
        for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[rng.below(i)]);
        shuffled_ = std::make_unique<VectorStream>(schema_, std::move(all), id());
        in_.close();
    }
}

std::optional<Instance> CsvStream::next() {
    if (shuffled_) return shuffled_->next();
    if (emitted_ >= rows_ || !in_.is_open()) return std::nullopt;
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (blank(line)) continue;
        auto row = parse_row(split_row(line), header_, label_col_, line_no_);
        Instance x;
        x.features = std::move(row.features);
        x.label = label_map_.at(std::string(row.label));
        x.seq = emitted_++;
        return x;
    }
    return std::nullopt;
}

std::string CsvStream::id() const { return "csv:" + opts_.path.filename().string(); }

std::unique_ptr<CsvStream> load_csv(const std::filesystem::path& path,
                                    std::variant<std::string, std::size_t> label_column,
                                    std::optional<std::uint64_t> limit) {
    CsvOptions opts;
    opts.path = path;
    opts.label_column = std::move(label_column);
    opts.limit = limit;
    return std::make_unique<CsvStream>(std::move(opts));
}

// ---------------------------------------------------------------------------

double waveform_base(std::size_t wave, std::size_t i) {
    // Peaks (1-based) at 7, 15 and 11 with height 6, ramping to 0 over 6 steps.
    static constexpr double kPeak[3] = {7.0, 15.0, 11.0};
    const double pos = static_cast<double>(i + 1);
    return std::max(0.0, 6.0 - std::abs(pos - kPeak[wave]));
}

WaveformStream::WaveformStream(WaveformConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
    schema_.num_features = kWaveformSignalFeatures + cfg_.noise_features;
    schema_.num_classes = 3;
    for (std::size_t i = 0; i < schema_.num_features; ++i)
        schema_.feature_names.push_back((i < kWaveformSignalFeatures ? "x" : "noise") + std::to_string(i + 1));
}

std::optional<Instance> WaveformStream::next() {
    if (cfg_.limit && emitted_ >= *cfg_.limit) return std::nullopt;
    Instance x;
    x.seq = emitted_++;
    x.label = static_cast<ClassIndex>(rng_.below(3));
    const double u = rng_.uniform();
    const auto [a, b] = kWaveformPairs[x.label];
    x.features.resize(schema_.num_features);
    for (std::size_t i = 0; i < kWaveformSignalFeatures; ++i)
        x.features[i] = u * waveform_base(a, i) + (1.0 - u) * waveform_base(b, i) + rng_.gaussian();
    for (std::size_t i = kWaveformSignalFeatures; i < schema_.num_features; ++i) x.features[i] = rng_.gaussian();
    return x;
}

std::string WaveformStream::id() const { return "waveform40"; }

StreamPtr waveform40(WaveformConfig cfg) { return std::make_unique<WaveformStream>(cfg); }

// ---------------------------------------------------------------------------

TakeStream::TakeStream(StreamPtr inner, std::uint64_t count) : inner_(std::move(inner)), count_(count) {
    if (count_ < 1) throw ContractError("take: count must be >= 1");
}

std::optional<Instance> TakeStream::next() {
    if (emitted_ >= count_) return std::nullopt;
    auto x = inner_->next();
    if (x) ++emitted_;
    return x;
}

std::optional<std::uint64_t> TakeStream::total_hint() const {
    auto inner = inner_->total_hint();
    return inner ? std::min(*inner, count_) : count_;
}

StreamPtr take(StreamPtr source, std::uint64_t count) {
    return std::make_unique<TakeStream>(std::move(source), count);
}

} // namespace lteval
