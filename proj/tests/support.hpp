#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lteval/core.hpp"
#include "lteval/rng.hpp"
#include "lteval/streams.hpp"

namespace testing {

// Seeded generator for property tests, independent of the library's Rng so
// oracles do not share its code path.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : state_(seed * 0x9e3779b97f4a7c15ULL + 1) {}
    std::uint64_t u64() {
        state_ ^= state_ << 13;
        state_ ^= state_ >> 7;
        state_ ^= state_ << 17;
        return state_;
    }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(u64() % n); }
    double real(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

inline lteval::Schema schema(std::size_t features, std::size_t classes) {
    return lteval::Schema{features, classes, {}};
}

inline lteval::Instance inst(std::vector<double> x, lteval::ClassIndex y, std::uint64_t seq = 0) {
    return lteval::Instance{std::move(x), y, seq};
}

inline std::vector<lteval::Instance> draw(lteval::StreamSource& s, std::size_t n) {
    std::vector<lteval::Instance> out;
    while (out.size() < n) {
        auto x = s.next();
        if (!x) break;
        out.push_back(std::move(*x));
    }
    return out;
}

inline std::vector<lteval::Instance> waveform_sample(std::size_t n, std::uint64_t seed) {
    lteval::WaveformConfig cfg;
    cfg.seed = seed;
    auto s = lteval::waveform40(cfg);
    return draw(*s, n);
}

inline double accuracy(const lteval::Model& m, const std::vector<lteval::Instance>& data) {
    std::size_t ok = 0;
    for (const auto& x : data) ok += m.predict(x.features).class_index == x.label;
    return static_cast<double>(ok) / static_cast<double>(data.size());
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("lteval-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace testing
