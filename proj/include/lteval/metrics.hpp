#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lteval/core.hpp"

namespace lteval {

/// Performance over the evaluation window. Every metric is empty when the
/// window holds no pairs.
struct MetricsBundle {
    std::optional<double> accuracy;
    std::optional<double> kappa;
    std::optional<double> macro_f1;
    std::uint64_t support = 0;
};

/// Row-major confusion counts, rows = true class, columns = predicted class.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes = 2);

    void add(ClassIndex truth, ClassIndex predicted, std::int64_t delta = 1);
    std::uint64_t at(ClassIndex truth, ClassIndex predicted) const;
    std::uint64_t total() const { return total_; }
    std::size_t num_classes() const { return classes_; }

    MetricsBundle metrics() const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t classes_;
    std::vector<std::uint64_t> cells_;
    std::uint64_t total_ = 0;
};

/// Sliding window over the last `capacity` (truth, predicted) pairs.
class EvalWindow {
public:
    EvalWindow(std::size_t capacity, std::size_t num_classes);

    void push(ClassIndex truth, ClassIndex predicted);
    MetricsBundle snapshot() const { return confusion_.metrics(); }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return size_; }
    const ConfusionMatrix& confusion() const { return confusion_; }

    // Oldest first.
    std::vector<std::pair<ClassIndex, ClassIndex>> entries() const;

private:
    std::size_t capacity_;
    std::size_t num_classes_;
    std::vector<std::pair<ClassIndex, ClassIndex>> ring_;
    std::size_t head_ = 0;  // slot of the oldest entry once full
    std::size_t size_ = 0;
    ConfusionMatrix confusion_;
};

} // namespace lteval
