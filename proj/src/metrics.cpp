#include "lteval/metrics.hpp"

#include <string>

#include "lteval/error.hpp"

namespace lteval {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : classes_(num_classes), cells_(num_classes * num_classes, 0) {}

void ConfusionMatrix::add(ClassIndex truth, ClassIndex predicted, std::int64_t delta) {
    if (truth >= classes_ || predicted >= classes_)
        throw ContractError("confusion: class index out of range (" + std::to_string(truth) + ", " +
                            std::to_string(predicted) + ")");
    auto& cell = cells_[truth * classes_ + predicted];
    cell = static_cast<std::uint64_t>(static_cast<std::int64_t>(cell) + delta);
    total_ = static_cast<std::uint64_t>(static_cast<std::int64_t>(total_) + delta);
}

std::uint64_t ConfusionMatrix::at(ClassIndex truth, ClassIndex predicted) const {
    return cells_[truth * classes_ + predicted];
}

MetricsBundle ConfusionMatrix::metrics() const {
    MetricsBundle m;
    m.support = total_;
    if (total_ == 0) return m;

    const double n = static_cast<double>(total_);
    std::vector<double> row(classes_, 0.0), col(classes_, 0.0);
    double trace = 0.0;
    for (std::size_t t = 0; t < classes_; ++t) {
        for (std::size_t p = 0; p < classes_; ++p) {
            const double c = static_cast<double>(cells_[t * classes_ + p]);
            row[t] += c;
            col[p] += c;
        }
        trace += static_cast<double>(cells_[t * classes_ + t]);
    }

    const double p_o = trace / n;
    double p_e = 0.0;
    for (std::size_t c = 0; c < classes_; ++c) p_e += (row[c] / n) * (col[c] / n);

    m.accuracy = p_o;
    m.kappa = p_e == 1.0 ? 0.0 : (p_o - p_e) / (1.0 - p_e);

    double f1_sum = 0.0;
    for (std::size_t c = 0; c < classes_; ++c) {
        const double tp = static_cast<double>(cells_[c * classes_ + c]);
        const double precision = col[c] > 0 ? tp / col[c] : 0.0;
        const double recall = row[c] > 0 ? tp / row[c] : 0.0;
        f1_sum += precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    m.macro_f1 = f1_sum / static_cast<double>(classes_);
    return m;
}

EvalWindow::EvalWindow(std::size_t capacity, std::size_t num_classes)
    : capacity_(capacity), num_classes_(num_classes), confusion_(num_classes) {
    if (capacity_ < 1) throw ContractError("evaluation window capacity must be >= 1");
    ring_.resize(capacity_);
}

void EvalWindow::push(ClassIndex truth, ClassIndex predicted) {
    if (truth >= num_classes_ || predicted >= num_classes_)
        throw ContractError("window push: class index out of range (" + std::to_string(truth) + ", " +
                            std::to_string(predicted) + ")");
    if (size_ == capacity_) {
        const auto [old_t, old_p] = ring_[head_];
        confusion_.add(old_t, old_p, -1);
        ring_[head_] = {truth, predicted};
        head_ = (head_ + 1) % capacity_;
    } else {
        ring_[(head_ + size_) % capacity_] = {truth, predicted};
        ++size_;
    }
    confusion_.add(truth, predicted);
}

std::vector<std::pair<ClassIndex, ClassIndex>> EvalWindow::entries() const {
    std::vector<std::pair<ClassIndex, ClassIndex>> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back(ring_[(head_ + i) % capacity_]);
    return out;
}

} // namespace lteval
