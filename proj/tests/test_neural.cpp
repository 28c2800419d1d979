#include <cmath>

#include "doctest.h"
#include "lteval/error.hpp"
#include "lteval/neural.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lteval;
using testing::inst;

namespace {

std::vector<Instance> random_batch(testing::Gen& g, std::size_t n, std::size_t d, std::size_t classes) {
    std::vector<Instance> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(d);
        for (auto& v : x) v = g.real(-2, 2);
        out.push_back(inst(x, static_cast<ClassIndex>(g.index(classes))));
    }
    return out;
}

MlpState random_state(const std::vector<std::size_t>& widths, std::uint64_t seed) {
    Rng rng(seed);
    auto s = MlpState::glorot(widths, rng);
    testing::Gen g(seed);
    for (auto& l : s.layers)
        for (auto& b : l.bias) b = g.real(-0.3, 0.3);
    return s;
}

std::vector<Instance> blobs(std::size_t n, std::uint64_t seed) {
    testing::Gen g(seed);
    std::vector<Instance> out;
    for (std::size_t i = 0; i < n; ++i) {
        const ClassIndex y = static_cast<ClassIndex>(i % 2);
        const double c = y == 0 ? -2.0 : 2.0;
        out.push_back(inst({c + g.real(-1, 1), c + g.real(-1, 1)}, y));
    }
    return out;
}

} // namespace

TEST_CASE("zero state predicts uniformly") {
    const std::vector<std::size_t> widths{4, 32, 16, 3};
    const auto s = MlpState::zeros(widths);
    const auto p = mlp_forward(s, std::vector<double>{1, 2, 3, 4});
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0));
    CHECK(s.parameter_count() == 4 * 32 + 32 + 32 * 16 + 16 + 16 * 3 + 3);
}

TEST_CASE("softmax output is normalised and shift invariant") {
    testing::Gen g(1);
    for (int t = 0; t < 50; ++t) {
        auto s = random_state({5, 8, 4, 3}, 100 + t);
        std::vector<double> x(5);
        for (auto& v : x) v = g.real(-3, 3);
        const auto p = mlp_forward(s, x);
        double sum = 0;
        for (double v : p) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
        for (auto& b : s.layers.back().bias) b += 7.5;
        const auto q = mlp_forward(s, x);
        for (std::size_t c = 0; c < p.size(); ++c) CHECK(q[c] == doctest::Approx(p[c]).epsilon(1e-12));
    }
    const auto s = random_state({2, 4, 2}, 5);
    CHECK_THROWS_AS(mlp_forward(s, std::vector<double>{1}), ContractError);
    CHECK_THROWS_AS(mlp_forward(s, std::vector<double>{1, std::nan("")}), ContractError);
}

TEST_CASE("gradient matches central finite differences") {
    testing::Gen g(42);
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<std::size_t> widths{4, 6, 5, 3};
        auto s = random_state(widths, 1000 + trial);
        const auto batch = random_batch(g, 1 + g.index(6), 4, 3);
        const auto grad = mlp_gradient(s, batch);
        double worst = 0;
        for (std::size_t i = 0; i < s.parameter_count(); ++i) {
            const double fd = oracle::central_difference([&] { return mlp_loss(s, batch); }, s.parameter(i), 1e-5);
            const double an = grad.parameter(i);
            const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
            worst = std::max(worst, rel);
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("gradient at a saturated correct prediction is about zero") {
    auto s = MlpState::zeros(std::vector<std::size_t>{2, 3, 2});
    s.layers.back().bias = {50.0, -50.0};
    const std::vector<Instance> batch{inst({0.3, -0.1}, 0)};
    const auto g = mlp_gradient(s, batch);
    for (std::size_t i = 0; i < g.parameter_count(); ++i) CHECK(std::abs(g.parameter(i)) < 1e-12);
}

TEST_CASE("gradient is invariant to duplicating the batch") {
    testing::Gen g(3);
    const auto s = random_state({3, 5, 2}, 9);
    auto batch = random_batch(g, 7, 3, 2);
    const auto once = mlp_gradient(s, batch);
    auto twice_batch = batch;
    twice_batch.insert(twice_batch.end(), batch.begin(), batch.end());
    const auto twice = mlp_gradient(s, twice_batch);
    for (std::size_t i = 0; i < once.parameter_count(); ++i)
        CHECK(twice.parameter(i) == doctest::Approx(once.parameter(i)).epsilon(1e-12));
}

TEST_CASE("mlp_fit on separable blobs") {
    const auto data = blobs(200, 4);
    MlpParams p;
    p.learning_rate = 0.05;
    p.batch_size = 16;
    Mlp m(testing::schema(2, 2), p, Paradigm::batch);
    m.fit(data);
    CHECK(testing::accuracy(m, data) >= 0.95);
}

TEST_CASE("mlp_fit edge cases and determinism") {
    const auto data = blobs(100, 6);
    MlpParams p;
    p.max_epochs = 0;
    Rng rng(p.seed);
    const auto init = MlpState::glorot(mlp_widths(2, p.hidden, 2), rng);
    CHECK(mlp_fit(data, 2, 2, p) == init);

    p = {};
    p.learning_rate = 0.01;
    p.batch_size = 8;
    p.max_epochs = 20;
    CHECK(mlp_fit(data, 2, 2, p) == mlp_fit(data, 2, 2, p));
    CHECK_THROWS_AS(mlp_fit(std::span(data).first(9), 2, 2, p), ContractError);

    MlpParams bad;
    bad.validation_fraction = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.hidden = {0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("mlp fit retrains from scratch") {
    const auto a = blobs(120, 1), b = blobs(120, 2);
    MlpParams p;
    p.max_epochs = 5;
    Mlp x(testing::schema(2, 2), p, Paradigm::batch), y(testing::schema(2, 2), p, Paradigm::batch);
    x.fit(a);
    x.fit(b);
    y.fit(b);
    CHECK(x.state() == y.state());
}

TEST_CASE("learn_one") {
    MlpParams p;
    p.learning_rate = 0.0;
    Mlp frozen(testing::schema(3, 2), p, Paradigm::streaming);
    const auto before = frozen.state();
    frozen.learn_one(inst({1, 2, 3}, 1));
    CHECK(frozen.state() == before);

    p.learning_rate = 1e-4;
    Mlp m(testing::schema(3, 2), p, Paradigm::streaming);
    const std::vector<Instance> one{inst({0.5, -1, 2}, 1)};
    const double l0 = mlp_loss(m.state(), one);
    m.learn_one(one[0]);
    CHECK(mlp_loss(m.state(), one) < l0);

    p.learning_rate = 0.05;
    Mlp fit_one(testing::schema(3, 2), p, Paradigm::streaming);
    int steps = 0;
    while (mlp_loss(fit_one.state(), one) >= 0.01 && steps < 10000) {
        fit_one.learn_one(one[0]);
        ++steps;
    }
    CHECK(steps < 10000);
}

TEST_CASE("learn_one skips non-finite updates") {
    MlpParams p;
    p.learning_rate = 1e300;
    Mlp m(testing::schema(2, 2), p, Paradigm::streaming);
    const auto before = m.state();
    m.learn_one(inst({1e10, -1e10}, 1));
    CHECK(m.skipped_steps() == 1);
    CHECK(m.state() == before);
    CHECK(m.state().finite());
}

TEST_CASE("streaming mlp stays finite over 1e5 waveform steps") {
    Mlp m(testing::schema(40, 3), {}, Paradigm::streaming);
    WaveformConfig cfg;
    cfg.seed = 21;
    WaveformStream s(cfg);
    for (int i = 0; i < 100000; ++i) m.learn_one(*s.next());
    CHECK(m.state().finite());
    CHECK(m.skipped_steps() == 0);
}

TEST_CASE("mlp reset restores the initial state") {
    Mlp m(testing::schema(2, 2), {}, Paradigm::streaming);
    const auto init = m.state();
    for (const auto& x : blobs(50, 3)) m.learn_one(x);
    CHECK(!(m.state() == init));
    m.reset();
    CHECK(m.state() == init);
}
