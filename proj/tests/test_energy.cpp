#include <cmath>
#include <thread>

#include "doctest.h"
#include "lteval/energy.hpp"
#include "lteval/error.hpp"

using namespace lteval;

namespace {

struct FakeClock {
    double now = 0.0;
    CpuClock fn() {
        return [this] { return now; };
    }
};

} // namespace

TEST_CASE("cpu meter charges watts times cpu seconds") {
    FakeClock clock;
    CpuTimeMeter m(50.0, clock.fn());
    m.begin_span(SpanKind::train);
    clock.now += 2.0;
    m.end_span(SpanKind::train);
    CHECK(m.read() == doctest::Approx(100.0));
    CHECK(m.read(SpanKind::train) == doctest::Approx(100.0));
    CHECK(m.read(SpanKind::predict) == 0.0);

    m.begin_span(SpanKind::predict);
    m.end_span(SpanKind::predict);
    CHECK(m.read() == doctest::Approx(100.0));
}

TEST_CASE("cpu meter additivity") {
    FakeClock clock;
    CpuTimeMeter m(45.0, clock.fn());
    for (int i = 0; i < 2; ++i) {
        m.begin_span(SpanKind::predict);
        clock.now += 1.0;
        m.end_span(SpanKind::predict);
    }
    CHECK(m.read() == doctest::Approx(90.0));
}

TEST_CASE("nested spans charge only the outermost") {
    FakeClock clock;
    CpuTimeMeter m(10.0, clock.fn());
    m.begin_span(SpanKind::train);
    clock.now += 1.0;
    m.begin_span(SpanKind::predict);
    clock.now += 1.0;
    m.end_span(SpanKind::predict);
    CHECK(m.read() == 0.0);
    m.end_span(SpanKind::train);
    CHECK(m.read(SpanKind::train) == doctest::Approx(20.0));
    CHECK(m.read(SpanKind::predict) == 0.0);

    DeterministicMeter d({1.0, 0.5});
    d.begin_span(SpanKind::train, 10);
    d.begin_span(SpanKind::train, 10);
    d.end_span(SpanKind::train);
    d.end_span(SpanKind::train);
    CHECK(d.read() == 10.0);
}

TEST_CASE("unbalanced spans are hard errors") {
    DeterministicMeter d({1.0, 0.0});
    CHECK_THROWS_AS(d.end_span(SpanKind::train), ContractError);
    d.begin_span(SpanKind::train, 1);
    CHECK_THROWS_AS(d.end_span(SpanKind::predict), ContractError);
    CHECK_THROWS_AS(CpuTimeMeter(0.0), ConfigError);
}

TEST_CASE("real cpu clock advances under load") {
    CpuTimeMeter m(45.0);
    m.begin_span(SpanKind::train);
    volatile double sink = 0;
    const double start = process_cpu_seconds();
    while (process_cpu_seconds() - start < 0.05) sink = sink + std::sqrt(sink + 1.0);
    m.end_span(SpanKind::train);
    CHECK(m.read() >= 45.0 * 0.05 * 0.9);
    CHECK(!m.deterministic());
}

TEST_CASE("deterministic meter cost table") {
    DeterministicMeter d({2.0, 0.5});
    CHECK(d.read() == 0.0);
    d.begin_span(SpanKind::train, 100);
    d.end_span(SpanKind::train);
    CHECK(d.read() == 200.0);
    for (int i = 0; i < 10; ++i) {
        ScopedSpan s(d, SpanKind::predict);
    }
    CHECK(d.read() == 205.0);
    CHECK(d.read(SpanKind::predict) == 5.0);
    CHECK_THROWS_AS(d.begin_span(SpanKind::train), ContractError);
    CHECK_THROWS_AS(DeterministicMeter({-1.0, 0.0}), ConfigError);
    CHECK(d.deterministic());
}

TEST_CASE("deterministic meter additivity over span partitions") {
    DeterministicMeter whole({0.75, 0.0}), parts({0.75, 0.0});
    whole.begin_span(SpanKind::train, 64);
    whole.end_span(SpanKind::train);
    for (std::uint64_t m : {1u, 3u, 20u, 40u}) {
        parts.begin_span(SpanKind::train, m);
        parts.end_span(SpanKind::train);
    }
    CHECK(whole.read() == parts.read());
}

TEST_CASE("to_gco2e") {
    CarbonConfig c{250.0, "X"};
    CHECK(to_gco2e(3.6e6, c) == doctest::Approx(250.0));
    CHECK(to_gco2e(0.0, c) == 0.0);
    CHECK(to_gco2e(1.8e6, CarbonConfig{}) == doctest::Approx(95.0));
    CHECK_THROWS_AS(to_gco2e(-1.0, c), ContractError);
    CHECK_THROWS_AS((CarbonConfig{0.0, "X"}.validate()), ConfigError);
}

TEST_CASE("to_gco2e is linear in joules and intensity") {
    for (double j : {1.0, 17.5, 3.3e5}) {
        const CarbonConfig a{190.0, "ES"}, b{950.0, "ES"};
        CHECK(to_gco2e(j, b) == doctest::Approx(5.0 * to_gco2e(j, a)).epsilon(1e-14));
        CHECK(to_gco2e(2 * j, a) == doctest::Approx(2.0 * to_gco2e(j, a)).epsilon(1e-14));
    }
}
