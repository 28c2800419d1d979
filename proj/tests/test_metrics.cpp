#include <cmath>

#include "doctest.h"
#include "lteval/error.hpp"
#include "lteval/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lteval;

TEST_CASE("window basics") {
    EvalWindow w(5, 2);
    auto empty = w.snapshot();
    CHECK(empty.support == 0);
    CHECK(!empty.accuracy);
    CHECK(!empty.kappa);
    CHECK(!empty.macro_f1);

    w.push(1, 1);
    auto m = w.snapshot();
    CHECK(m.support == 1);
    CHECK(*m.accuracy == 1.0);

    EvalWindow miss(5, 2);
    miss.push(0, 1);
    CHECK(*miss.snapshot().accuracy == 0.0);
}

TEST_CASE("window ring eviction") {
    EvalWindow w(2, 3);
    w.push(0, 1);
    w.push(1, 1);
    w.push(2, 2);
    CHECK(w.size() == 2);
    CHECK(w.snapshot().support == 2);
    const auto e = w.entries();
    REQUIRE(e.size() == 2);
    CHECK(e[0] == std::pair<ClassIndex, ClassIndex>{1, 1});
    CHECK(e[1] == std::pair<ClassIndex, ClassIndex>{2, 2});
    CHECK(*w.snapshot().accuracy == 1.0);
}

TEST_CASE("window rejects bad indices and capacity") {
    EvalWindow w(3, 2);
    CHECK_THROWS_AS(w.push(2, 0), ContractError);
    CHECK_THROWS_AS(w.push(0, 2), ContractError);
    CHECK_THROWS_AS(EvalWindow(0, 2), ContractError);
}

TEST_CASE("kappa hand case [[2,1],[1,2]]") {
    ConfusionMatrix cm(2);
    cm.add(0, 0, 2);
    cm.add(0, 1, 1);
    cm.add(1, 0, 1);
    cm.add(1, 1, 2);
    const auto m = cm.metrics();
    CHECK(*m.accuracy == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
    CHECK(std::abs(*m.kappa - 1.0 / 3.0) < 1e-9);
}

TEST_CASE("perfect diagonal and constant predictor") {
    EvalWindow w(10, 3);
    for (ClassIndex c : {0u, 1u, 2u, 1u}) w.push(c, c);
    auto m = w.snapshot();
    CHECK(*m.accuracy == 1.0);
    CHECK(*m.kappa == 1.0);
    CHECK(*m.macro_f1 == 1.0);

    EvalWindow c(10, 2);
    for (int i = 0; i < 5; ++i) {
        c.push(0, 0);
        c.push(1, 0);
    }
    m = c.snapshot();
    CHECK(*m.accuracy == 0.5);
    CHECK(*m.kappa == 0.0);
}

TEST_CASE("kappa is 0 when chance agreement is total") {
    EvalWindow w(10, 2);
    for (int i = 0; i < 4; ++i) w.push(1, 1);
    const auto m = w.snapshot();
    CHECK(*m.accuracy == 1.0);
    CHECK(*m.kappa == 0.0);
    // Absent class contributes F1 = 0 to the macro mean.
    CHECK(*m.macro_f1 == 0.5);
}

TEST_CASE("snapshot equals brute-force recomputation on random push sequences") {
    testing::Gen g(1234);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t classes = 2 + g.index(4);
        const std::size_t cap = 1 + g.index(50);
        const std::size_t pushes = g.index(trial < 5 ? 10000 : 400);
        EvalWindow w(cap, classes);
        std::vector<std::pair<ClassIndex, ClassIndex>> all;
        for (std::size_t i = 0; i < pushes; ++i) {
            const auto y = static_cast<ClassIndex>(g.index(classes));
            const auto p = g.index(3) == 0 ? static_cast<ClassIndex>(g.index(classes)) : y;
            w.push(y, p);
            all.emplace_back(y, p);
        }
        const std::size_t keep = std::min(cap, all.size());
        std::vector<std::pair<ClassIndex, ClassIndex>> tail(all.end() - static_cast<std::ptrdiff_t>(keep), all.end());
        CHECK(w.entries() == tail);
        const auto got = w.snapshot();
        const auto want = oracle::metrics(tail, classes);
        CHECK(got.support == keep);
        CHECK(got.accuracy.has_value() == want.accuracy.has_value());
        if (want.accuracy) {
            CHECK(std::abs(*got.accuracy - *want.accuracy) < 1e-12);
            CHECK(std::abs(*got.kappa - *want.kappa) < 1e-12);
            CHECK(std::abs(*got.macro_f1 - *want.macro_f1) < 1e-12);
            // kappa = 1 exactly when every pair agrees, unless chance agreement is total.
            bool diagonal = true;
            for (const auto& [y, p] : tail) diagonal = diagonal && y == p;
            double pe = 0;
            for (std::size_t c = 0; c < classes; ++c) {
                double t = 0, q = 0;
                for (const auto& [y, p] : tail) {
                    t += y == c;
                    q += p == c;
                }
                pe += t * q / (keep * static_cast<double>(keep));
            }
            if (pe < 1.0) CHECK((*got.kappa == 1.0) == diagonal);
        }
        // Confusion equals one rebuilt from scratch over the entries.
        ConfusionMatrix rebuilt(classes);
        for (const auto& [y, p] : tail) rebuilt.add(y, p);
        CHECK(rebuilt == w.confusion());
        CHECK(w.confusion().total() == w.size());
    }
}

TEST_CASE("metrics depend only on the last w pairs") {
    testing::Gen g(8);
    EvalWindow a(20, 3), b(20, 3);
    for (int i = 0; i < 500; ++i) a.push(static_cast<ClassIndex>(g.index(3)), static_cast<ClassIndex>(g.index(3)));
    for (const auto& [y, p] : a.entries()) b.push(y, p);
    CHECK(a.confusion() == b.confusion());
}
