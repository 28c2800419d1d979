#include <cmath>

#include "doctest.h"
#include "lteval/ensembles.hpp"
#include "lteval/energy.hpp"
#include "lteval/error.hpp"
#include "lteval/protocol.hpp"
#include "support.hpp"

using namespace lteval;
using testing::inst;

TEST_CASE("poisson_draw") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) CHECK(poisson_draw(0.0, rng) == 0);
    const int n = 1000000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += poisson_draw(1.0, rng);
    CHECK(std::abs(sum / n - 1.0) <= 0.005);
}

TEST_CASE("majority vote") {
    const std::vector<ClassIndex> votes{2, 1, 2, 1, 0};
    auto p = majority_vote(votes, 3);
    CHECK(p.class_index == 1);
    CHECK((*p.scores)[2] == doctest::Approx(0.4));
}

TEST_CASE("oza bagging with all-zero draws leaves the ensemble untouched") {
    OzaBagging bag(testing::schema(40, 3), {3, 1});
    bag.set_poisson_override([](double) { return 0u; });
    for (const auto& x : testing::waveform_sample(500, 2)) bag.learn_one(x);
    for (const auto& m : bag.members()) {
        CHECK(m.node_count() == 1);
        CHECK(m.leaf_distribution(std::vector<double>(40, 0.0)) == std::vector<double>{0, 0, 0});
    }
}

TEST_CASE("oza bagging of size 1 trains its member k times") {
    OzaBagging bag(testing::schema(40, 3), {1, 1});
    HoeffdingTree twin(testing::schema(40, 3));
    Rng shadow(77);
    bag.set_poisson_override([&](double mean) { return poisson_draw(mean, shadow); });
    Rng replay(77);
    for (const auto& x : testing::waveform_sample(3000, 4)) {
        bag.learn_one(x);
        for (auto k = poisson_draw(1.0, replay); k > 0; --k) twin.learn_one(x);
    }
    const auto probe = testing::waveform_sample(200, 5);
    for (const auto& x : probe) CHECK(bag.predict(x.features).class_index == twin.predict(x.features).class_index);
    CHECK(bag.members()[0].node_count() == twin.node_count());
}

TEST_CASE("oza bagging is deterministic and resets") {
    const auto data = testing::waveform_sample(3000, 8);
    OzaBagging a(testing::schema(40, 3), {5, 9}), b(testing::schema(40, 3), {5, 9});
    std::vector<ClassIndex> first;
    for (const auto& x : data) {
        CHECK(a.predict(x.features).class_index == b.predict(x.features).class_index);
        first.push_back(a.predict(x.features).class_index);
        a.learn_one(x);
        b.learn_one(x);
    }
    a.reset();
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(a.predict(data[i].features).class_index == first[i]);
        a.learn_one(data[i]);
    }
}

TEST_CASE("oza boosting first-instance hand trace") {
    OzaBoosting boost(testing::schema(2, 2), {3, 1});
    boost.set_poisson_override([](double) { return 0u; });
    // Untrained members predict class 0; label 1 makes every member wrong.
    boost.learn_one(inst({0, 0}, 1));
    const auto& l = boost.last_lambdas();
    REQUIRE(l.size() == 3);
    CHECK(l[0] == 1.0);
    CHECK(l[1] == 0.5);
    CHECK(l[2] == 0.25);
    CHECK(boost.member_states()[0].lambda_sw == 1.0);
    CHECK(boost.member_states()[1].lambda_sw == 0.5);
    CHECK(boost.member_states()[0].lambda_sc == 0.0);
}

TEST_CASE("oza boosting vote weights") {
    CHECK(oza_boost_vote_weight({5.0, 0.0}) == kMaxVoteWeight);
    CHECK(oza_boost_vote_weight({0.0, 3.0}) == 0.0);
    CHECK(oza_boost_vote_weight({0.0, 0.0}) == 0.0);
    CHECK(oza_boost_vote_weight({1.0, 4.0}) == 0.0);
    CHECK(oza_boost_vote_weight({std::exp(2.0), 1.0}) == doctest::Approx(2.0));
    CHECK(oza_boost_vote_weight({1e9, 1e-9}) == kMaxVoteWeight);

    // A member that is always right keeps lambda_sw at 0 and the clamp weight.
    OzaBoosting boost(testing::schema(1, 2), {1, 1});
    for (int i = 0; i < 50; ++i) boost.learn_one(inst({1.0}, 0));
    CHECK(boost.member_states()[0].lambda_sw == 0.0);
    CHECK(oza_boost_vote_weight(boost.member_states()[0]) == kMaxVoteWeight);
}

TEST_CASE("oza boosting bookkeeping identity") {
    OzaBoosting boost(testing::schema(40, 3), {10, 3});
    double dispatched = 0.0;
    for (const auto& x : testing::waveform_sample(2000, 6)) {
        boost.learn_one(x);
        for (double l : boost.last_lambdas()) dispatched += l;
        double routed = 0.0;
        for (const auto& s : boost.member_states()) {
            CHECK(s.lambda_sc >= 0.0);
            CHECK(s.lambda_sw >= 0.0);
            routed += s.lambda_sc + s.lambda_sw;
        }
        CHECK(routed == doctest::Approx(dispatched).epsilon(1e-12));
        CHECK(boost.dispatched_mass() == doctest::Approx(dispatched).epsilon(1e-12));
    }
}

TEST_CASE("random forest degenerates to cart") {
    const auto data = testing::waveform_sample(800, 10);
    RandomForest rf(testing::schema(40, 3), {1, 1});
    rf.set_bootstrap(false);
    rf.set_feature_subsample(std::nullopt);
    rf.fit(data);
    CartTree cart(testing::schema(40, 3), {});
    cart.fit(data);
    const auto probe = testing::waveform_sample(300, 11);
    for (const auto& x : probe) CHECK(rf.predict(x.features).class_index == cart.predict(x.features).class_index);
    CHECK(rf.trees()[0].node_count() == cart.node_count());
}

TEST_CASE("random forest is deterministic, including parallel fits") {
    const auto data = testing::waveform_sample(1500, 12);
    const auto probe = testing::waveform_sample(300, 13);
    RandomForest a(testing::schema(40, 3), {6, 3}), b(testing::schema(40, 3), {6, 3});
    a.fit(data);
    b.set_parallel_fit(true);
    b.fit(data);
    for (const auto& x : probe) CHECK(a.predict(x.features).scores == b.predict(x.features).scores);
    CHECK_THROWS_AS(a.fit(std::vector<Instance>{}), ContractError);
}

TEST_CASE("random forest training accuracy grows with size") {
    const auto data = testing::waveform_sample(500, 14);
    RandomForest one(testing::schema(40, 3), {1, 2}), twenty(testing::schema(40, 3), {20, 2});
    one.fit(data);
    twenty.fit(data);
    CHECK(testing::accuracy(twenty, data) >= testing::accuracy(one, data));
}

TEST_CASE("random forest beats a single cart on waveform") {
    const auto train = testing::waveform_sample(10000, 15);
    const auto test = testing::waveform_sample(1000, 16);
    RandomForest rf(testing::schema(40, 3), {10, 1});
    rf.set_parallel_fit(true);
    rf.fit(train);
    CartTree cart(testing::schema(40, 3), {});
    cart.fit(train);
    CHECK(testing::accuracy(rf, test) >= testing::accuracy(cart, test));
}

TEST_CASE("adaboost vote weight") {
    CHECK(adaboost_vote_weight(0.25) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(adaboost_vote_weight(0.25) == doctest::Approx(1.0986).epsilon(1e-4));
}

TEST_CASE("adaboost weights stay normalised") {
    const auto data = testing::waveform_sample(2000, 17);
    AdaBoostM1 ada(testing::schema(40, 3), {10, 1});
    ada.fit(data);
    CHECK(ada.rounds() >= 1);
    for (double s : ada.weight_sums()) CHECK(std::abs(s - 1.0) <= 1e-9);
    for (std::size_t r = 0; r < ada.rounds(); ++r)
        if (ada.round_errors()[r] > 0 && ada.round_errors()[r] < 0.5)
            CHECK(ada.vote_weights()[r] == doctest::Approx(adaboost_vote_weight(ada.round_errors()[r])));
}

TEST_CASE("adaboost separable set reaches zero training error") {
    std::vector<Instance> data;
    for (int i = 0; i < 8; ++i) data.push_back(inst({static_cast<double>(i), static_cast<double>(i % 3)}, i < 4 ? 0 : 1));
    AdaBoostM1 ada(testing::schema(2, 2), {10, 1});
    ada.fit(data);
    CHECK(testing::accuracy(ada, data) == 1.0);
    CHECK(ada.rounds() <= 10);
    CHECK(ada.vote_weights().back() == kMaxVoteWeight);
}

TEST_CASE("adaboost with a useless first member falls back to a majority stump") {
    // Identical features, labels 0,1,2: any tree errs on at least 2/3 of the weight.
    std::vector<Instance> data{inst({1}, 0), inst({1}, 1), inst({1}, 2)};
    AdaBoostM1 ada(testing::schema(1, 3), {10, 1});
    CHECK_NOTHROW(ada.fit(data));
    CHECK(ada.rounds() == 1);
    CHECK(ada.vote_weights()[0] == 1.0);
    CHECK(ada.predict(std::vector<double>{1}).class_index == 0);
}

TEST_CASE("adaboost fit is from scratch") {
    const auto a = testing::waveform_sample(1000, 18), b = testing::waveform_sample(1000, 19);
    AdaBoostM1 x(testing::schema(40, 3), {5, 1}), y(testing::schema(40, 3), {5, 1});
    x.fit(a);
    x.fit(b);
    y.fit(b);
    CHECK(x.vote_weights() == y.vote_weights());
    for (const auto& s : a) CHECK(x.predict(s.features).scores == y.predict(s.features).scores);
}

TEST_CASE("oza bagging is not materially worse than one hoeffding tree on waveform") {
    auto window_accuracy = [](Model& m) {
        WaveformConfig cfg;
        cfg.seed = 17;
        cfg.limit = 100000;
        auto s = waveform40(cfg);
        ProtocolConfig p;
        p.n0 = 100000;
        p.window_w = 1000;
        DeterministicMeter meter({1.0, 0.0});
        const auto r = run_streaming(*s, m, p, meter, CarbonConfig{});
        REQUIRE(r.checkpoints.size() == 1);
        return *r.checkpoints.back().metrics.accuracy;
    };
    const auto schema = testing::schema(40, 3);
    HoeffdingTree single(schema, {});
    OzaBagging bag(schema, EnsembleParams{10, 1}, {});
    const double a = window_accuracy(single);
    const double b = window_accuracy(bag);
    CAPTURE(a);
    CAPTURE(b);
    CHECK(b >= a - 0.02);
}
