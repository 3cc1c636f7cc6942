#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "place/diagram.hpp"

using namespace place;

TEST_CASE("persistence and diagonal cost") {
    CHECK(persistence({0, 2}) == doctest::Approx(2));
    CHECK(persistence({1, 4}) == doctest::Approx(3));
    CHECK(persistence({0.5, 0.75}) == doctest::Approx(0.25));
    CHECK(diag_cost({1, 4}) == doctest::Approx(1.5));
}

TEST_CASE("d_inf ground metric") {
    CHECK(d_inf({1, 4}, {1, 4}) == 0.0);
    CHECK(d_inf({1, 4}, {2, 5}) == doctest::Approx(1));
    CHECK(d_inf({1, 4}, {10, 11}) == doctest::Approx(9));
}

TEST_CASE("bottleneck_single evaluates both branches") {
    CHECK(bottleneck_single({1, 4}, {2, 5}) == doctest::Approx(1));
    CHECK(bottleneck_single({1, 4}, {10, 11}) == doctest::Approx(1.5));
    CHECK(bottleneck_single_diag({1, 4}) == doctest::Approx(1.5));
}

TEST_CASE("filter_top_n") {
    PersistenceDiagram d;
    d.points = {{0, 1}, {0, 5}, {0, 3}};
    auto f = filter_top_n(d, 2);
    REQUIRE(f.size() == 2);
    CHECK(f.points[0].death == 5);
    CHECK(f.points[1].death == 3);

    PersistenceDiagram single;
    single.points = {{0, 1}};
    CHECK(filter_top_n(single, 50).size() == 1);

    SUBCASE("60 distinct persistences keep the 50 largest") {
        PersistenceDiagram big;
        std::mt19937_64 rng(7);
        for (int i = 0; i < 60; ++i) big.points.push_back({0.0, 1.0 + 0.01 * i});
        std::shuffle(big.points.begin(), big.points.end(), rng);
        auto kept = filter_top_n(big, 50);
        REQUIRE(kept.size() == 50);
        // sort oracle: the smallest kept persistence must exceed every dropped one
        double min_kept = 1e100;
        for (const auto& p : kept.points) min_kept = std::min(min_kept, persistence(p));
        CHECK(min_kept == doctest::Approx(1.0 + 0.01 * 10));
    }

    SUBCASE("idempotent") {
        PersistenceDiagram big;
        std::mt19937_64 rng(11);
        for (int i = 0; i < 30; ++i) {
            auto r = oracles::random_diagram(rng, 1, 5.0);
            big.points.push_back(r.points[0]);
        }
        auto once = filter_top_n(big, 12);
        auto twice = filter_top_n(once, 12);
        REQUIRE(once.size() == twice.size());
        for (std::size_t i = 0; i < once.size(); ++i) {
            CHECK(once.points[i].birth == twice.points[i].birth);
            CHECK(once.points[i].death == twice.points[i].death);
        }
    }
}

TEST_CASE("bottleneck basic examples") {
    PersistenceDiagram A, B;
    A.points = {{0.3, 1.2}, {2, 5}};
    CHECK(bottleneck(A, A) == 0.0);

    A.points = {{0, 2}};
    B.points = {};
    CHECK(bottleneck(A, B) == doctest::Approx(1));

    A.points = {{0, 2}, {0, 4}};
    B.points = {{0, 2}};
    CHECK(bottleneck(A, B) == doctest::Approx(2));
}

TEST_CASE("bottleneck agrees with brute-force matching enumeration") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::size_t> size_dist(0, 4);
    for (int trial = 0; trial < 300; ++trial) {
        auto A = oracles::random_diagram(rng, size_dist(rng), 8.0);
        auto B = oracles::random_diagram(rng, size_dist(rng), 8.0);
        const double got = bottleneck(A, B);
        const double want = oracles::bottleneck_brute(A.points, B.points);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("bottleneck metric axioms on sampled triples") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> size_dist(0, 4);
    for (int trial = 0; trial < 100; ++trial) {
        auto A = oracles::random_diagram(rng, size_dist(rng), 6.0);
        auto B = oracles::random_diagram(rng, size_dist(rng), 6.0);
        auto C = oracles::random_diagram(rng, size_dist(rng), 6.0);
        const double ab = bottleneck(A, B), ba = bottleneck(B, A);
        const double ac = bottleneck(A, C), cb = bottleneck(C, B);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(bottleneck(A, A) == 0.0);
        CHECK(ab <= ac + cb + 1e-9);
    }
}

TEST_CASE("bottleneck_single equals bottleneck on singletons") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        auto A = oracles::random_diagram(rng, 1, 6.0);
        auto B = oracles::random_diagram(rng, 1, 6.0);
        CHECK(bottleneck_single(A.points[0], B.points[0]) ==
              doctest::Approx(bottleneck(A, B)).epsilon(1e-12));
    }
}
