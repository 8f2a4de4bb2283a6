#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numeric>

using namespace cpi;

TEST_CASE("parse_instance reads values in order and drops signs") {
    CHECK(parse_instance("3 2 5") == CpiInstance({3, 2, 5}));
    CHECK(parse_instance("-3 2 5") == CpiInstance({3, 2, 5}));
    CHECK(parse_instance("3 6 4") == CpiInstance({3, 6, 4}));
    CHECK(parse_instance(" 7,\t11,13\n") == CpiInstance({7, 11, 13}));
}

TEST_CASE("parse_instance rejects malformed input") {
    CHECK_THROWS_AS(parse_instance(""), InvalidInput);
    CHECK_THROWS_AS(parse_instance("   "), InvalidInput);
    CHECK_THROWS_AS(parse_instance("3 0 5"), InvalidInput);
    CHECK_THROWS_AS(parse_instance("3 2.5"), InvalidInput);
    CHECK_THROWS_AS(parse_instance("3 x"), InvalidInput);
    CHECK_THROWS_AS(parse_instance("99999999999999999999"), InvalidInput);
    CHECK_THROWS_AS(parse_instance("4611686018427387904 4611686018427387904"), InvalidInput);
}

TEST_CASE("serialisation round-trips") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const CpiInstance inst(cpi_test::random_values(1 + trial % 9, 1000, rng));
        CHECK(parse_instance(to_string(inst)) == inst);
    }
    const std::vector<CpiInstance> many{CpiInstance({3, 2, 5}), CpiInstance({1})};
    CHECK(parse_instance_file("# header\n" + to_instance_file(many) + "\n") == many);
}

TEST_CASE("instance file errors name the line") {
    try {
        parse_instance_file("1 2\n# c\n3 0\n");
        FAIL("expected an error");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("alignment_time and nyquist_frequency") {
    CHECK(alignment_time(CpiInstance({30, 60, 40})).num == 1);
    CHECK(alignment_time(CpiInstance({30, 60, 40})).den == 10);
    CHECK(alignment_time(CpiInstance({3, 2, 5})).den == 1);
    CHECK(alignment_time(CpiInstance({7})).den == 7);
    CHECK(nyquist_frequency(CpiInstance({3, 2, 5})) == 20);
    CHECK(nyquist_frequency(CpiInstance({1})) == 2);
    CHECK(nyquist_frequency(CpiInstance({30, 90, 20, 40})) == 360);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const auto v = cpi_test::random_values(1 + trial % 7, 500, rng);
        const CpiInstance inst(v);
        std::uint64_t g = 0;
        for (auto x : v) g = std::gcd(g, x);
        const auto t = alignment_time(inst);
        CHECK(t.num * g == t.den);  // T * gcd == 1 exactly
    }
}

TEST_CASE("scale_instance") {
    auto s = scale_instance(CpiInstance({3, 2, 5}), 120.0, 5.0 / 6.0);
    CHECK(s.lambda == Catch::Approx(10.0));
    CHECK(s.scaled_values[0] == Catch::Approx(30.0));
    CHECK(s.scaled_values[1] == Catch::Approx(20.0));
    CHECK(s.scaled_values[2] == Catch::Approx(50.0));
    CHECK(s.scaled_sum() < 120.0);

    s = scale_instance(CpiInstance({1}), 100.0, 0.5);
    CHECK(s.lambda == Catch::Approx(50.0));
    s = scale_instance(CpiInstance({7, 11, 13}), 62.0, 0.5);
    CHECK(s.lambda == Catch::Approx(1.0));
    CHECK(s.min_spectral_gap >= s.lambda * (1 - 1e-12));

    CHECK_THROWS_AS(scale_instance(CpiInstance({1}), 100.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(scale_instance(CpiInstance({1}), -1.0, 0.5), InvalidInput);
}

TEST_CASE("scaling by a rational factor keeps the answer") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        const auto v = cpi_test::random_values(2 + trial % 6, 20, rng);
        const std::uint64_t p = 1 + trial % 5;
        std::vector<std::uint64_t> scaled;
        for (auto x : v) scaled.push_back(p * x);
        CHECK(decide_dp(CpiInstance(v)) == decide_dp(CpiInstance(scaled)));
        const auto s = scale_by(CpiInstance(v), static_cast<double>(p) / 7.0);
        for (std::size_t i = 0; i < v.size(); ++i)
            CHECK(s.scaled_values[i] == Catch::Approx(static_cast<double>(v[i]) * p / 7.0));
    }
}

TEST_CASE("random_instance labels are always right") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t n = 2 + seed % 8;
        const auto yes = random_instance(n, 40, Answer::Yes, seed);
        const auto no = random_instance(n, 40, Answer::No, seed);
        CHECK(yes.size() == n);
        CHECK(no.size() == n);
        CHECK(yes.max() <= 40);
        CHECK(cpi_test::signed_sum_count(std::vector<std::uint64_t>(yes.values().begin(), yes.values().end()), 0) > 0);
        CHECK(cpi_test::signed_sum_count(std::vector<std::uint64_t>(no.values().begin(), no.values().end()), 0) == 0);
    }
    CHECK(random_instance(2, 1, Answer::Yes, 3) == CpiInstance({1, 1}));
    const auto pair = random_instance(2, 50, Answer::No, 4);
    CHECK(pair[0] != pair[1]);
    CHECK(random_instance(5, 30, Answer::Yes, 17) == random_instance(5, 30, Answer::Yes, 17));
}

TEST_CASE("random_instance refuses impossible requests") {
    CHECK_THROWS_AS(random_instance(1, 10, Answer::Yes, 0), InvalidInput);
    CHECK_THROWS_AS(random_instance(2, 1, Answer::No, 0), InvalidInput);
    CHECK_THROWS_AS(random_instance(3, 0, Answer::No, 0), InvalidInput);
}
