#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace cpi;

namespace {

CnfFormula cnf(int vars, std::vector<std::vector<int>> clauses) { return CnfFormula{vars, std::move(clauses)}; }

}  // namespace

TEST_CASE("parse_dimacs") {
    CHECK(parse_dimacs("p cnf 2 2\n1 2 0\n-1 0") == cnf(2, {{1, 2}, {-1}}));
    CHECK(parse_dimacs("p cnf 1 1\n1 0\n") == cnf(1, {{1}}));
    CHECK(parse_dimacs("c a comment\np cnf 2 1\nc another\n1 -2\n 0\n%\n0\n") == cnf(2, {{1, -2}}));
    CHECK(parse_dimacs("p cnf 2 1\n1 2 0 -1 0\n", {}, nullptr).clauses.size() == 2);
}

TEST_CASE("parse_dimacs errors and warnings") {
    CHECK_THROWS_AS(parse_dimacs("1 2 0\n"), InvalidInput);
    CHECK_THROWS_AS(parse_dimacs("p cnf x 1\n"), InvalidInput);
    CHECK_THROWS_AS(parse_dimacs("p dnf 1 1\n1 0\n"), InvalidInput);
    CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n3 0\n"), InvalidInput);
    CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 a 0\n"), InvalidInput);

    std::vector<std::string> warnings;
    const auto f = parse_dimacs("p cnf 2 3\n1 0\n2", {}, &warnings);
    CHECK(f.clauses.size() == 2);
    CHECK(warnings.size() == 2);
    CHECK_THROWS_AS(parse_dimacs("p cnf 2 3\n1 0\n", DimacsOptions{true}), InvalidInput);
}

TEST_CASE("to_dimacs round-trips") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
        const auto f = cpi_test::random_3cnf(1 + t % 8, t % 12, rng);
        CHECK(parse_dimacs(to_dimacs(f), DimacsOptions{true}) == f);
    }
}

TEST_CASE("simplify") {
    const auto f = cnf(2, {{1, 2}, {-1}});
    CHECK(simplify(f, 1, true) == cnf(2, {{}}));
    CHECK(simplify(f, 1, true).has_empty_clause());
    CHECK(simplify(f, 1, false) == cnf(2, {{2}}));
    const auto g = cnf(3, {{1, 2}, {-1}});
    CHECK(simplify(g, 3, true) == g);
}

TEST_CASE("simplify preserves models") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 100; ++t) {
        const int n = 1 + t % 6;
        const auto f = cpi_test::random_3cnf(n, 1 + t % 9, rng);
        const int var = 1 + t % n;
        for (bool val : {false, true}) {
            const auto g = simplify(f, var, val);
            for (std::uint64_t mask = 0; mask < (1u << n); ++mask) {
                Assignment a(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
                if (a[static_cast<std::size_t>(var - 1)] != val) continue;
                REQUIRE(evaluate(f, a) == evaluate(g, a));
            }
        }
    }
}

TEST_CASE("to_3cnf splits wide clauses and keeps satisfiability") {
    const auto wide = cnf(5, {{1, 2, 3, 4, 5}, {-1}, {-2}, {-3}, {-4}});
    const auto three = to_3cnf(wide);
    CHECK(three.original_vars == 5);
    CHECK(three.formula.num_vars == 7);
    for (const auto& c : three.formula.clauses) CHECK(c.size() <= 3);
    CHECK(cpi_test::truth_table_sat(three.formula) == cpi_test::truth_table_sat(wide));
    auto unsat = wide;
    unsat.clauses.push_back({-5});
    CHECK_FALSE(cpi_test::truth_table_sat(to_3cnf(unsat).formula));
}

TEST_CASE("sat_to_partition examples") {
    auto red = sat_to_partition(cnf(1, {{1}}));
    CHECK(decide_exact(red.instance));
    red = sat_to_partition(cnf(1, {{1}, {-1}}));
    CHECK_FALSE(decide_exact(red.instance));
    CHECK(red.entries.size() == red.instance.size());
    CHECK(red.instance.size() == 2 * 1 + 2 * 2 + 2);

    red = sat_to_partition(cnf(3, {}));
    CHECK(red.trivial);
    CHECK(red.instance == CpiInstance({1, 1}));
    CHECK_FALSE(decide_exact(sat_to_partition(cnf(2, {{1}, {}})).instance));
}

TEST_CASE("reduction agrees with the truth table") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        const auto f = cpi_test::random_3cnf(1 + t % 4, 1 + t % 6, rng);
        REQUIRE(decide_exact(sat_to_partition(f).instance) == cpi_test::truth_table_sat(f));
    }
    for (int t = 0; t < 20; ++t) {
        const auto f = cpi_test::random_3cnf(6, 10, rng);
        REQUIRE(decide_exact(sat_to_partition(f).instance) == cpi_test::truth_table_sat(f));
    }
}

TEST_CASE("assignment_from_partition reads off a model") {
    std::mt19937_64 rng(4);
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
        const auto f = cpi_test::random_3cnf(1 + t % 5, 1 + t % 7, rng);
        const auto red = sat_to_partition(f);
        const auto w = find_partition_exact(red.instance);
        REQUIRE(static_cast<bool>(w) == cpi_test::truth_table_sat(f));
        if (w) {
            CHECK(evaluate(f, assignment_from_partition(red, *w)));
            ++checked;
        }
    }
    CHECK(checked > 10);
}

TEST_CASE("reduction overflow reports the needed width") {
    std::mt19937_64 rng(5);
    const auto f = cpi_test::random_3cnf(12, 14, rng);
    try {
        sat_to_partition(f);
        FAIL("expected overflow");
    } catch (const MagnitudeOverflow& e) {
        CHECK(e.required_bits() > 62);
    }
}

TEST_CASE("extract_witness examples") {
    auto r = extract_witness(cnf(2, {{1, 2}, {-1}}), exact_dp_backend());
    CHECK(r.satisfiable);
    CHECK(r.assignment == Assignment{false, true});
    r = extract_witness(cnf(1, {{1}, {-1}}), exact_dp_backend());
    CHECK_FALSE(r.satisfiable);
    CHECK(r.oracle_calls == 1);
    CHECK(format_solution(r) == "s UNSATISFIABLE\n");
    r = extract_witness(cnf(1, {{1}}), exact_dp_backend());
    CHECK(format_solution(r) == "s SATISFIABLE\nv 1 0\n");
}

TEST_CASE("extract_witness on random formulas") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 200; ++t) {
        const int vars = 1 + t % 8;
        const auto f = cpi_test::random_3cnf(vars, 1 + t % 12, rng);
        const auto dp = extract_witness(f, exact_dp_backend());
        REQUIRE(dp.satisfiable == cpi_test::truth_table_sat(f));
        CHECK(dp.oracle_calls <= static_cast<std::size_t>(vars) + 1);
        if (dp.satisfiable) CHECK(evaluate(f, dp.assignment));
        if (sat_to_partition(f).instance.size() <= 22) {
            const auto bf = extract_witness(f, exact_bruteforce_backend());
            CHECK(bf.satisfiable == dp.satisfiable);
            CHECK(bf.assignment == dp.assignment);
        }
    }
}

TEST_CASE("a lying oracle is caught") {
    const OracleBackend liar{BackendKind::ExactDp, [](const CpiInstance&) { return true; }};
    try {
        extract_witness(cnf(2, {{1, 2}, {-1, 2}, {1, -2}, {-1, -2}}), liar);
        FAIL("expected OracleFailure");
    } catch (const OracleFailure& e) {
        CHECK(e.prefix().size() == 2);
    }
    const OracleBackend broken{BackendKind::AnalogSimulated,
                               [](const CpiInstance&) -> bool { throw SimulationError("out of range"); }};
    CHECK_THROWS_AS(extract_witness(cnf(1, {{1}}), broken), OracleFailure);
}

TEST_CASE("analog backend solves a small formula after squeezing") {
    const auto f = cnf(2, {{1, 2}, {-1}});
    const auto r = extract_witness(f, analog_backend({}));
    CHECK(r.satisfiable);
    CHECK(evaluate(f, r.assignment));
    CHECK_FALSE(extract_witness(cnf(1, {{1}, {-1}}), analog_backend({})).satisfiable);
}
