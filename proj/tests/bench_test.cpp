#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "dsom/bench.hpp"
#include "dsom/matrix.hpp"
#include "dsom/rng.hpp"

namespace {

dsom::DissimilarityMatrix integerized_square(std::int32_t n, std::uint64_t seed) {
    return dsom::integerize(dsom::build_from_vectors(dsom::generate_uniform_square(n, seed)), 1e8);
}

// Matrix of identical twins: observations 2i and 2i+1 have equal columns, so
// every minimum is an exact tie between a pair. Exercises tie handling hard.
dsom::DissimilarityMatrix twin_matrix(std::int32_t pairs, std::uint64_t seed) {
    const std::int32_t n = 2 * pairs;
    dsom::Rng rng(seed);
    std::vector<double> v(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    auto set = [&](std::int32_t i, std::int32_t k, double d) {
        v[static_cast<std::size_t>(i) * n + k] = d;
        v[static_cast<std::size_t>(k) * n + i] = d;
    };
    for (std::int32_t a = 0; a < pairs; ++a)
        for (std::int32_t b = a + 1; b < pairs; ++b) {
            const double d = 1.0 + static_cast<double>(rng.next_below(50));
            set(2 * a, 2 * b, d);
            set(2 * a, 2 * b + 1, d);
            set(2 * a + 1, 2 * b, d);
            set(2 * a + 1, 2 * b + 1, d);
        }
    return {n, std::move(v), dsom::ValueKind::integer_valued};
}

std::vector<dsom::TimingRecord> synthetic_records(const std::vector<std::pair<int, int>>& sizes,
                                                  double (*model)(double, double)) {
    std::vector<dsom::TimingRecord> records;
    for (const auto& [n, m] : sizes) {
        dsom::TimingRecord r;
        r.n = n;
        r.m = m;
        r.epochs = 100;
        r.wall_seconds = model(static_cast<double>(n), static_cast<double>(m));
        records.push_back(r);
    }
    return records;
}

} // namespace

TEST_CASE("nmse") {
    SECTION("perfect prediction gives zero") {
        CHECK(dsom::nmse({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
    }
    SECTION("predicting the mean gives one") {
        const std::vector<double> actual{2.0, 4.0, 6.0};
        const std::vector<double> mean_pred{4.0, 4.0, 4.0};
        CHECK(dsom::nmse(mean_pred, actual) == Catch::Approx(1.0));
    }
    SECTION("hand-computed three-point case") {
        // errors 0,1,1 -> mse 2/3; mean 7/3, var 14/9; nmse = 3/7
        CHECK(dsom::nmse({1.0, 3.0, 3.0}, {1.0, 2.0, 4.0}) == Catch::Approx(3.0 / 7.0));
    }
    SECTION("zero variance rejected") {
        CHECK_THROWS_WITH(dsom::nmse({1.0, 2.0, 3.0}, {5.0, 5.0, 5.0}),
                          Catch::Matchers::ContainsSubstring("zero variance"));
    }
    SECTION("length mismatch rejected") {
        CHECK_THROWS_AS(dsom::nmse({1.0}, {1.0, 2.0}), std::invalid_argument);
    }
}

TEST_CASE("fit_loglog") {
    const std::vector<std::pair<int, int>> grid{{200, 25}, {200, 49}, {400, 25},
                                                {400, 49}, {800, 25}, {800, 49}};
    SECTION("recovers an exact power law") {
        const auto records =
            synthetic_records(grid, +[](double n, double m) { return n * n * m; });
        const auto fit = dsom::fit_loglog(records);
        CHECK(fit.alpha == Catch::Approx(2.0).margin(1e-9));
        CHECK(fit.beta == Catch::Approx(1.0).margin(1e-9));
        CHECK(fit.gamma == Catch::Approx(0.0).margin(1e-9));
        CHECK(fit.nmse < 1e-12);
    }
    SECTION("recovers a scaled power law with offset") {
        const auto records = synthetic_records(
            grid, +[](double n, double m) { return 3.5 * std::pow(n, 2.37) * std::pow(m, 1.08); });
        const auto fit = dsom::fit_loglog(records);
        CHECK(fit.alpha == Catch::Approx(2.37).margin(1e-9));
        CHECK(fit.beta == Catch::Approx(1.08).margin(1e-9));
        CHECK(fit.gamma == Catch::Approx(std::log(3.5)).margin(1e-9));
    }
    SECTION("too few records rejected") {
        auto records = synthetic_records(grid, +[](double n, double m) { return n * m; });
        records.resize(3);
        CHECK_THROWS_AS(dsom::fit_loglog(records), std::invalid_argument);
    }
    SECTION("collinear design rejected") {
        // N proportional to M: log N and log M are linearly dependent
        const std::vector<std::pair<int, int>> collinear{{10, 10}, {100, 100}, {10, 10}, {100, 100}};
        const auto records =
            synthetic_records(collinear, +[](double n, double m) { return n * m; });
        CHECK_THROWS_WITH(dsom::fit_loglog(records),
                          Catch::Matchers::ContainsSubstring("degenerate"));
    }
    SECTION("single distinct N rejected") {
        const std::vector<std::pair<int, int>> flat{{100, 10}, {100, 20}, {100, 30}, {100, 40}};
        const auto records = synthetic_records(flat, +[](double n, double m) { return n * m; });
        CHECK_THROWS_AS(dsom::fit_loglog(records), std::invalid_argument);
    }
}

TEST_CASE("fit_quadratic") {
    const std::vector<std::pair<int, int>> grid{{200, 25}, {200, 49}, {400, 25},
                                                {400, 49}, {800, 25}, {800, 49}};
    SECTION("recovers exact coefficients") {
        const auto records = synthetic_records(
            grid, +[](double n, double m) { return 2.0 * n * n + 0.5 * n * m * m; });
        const auto fit = dsom::fit_quadratic(records);
        CHECK(fit.delta == Catch::Approx(2.0).margin(1e-9));
        CHECK(fit.tau == Catch::Approx(0.5).margin(1e-9));
        CHECK(fit.nmse < 1e-12);
    }
    SECTION("coefficients are never negative") {
        // decreasing times cannot be matched by growing terms; the
        // constrained fit must clamp rather than go negative
        const auto records =
            synthetic_records(grid, +[](double n, double m) { return 1e6 / (n * m); });
        const auto fit = dsom::fit_quadratic(records);
        CHECK(fit.delta >= 0.0);
        CHECK(fit.tau >= 0.0);
    }
    SECTION("flat running times have zero variance and are rejected") {
        const auto records = synthetic_records(grid, +[](double, double) { return 5.0; });
        CHECK_THROWS_WITH(dsom::fit_quadratic(records),
                          Catch::Matchers::ContainsSubstring("zero variance"));
    }
    SECTION("degenerate design rejected") {
        auto records = synthetic_records(grid, +[](double n, double m) { return n * m; });
        records.resize(3);
        CHECK_THROWS_AS(dsom::fit_quadratic(records), std::invalid_argument);
    }
}

TEST_CASE("time_variant") {
    const auto g = dsom::hex_grid(2);
    const auto m = integerized_square(30, 12);
    dsom::DsomConfig c;
    c.variant = dsom::Variant::fast;
    c.schedule = dsom::default_schedule(g, 5);
    c.seed = 4;

    SECTION("produces a sane record (short runs take the batched path)") {
        const auto record = dsom::time_variant(c, m, g, 3);
        CHECK(record.wall_seconds > 0.0);
        CHECK(record.relative_sd >= 0.0);
        CHECK(std::isfinite(record.relative_sd));
        CHECK(record.repeats == 3);
        CHECK(record.n == 30);
        CHECK(record.m == 4);
        CHECK(record.variant == dsom::Variant::fast);
    }
    SECTION("repeats must be positive") {
        CHECK_THROWS_AS(dsom::time_variant(c, m, g, 0), std::invalid_argument);
    }
    SECTION("csv line format") {
        dsom::TimingRecord r;
        r.variant = dsom::Variant::brute;
        r.n = 500;
        r.m = 49;
        r.epochs = 100;
        r.seed = 7;
        r.repeats = 10;
        r.wall_seconds = 1.5;
        r.relative_sd = 0.001;
        CHECK(std::string(dsom::timing_csv_header) ==
              "variant,N,M,L,seed,repeats,wall_seconds,relative_sd");
        CHECK(dsom::timing_csv_line(r) == "brute,500,49,100,7,10,1.5,0.001");
    }
}

TEST_CASE("partial sums beat brute force at benchmark scale", "[timing]") {
    const auto g = dsom::hex_grid(7);
    const auto m = integerized_square(500, 19);
    dsom::DsomConfig c;
    c.schedule = dsom::default_schedule(g, 100);
    c.seed = 1;
    c.variant = dsom::Variant::brute;
    const auto brute = dsom::time_variant(c, m, g, 1);
    c.variant = dsom::Variant::partial;
    const auto partial = dsom::time_variant(c, m, g, 1);
    CHECK(partial.wall_seconds < brute.wall_seconds);
}

TEST_CASE("equivalence_check") {
    const auto g = dsom::hex_grid(2);
    dsom::DsomConfig base;
    base.schedule = dsom::default_schedule(g, 12);

    const std::vector<dsom::Variant> all{dsom::Variant::brute, dsom::Variant::partial,
                                         dsom::Variant::earlystop, dsom::Variant::memory,
                                         dsom::Variant::fast};

    SECTION("all variants agree on integer data") {
        const auto m = integerized_square(40, 3);
        const auto report = dsom::equivalence_check(m, g, {1, 2, 3, 4, 5}, all, base);
        CHECK(report.identical());
        CHECK(report.runs_compared == 20);
    }
    SECTION("all variants agree even when every minimum is an exact tie") {
        const auto m = twin_matrix(15, 44);
        const auto report = dsom::equivalence_check(m, g, {1, 2, 3}, all, base);
        CHECK(report.identical());
    }
    SECTION("a single variant is trivially equivalent") {
        const auto m = integerized_square(20, 3);
        const auto report = dsom::equivalence_check(m, g, {1}, {dsom::Variant::fast}, base);
        CHECK(report.identical());
        CHECK(report.runs_compared == 1);
    }
    SECTION("an injected tie-policy fault is detected and localized") {
        const auto m = twin_matrix(15, 44);
        auto faulty = base;
        faulty.inject_tie_fault = true;
        const auto report = dsom::equivalence_check(
            m, g, {1, 2, 3, 4, 5}, {dsom::Variant::brute, dsom::Variant::fast}, faulty);
        REQUIRE_FALSE(report.identical());
        bool localized = false;
        for (const auto& d : report.divergences) localized |= d.first_epoch >= 1;
        CHECK(localized);
        CHECK(report.to_text().find("divergence") != std::string::npos);
    }
}
