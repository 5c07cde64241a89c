#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "dsom/io.hpp"
#include "dsom/matrix.hpp"

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

} // namespace

TEST_CASE("generate_uniform_square basics") {
    SECTION("n = 0 rejected") {
        CHECK_THROWS_AS(dsom::generate_uniform_square(0, 1), std::invalid_argument);
    }
    SECTION("single point lies in the unit square") {
        const auto ps = dsom::generate_uniform_square(1, 99);
        REQUIRE(ps.n == 1);
        REQUIRE(ps.dim == 2);
        CHECK(ps.at(0, 0) >= 0.0);
        CHECK(ps.at(0, 0) < 1.0);
        CHECK(ps.at(0, 1) >= 0.0);
        CHECK(ps.at(0, 1) < 1.0);
    }
    SECTION("same seed, same bytes") {
        const auto a = dsom::generate_uniform_square(500, 42);
        const auto b = dsom::generate_uniform_square(500, 42);
        CHECK(a.coords == b.coords);
        const auto c = dsom::generate_uniform_square(500, 43);
        CHECK(a.coords != c.coords);
    }
    SECTION("coordinate means settle near 0.5") {
        const auto ps = dsom::generate_uniform_square(10000, 7);
        double mx = 0.0, my = 0.0;
        for (std::int32_t i = 0; i < ps.n; ++i) {
            mx += ps.at(i, 0);
            my += ps.at(i, 1);
        }
        mx /= ps.n;
        my /= ps.n;
        CHECK(std::abs(mx - 0.5) < 0.03);
        CHECK(std::abs(my - 0.5) < 0.03);
    }
}

TEST_CASE("build_from_vectors squared euclidean") {
    SECTION("hand values") {
        dsom::PointSet ps;
        ps.n = 2;
        ps.dim = 2;
        ps.coords = {0.0, 0.0, 1.0, 1.0};
        const auto m = dsom::build_from_vectors(ps);
        CHECK(m.at(0, 1) == 2.0);
        CHECK(m.at(0, 0) == 0.0);
        CHECK(m.at(1, 1) == 0.0);
        CHECK(m.kind() == dsom::ValueKind::real_valued);
    }
    SECTION("matches per-pair recomputation") {
        const auto ps = dsom::generate_uniform_square(3, 11);
        const auto m = dsom::build_from_vectors(ps);
        for (std::int32_t i = 0; i < 3; ++i) {
            for (std::int32_t k = 0; k < 3; ++k) {
                const double dx = ps.at(i, 0) - ps.at(k, 0);
                const double dy = ps.at(i, 1) - ps.at(k, 1);
                // Same expression, independent evaluation.
                REQUIRE(m.at(i, k) == (i == k ? 0.0 : dx * dx + dy * dy));
            }
        }
    }
    SECTION("full-scan invariants on a larger instance") {
        const auto m = dsom::build_from_vectors(dsom::generate_uniform_square(60, 3));
        for (std::int32_t i = 0; i < m.size(); ++i) {
            REQUIRE(m.at(i, i) == 0.0);
            for (std::int32_t k = 0; k < m.size(); ++k) {
                REQUIRE(m.at(i, k) >= 0.0);
                REQUIRE(m.at(i, k) == m.at(k, i));
            }
        }
    }
}

TEST_CASE("integerize scales and rounds") {
    const auto ps = dsom::generate_uniform_square(20, 17);
    const auto real = dsom::build_from_vectors(ps);
    const auto fixed = dsom::integerize(real, 1e8);
    CHECK(fixed.kind() == dsom::ValueKind::integer_valued);
    for (std::int32_t i = 0; i < fixed.size(); ++i)
        for (std::int32_t k = 0; k < fixed.size(); ++k) {
            REQUIRE(fixed.at(i, k) == std::floor(fixed.at(i, k)));
            REQUIRE(fixed.at(i, k) == std::nearbyint(1e8 * real.at(i, k)));
        }
    CHECK_THROWS_AS(dsom::integerize(real, 0.0), std::invalid_argument);
}

TEST_CASE("DissimilarityMatrix constructor validates invariants") {
    CHECK_THROWS_WITH(dsom::DissimilarityMatrix(2, {0.0, 1.0, 2.0, 0.0}, dsom::ValueKind::real_valued),
                      Catch::Matchers::ContainsSubstring("asymmetry"));
    CHECK_THROWS_WITH(dsom::DissimilarityMatrix(2, {0.5, 1.0, 1.0, 0.0}, dsom::ValueKind::real_valued),
                      Catch::Matchers::ContainsSubstring("diagonal"));
    CHECK_THROWS_WITH(
        dsom::DissimilarityMatrix(2, {0.0, -1.0, -1.0, 0.0}, dsom::ValueKind::real_valued),
        Catch::Matchers::ContainsSubstring("negative"));
}

TEST_CASE("matrix save/load round trip is exact") {
    const auto ps = dsom::generate_uniform_square(3, 23);
    const auto m = dsom::build_from_vectors(ps);
    const auto path = temp_file("dsom_matrix_roundtrip.dsm");
    dsom::save_matrix(m, path.string());
    const auto loaded = dsom::load_matrix(path.string());
    REQUIRE(loaded.size() == m.size());
    CHECK(loaded.values() == m.values());
    CHECK(loaded.kind() == dsom::ValueKind::real_valued);
    std::filesystem::remove(path);
}

TEST_CASE("integer matrices keep their kind through the file format") {
    const auto fixed = dsom::integerize(dsom::build_from_vectors(dsom::generate_uniform_square(10, 5)), 1e8);
    const auto path = temp_file("dsom_matrix_int.dsm");
    dsom::save_matrix(fixed, path.string());
    CHECK(dsom::load_matrix(path.string()).kind() == dsom::ValueKind::integer_valued);
    std::filesystem::remove(path);
}

TEST_CASE("load_matrix diagnostics name the defect") {
    const auto path = temp_file("dsom_matrix_bad.dsm");

    SECTION("bad header") {
        write_text(path, "NOT-A-MATRIX\n2\n0 1\n1 0\n");
        CHECK_THROWS_WITH(dsom::load_matrix(path.string()),
                          Catch::Matchers::ContainsSubstring("header"));
    }
    SECTION("non-square row") {
        write_text(path, "DSOM-DISSIM 1\n2\n0 1\n1\n");
        CHECK_THROWS_WITH(dsom::load_matrix(path.string()),
                          Catch::Matchers::ContainsSubstring("non-square"));
    }
    SECTION("asymmetric pair named") {
        write_text(path, "DSOM-DISSIM 1\n2\n0 1\n2 0\n");
        CHECK_THROWS_WITH(dsom::load_matrix(path.string()),
                          Catch::Matchers::ContainsSubstring("asymmetric pair (0,1)"));
    }
    SECTION("nonzero diagonal named") {
        write_text(path, "DSOM-DISSIM 1\n3\n0 1 1\n1 0 1\n1 1 0.1\n");
        CHECK_THROWS_WITH(dsom::load_matrix(path.string()),
                          Catch::Matchers::ContainsSubstring("diagonal at index 2"));
    }
    SECTION("negative entry") {
        write_text(path, "DSOM-DISSIM 1\n2\n0 -1\n-1 0\n");
        CHECK_THROWS_WITH(dsom::load_matrix(path.string()),
                          Catch::Matchers::ContainsSubstring("negative entry"));
    }
    SECTION("missing rows") {
        write_text(path, "DSOM-DISSIM 1\n3\n0 1 1\n1 0 1\n");
        CHECK_THROWS_WITH(dsom::load_matrix(path.string()),
                          Catch::Matchers::ContainsSubstring("expected 3 data rows"));
    }
    std::filesystem::remove(path);
}

TEST_CASE("point set CSV round trip") {
    const auto ps = dsom::generate_uniform_square(25, 8);
    const auto path = temp_file("dsom_points.csv");
    dsom::save_points(ps, path.string());
    const auto loaded = dsom::load_points(path.string());
    REQUIRE(loaded.n == ps.n);
    REQUIRE(loaded.dim == ps.dim);
    CHECK(loaded.coords == ps.coords);
    std::filesystem::remove(path);
}

TEST_CASE("word list loading skips blank lines") {
    const auto path = temp_file("dsom_words.txt");
    write_text(path, "alpha\n\nbeta\n\n\ngamma\n");
    const auto words = dsom::load_words(path.string());
    REQUIRE(words == std::vector<std::string>{"alpha", "beta", "gamma"});
    std::filesystem::remove(path);
}
