#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "dsom/levenshtein.hpp"
#include "dsom/rng.hpp"

namespace {

// Independent oracle: the classic full-matrix dynamic program, kept separate
// from the two-row implementation under test.
std::int64_t dp_oracle(const std::string& a, const std::string& b) {
    const std::vector<char32_t> sa = dsom::decode_utf8(a);
    const std::vector<char32_t> sb = dsom::decode_utf8(b);
    const std::size_t la = sa.size(), lb = sb.size();
    std::vector<std::vector<std::int64_t>> m(la + 1, std::vector<std::int64_t>(lb + 1, 0));
    for (std::size_t i = 0; i <= la; ++i) m[i][0] = static_cast<std::int64_t>(i);
    for (std::size_t j = 0; j <= lb; ++j) m[0][j] = static_cast<std::int64_t>(j);
    for (std::size_t i = 1; i <= la; ++i) {
        for (std::size_t j = 1; j <= lb; ++j) {
            const std::int64_t sub = m[i - 1][j - 1] + (sa[i - 1] == sb[j - 1] ? 0 : 1);
            m[i][j] = std::min({m[i - 1][j] + 1, m[i][j - 1] + 1, sub});
        }
    }
    return m[la][lb];
}

std::string random_word(dsom::Rng& rng, std::size_t max_len) {
    const std::size_t len = static_cast<std::size_t>(rng.next_below(max_len + 1));
    std::string w;
    for (std::size_t i = 0; i < len; ++i)
        w.push_back(static_cast<char>('a' + rng.next_below(26)));
    return w;
}

} // namespace

TEST_CASE("levenshtein on known word pairs") {
    CHECK(dsom::levenshtein("love", "lover") == 1);
    CHECK(dsom::levenshtein("a", "b") == 1);
    CHECK(dsom::levenshtein("", "abc") == 3);
    CHECK(dsom::levenshtein("abc", "") == 3);
    CHECK(dsom::levenshtein("", "") == 0);
    CHECK(dsom::levenshtein("kitten", "kitten") == 0);
    CHECK(dsom::levenshtein("kitten", "sitting") == 3);
}

TEST_CASE("levenshtein counts unicode scalar values, not bytes") {
    CHECK(dsom::levenshtein("caf\xc3\xa9", "cafe") == 1); // é vs e
    CHECK(dsom::normalized_levenshtein("caf\xc3\xa9", "cafe") == 0.25);
    CHECK_THROWS_AS(dsom::levenshtein("\xff", "a"), std::invalid_argument);
}

TEST_CASE("levenshtein matches the independent DP oracle on random pairs") {
    dsom::Rng rng(20240915);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::string a = random_word(rng, 20);
        const std::string b = random_word(rng, 20);
        CAPTURE(a, b);
        REQUIRE(dsom::levenshtein(a, b) == dp_oracle(a, b));
    }
}

TEST_CASE("levenshtein symmetry and triangle inequality") {
    dsom::Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const std::string a = random_word(rng, 12);
        const std::string b = random_word(rng, 12);
        const std::string c = random_word(rng, 12);
        const auto ab = dsom::levenshtein(a, b);
        const auto ba = dsom::levenshtein(b, a);
        const auto bc = dsom::levenshtein(b, c);
        const auto ac = dsom::levenshtein(a, c);
        CAPTURE(a, b, c);
        REQUIRE(ab == ba);
        REQUIRE(ac <= ab + bc);
    }
}

TEST_CASE("normalized levenshtein lies in [0,1] and handles edges") {
    CHECK(dsom::normalized_levenshtein("love", "lover") == 0.2);
    CHECK(dsom::normalized_levenshtein("a", "b") == 1.0);
    CHECK(dsom::normalized_levenshtein("same", "same") == 0.0);
    CHECK(dsom::normalized_levenshtein("", "") == 0.0);
    dsom::Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        const std::string a = random_word(rng, 15);
        const std::string b = random_word(rng, 15);
        const double v = dsom::normalized_levenshtein(a, b);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("build_from_words") {
    SECTION("two-word unnormalized matrix") {
        const auto m = dsom::build_from_words({"a", "b"}, false);
        REQUIRE(m.size() == 2);
        CHECK(m.at(0, 1) == 1.0);
        CHECK(m.at(1, 0) == 1.0);
        CHECK(m.at(0, 0) == 0.0);
        CHECK(m.kind() == dsom::ValueKind::integer_valued);
    }
    SECTION("single word gives 1x1 zero matrix") {
        const auto m = dsom::build_from_words({"word"}, true);
        REQUIRE(m.size() == 1);
        CHECK(m.at(0, 0) == 0.0);
    }
    SECTION("empty list rejected") {
        CHECK_THROWS_AS(dsom::build_from_words({}, false), std::invalid_argument);
    }
    SECTION("matrix equals the per-pair oracle on random words") {
        dsom::Rng rng(5);
        std::vector<std::string> words;
        for (int i = 0; i < 20; ++i) words.push_back(random_word(rng, 10));
        const auto m = dsom::build_from_words(words, false);
        for (std::size_t i = 0; i < words.size(); ++i)
            for (std::size_t k = 0; k < words.size(); ++k)
                REQUIRE(m.at(static_cast<std::int32_t>(i), static_cast<std::int32_t>(k)) ==
                        static_cast<double>(dp_oracle(words[i], words[k])));
    }
    SECTION("unnormalized word matrices are integer-valued") {
        dsom::Rng rng(9);
        std::vector<std::string> words;
        for (int i = 0; i < 10; ++i) words.push_back(random_word(rng, 8));
        CHECK(dsom::build_from_words(words, false).kind() == dsom::ValueKind::integer_valued);
    }
}
