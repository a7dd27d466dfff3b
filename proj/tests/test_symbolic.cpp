#include "doctest.h"

#include "support.hpp"

#include "thermoformal/errors.hpp"
#include "thermoformal/subshift.hpp"

using namespace thermoformal;

TEST_SUITE("symbolic") {

TEST_CASE("full shift basics") {
    SubshiftSpec spec = SubshiftSpec::full_shift(3);
    CHECK(spec.alphabet_size() == 3);
    CHECK(spec.is_full());
    CHECK(spec.transition_count() == 9);
    for (int i = 0; i < 3; ++i) {
        CHECK(spec.successors(i).size() == 3);
        CHECK(spec.predecessors(i).size() == 3);
    }
    CHECK(admissible_words(spec, 2).size() == 9);
    CHECK(admissible_words(spec, 3).size() == 27);
}

TEST_CASE("golden-mean word counts follow the Fibonacci recursion") {
    SubshiftSpec gm(2, {{1, 1}, {1, 0}});
    // #admissible n-words: 2, 3, 5, 8, 13 (no two consecutive 1s).
    CHECK(admissible_words(gm, 1).size() == 2);
    CHECK(admissible_words(gm, 2).size() == 3);
    CHECK(admissible_words(gm, 3).size() == 5);
    CHECK(admissible_words(gm, 4).size() == 8);
    CHECK(admissible_words(gm, 5).size() == 13);
    CHECK_FALSE(gm.is_full());
}

TEST_CASE("admissible_words is lexicographically ordered") {
    SubshiftSpec gm(2, {{1, 1}, {1, 0}});
    auto words = admissible_words(gm, 3);
    REQUIRE(words.size() == 5);
    CHECK(words[0] == Word{0, 0, 0});
    CHECK(words[1] == Word{0, 0, 1});
    CHECK(words[2] == Word{0, 1, 0});
    CHECK(words[3] == Word{1, 0, 0});
    CHECK(words[4] == Word{1, 0, 1});
    for (const Word& w : words) CHECK(gm.is_admissible(w));
    CHECK_FALSE(gm.is_admissible(Word{1, 1}));
    CHECK_FALSE(gm.is_admissible(Word{0, 1, 1}));
}

TEST_CASE("dead rows and columns are rejected") {
    CHECK_THROWS_AS(SubshiftSpec(2, {{1, 1}, {0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(SubshiftSpec(2, {{1, 0}, {1, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(SubshiftSpec(0, {}), std::invalid_argument);
}

TEST_CASE("require_admissible throws the typed error") {
    SubshiftSpec gm(2, {{1, 1}, {1, 0}});
    CHECK_NOTHROW(gm.require_admissible(Word{0, 1, 0}));
    CHECK_THROWS_AS(gm.require_admissible(Word{1, 1}), InadmissibleWordError);
    CHECK_THROWS_AS(gm.require_admissible(Word{0, 2}), InadmissibleWordError);
    try {
        gm.require_admissible(Word{1, 1});
    } catch (const Error& e) {
        CHECK(e.code() == "inadmissible_word");
    }
}

TEST_CASE("primitivity detection") {
    CHECK(is_primitive(SubshiftSpec::full_shift(2)));
    CHECK(is_primitive(SubshiftSpec(2, {{1, 1}, {1, 0}})));
    // The pure 2-cycle is irreducible but has period 2.
    CHECK_FALSE(is_primitive(SubshiftSpec(2, {{0, 1}, {1, 0}})));
    // Identity matrix: reducible (two disjoint fixed loops).
    CHECK_FALSE(is_primitive(SubshiftSpec(2, {{1, 0}, {0, 1}})));
    // A 4-symbol example whose primitivity needs several powers.
    CHECK(is_primitive(SubshiftSpec(4, {{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 1, 0, 0}})));
    CHECK(is_primitive(SubshiftSpec(1, {{1}})));
}

TEST_CASE("WordTable lookup agrees with enumeration") {
    SubshiftSpec gm(2, {{1, 1}, {1, 0}});
    WordTable table(gm, 4);
    auto words = admissible_words(gm, 4);
    REQUIRE(table.size() == words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        CHECK(table.find(words[i]) == i);
        auto w = table.word(i);
        CHECK(Word(w.begin(), w.end()) == words[i]);
    }
    CHECK(table.find(Word{1, 1, 0, 0}) == WordTable::npos);
}

TEST_CASE("format_word uses plain digit concatenation") {
    CHECK(format_word(Word{0, 1, 0}) == "010");
    CHECK(format_word(Word{2}) == "2");
}

TEST_CASE("random primitive specs satisfy the advertised invariants") {
    SplitRng rng(2026, 1);
    for (int rep = 0; rep < 25; ++rep) {
        SubshiftSpec spec = testsupport::random_primitive_spec(rng, 2, 4);
        CHECK(is_primitive(spec));
        for (int i = 0; i < spec.alphabet_size(); ++i) {
            CHECK_FALSE(spec.successors(i).empty());
            CHECK_FALSE(spec.predecessors(i).empty());
        }
    }
}

} // TEST_SUITE
