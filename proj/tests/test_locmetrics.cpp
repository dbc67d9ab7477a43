#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "alnf/errors.hpp"
#include "alnf/jsonl.hpp"
#include "alnf/locmetrics.hpp"

using namespace alnf;
using namespace alnf::locmetrics;

namespace {

Gazetteer sample_gazetteer() {
    return Gazetteer({
        {"Mohammed", EntityClass::person, true},
        {"Ali", EntityClass::person, true},
        {"Ibn Sina", EntityClass::person, true},
        {"John", EntityClass::person, false},
        {"John Smith", EntityClass::person, false},
        {"Cairo", EntityClass::location, true},
        {"Mecca", EntityClass::location, true},
        {"New York", EntityClass::location, false},
        {"York", EntityClass::location, false},
    });
}

}  // namespace

TEST_CASE("recognize: single and adjacent names, left to right") {
    const Gazetteer g = sample_gazetteer();

    const auto one = g.recognize("We met Mohammed yesterday.");
    REQUIRE(one.size() == 1);
    CHECK(one[0].surface == "Mohammed");
    CHECK(one[0].cls == EntityClass::person);
    CHECK(one[0].is_arabic);
    CHECK(one[0].byte_offset == 7);

    const auto two = g.recognize("Ali Mohammed spoke.");
    REQUIRE(two.size() == 2);
    CHECK(two[0].surface == "Ali");
    CHECK(two[1].surface == "Mohammed");
    CHECK(two[0].byte_offset < two[1].byte_offset);

    CHECK(g.recognize("").empty());
    CHECK(g.recognize("no names here").empty());
}

TEST_CASE("recognize: longest match wins, overlaps resolve left to right") {
    const Gazetteer g = sample_gazetteer();

    const auto smith = g.recognize("John Smith arrived");
    REQUIRE(smith.size() == 1);
    CHECK(smith[0].surface == "John Smith");
    CHECK_FALSE(smith[0].is_arabic);

    const auto ny = g.recognize("flying to New York today");
    REQUIRE(ny.size() == 1);
    CHECK(ny[0].surface == "New York");

    // case-insensitive matching keeps the original surface text
    const auto folded = g.recognize("MECCA and cairo");
    REQUIRE(folded.size() == 2);
    CHECK(folded[0].surface == "MECCA");
    CHECK(folded[1].surface == "cairo");

    // word boundaries: no match inside a longer word
    CHECK(g.recognize("Alias Investigations").empty());
}

TEST_CASE("gazetteer validation") {
    CHECK_THROWS_AS(Gazetteer({{"Dup", EntityClass::person, true},
                               {"Dup", EntityClass::person, false}}),
                    ValidationError);
    // same surface in different classes is fine
    CHECK_NOTHROW(Gazetteer({{"Twin", EntityClass::person, true},
                             {"Twin", EntityClass::location, false}}));
    CHECK_THROWS_AS(Gazetteer({{"", EntityClass::person, true}}), ValidationError);
}

TEST_CASE("gazetteer file round-trip") {
    const auto path = std::filesystem::temp_directory_path() / "alnf_gazetteer_test.tsv";
    write_text_file(path,
                    "# sample lexicon\n"
                    "Mohammed\tperson\tarabic\n"
                    "John\tperson\tother\n"
                    "Cairo\tlocation\tarabic\n");
    const Gazetteer g = Gazetteer::from_file(path);
    CHECK(g.size() == 3);
    CHECK(g.recognize("John met Mohammed in Cairo").size() == 3);

    write_text_file(path, "broken line no tabs\n");
    CHECK_THROWS_AS(Gazetteer::from_file(path), ParseError);
    write_text_file(path, "X\tperson\tneither\n");
    CHECK_THROWS_AS(Gazetteer::from_file(path), ParseError);
    std::filesystem::remove(path);
}

TEST_CASE("entity_proportion over responses") {
    const Gazetteer g = sample_gazetteer();
    const std::vector<std::string> responses{
        "Mohammed visited Cairo with John.",
        "Ali and John Smith toured New York.",
    };
    const ProportionResult persons = entity_proportion(responses, g, EntityClass::person);
    CHECK(persons.total_count == 4);
    CHECK(persons.arabic_count == 2);
    CHECK(persons.rendered == "50.00%");

    const ProportionResult locations = entity_proportion(responses, g, EntityClass::location);
    CHECK(locations.total_count == 2);
    CHECK(locations.arabic_count == 1);
    CHECK(locations.rendered == "50.00%");

    // additivity: concatenating response lists sums counts exactly
    const std::vector<std::string> first{responses[0]};
    const std::vector<std::string> second{responses[1]};
    const auto p1 = entity_proportion(first, g, EntityClass::person);
    const auto p2 = entity_proportion(second, g, EntityClass::person);
    CHECK(p1.total_count + p2.total_count == persons.total_count);
    CHECK(p1.arabic_count + p2.arabic_count == persons.arabic_count);

    const std::vector<std::string> empty_responses{"nothing to see"};
    const auto none = entity_proportion(empty_responses, g, EntityClass::person);
    CHECK(none.total_count == 0);
    CHECK(none.rendered == "undefined");
    CHECK_FALSE(none.percent.has_value());
}

TEST_CASE("proportion_from_counts reproduces the reference cells") {
    const std::pair<std::pair<std::size_t, std::size_t>, const char*> cells[] = {
        {{3, 25}, "12.00%"},  {{12, 45}, "26.67%"}, {{22, 56}, "39.29%"}, {{31, 62}, "50.00%"},
        {{3, 16}, "18.75%"},  {{13, 48}, "27.08%"}, {{16, 74}, "21.62%"}, {{11, 38}, "28.95%"},
    };
    for (const auto& [counts, expected] : cells) {
        CHECK(proportion_from_counts(counts.first, counts.second).rendered == expected);
    }
    // bounded in [0, 100]
    CHECK(*proportion_from_counts(0, 7).percent == 0.0);
    CHECK(*proportion_from_counts(7, 7).percent == 100.0);
}
