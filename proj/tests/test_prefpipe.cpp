#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "alnf/errors.hpp"
#include "alnf/jsonl.hpp"
#include "alnf/prefpipe.hpp"
#include "alnf/rng.hpp"
#include "support/oracles.hpp"

using namespace alnf;
using namespace alnf::prefpipe;

namespace {

std::vector<PairItem> make_items(std::size_t n) {
    std::vector<PairItem> items;
    for (std::size_t i = 0; i < n; ++i) {
        items.push_back(PairItem{"q" + std::to_string(i), "instruction " + std::to_string(i),
                                 "answer A" + std::to_string(i), "answer B" + std::to_string(i)});
    }
    return items;
}

LabelingRun run(const std::string& id, PresentationOrder order, Verdict verdict) {
    return LabelingRun{id, order, verdict};
}

}  // namespace

TEST_CASE("build_labeling_prompt: section order and verbatim substitution") {
    const std::string prompt = build_labeling_prompt("Q", "a", "b");
    const auto instr = prompt.find("[Instruction]\nQ");
    const auto r1 = prompt.find("[Response1]\na");
    const auto r2 = prompt.find("[Response2]\nb");
    const auto sys = prompt.find("[System]\n");
    REQUIRE(instr != std::string::npos);
    REQUIRE(r1 != std::string::npos);
    REQUIRE(r2 != std::string::npos);
    REQUIRE(sys != std::string::npos);
    CHECK(instr < r1);
    CHECK(r1 < r2);
    CHECK(r2 < sys);
    CHECK(prompt.find("just output Response1 or Response2.") != std::string::npos);

    // identical responses are allowed; the filter deals with them downstream
    const std::string same = build_labeling_prompt("Q", "a", "a");
    CHECK(same.find("[Response1]\na") != std::string::npos);
    CHECK(same.find("[Response2]\na") != std::string::npos);

    CHECK_THROWS_AS(build_labeling_prompt("", "a", "b"), MissingField);
    CHECK_THROWS_AS(build_labeling_prompt("Q", "", "b"), MissingField);
    CHECK_THROWS_AS(build_labeling_prompt("Q", "a", ""), MissingField);
}

TEST_CASE("build_labeling_prompt: literal [System] in a response is not escaped") {
    // hand-built expected text for byte comparison
    const std::string expected =
        "[Instruction]\nQ\n\n[Response1]\nhas a literal [System] inside\n\n"
        "[Response2]\nb\n\n[System]\n"
        "A good response should be relevant, accurate, helpful, and have enough details. "
        "Also, it should follow Arabic culture, customs, beliefs, and laws.\n"
        "Which is better, Response1 or Response2?\n"
        "Do not explain your answer, just output Response1 or Response2.";
    CHECK(build_labeling_prompt("Q", "has a literal [System] inside", "b") == expected);
}

TEST_CASE("build_labeling_prompt matches the golden file byte for byte") {
    const std::string golden =
        read_text_file(std::string(ALNF_GOLDEN_DIR) + "/labeling_prompt.golden.txt");
    CHECK(build_labeling_prompt("What is the best date variety?",
                                "Ajwa dates are widely prized.",
                                "Dates are a fruit.") == golden);
}

TEST_CASE("parse_verdict normalization") {
    CHECK(parse_verdict("Response1") == Verdict::response1);
    CHECK(parse_verdict("  response2 \n") == Verdict::response2);
    CHECK(parse_verdict("RESPONSE1 because it is better") == Verdict::response1);
    CHECK(parse_verdict("Both are good") == Verdict::unparseable);
    CHECK(parse_verdict("") == Verdict::unparseable);
    CHECK(parse_verdict("Response3") == Verdict::unparseable);
    CHECK(parse_verdict("\t\n") == Verdict::unparseable);
}

TEST_CASE("order_switch_filter basic outcomes") {
    const auto items = make_items(4);
    const std::vector<LabelingRun> original = {
        run("q0", PresentationOrder::original, Verdict::response1),   // consistent, A wins
        run("q1", PresentationOrder::original, Verdict::response1),   // position-biased
        run("q2", PresentationOrder::original, Verdict::response2),   // consistent, B wins
        run("q3", PresentationOrder::original, Verdict::unparseable),
    };
    const std::vector<LabelingRun> swapped = {
        run("q0", PresentationOrder::swapped, Verdict::response2),
        run("q1", PresentationOrder::swapped, Verdict::response1),
        run("q2", PresentationOrder::swapped, Verdict::response1),
        run("q3", PresentationOrder::swapped, Verdict::response2),
    };
    const FilterResult result = order_switch_filter(items, original, swapped);
    CHECK(result.stats.total == 4);
    CHECK(result.stats.kept == 2);
    CHECK(result.stats.position_biased == 1);
    CHECK(result.stats.unparseable_dropped == 1);
    REQUIRE(result.kept.size() == 2);
    CHECK(result.kept[0].id == "q0");
    CHECK(result.kept[0].chosen == Chosen::a);
    CHECK(result.kept[0].provenance == Provenance::judge_consistent);
    CHECK(result.kept[1].id == "q2");
    CHECK(result.kept[1].chosen == Chosen::b);
    // stats partition the total
    CHECK(result.stats.kept + result.stats.position_biased + result.stats.unparseable_dropped ==
          result.stats.total);
}

TEST_CASE("order_switch_filter error paths") {
    const auto items = make_items(2);
    const std::vector<LabelingRun> original = {
        run("q0", PresentationOrder::original, Verdict::response1),
        run("q1", PresentationOrder::original, Verdict::response1),
    };
    const std::vector<LabelingRun> swapped = {
        run("q0", PresentationOrder::swapped, Verdict::response2),
    };
    try {
        order_switch_filter(items, original, swapped);
        FAIL("expected MissingCounterpart");
    } catch (const MissingCounterpart& e) {
        CHECK(e.ids() == std::vector<std::string>{"q1"});
    }

    const std::vector<LabelingRun> dup = {
        run("q0", PresentationOrder::original, Verdict::response1),
        run("q0", PresentationOrder::original, Verdict::response1),
    };
    CHECK_THROWS_AS(order_switch_filter(items, dup, swapped), DuplicateItem);

    const std::vector<LabelingRun> wrong_order = {
        run("q0", PresentationOrder::swapped, Verdict::response1),
    };
    CHECK_THROWS_AS(order_switch_filter(items, wrong_order, swapped), ValidationError);
}

TEST_CASE("filter symmetry: swapping run roles keeps the same winners") {
    Rng rng(5);
    const auto items = make_items(50);
    std::vector<LabelingRun> original, swapped;
    for (const auto& item : items) {
        const auto v1 = static_cast<Verdict>(rng.next_index(3));
        const auto v2 = static_cast<Verdict>(rng.next_index(3));
        original.push_back(run(item.id, PresentationOrder::original, v1));
        swapped.push_back(run(item.id, PresentationOrder::swapped, v2));
    }
    const FilterResult forward = order_switch_filter(items, original, swapped);

    // Re-express the same labeling with the runs' roles exchanged: the swapped
    // run becomes the "original" presentation of items with A/B exchanged.
    std::vector<PairItem> flipped_items;
    for (const auto& item : items)
        flipped_items.push_back(PairItem{item.id, item.instruction, item.response_b,
                                         item.response_a});
    std::vector<LabelingRun> as_original, as_swapped;
    for (const auto& r : swapped)
        as_original.push_back(run(r.id, PresentationOrder::original, r.verdict));
    for (const auto& r : original)
        as_swapped.push_back(run(r.id, PresentationOrder::swapped, r.verdict));
    const FilterResult backward = order_switch_filter(flipped_items, as_original, as_swapped);

    CHECK(backward.stats.kept == forward.stats.kept);
    CHECK(backward.stats.position_biased == forward.stats.position_biased);
    CHECK(backward.stats.unparseable_dropped == forward.stats.unparseable_dropped);
    REQUIRE(backward.kept.size() == forward.kept.size());
    for (std::size_t i = 0; i < forward.kept.size(); ++i) {
        CHECK(backward.kept[i].id == forward.kept[i].id);
        // winner identity: chosen text must match, slots are mirrored
        const auto& f = forward.kept[i];
        const auto& b = backward.kept[i];
        const std::string f_text = f.chosen == Chosen::a ? f.response_a : f.response_b;
        const std::string b_text = b.chosen == Chosen::a ? b.response_a : b.response_b;
        CHECK(f_text == b_text);
    }
}

TEST_CASE("simulated judges: content-consistent keeps all, position-biased keeps none") {
    const std::size_t n = 1000;
    const auto items = make_items(n);
    Rng rng(9);

    // content-consistent judge preferring a fixed underlying response
    std::vector<LabelingRun> original, swapped;
    std::vector<bool> prefers_a;
    for (const auto& item : items) {
        const bool a = rng.next_double() < 0.5;
        prefers_a.push_back(a);
        original.push_back(run(item.id, PresentationOrder::original,
                               a ? Verdict::response1 : Verdict::response2));
        swapped.push_back(run(item.id, PresentationOrder::swapped,
                              a ? Verdict::response2 : Verdict::response1));
    }
    const FilterResult consistent = order_switch_filter(items, original, swapped);
    CHECK(consistent.stats.kept == n);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK((consistent.kept[i].chosen == Chosen::a) == prefers_a[i]);
    }

    // pure position bias: always the first slot
    original.clear();
    swapped.clear();
    for (const auto& item : items) {
        original.push_back(run(item.id, PresentationOrder::original, Verdict::response1));
        swapped.push_back(run(item.id, PresentationOrder::swapped, Verdict::response1));
    }
    const FilterResult biased = order_switch_filter(items, original, swapped);
    CHECK(biased.stats.kept == 0);
    CHECK(biased.stats.position_biased == n);
}

TEST_CASE("position_bias_rate") {
    std::vector<LabelingRun> runs;
    for (int i = 0; i < 10; ++i)
        runs.push_back(run("q" + std::to_string(i), PresentationOrder::original,
                           Verdict::response1));
    CHECK(position_bias_rate(runs) == 1.0);

    runs.clear();
    for (int i = 0; i < 10; ++i)
        runs.push_back(run("q" + std::to_string(i), PresentationOrder::original,
                           i % 2 ? Verdict::response1 : Verdict::response2));
    CHECK(position_bias_rate(runs) == 0.5);

    runs.clear();
    runs.push_back(run("q0", PresentationOrder::original, Verdict::unparseable));
    CHECK_THROWS_AS(position_bias_rate(runs), EmptyBatch);

    // Monte-Carlo: 0.8-biased simulated judge over 10000 items
    runs.clear();
    Rng rng(2718);
    for (int i = 0; i < 10000; ++i) {
        runs.push_back(run("q" + std::to_string(i), PresentationOrder::original,
                           rng.next_double() < 0.8 ? Verdict::response1 : Verdict::response2));
    }
    CHECK(position_bias_rate(runs) == doctest::Approx(0.80).epsilon(0.025));
}

TEST_CASE("agreement_correlation") {
    using prefpipe::Chosen;
    std::vector<Chosen> a{Chosen::a, Chosen::b, Chosen::a, Chosen::b};
    CHECK(agreement_correlation(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<Chosen> opposite;
    for (Chosen c : a) opposite.push_back(c == Chosen::a ? Chosen::b : Chosen::a);
    CHECK(agreement_correlation(a, opposite) == doctest::Approx(-1.0).epsilon(1e-12));

    std::vector<Chosen> constant(4, Chosen::a);
    CHECK_THROWS_AS(agreement_correlation(constant, a), DegenerateDistribution);
    std::vector<Chosen> shorter{Chosen::a};
    CHECK_THROWS_AS(agreement_correlation(a, shorter), ShapeMismatch);
    CHECK_THROWS_AS(agreement_correlation({}, {}), EmptyBatch);

    // 800 simulated pairs agreeing with probability p; compare to the direct
    // Pearson formula computed by enumeration over the +-1 encodings.
    Rng rng(84);
    std::vector<Chosen> judge, human;
    std::vector<double> xs, ys;
    for (int i = 0; i < 800; ++i) {
        const bool j = rng.next_double() < 0.5;
        const bool agree = rng.next_double() < 0.92;
        const bool h = agree ? j : !j;
        judge.push_back(j ? Chosen::a : Chosen::b);
        human.push_back(h ? Chosen::a : Chosen::b);
        xs.push_back(j ? 1.0 : -1.0);
        ys.push_back(h ? 1.0 : -1.0);
    }
    CHECK(agreement_correlation(judge, human) ==
          doctest::Approx(oracle::pearson_direct(xs, ys)).epsilon(1e-12));
}
