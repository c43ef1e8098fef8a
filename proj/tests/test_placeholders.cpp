#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "hexec/parse.hpp"
#include "hexec/validate.hpp"
#include "tree_gen.hpp"

using namespace hexec;

TEST_CASE("find_placeholders recognizes both default spellings") {
    auto refs = find_placeholders("Where is Ans#1's place of birth?");
    REQUIRE(refs.size() == 1);
    CHECK(refs[0].index == 1);
    CHECK(refs[0].surface == "Ans#1");

    refs = find_placeholders("When is date of birth of #3");
    REQUIRE(refs.size() == 1);
    CHECK(refs[0].index == 3);
    CHECK(refs[0].surface == "#3");

    CHECK(find_placeholders("Who directed Titanic?").empty());
}

TEST_CASE("find_placeholders reports matches in order of appearance") {
    auto refs = find_placeholders("When was the last time Ans#2 beat Ans#1");
    REQUIRE(refs.size() == 2);
    CHECK(refs[0].index == 2);
    CHECK(refs[1].index == 1);

    refs = find_placeholders("when did muslim armies invade #3 and #2");
    REQUIRE(refs.size() == 2);
    CHECK(refs[0].index == 3);
    CHECK(refs[1].index == 2);
}

TEST_CASE("A-number placeholders only match when enabled") {
    CHECK(find_placeholders("when did A1 die").empty());

    PlaceholderSyntax syntax;
    syntax.a_number = true;
    auto refs = find_placeholders("when did A1 die", syntax);
    REQUIRE(refs.size() == 1);
    CHECK(refs[0].index == 1);
    CHECK(refs[0].surface == "A1");

    // No match inside words.
    CHECK(find_placeholders("NASA1 mission", syntax).empty());
    CHECK(find_placeholders("visit A1C quickly", syntax).empty());
}

TEST_CASE("placeholder indices start at one") {
    CHECK(find_placeholders("what is #0 doing").empty());
    auto refs = find_placeholders("Ans#12 and #345");
    REQUIRE(refs.size() == 2);
    CHECK(refs[0].index == 12);
    CHECK(refs[1].index == 345);
}

TEST_CASE("execution_order is reverse in-order") {
    SECTION("join of two primitives: right before left") {
        auto e = parse_hexpression("JOIN[ L, R ]");
        auto order = execution_primitives(*e);
        REQUIRE(order.size() == 2);
        CHECK(order[0].node->as_primitive().text == "R");
        CHECK(order[1].node->as_primitive().text == "L");
        CHECK(order[0].path == "right");
        CHECK(order[1].path == "left");
    }
    SECTION("join over union matches the walkthrough order") {
        auto e = parse_hexpression(
            "JOIN[ When was the last time Ans#2 beat Ans#1, "
            "UNION[ what is member of sports team of Duane Courtney, "
            "who is winner of 1894-95 FA Cup ] ]");
        auto order = execution_primitives(*e);
        REQUIRE(order.size() == 3);
        CHECK(order[0].node->as_primitive().text == "who is winner of 1894-95 FA Cup");
        CHECK(order[1].node->as_primitive().text ==
              "what is member of sports team of Duane Courtney");
        CHECK(order[2].node->as_primitive().text ==
              "When was the last time Ans#2 beat Ans#1");
    }
    SECTION("single primitive is its own order") {
        auto e = parse_hexpression("Who directed Titanic?");
        auto order = execution_order(*e);
        REQUIRE(order.size() == 1);
        CHECK(order[0] == "");
    }
}

TEST_CASE("execution order property: each leaf once, right subtree first") {
    std::mt19937 rng(99);
    for (int i = 0; i < 100; ++i) {
        auto tree = hexec_test::random_tree(rng, 6);
        auto order = execution_primitives(*tree);
        CHECK(order.size() == hexec_test::count_leaves(*tree));
        if (tree->is_operation()) {
            size_t right_leaves = hexec_test::count_leaves(*tree->as_operation().right);
            for (size_t k = 0; k < order.size(); ++k) {
                bool in_right = order[k].path.rfind("right", 0) == 0;
                CHECK(in_right == (k < right_leaves));
            }
        }
        // Paths are unique.
        std::set<std::string> unique;
        for (auto& site : order) unique.insert(site.path);
        CHECK(unique.size() == order.size());
    }
}

TEST_CASE("validate accepts the join example") {
    auto e = parse_hexpression(
        "JOIN[ Where is Ans#1's place of birth?, Who is director of The Iron Man? ]");
    auto report = validate(*e);
    CHECK(report.executable);
}

TEST_CASE("validate rejects a placeholder pointing past its slot") {
    auto e = parse_hexpression("JOIN[ what is Ans#5?, who is X? ]");
    auto report = validate(*e);
    CHECK_FALSE(report.executable);
    REQUIRE_FALSE(report.diagnostics.empty());
    bool found = false;
    for (const auto& d : report.diagnostics) {
        if (d.code == "unresolvable_placeholder" && d.severity == Severity::Error) found = true;
    }
    CHECK(found);
}

TEST_CASE("validate accepts the FA Cup expression") {
    auto e = parse_hexpression(
        "JOIN[ When was the last time Ans#2 beat Ans#1, "
        "UNION[ what is member of sports team of Duane Courtney, "
        "who is winner of 1894-95 FA Cup ] ]");
    CHECK(validate(*e).executable);
}

TEST_CASE("validate rejects a self-referencing primitive") {
    auto e = parse_hexpression("what is Ans#1?");
    CHECK_FALSE(validate(*e).executable);
}

TEST_CASE("join without a left placeholder warns but stays executable") {
    auto e = parse_hexpression("JOIN[ who is the president?, what is the capital? ]");
    auto report = validate(*e);
    CHECK(report.executable);
    bool warned = false;
    for (const auto& d : report.diagnostics) {
        if (d.code == "join_left_without_placeholder" && d.severity == Severity::Warning) {
            warned = true;
        }
    }
    CHECK(warned);
}

TEST_CASE("validate enforces the depth limit") {
    HExpr::Ptr tree = HExpr::primitive("base");
    for (int i = 0; i < 20; ++i) {
        tree = HExpr::operation(OpKind::Union, HExpr::primitive("q"), tree);
    }
    auto report = validate(*tree);
    CHECK_FALSE(report.executable);

    ValidateOptions roomy;
    roomy.max_depth = 64;
    CHECK(validate(*tree, roomy).executable);
}

TEST_CASE("placeholder monotonicity property") {
    // Executable iff every placeholder index is strictly below its
    // primitive's execution position.
    std::mt19937 rng(5150);
    for (int i = 0; i < 200; ++i) {
        auto tree = hexec_test::random_tree(rng, 5);
        auto prims = execution_primitives(*tree);
        bool expect_ok = true;
        for (size_t k = 0; k < prims.size(); ++k) {
            for (const auto& ref : find_placeholders(prims[k].node->as_primitive().text)) {
                if (ref.index >= static_cast<int>(k) + 1) expect_ok = false;
            }
        }
        CHECK(validate(*tree).executable == expect_ok);
    }
}

TEST_CASE("depth counts levels with a bare primitive at one") {
    CHECK(depth(*HExpr::primitive("q")) == 1);
    auto e = parse_hexpression("JOIN[ a, JOIN[ b, JOIN[ c, d ] ] ]");
    CHECK(depth(*e) == 4);
}
