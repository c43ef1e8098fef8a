#include <catch2/catch_amalgamated.hpp>

#include "hexec/answer.hpp"

using namespace hexec;

TEST_CASE("normalize_answer lowers, strips articles and punctuation") {
    CHECK(normalize_answer("The Mask of Fu Manchu") == "mask of fu manchu");
    CHECK(normalize_answer("Aston Villa") == "aston villa");
    CHECK(normalize_answer("  U.S.A.! ") == "usa");
    CHECK(normalize_answer("An  apple   a day") == "apple day");
    CHECK(normalize_answer("McDonald's") == "mcdonalds");
    CHECK(normalize_answer("") == "");
    CHECK(normalize_answer("THE THE the") == "");
}

TEST_CASE("answer_tokens splits normalized text") {
    auto toks = answer_tokens("The Mask of Fu Manchu");
    REQUIRE(toks.size() == 4);
    CHECK(toks[0] == "mask");
    CHECK(toks[3] == "manchu");
}

TEST_CASE("coerce_number handles integers, dates and prose") {
    CHECK(coerce_number("72") == 72.0);
    CHECK(coerce_number("1 December 2010") == 2010.0);
    CHECK_FALSE(coerce_number("unknown").has_value());
    CHECK(coerce_number("4 siblings") == 4.0);
    CHECK(coerce_number("about 12") == 12.0);
    CHECK(coerce_number("1,234") == 1234.0);
    CHECK(coerce_number("1,234,567") == 1234567.0);
    CHECK(coerce_number("-15") == -15.0);
    CHECK(coerce_number("3.5") == 3.5);
    CHECK(coerce_number("December 1, 2010") == 2010.0);
    CHECK_FALSE(coerce_number("twelve").has_value());
    CHECK_FALSE(coerce_number("").has_value());
    CHECK_FALSE(coerce_number("one two three four").has_value());
    // Malformed grouping is not an integer.
    CHECK_FALSE(coerce_number("1,23").has_value());
}

TEST_CASE("parse_comparable picks numeric, date, then lexical") {
    auto c = parse_comparable("1 December 2010");
    CHECK(c.kind == ComparableValue::Kind::Date);
    CHECK(c.date == DateKey{2010, 12, 1});

    c = parse_comparable("1932");
    CHECK(c.kind == ComparableValue::Kind::Numeric);
    CHECK(c.number == 1932.0);

    c = parse_comparable("Blind Shaft");
    CHECK(c.kind == ComparableValue::Kind::Lexical);
    CHECK(c.lexical == "blind shaft");
}

TEST_CASE("parse_comparable date format coverage") {
    CHECK(parse_comparable("December 1, 2010").date == DateKey{2010, 12, 1});
    CHECK(parse_comparable("December 2010").date == DateKey{2010, 12, 1});
    CHECK(parse_comparable("2010-12-01").date == DateKey{2010, 12, 1});
    CHECK(parse_comparable("3 May 1940").date == DateKey{1940, 5, 3});
    CHECK(parse_comparable("Dec 2010").date == DateKey{2010, 12, 1});
    // Missing month/day default to January 1.
    CHECK(parse_comparable("May 2001").date == DateKey{2001, 5, 1});
    // Not a real date: falls through to lexical.
    CHECK(parse_comparable("32 December 2010").kind == ComparableValue::Kind::Lexical);
    CHECK(parse_comparable("Decembruary 2010").kind == ComparableValue::Kind::Lexical);
}

TEST_CASE("compare is total within a variant and undefined across") {
    auto num = [](double v) { return ComparableValue::numeric(v); };
    CHECK(compare(num(1932), num(2003)) == -1);
    CHECK(compare(num(2003), num(1932)) == 1);
    CHECK(compare(num(7), num(7)) == 0);

    auto d1 = parse_comparable("1 December 2010");
    auto d2 = parse_comparable("2 December 2010");
    CHECK(compare(d1, d2) == -1);
    CHECK(compare(d2, d1) == 1);
    CHECK(compare(d1, d1) == 0);

    CHECK_FALSE(compare(num(1932), d1).has_value());

    auto l1 = parse_comparable("alpha");
    auto l2 = parse_comparable("beta");
    CHECK(compare(l1, l2) == -1);
}

TEST_CASE("render_number drops trailing .0 for integers") {
    CHECK(render_number(72.0) == "72");
    CHECK(render_number(-3.0) == "-3");
    CHECK(render_number(0.0) == "0");
    CHECK(render_number(2.5) == "2.5");
    CHECK(render_number(1234567.0) == "1234567");
}

TEST_CASE("AnswerValue display and scoring forms") {
    CHECK(AnswerValue::span("New York").display_text() == "New York");
    CHECK(AnswerValue::yes_no(false).display_text() == "No");
    CHECK(AnswerValue::yes_no(true).display_text() == "Yes");
    CHECK(AnswerValue::number(72).display_text() == "72");
    CHECK(AnswerValue::empty().display_text() == "");

    auto d = AnswerValue::dict({{1, "McDonald's"}, {2, "England"}});
    CHECK(d.display_text() == "{Ans#1: McDonald's, Ans#2: England}");
    CHECK(d.scoring_text() == "McDonald's England");
}
