#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "closed_loop.hpp"
#include "hexec/builder.hpp"
#include "hexec/metrics.hpp"
#include "hexec/parse.hpp"
#include "hexec/validate.hpp"

using namespace hexec;

namespace {

MusiqueRecord musique(const std::string& id, const std::string& answer,
                      std::vector<MusiqueSubQuestion> subs) {
    MusiqueRecord r;
    r.id = id;
    r.answer = answer;
    r.sub_questions = std::move(subs);
    return r;
}

}  // namespace

TEST_CASE("a 2-hop chain folds into a single JOIN") {
    auto record = musique("2hop__x", "Philip Davis",
                          {{"What is country of Inagua National Park", "Bahamas"},
                           {"Who is the deputy prime minister of the #1", "Philip Davis"}});
    auto expr = build_from_musique(record);
    CHECK(serialize(*expr) ==
          "JOIN[ Who is the deputy prime minister of the Ans#1, "
          "What is country of Inagua National Park ]");
    CHECK(validate(*expr).executable);
}

TEST_CASE("a 3-hop chain folds into nested JOINs") {
    auto record = musique("3hop1__x", "1054",
                          {{"Who is creator of The Last Judgment", "Michelangelo"},
                           {"In what city did #1 die?", "Rome"},
                           {"When did the greek orthodox church split from #2?", "1054"}});
    auto expr = build_from_musique(record);
    CHECK(serialize(*expr) ==
          "JOIN[ When did the greek orthodox church split from Ans#2?, "
          "JOIN[ In what city did Ans#1 die?, Who is creator of The Last Judgment ] ]");
}

TEST_CASE("independent branches combine through UNION before the consumer") {
    auto record = musique(
        "3hop2__x", "1780",
        {{"What is place of birth of Robert Banks", "Williamsburg"},
         {"What town is WTVR-FM licensed in?", "Richmond"},
         {"When did the capital of virginia moved from #1 to #2", "1780"}});
    auto expr = build_from_musique(record);
    CHECK(serialize(*expr) ==
          "JOIN[ When did the capital of virginia moved from Ans#1 to Ans#2, "
          "UNION[ What town is WTVR-FM licensed in?, "
          "What is place of birth of Robert Banks ] ]");
}

TEST_CASE("the 4-hop 3-entity shape mixes JOIN and UNION") {
    auto record = musique("4hop3__x", "634",
                          {{"Al-Mu'tamid is followed by What", "Al-Mu'tadid"},
                           {"What is country of citizenship of #1", "Abbasid Caliphate"},
                           {"What is country of Al-Mastumah", "Syria"},
                           {"When did muslim armies invade #3 and #2", "634"}});
    auto expr = build_from_musique(record);
    CHECK(serialize(*expr) ==
          "JOIN[ When did muslim armies invade Ans#3 and Ans#2, "
          "UNION[ What is country of Al-Mastumah, "
          "JOIN[ What is country of citizenship of Ans#1, "
          "Al-Mu'tamid is followed by What ] ] ]");
}

TEST_CASE("a single sub-question builds a bare primitive") {
    auto record = musique("2hop__single", "x", {{"Who directed Titanic?", "James Cameron"}});
    auto expr = build_from_musique(record);
    REQUIRE(expr->is_primitive());
    CHECK(expr->as_primitive().text == "Who directed Titanic?");
}

TEST_CASE("two independent sub-questions with one answer form an AND") {
    auto record = musique("2hop__and", "Dave Parker",
                          {{"Who is the former member of the Pittsburgh Pirates?", "Dave Parker"},
                           {"Who was nicknamed The Cobra?", "Dave Parker"}});
    auto expr = build_from_musique(record);
    REQUIRE(expr->is_operation());
    CHECK(expr->as_operation().kind == OpKind::And);
    CHECK(serialize(*expr) ==
          "AND[ Who was nicknamed The Cobra?, "
          "Who is the former member of the Pittsburgh Pirates? ]");
}

TEST_CASE("empty decompositions are unsupported") {
    auto record = musique("bad__empty", "x", {});
    CHECK_THROWS_AS(build_from_musique(record), UnsupportedShape);
}

TEST_CASE("forward references are rejected at load") {
    ojson j = {{"id", "bad__forward"},
               {"question", "q"},
               {"answer", "a"},
               {"question_decomposition",
                {{{"question", "what is #2?"}, {"answer", "x"}},
                 {{"question", "who is y?"}, {"answer", "y"}}}}};
    CHECK_THROWS_AS(musique_record_from_json(j), UnsupportedShape);
}

TEST_CASE("musique records load published field names") {
    ojson j = {{"id", "2hop__123_456"},
               {"question", "complex?"},
               {"answer", "a2"},
               {"question_decomposition",
                {{{"question", "q one"}, {"answer", "a1"}},
                 {{"question", "uses #1"}, {"answer", "a2"}}}},
               {"paragraphs",
                {{{"idx", 0}, {"title", "T"}, {"paragraph_text", "body text"}}}},
               {"answerable", true}};
    auto record = musique_record_from_json(j);
    CHECK(record.reasoning_type == "2hop");
    REQUIRE(record.sub_questions.size() == 2);
    CHECK(record.sub_questions[1].text == "uses #1");
    REQUIRE(record.passages.size() == 1);
    CHECK(record.passages[0].title == "T");
}

TEST_CASE("comparison records build COMP over template questions") {
    TwoWikiRecord record;
    record.id = "w1";
    record.question = "Which film was released first, And Who Is Kissing Me? or Bush Christmas?";
    record.answer = "Bush Christmas";
    record.reasoning_type = "comparison";
    record.evidences = {{"And Who Is Kissing Me?", "publication date", "1949"},
                        {"Bush Christmas", "publication date", "1947"}};
    auto expr = build_from_2wiki(record);
    REQUIRE(expr->is_operation());
    CHECK(expr->as_operation().kind == OpKind::CompLt);
    CHECK(serialize(*expr) ==
          "COMP_<[ What is publication date of And Who Is Kissing Me??, "
          "What is publication date of Bush Christmas? ]");
    CHECK(expr->as_operation().left->as_primitive().entity_hint ==
          "And Who Is Kissing Me?");
    CHECK(expr->as_operation().right->as_primitive().entity_hint == "Bush Christmas");
}

TEST_CASE("bridge and inference records build a JOIN with a #1 reference") {
    TwoWikiRecord record;
    record.id = "w2";
    record.question = "Where did the founder of Universidad De Piura die?";
    record.answer = "Rome";
    record.reasoning_type = "compositional";
    record.evidences = {{"Universidad De Piura", "founded by", "Josemaria Escriva"},
                        {"Josemaria Escriva", "place of death", "Rome"}};
    auto expr = build_from_2wiki(record);
    CHECK(serialize(*expr) ==
          "JOIN[ Where is #1's place of death?, "
          "Universidad De Piura is founded by Who? ]");
    CHECK(validate(*expr).executable);

    record.reasoning_type = "inference";
    record.evidences = {{"Favila Of Asturias", "sibling", "Ermesinda"},
                        {"Ermesinda", "spouse", "Alfonso I of Asturias"}};
    auto inf = build_from_2wiki(record);
    CHECK(serialize(*inf) ==
          "JOIN[ Who is spouse of #1?, Who is sibling of Favila Of Asturias? ]");
}

TEST_CASE("chain orientation is detected from the shared entity") {
    TwoWikiRecord record;
    record.id = "w3";
    record.reasoning_type = "bridge";
    record.question = "q";
    // The dependent triple comes first here.
    record.evidences = {{"Tod Browning", "place of birth", "New York"},
                        {"The Iron Man", "director", "Tod Browning"}};
    auto expr = build_from_2wiki(record);
    CHECK(serialize(*expr) ==
          "JOIN[ What is place of birth of #1?, Who is director of The Iron Man? ]");
}

TEST_CASE("bridge comparison builds COMP over two JOIN chains") {
    TwoWikiRecord record;
    record.id = "w4";
    record.question =
        "Which film has the director who was born later, Sleepers East or Leaving Fear Behind?";
    record.answer = "Leaving Fear Behind";
    record.reasoning_type = "bridge_comparison";
    record.evidences = {{"Sleepers East", "director", "Kenneth MacKenna"},
                        {"Kenneth MacKenna", "date of birth", "19 August 1899"},
                        {"Leaving Fear Behind", "director", "Dhondup Wangchen"},
                        {"Dhondup Wangchen", "date of birth", "17 October 1974"}};
    auto expr = build_from_2wiki(record);
    REQUIRE(expr->is_operation());
    CHECK(expr->as_operation().kind == OpKind::CompGt);
    CHECK(serialize(*expr) ==
          "COMP_>[ JOIN[ When is date of birth of #3?, Who is director of Sleepers East? ], "
          "JOIN[ When is date of birth of #1?, Who is director of Leaving Fear Behind? ] ]");
    CHECK(validate(*expr).executable);
}

TEST_CASE("unknown reasoning types are rejected") {
    TwoWikiRecord record;
    record.id = "w5";
    record.reasoning_type = "mystery";
    record.evidences = {{"a", "b", "c"}, {"c", "d", "e"}};
    CHECK_THROWS_AS(build_from_2wiki(record), UnsupportedReasoningType);
}

TEST_CASE("choose_comparison_kind scans keywords in order") {
    CHECK(choose_comparison_kind("Which film was came out first, Blind Shaft or ...").kind ==
          OpKind::CompLt);
    CHECK(choose_comparison_kind("Which film has the director who was born later, ...").kind ==
          OpKind::CompGt);
    CHECK(choose_comparison_kind("Are both located in the same country?").kind ==
          OpKind::CompEq);
    auto fallback = choose_comparison_kind("Compare these two things");
    CHECK(fallback.kind == OpKind::CompEq);
    CHECK_FALSE(fallback.keyword_found);
    // The earliest keyword in the question wins.
    CHECK(choose_comparison_kind("who was first and who was later").kind == OpKind::CompLt);
}

TEST_CASE("template_question fills relation templates") {
    CHECK(template_question("Inagua National Park", "country") ==
          "What is country of Inagua National Park?");
    CHECK(template_question("Bush Christmas", "publication date") ==
          "What is publication date of Bush Christmas?");
    CHECK(template_question("X", "unseen_relation") == "What is unseen_relation of X?");
}

TEST_CASE("template tables validate the subject slot") {
    TemplateTable table;
    CHECK_THROWS_AS(table.set("bad", "no subject here"), std::invalid_argument);
    CHECK_THROWS_AS(table.set("bad", "{subject} and {subject}"), std::invalid_argument);
    table.set("good", "Where is {subject}?");
    CHECK(table.question_for("Rome", "good") == "Where is Rome?");
}

TEST_CASE("closed loop: every bundled musique record reproduces its answer") {
    auto lines = read_jsonl(std::string(HEXEC_DATA_DIR) + "/musique_sample.jsonl");
    REQUIRE(lines.size() >= 20);
    std::set<std::string> types;
    for (const auto& line : lines) {
        auto record = musique_record_from_json(line);
        types.insert(record.reasoning_type);
        auto expr = build_from_musique(record);
        INFO("record " << record.id << " -> " << serialize(*expr));
        CHECK(validate(*expr).executable);

        OracleReader reader(hexec_test::oracle_from_musique(record));
        auto result = execute(expr, {}, reader);
        CHECK_FALSE(result.trace.status.hard());
        CHECK(exact_match(result.answer.scoring_text(), {record.answer}) == 1);
    }
    CHECK(types == std::set<std::string>{"2hop", "3hop1", "3hop2", "4hop1", "4hop2", "4hop3"});
}

TEST_CASE("closed loop: every bundled 2wiki record reproduces its answer") {
    auto lines = read_jsonl(std::string(HEXEC_DATA_DIR) + "/2wiki_sample.jsonl");
    REQUIRE(lines.size() >= 12);
    std::set<std::string> types;
    for (const auto& line : lines) {
        auto record = two_wiki_record_from_json(line);
        types.insert(record.reasoning_type);
        auto expr = build_from_2wiki(record);
        INFO("record " << record.id << " -> " << serialize(*expr));
        CHECK(validate(*expr).executable);

        OracleReader reader(hexec_test::oracle_from_2wiki(record));
        auto result = execute(expr, {}, reader);
        CHECK_FALSE(result.trace.status.hard());
        CHECK(exact_match(result.answer.scoring_text(), {record.answer}) == 1);
    }
    bool has_bridge = types.count("compositional") || types.count("bridge");
    CHECK(types.count("comparison") == 1);
    CHECK(has_bridge);
    CHECK(types.count("bridge_comparison") == 1);
    CHECK(types.count("inference") == 1);
}

TEST_CASE("placeholder renumbering is a bijection onto execution slots") {
    auto lines = read_jsonl(std::string(HEXEC_DATA_DIR) + "/musique_sample.jsonl");
    for (const auto& line : lines) {
        auto record = musique_record_from_json(line);
        auto expr = build_from_musique(record);
        if (expr->is_operation() && expr->as_operation().kind == OpKind::And) continue;
        auto prims = execution_primitives(*expr);
        REQUIRE(prims.size() == record.sub_questions.size());
        for (size_t k = 0; k < prims.size(); ++k) {
            // Slot k+1 executes the (k+1)-th dataset sub-question; its
            // references were rewritten to canonical Ans#j form.
            auto refs = find_placeholders(prims[k].node->as_primitive().text);
            auto original = find_placeholders(record.sub_questions[k].text);
            REQUIRE(refs.size() == original.size());
            for (size_t r = 0; r < refs.size(); ++r) {
                CHECK(refs[r].index == original[r].index);
                CHECK(refs[r].surface == "Ans#" + std::to_string(refs[r].index));
            }
        }
    }
}
