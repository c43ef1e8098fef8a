#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "hexec/http_reader.hpp"
#include "hexec/reader.hpp"

using namespace hexec;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(HEXEC_TEST_TMP);
    std::string path = std::string(HEXEC_TEST_TMP) + "/" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("fact store loads JSONL and looks up normalized questions") {
    auto path = write_temp("facts.jsonl",
                           R"({"question": "who is winner of 1894-95 FA Cup", "answers": ["Aston Villa"]})"
                           "\n"
                           R"({"question": "Who directed Titanic?", "answers": ["James Cameron", "Someone Else"]})"
                           "\n");
    FactStore store = FactStore::from_jsonl(path);
    CHECK(store.size() == 2);
    REQUIRE(store.lookup("who is winner of 1894-95 FA Cup") != nullptr);
    CHECK(store.lookup("missing question") == nullptr);
    // Case and articles do not matter.
    REQUIRE(store.lookup("Who is the winner of 1894-95 FA CUP?") != nullptr);
}

TEST_CASE("oracle reader answers from the store with ranked scores") {
    FactStore store;
    store.add("who is winner of 1894-95 FA Cup", {"Aston Villa"});
    store.add("who directed Titanic", {"James Cameron", "Someone Else"});
    OracleReader reader(std::move(store));

    auto hit = reader.answer({"who is winner of 1894-95 FA Cup", {}, 5});
    REQUIRE(hit.size() == 1);
    CHECK(hit[0].answer == "Aston Villa");
    CHECK(hit[0].score == 1.0);

    CHECK(reader.answer({"unknown question", {}, 5}).empty());

    auto variant = reader.answer({"WHO IS THE WINNER OF 1894-95 FA CUP", {}, 5});
    REQUIRE(variant.size() == 1);
    CHECK(variant[0].answer == "Aston Villa");

    auto ranked = reader.answer({"who directed Titanic", {}, 5});
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].score == 1.0);
    CHECK(ranked[1].score == 0.9);
    CHECK(ranked[0].score > ranked[1].score);

    auto truncated = reader.answer({"who directed Titanic", {}, 1});
    CHECK(truncated.size() == 1);
}

TEST_CASE("fixture reader: first matching pattern wins") {
    FixtureReader reader({
        {"member of sports team", {{"Birmingham City", 1.0}}},
        {"sports", {{"wrong answer", 1.0}}},
        {"winner", {{"Aston Villa", 1.0}, {"Everton", 0.4}}},
    });

    auto hit = reader.answer({"what is member of sports team of Duane Courtney", {}, 5});
    REQUIRE(hit.size() == 1);
    CHECK(hit[0].answer == "Birmingham City");

    CHECK(reader.answer({"nothing matches here", {}, 5}).empty());

    // Patterns match case-insensitively.
    auto ci = reader.answer({"WHO IS WINNER OF THE CUP", {}, 5});
    REQUIRE(ci.size() == 2);
    CHECK(ci[0].answer == "Aston Villa");
}

TEST_CASE("fixture reader loads from JSONL") {
    auto path = write_temp("fixture.jsonl",
                           R"({"pattern": "capital", "candidates": [{"answer": "Paris", "score": 0.9}]})"
                           "\n");
    FixtureReader reader = FixtureReader::from_jsonl(path);
    auto hit = reader.answer({"what is the capital of France", {}, 5});
    REQUIRE(hit.size() == 1);
    CHECK(hit[0].answer == "Paris");
}

TEST_CASE("reader outputs are rank-sorted") {
    FixtureReader reader({{"q", {{"low", 0.1}, {"high", 0.9}, {"mid", 0.5}}}});
    auto out = reader.answer({"q", {}, 5});
    REQUIRE(out.size() == 3);
    for (size_t i = 1; i < out.size(); ++i) {
        CHECK(out[i - 1].score >= out[i].score);
    }
}

TEST_CASE("remote reader round-trips the wire protocol") {
    httplib::Server server;
    std::atomic<int> requests{0};
    server.Post("/answer", [&](const httplib::Request& req, httplib::Response& res) {
        ++requests;
        auto body = nlohmann::json::parse(req.body);
        REQUIRE(body.contains("question"));
        REQUIRE(body.contains("passages"));
        REQUIRE(body.contains("top_k"));
        nlohmann::json reply = {
            {"candidates",
             {{{"answer", "Aston Villa"}, {"score", 0.93}},
              {{"answer", "Everton"}, {"score", 0.44}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    RemoteReaderConfig config;
    config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/answer";
    config.timeout_ms = 2000;
    config.retries = 0;
    RemoteReader reader(config);

    auto out = reader.answer({"who is winner of 1894-95 FA Cup",
                              {{"FA Cup", "Aston Villa won the cup."}}, 5});
    REQUIRE(out.size() == 2);
    CHECK(out[0].answer == "Aston Villa");
    CHECK(out[1].answer == "Everton");
    CHECK(requests == 1);

    server.stop();
    server_thread.join();
}

TEST_CASE("remote reader retries server errors then reports unavailable") {
    httplib::Server server;
    std::atomic<int> requests{0};
    server.Post("/answer", [&](const httplib::Request&, httplib::Response& res) {
        ++requests;
        res.status = 500;
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    RemoteReaderConfig config;
    config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/answer";
    config.timeout_ms = 2000;
    config.retries = 2;
    config.backoff_ms = 1;
    RemoteReader reader(config);

    try {
        reader.answer({"q", {}, 5});
        FAIL("expected ReaderError");
    } catch (const ReaderError& e) {
        CHECK(e.kind() == ReaderError::Kind::Unavailable);
    }
    CHECK(requests == 3);  // first try + 2 retries

    server.stop();
    server_thread.join();
}

TEST_CASE("remote reader flags malformed responses as protocol errors") {
    httplib::Server server;
    server.Post("/missing", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"something_else": []})", "application/json");
    });
    server.Post("/badjson", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json at all", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto expect_protocol_error = [&](const std::string& path) {
        RemoteReaderConfig config;
        config.endpoint = "http://127.0.0.1:" + std::to_string(port) + path;
        config.timeout_ms = 2000;
        config.retries = 0;
        RemoteReader reader(config);
        try {
            reader.answer({"q", {}, 5});
            FAIL("expected ReaderError");
        } catch (const ReaderError& e) {
            CHECK(e.kind() == ReaderError::Kind::Protocol);
        }
    };
    expect_protocol_error("/missing");
    expect_protocol_error("/badjson");

    server.stop();
    server_thread.join();
}

TEST_CASE("remote reader treats an unreachable endpoint as unavailable") {
    RemoteReaderConfig config;
    config.endpoint = "http://127.0.0.1:1/answer";  // nothing listens on port 1
    config.timeout_ms = 200;
    config.retries = 0;
    config.backoff_ms = 1;
    RemoteReader reader(config);
    CHECK_THROWS_AS(reader.answer({"q", {}, 5}), ReaderError);
}
