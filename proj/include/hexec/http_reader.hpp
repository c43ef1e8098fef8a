#pragma once

#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"

#include "hexec/jsonl.hpp"
#include "hexec/reader.hpp"

// JSON-over-HTTP transport to a remote single-hop reader service.
//
// Request:  {"question": str, "passages": [{"title": str, "text": str}], "top_k": int}
// Response: {"candidates": [{"answer": str, "score": float}]}

namespace hexec {

struct RemoteReaderConfig {
    std::string endpoint;      // e.g. http://127.0.0.1:8080/answer
    int timeout_ms = 30000;
    int retries = 2;           // additional attempts after the first
    int backoff_ms = 200;      // doubled per retry
};

class RemoteReader : public Reader {
public:
    explicit RemoteReader(RemoteReaderConfig config) : config_(std::move(config)) {
        std::string url = config_.endpoint;
        size_t scheme = url.find("://");
        if (scheme == std::string::npos) {
            url = "http://" + url;
            scheme = 4;
        }
        size_t path_at = url.find('/', scheme + 3);
        if (path_at == std::string::npos) {
            base_ = url;
            path_ = "/";
        } else {
            base_ = url.substr(0, path_at);
            path_ = url.substr(path_at);
        }
    }

    std::vector<ReaderCandidate> answer(const ReaderRequest& request) const override {
        ojson body;
        body["question"] = request.question;
        ojson passages = ojson::array();
        for (const auto& p : request.passages) {
            passages.push_back({{"title", p.title}, {"text", p.text}});
        }
        body["passages"] = passages;
        body["top_k"] = request.top_k;
        std::string payload = body.dump();

        std::string last_error = "no attempts made";
        for (int attempt = 0; attempt <= config_.retries; ++attempt) {
            if (attempt > 0 && config_.backoff_ms > 0) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));
            }
            // A fresh client per call keeps per-request state isolated, so
            // concurrent executions can share one RemoteReader.
            httplib::Client client(base_);
            client.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
            client.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
            client.set_write_timeout(std::chrono::milliseconds(config_.timeout_ms));

            httplib::Result result = client.Post(path_, payload, "application/json");
            if (!result) {
                last_error = "transport error: " + httplib::to_string(result.error());
                continue;
            }
            if (result->status >= 500) {
                last_error = "server error: HTTP " + std::to_string(result->status);
                continue;
            }
            if (result->status != 200) {
                throw ReaderError(ReaderError::Kind::Protocol,
                                  "reader endpoint returned HTTP " +
                                      std::to_string(result->status));
            }
            return parse_response(result->body, request.top_k);
        }
        throw ReaderError(ReaderError::Kind::Unavailable,
                          "reader unreachable after " + std::to_string(config_.retries + 1) +
                              " attempts: " + last_error);
    }

private:
    static std::vector<ReaderCandidate> parse_response(const std::string& body, int top_k) {
        ojson j = ojson::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("candidates") ||
            !j.at("candidates").is_array()) {
            throw ReaderError(ReaderError::Kind::Protocol,
                              "malformed reader response: missing \"candidates\"");
        }
        std::vector<ReaderCandidate> out;
        for (const auto& c : j.at("candidates")) {
            if (!c.is_object() || !c.contains("answer")) {
                throw ReaderError(ReaderError::Kind::Protocol,
                                  "malformed reader candidate entry");
            }
            out.push_back({c.at("answer").get<std::string>(), c.value("score", 0.0)});
        }
        detail::rank_and_truncate(out, top_k);
        return out;
    }

    RemoteReaderConfig config_;
    std::string base_;
    std::string path_;
};

}  // namespace hexec
