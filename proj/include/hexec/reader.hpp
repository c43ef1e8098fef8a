#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hexec/answer.hpp"
#include "hexec/jsonl.hpp"

// The pluggable single-hop reader interface plus the two local
// implementations: a fact-store oracle and a scripted fixture. The remote
// HTTP reader lives in http_reader.hpp.

namespace hexec {

struct PassageRef {
    std::string title;
    std::string text;
};

struct ReaderRequest {
    std::string question;  // post-substitution
    std::vector<PassageRef> passages;
    int top_k = 5;
};

class ReaderError : public std::runtime_error {
public:
    enum class Kind { Unavailable, Protocol };

    ReaderError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Maps a single-hop question (plus passages) to ranked answer candidates.
/// Implementations must tolerate concurrent calls; per-request state is
/// isolated.
class Reader {
public:
    virtual ~Reader() = default;
    virtual std::vector<ReaderCandidate> answer(const ReaderRequest& request) const = 0;
};

namespace detail {

inline void rank_and_truncate(std::vector<ReaderCandidate>& candidates, int top_k) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const ReaderCandidate& a, const ReaderCandidate& b) {
                         return a.score > b.score;
                     });
    if (top_k >= 1 && candidates.size() > static_cast<size_t>(top_k)) {
        candidates.resize(static_cast<size_t>(top_k));
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fact store + oracle reader

/// Exact-lookup store keyed on normalized question text. File format:
/// JSONL of {"question": str, "answers": [str, ...]}.
class FactStore {
public:
    FactStore() = default;

    static FactStore from_jsonl(const std::string& path) {
        FactStore store;
        for (const auto& line : read_jsonl(path)) {
            if (!line.contains("question") || !line.contains("answers")) {
                throw IoError(path + ": fact entry needs \"question\" and \"answers\"");
            }
            std::vector<std::string> answers;
            for (const auto& a : line.at("answers")) {
                answers.push_back(a.get<std::string>());
            }
            store.add(line.at("question").get<std::string>(), std::move(answers));
        }
        return store;
    }

    void add(const std::string& question, std::vector<std::string> answers) {
        auto& slot = entries_[normalize_answer(question)];
        for (auto& a : answers) slot.push_back(std::move(a));
    }

    const std::vector<std::string>* lookup(const std::string& question) const {
        auto it = entries_.find(normalize_answer(question));
        return it == entries_.end() ? nullptr : &it->second;
    }

    size_t size() const { return entries_.size(); }

private:
    std::unordered_map<std::string, std::vector<std::string>> entries_;
};

/// Desk-scale oracle: answers come from a fact store, scores 1.0, 0.9,
/// 0.8, ... by rank. Passages are ignored. Immutable after construction.
class OracleReader : public Reader {
public:
    explicit OracleReader(FactStore store) : store_(std::move(store)) {}

    std::vector<ReaderCandidate> answer(const ReaderRequest& request) const override {
        std::vector<ReaderCandidate> out;
        if (const auto* answers = store_.lookup(request.question)) {
            double score = 1.0;
            for (const auto& a : *answers) {
                out.push_back({a, score});
                score = std::max(0.0, score - 0.1);
            }
        }
        detail::rank_and_truncate(out, request.top_k);
        return out;
    }

    const FactStore& store() const { return store_; }

private:
    FactStore store_;
};

// ---------------------------------------------------------------------------
// Fixture reader

struct FixtureRule {
    std::string pattern;  // case-insensitive substring of the question
    std::vector<ReaderCandidate> candidates;
};

/// Deterministic test double: the first rule whose pattern occurs in the
/// question wins; no match yields no candidates.
class FixtureReader : public Reader {
public:
    explicit FixtureReader(std::vector<FixtureRule> rules) : rules_(std::move(rules)) {}

    /// JSONL of {"pattern": str, "candidates": [{"answer": str, "score": num}]}.
    static FixtureReader from_jsonl(const std::string& path) {
        std::vector<FixtureRule> rules;
        for (const auto& line : read_jsonl(path)) {
            FixtureRule rule;
            rule.pattern = line.at("pattern").get<std::string>();
            for (const auto& c : line.at("candidates")) {
                rule.candidates.push_back(
                    {c.at("answer").get<std::string>(), c.value("score", 0.0)});
            }
            rules.push_back(std::move(rule));
        }
        return FixtureReader(std::move(rules));
    }

    std::vector<ReaderCandidate> answer(const ReaderRequest& request) const override {
        std::string haystack = lowered(request.question);
        for (const auto& rule : rules_) {
            if (haystack.find(lowered(rule.pattern)) != std::string::npos) {
                auto out = rule.candidates;
                detail::rank_and_truncate(out, request.top_k);
                return out;
            }
        }
        return {};
    }

private:
    static std::string lowered(std::string_view s) {
        std::string out;
        out.reserve(s.size());
        for (unsigned char c : s) out.push_back(static_cast<char>(std::tolower(c)));
        return out;
    }

    std::vector<FixtureRule> rules_;
};

}  // namespace hexec
