#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hexec/answer.hpp"
#include "hexec/execute.hpp"
#include "hexec/jsonl.hpp"

// Scoring: answer exact match and token-level F1 over normalized text,
// executability rates, and report aggregation with the parse-stage vs
// execution-stage error split.

namespace hexec {

/// 1 iff the normalized prediction equals any normalized gold answer.
inline int exact_match(const std::string& predicted, const std::vector<std::string>& gold,
                       const NormalizeOptions& norm = {}) {
    std::string p = normalize_answer(predicted, norm);
    for (const auto& g : gold) {
        if (p == normalize_answer(g, norm)) return 1;
    }
    return 0;
}

/// Bag-of-tokens F1 against each gold answer; the best gold counts.
/// When either side normalizes to nothing, F1 is exact agreement.
inline double token_f1(const std::string& predicted, const std::vector<std::string>& gold,
                       const NormalizeOptions& norm = {}) {
    auto pred_tokens = answer_tokens(predicted, norm);
    double best = 0.0;
    for (const auto& g : gold) {
        auto gold_tokens = answer_tokens(g, norm);
        if (pred_tokens.empty() || gold_tokens.empty()) {
            best = std::max(best, pred_tokens == gold_tokens ? 1.0 : 0.0);
            continue;
        }
        std::unordered_map<std::string, int> counts;
        for (const auto& t : gold_tokens) ++counts[t];
        int common = 0;
        for (const auto& t : pred_tokens) {
            auto it = counts.find(t);
            if (it != counts.end() && it->second > 0) {
                --it->second;
                ++common;
            }
        }
        if (common == 0) continue;
        double precision = static_cast<double>(common) / pred_tokens.size();
        double recall = static_cast<double>(common) / gold_tokens.size();
        best = std::max(best, 2 * precision * recall / (precision + recall));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Executability

/// One item's fallback outcome: how many candidates were offered and
/// which (1-based) was the first to execute, if any.
struct ExecAttempt {
    int num_candidates = 0;
    std::optional<int> first_executable;
};

struct ExecutabilityRates {
    double top1_rate = 0.0;
    double topk_rate = 0.0;
    int total = 0;
};

inline ExecutabilityRates executability_rate(const std::vector<ExecAttempt>& attempts) {
    ExecutabilityRates rates;
    rates.total = static_cast<int>(attempts.size());
    if (attempts.empty()) return rates;
    int top1 = 0, topk = 0;
    for (const auto& a : attempts) {
        if (a.first_executable) {
            ++topk;
            if (*a.first_executable == 1) ++top1;
        }
    }
    rates.top1_rate = static_cast<double>(top1) / attempts.size();
    rates.topk_rate = static_cast<double>(topk) / attempts.size();
    return rates;
}

// ---------------------------------------------------------------------------
// Aggregation

struct ScoredPrediction {
    std::string id;
    std::string predicted;
    std::vector<std::string> gold;  // non-empty
    std::optional<std::string> reasoning_type;
    ExecStatus exec_status;
    bool dict_answer = false;  // final answer was a UNION dictionary
};

enum class GroupBy { None, ReasoningType };

/// Failure codes raised before any primitive runs are parse-stage; the
/// rest happen while answering single-hop questions.
inline bool is_parse_stage_code(const std::string& code) {
    return code == "parse_error" || code == "not_executable" || code == "no_candidates";
}

struct MetricsGroup {
    int count = 0;
    double em = 0.0;
    double f1 = 0.0;
};

struct FailureCounts {
    int soft_parse = 0;
    int soft_execution = 0;
    int hard_parse = 0;
    int hard_execution = 0;

    int parse_errors() const { return soft_parse + hard_parse; }
    int execution_errors() const { return soft_execution + hard_execution; }
};

struct EvalReport {
    MetricsGroup overall;
    std::map<std::string, MetricsGroup> by_group;
    FailureCounts failures;
    int dict_answers = 0;
};

inline EvalReport aggregate(const std::vector<ScoredPrediction>& predictions,
                            GroupBy group_by = GroupBy::None,
                            const NormalizeOptions& norm = {}) {
    EvalReport report;
    std::map<std::string, std::pair<double, double>> group_sums;  // em, f1
    std::map<std::string, int> group_counts;
    double em_sum = 0, f1_sum = 0;

    for (const auto& p : predictions) {
        double em = exact_match(p.predicted, p.gold, norm);
        double f1 = token_f1(p.predicted, p.gold, norm);
        em_sum += em;
        f1_sum += f1;
        if (group_by == GroupBy::ReasoningType) {
            std::string key = p.reasoning_type.value_or("unknown");
            group_sums[key].first += em;
            group_sums[key].second += f1;
            ++group_counts[key];
        }
        if (p.dict_answer) ++report.dict_answers;
        switch (p.exec_status.level) {
            case ExecStatus::Level::Success:
                break;
            case ExecStatus::Level::SoftFail:
                (is_parse_stage_code(p.exec_status.code) ? report.failures.soft_parse
                                                         : report.failures.soft_execution)++;
                break;
            case ExecStatus::Level::HardFail:
                (is_parse_stage_code(p.exec_status.code) ? report.failures.hard_parse
                                                         : report.failures.hard_execution)++;
                break;
        }
    }

    report.overall.count = static_cast<int>(predictions.size());
    if (!predictions.empty()) {
        report.overall.em = em_sum / predictions.size();
        report.overall.f1 = f1_sum / predictions.size();
    }
    for (const auto& [key, sums] : group_sums) {
        MetricsGroup g;
        g.count = group_counts[key];
        g.em = sums.first / g.count;
        g.f1 = sums.second / g.count;
        report.by_group[key] = g;
    }
    return report;
}

inline ojson report_to_json(const EvalReport& report) {
    ojson j;
    j["overall"] = {{"count", report.overall.count},
                    {"em", report.overall.em},
                    {"f1", report.overall.f1}};
    if (!report.by_group.empty()) {
        ojson groups = ojson::object();
        for (const auto& [key, g] : report.by_group) {
            groups[key] = {{"count", g.count}, {"em", g.em}, {"f1", g.f1}};
        }
        j["by_reasoning_type"] = groups;
    }
    j["failures"] = {
        {"soft_fail", {{"parse_stage", report.failures.soft_parse},
                       {"execution_stage", report.failures.soft_execution}}},
        {"hard_fail", {{"parse_stage", report.failures.hard_parse},
                       {"execution_stage", report.failures.hard_execution}}},
        {"parse_errors", report.failures.parse_errors()},
        {"execution_errors", report.failures.execution_errors()},
    };
    if (report.dict_answers > 0) {
        // A root UNION has no single gold-style answer; its values were
        // scored as a concatenation in slot order.
        j["dict_answers_scored_as_concatenation"] = report.dict_answers;
    }
    return j;
}

}  // namespace hexec
