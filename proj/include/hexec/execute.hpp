#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hexec/answer.hpp"
#include "hexec/hexpr.hpp"
#include "hexec/jsonl.hpp"
#include "hexec/parse.hpp"
#include "hexec/reader.hpp"
#include "hexec/validate.hpp"

// The executor: reverse in-order evaluation of an H-expression against a
// single-hop reader. Primitives are resolved right-to-left with answers
// stored in slot order; operation nodes combine child answers with
// deterministic rules. Every step lands in the trace.

namespace hexec {

enum class TiePolicy { RightEntity, LeftEntity };
enum class EmptyIntersectionPolicy { ReturnEmpty, UseLeftTop };

inline const std::vector<std::string>& default_entity_template_heads() {
    // Longest heads first so "country of citizenship of" wins over
    // "country of".
    static const std::vector<std::string> heads = {
        "member of sports team of",
        "country of citizenship of",
        "publication date of",
        "date of birth of",
        "date of death of",
        "place of birth of",
        "place of death of",
        "country of",
        "director of",
        "residence of",
        "winner of",
        "founder of",
        "spouse of",
        "sibling of",
        "capital of",
    };
    return heads;
}

struct ExecConfig {
    int top_k = 5;
    PlaceholderSyntax placeholders{};
    std::vector<DateFormat> date_formats = default_date_formats();
    NormalizeOptions normalization{};
    TiePolicy tie_policy = TiePolicy::RightEntity;
    EmptyIntersectionPolicy empty_intersection_policy = EmptyIntersectionPolicy::ReturnEmpty;
    int max_depth = 16;
    std::vector<std::string> entity_template_heads = default_entity_template_heads();
    /// Optional override for main-entity extraction; when unset the
    /// built-in heuristic runs.
    std::function<std::string(const std::string&, const std::optional<std::string>&)>
        entity_extractor;
};

// ---------------------------------------------------------------------------
// Answer memory

class SubstitutionError : public std::runtime_error {
public:
    explicit SubstitutionError(int missing_index)
        : std::runtime_error("no stored answer for placeholder index " +
                             std::to_string(missing_index)),
          missing_index_(missing_index) {}

    int missing_index() const { return missing_index_; }

private:
    int missing_index_;
};

/// Execution-ordered answer store: slot k holds the answer of the k-th
/// executed primitive and is written exactly once.
class AnswerMemory {
public:
    int store(std::string answer_text) {
        slots_.push_back(std::move(answer_text));
        return static_cast<int>(slots_.size());
    }

    std::optional<std::string> lookup(int k) const {
        if (k < 1 || static_cast<size_t>(k) > slots_.size()) return std::nullopt;
        return slots_[static_cast<size_t>(k) - 1];
    }

    size_t size() const { return slots_.size(); }
    const std::vector<std::string>& slots() const { return slots_; }

private:
    std::vector<std::string> slots_;
};

/// Replace every recognized placeholder with its stored answer, in one
/// left-to-right pass (substituted text is never re-scanned).
inline std::string substitute_placeholders(std::string_view text, const AnswerMemory& memory,
                                           const PlaceholderSyntax& syntax = {}) {
    std::string out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        int index = 0;
        size_t len = detail::match_placeholder(text, pos, syntax, index);
        if (len > 0) {
            auto stored = memory.lookup(index);
            if (!stored) throw SubstitutionError(index);
            out += *stored;
            pos += len;
        } else {
            out.push_back(text[pos]);
            ++pos;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Execution status and trace

struct ExecStatus {
    enum class Level { Success, SoftFail, HardFail };

    Level level = Level::Success;
    std::string code;

    static ExecStatus success() { return {}; }
    static ExecStatus soft_fail(std::string code) { return {Level::SoftFail, std::move(code)}; }
    static ExecStatus hard_fail(std::string code) { return {Level::HardFail, std::move(code)}; }

    bool ok() const { return level == Level::Success; }
    bool hard() const { return level == Level::HardFail; }

    std::string to_string() const {
        switch (level) {
            case Level::Success: return "SUCCESS";
            case Level::SoftFail: return "SOFT_FAIL:" + code;
            case Level::HardFail: return "HARD_FAIL:" + code;
        }
        return "SUCCESS";
    }

    static ExecStatus from_string(std::string_view s) {
        auto split = [&](std::string_view prefix) -> std::optional<std::string> {
            if (s.substr(0, prefix.size()) != prefix) return std::nullopt;
            std::string_view rest = s.substr(prefix.size());
            if (!rest.empty() && rest.front() == ':') rest.remove_prefix(1);
            else if (!rest.empty() && rest.front() == '(') {
                rest.remove_prefix(1);
                if (!rest.empty() && rest.back() == ')') rest.remove_suffix(1);
            }
            return std::string(rest);
        };
        if (auto c = split("HARD_FAIL")) return hard_fail(*c);
        if (auto c = split("SOFT_FAIL")) return soft_fail(*c);
        return success();
    }
};

struct TraceStep {
    enum class Kind { Primitive, Operation };

    int step_index = 0;  // 1-based, trace order
    std::string node_path;
    Kind kind = Kind::Primitive;

    // primitives only
    std::string question_after_substitution;
    std::vector<ReaderCandidate> reader_candidates;
    std::optional<int> slot;

    // operations only
    std::optional<OpKind> op_kind;
    std::string left_operand;
    std::string right_operand;

    std::optional<std::string> soft_fail;
    AnswerValue output;
};

/// One failed fallback candidate: where it failed and why.
struct AttemptNote {
    int candidate_index = 0;  // 1-based
    std::string stage;        // "parse" | "validate" | "execute"
    std::string code;
    std::string detail;
};

struct ExecutionTrace {
    std::vector<TraceStep> steps;
    ExecStatus status;
    std::vector<std::string> memory_slots;
    std::vector<AttemptNote> attempts;
    std::optional<int> chosen_candidate;
};

struct ExecutionResult {
    AnswerValue answer;
    ExecutionTrace trace;
};

// ---------------------------------------------------------------------------
// Main-entity extraction

/// The subject entity of a comparison primitive. A dataset-provided hint
/// wins; otherwise match a known template head ("publication date of",
/// ...), then the last " of ", then strip leading wh-words.
inline std::string extract_main_entity(const std::string& question,
                                       const std::optional<std::string>& entity_hint,
                                       const ExecConfig& config = {}) {
    if (entity_hint && !entity_hint->empty()) return *entity_hint;
    if (config.entity_extractor) return config.entity_extractor(question, entity_hint);

    auto strip_tail = [](std::string s) {
        while (!s.empty() && (s.back() == '?' || s.back() == '.' ||
                              std::isspace(static_cast<unsigned char>(s.back())))) {
            s.pop_back();
        }
        return trim_copy(s);
    };

    std::string lowered;
    lowered.reserve(question.size());
    for (unsigned char c : question) lowered.push_back(static_cast<char>(std::tolower(c)));

    for (const auto& head : config.entity_template_heads) {
        size_t at = lowered.find(head);
        if (at != std::string::npos) {
            std::string tail = strip_tail(question.substr(at + head.size()));
            if (!tail.empty()) return tail;
        }
    }

    size_t of_at = lowered.rfind(" of ");
    if (of_at != std::string::npos) {
        std::string tail = strip_tail(question.substr(of_at + 4));
        if (!tail.empty()) return tail;
    }

    // No " of ": drop leading wh-words and auxiliaries.
    auto tokens = detail::whitespace_tokens(strip_tail(question));
    static const std::vector<std::string> skippable = {
        "who", "what", "when", "where", "which", "why", "how", "whom", "whose",
        "is", "are", "was", "were", "does", "did", "do"};
    size_t start = 0;
    while (start < tokens.size()) {
        std::string low;
        for (unsigned char c : tokens[start]) low.push_back(static_cast<char>(std::tolower(c)));
        if (std::find(skippable.begin(), skippable.end(), low) == skippable.end()) break;
        ++start;
    }
    std::string out;
    for (size_t i = start; i < tokens.size(); ++i) {
        if (!out.empty()) out.push_back(' ');
        out += tokens[i];
    }
    return out.empty() ? strip_tail(question) : out;
}

// ---------------------------------------------------------------------------
// Operation semantics

struct OpOutcome {
    AnswerValue value;
    std::optional<std::string> soft_fail;
};

namespace detail {

inline std::optional<double> coerce_value(const AnswerValue& v,
                                          const std::vector<DateFormat>& formats) {
    if (v.is_number()) return v.as_number().value;
    return coerce_number(v.display_text(), formats);
}

inline AnswerValue make_dict(const AnswerValue& left, const AnswerValue& right) {
    // Right child first: it executed first, so its slots are lower. A
    // child value without a slot (an operation result) gets the next key
    // above every known slot.
    std::vector<std::pair<std::optional<int>, std::string>> collected;
    int max_key = 0;
    auto add = [&](const AnswerValue& v) {
        if (v.is_dict()) {
            for (const auto& e : v.as_dict().entries) {
                collected.push_back({e.first, e.second});
                max_key = std::max(max_key, e.first);
            }
        } else {
            collected.push_back({v.slot, v.display_text()});
            if (v.slot) max_key = std::max(max_key, *v.slot);
        }
    };
    add(right);
    add(left);
    std::vector<std::pair<int, std::string>> entries;
    for (auto& [key, value] : collected) {
        entries.push_back({key ? *key : ++max_key, std::move(value)});
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return AnswerValue::dict(std::move(entries));
}

inline OpOutcome intersect_candidates(const AnswerValue& left, const AnswerValue& right,
                                      const ExecConfig& config) {
    struct Entry {
        std::string surface;
        double score;
        size_t rank;
    };
    auto index_side = [&](const std::vector<ReaderCandidate>& cands) {
        std::map<std::string, Entry> best;
        for (size_t i = 0; i < cands.size(); ++i) {
            std::string key = normalize_answer(cands[i].answer, config.normalization);
            if (!best.count(key)) best[key] = {cands[i].answer, cands[i].score, i};
        }
        return best;
    };
    auto lhs = index_side(left.candidates);
    auto rhs = index_side(right.candidates);

    std::vector<ReaderCandidate> survivors;
    std::vector<size_t> left_rank;
    for (const auto& [key, le] : lhs) {
        auto it = rhs.find(key);
        if (it == rhs.end()) continue;
        survivors.push_back({le.surface, le.score + it->second.score});
        left_rank.push_back(le.rank);
    }
    // Summed score descending; left-list rank breaks ties.
    std::vector<size_t> order(survivors.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (survivors[a].score != survivors[b].score)
            return survivors[a].score > survivors[b].score;
        return left_rank[a] < left_rank[b];
    });
    std::vector<ReaderCandidate> ranked;
    for (size_t i : order) ranked.push_back(survivors[i]);

    if (ranked.empty()) {
        if (config.empty_intersection_policy == EmptyIntersectionPolicy::UseLeftTop &&
            !left.candidates.empty()) {
            AnswerValue v = AnswerValue::span(left.candidates.front().answer);
            v.candidates = {left.candidates.front()};
            return {std::move(v), std::string("empty_intersection")};
        }
        return {AnswerValue::empty(), std::string("empty_intersection")};
    }
    AnswerValue v = AnswerValue::span(ranked.front().answer);
    v.candidates = std::move(ranked);
    return {std::move(v), std::nullopt};
}

}  // namespace detail

/// Deterministic semantics of the eight operations. `left` is q2 and
/// `right` is q1; entities are the main entities of the operand subtrees
/// (used by the comparison kinds).
inline OpOutcome apply_operation(OpKind kind, const AnswerValue& left,
                                 const AnswerValue& right, const std::string& left_entity,
                                 const std::string& right_entity,
                                 const ExecConfig& config = {}) {
    switch (kind) {
        case OpKind::Join:
            // q2 was resolved after substitution; JOIN forwards its answer.
            return {left, std::nullopt};

        case OpKind::Union:
            return {detail::make_dict(left, right), std::nullopt};

        case OpKind::And:
            return detail::intersect_candidates(left, right, config);

        case OpKind::CompEq: {
            bool equal = normalize_answer(left.display_text(), config.normalization) ==
                         normalize_answer(right.display_text(), config.normalization);
            return {AnswerValue::yes_no(equal), std::nullopt};
        }

        case OpKind::CompLt:
        case OpKind::CompGt: {
            ComparableValue lv =
                parse_comparable(left.display_text(), config.date_formats, config.normalization);
            ComparableValue rv =
                parse_comparable(right.display_text(), config.date_formats, config.normalization);
            auto cmp = compare(lv, rv);
            if (!cmp) {
                return {AnswerValue::empty(), std::string("incomparable")};
            }
            if (*cmp == 0) {
                const std::string& entity =
                    config.tie_policy == TiePolicy::LeftEntity ? left_entity : right_entity;
                return {AnswerValue::span(entity), std::string("comparison_tie")};
            }
            bool left_wins = kind == OpKind::CompLt ? *cmp < 0 : *cmp > 0;
            AnswerValue v = AnswerValue::span(left_wins ? left_entity : right_entity);
            if (lv.kind == ComparableValue::Kind::Lexical) {
                // Comparing plain text lexicographically is best-effort;
                // flag it rather than fail.
                return {std::move(v), std::string("lexical_comparison")};
            }
            return {std::move(v), std::nullopt};
        }

        case OpKind::Sub:
        case OpKind::Add: {
            auto l = detail::coerce_value(left, config.date_formats);
            auto r = detail::coerce_value(right, config.date_formats);
            if (!l || !r) {
                return {AnswerValue::empty(), std::string("not_numeric")};
            }
            double result = kind == OpKind::Sub ? *l - *r : *l + *r;
            return {AnswerValue::number(result), std::nullopt};
        }
    }
    return {AnswerValue::empty(), std::string("unknown_operation")};
}

// ---------------------------------------------------------------------------
// Execution

namespace detail {

struct HardFailSignal {
    std::string code;
    std::string detail;
};

struct EvalContext {
    const std::vector<PassageRef>* passages;
    const Reader* reader;
    const ExecConfig* config;
    AnswerMemory memory;
    std::vector<TraceStep> steps;
    std::optional<std::string> first_soft_fail;

    void note_soft(const std::string& code) {
        if (!first_soft_fail) first_soft_fail = code;
    }
};

struct EvalOut {
    AnswerValue value;
    std::string main_entity;
};

inline EvalOut eval_node(const HExpr& node, const std::string& path, EvalContext& ctx) {
    const ExecConfig& cfg = *ctx.config;
    if (node.is_primitive()) {
        const Primitive& prim = node.as_primitive();
        std::string question;
        try {
            question = substitute_placeholders(prim.text, ctx.memory, cfg.placeholders);
        } catch (const SubstitutionError& e) {
            throw HardFailSignal{"unresolved_placeholder", e.what()};
        }
        std::vector<ReaderCandidate> candidates;
        try {
            candidates = ctx.reader->answer({question, *ctx.passages, cfg.top_k});
        } catch (const ReaderError& e) {
            throw HardFailSignal{"reader_unavailable", e.what()};
        }
        rank_and_truncate(candidates, cfg.top_k);

        int slot = ctx.memory.store(candidates.empty() ? "" : candidates.front().answer);
        AnswerValue value;
        if (candidates.empty()) {
            value = AnswerValue::empty();
            ctx.note_soft("empty_reader_result");
        } else {
            value = AnswerValue::span(candidates.front().answer);
        }
        value.candidates = candidates;
        value.slot = slot;

        TraceStep step;
        step.step_index = static_cast<int>(ctx.steps.size()) + 1;
        step.node_path = path;
        step.kind = TraceStep::Kind::Primitive;
        step.question_after_substitution = question;
        step.reader_candidates = candidates;
        step.slot = slot;
        if (candidates.empty()) step.soft_fail = "empty_reader_result";
        step.output = value;
        ctx.steps.push_back(std::move(step));

        return {std::move(value), extract_main_entity(question, prim.entity_hint, cfg)};
    }

    const Operation& op = node.as_operation();
    EvalOut right = eval_node(*op.right, child_path(path, false), ctx);
    EvalOut left = eval_node(*op.left, child_path(path, true), ctx);

    OpOutcome outcome = apply_operation(op.kind, left.value, right.value, left.main_entity,
                                        right.main_entity, cfg);
    if (outcome.soft_fail) ctx.note_soft(*outcome.soft_fail);

    TraceStep step;
    step.step_index = static_cast<int>(ctx.steps.size()) + 1;
    step.node_path = path;
    step.kind = TraceStep::Kind::Operation;
    step.op_kind = op.kind;
    step.left_operand = left.value.display_text();
    step.right_operand = right.value.display_text();
    step.soft_fail = outcome.soft_fail;
    step.output = outcome.value;
    ctx.steps.push_back(std::move(step));

    // A subtree's main entity is that of its first-executed (rightmost)
    // primitive.
    return {std::move(outcome.value), std::move(right.main_entity)};
}

}  // namespace detail

/// Execute a validated expression bottom-up. Soft failures are recorded
/// in the trace while a best-effort answer is still returned; hard
/// failures abort with a partial trace.
inline ExecutionResult execute(const HExpr::Ptr& expr, const std::vector<PassageRef>& passages,
                               const Reader& reader, const ExecConfig& config = {}) {
    if (!expr) throw std::invalid_argument("execute: null expression");

    detail::EvalContext ctx;
    ctx.passages = &passages;
    ctx.reader = &reader;
    ctx.config = &config;

    ExecutionResult result;
    try {
        detail::EvalOut out = detail::eval_node(*expr, "", ctx);
        result.answer = std::move(out.value);
        result.trace.status = ctx.first_soft_fail
                                  ? ExecStatus::soft_fail(*ctx.first_soft_fail)
                                  : ExecStatus::success();
    } catch (const detail::HardFailSignal& signal) {
        result.answer = AnswerValue::empty();
        result.trace.status = ExecStatus::hard_fail(signal.code);
    }
    result.trace.steps = std::move(ctx.steps);
    result.trace.memory_slots = ctx.memory.slots();
    return result;
}

/// Try candidate expressions in order; the first one that parses,
/// validates, and runs without a hard failure wins. Every failed attempt
/// is noted in the returned trace.
inline ExecutionResult execute_with_fallback(const std::vector<std::string>& candidates,
                                             const std::vector<PassageRef>& passages,
                                             const Reader& reader,
                                             const ExecConfig& config = {}) {
    std::vector<AttemptNote> attempts;
    std::optional<ExecutionResult> last_hard;

    for (size_t i = 0; i < candidates.size(); ++i) {
        int index = static_cast<int>(i) + 1;
        HExpr::Ptr expr;
        try {
            expr = parse_hexpression(candidates[i]);
        } catch (const ParseError& e) {
            attempts.push_back({index, "parse", "parse_error", e.what()});
            continue;
        }
        ValidateOptions vopts;
        vopts.max_depth = config.max_depth;
        vopts.placeholders = config.placeholders;
        ValidationReport report = validate(*expr, vopts);
        if (!report.executable) {
            std::string detail;
            for (const auto& d : report.diagnostics) {
                if (d.severity != Severity::Error) continue;
                if (!detail.empty()) detail += "; ";
                detail += d.code + ": " + d.message;
            }
            attempts.push_back({index, "validate", "not_executable", detail});
            continue;
        }
        ExecutionResult result = execute(expr, passages, reader, config);
        if (!result.trace.status.hard()) {
            result.trace.attempts = attempts;
            result.trace.chosen_candidate = index;
            return result;
        }
        attempts.push_back({index, "execute", result.trace.status.code, ""});
        result.trace.chosen_candidate = index;
        last_hard = std::move(result);
    }

    // Nothing ran to completion; surface the last hard failure, or a
    // parse/validation failure when no candidate even executed.
    ExecutionResult failed;
    if (last_hard) {
        failed = std::move(*last_hard);
    } else {
        failed.answer = AnswerValue::empty();
        std::string code = "parse_error";
        for (const auto& a : attempts) {
            if (a.stage == "validate") code = "not_executable";
        }
        failed.trace.status = ExecStatus::hard_fail(candidates.empty() ? "no_candidates" : code);
        failed.trace.chosen_candidate = std::nullopt;
    }
    failed.trace.attempts = std::move(attempts);
    return failed;
}

// ---------------------------------------------------------------------------
// Trace export

inline ojson answer_value_to_json(const AnswerValue& value) {
    ojson j;
    if (value.is_empty()) {
        j["type"] = "empty";
    } else if (value.is_span()) {
        j["type"] = "span";
        j["text"] = value.as_span().text;
    } else if (value.is_yes_no()) {
        j["type"] = "yesno";
        j["value"] = value.as_yes_no().value;
    } else if (value.is_number()) {
        j["type"] = "number";
        j["value"] = value.as_number().value;
    } else {
        j["type"] = "dict";
        ojson entries = ojson::object();
        for (const auto& [k, v] : value.as_dict().entries) {
            entries[std::to_string(k)] = v;
        }
        j["entries"] = entries;
    }
    j["display"] = value.display_text();
    if (value.slot) j["slot"] = *value.slot;
    return j;
}

inline ojson trace_to_json(const ExecutionTrace& trace) {
    ojson j;
    switch (trace.status.level) {
        case ExecStatus::Level::Success: j["status"] = "SUCCESS"; break;
        case ExecStatus::Level::SoftFail: j["status"] = "SOFT_FAIL"; break;
        case ExecStatus::Level::HardFail: j["status"] = "HARD_FAIL"; break;
    }
    j["status_code"] = trace.status.code;
    if (trace.chosen_candidate) j["chosen_candidate"] = *trace.chosen_candidate;
    if (!trace.attempts.empty()) {
        ojson attempts = ojson::array();
        for (const auto& a : trace.attempts) {
            attempts.push_back({{"candidate_index", a.candidate_index},
                                {"stage", a.stage},
                                {"code", a.code},
                                {"detail", a.detail}});
        }
        j["attempts"] = attempts;
    }
    ojson steps = ojson::array();
    for (const auto& step : trace.steps) {
        ojson s;
        s["step_index"] = step.step_index;
        s["node_path"] = step.node_path;
        s["kind"] = step.kind == TraceStep::Kind::Primitive ? "PRIMITIVE" : "OPERATION";
        if (step.kind == TraceStep::Kind::Primitive) {
            s["question_after_substitution"] = step.question_after_substitution;
            if (step.slot) s["slot"] = *step.slot;
            ojson cands = ojson::array();
            for (const auto& c : step.reader_candidates) {
                cands.push_back({{"answer", c.answer}, {"score", c.score}});
            }
            s["reader_candidates"] = cands;
        } else {
            s["op_kind"] = std::string(op_name(*step.op_kind));
            s["left_operand"] = step.left_operand;
            s["right_operand"] = step.right_operand;
        }
        if (step.soft_fail) s["soft_fail"] = *step.soft_fail;
        s["output"] = answer_value_to_json(step.output);
        steps.push_back(std::move(s));
    }
    j["steps"] = steps;
    ojson slots = ojson::object();
    for (size_t i = 0; i < trace.memory_slots.size(); ++i) {
        slots[std::to_string(i + 1)] = trace.memory_slots[i];
    }
    j["memory"] = slots;
    return j;
}

}  // namespace hexec
