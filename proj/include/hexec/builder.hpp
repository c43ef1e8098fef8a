#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hexec/execute.hpp"
#include "hexec/hexpr.hpp"
#include "hexec/jsonl.hpp"
#include "hexec/reader.hpp"

// Gold H-expression construction from dataset annotations: MuSiQue
// decompositions (chains, branching entities, intersections) and 2WikiQA
// evidence triples keyed by reasoning type.

namespace hexec {

class BuildError : public std::runtime_error {
public:
    BuildError(const std::string& record_id, const std::string& message)
        : std::runtime_error(record_id + ": " + message), record_id_(record_id) {}

    const std::string& record_id() const { return record_id_; }

private:
    std::string record_id_;
};

class UnsupportedShape : public BuildError {
public:
    using BuildError::BuildError;
};

class UnsupportedReasoningType : public BuildError {
public:
    using BuildError::BuildError;
};

// ---------------------------------------------------------------------------
// Records

struct MusiqueSubQuestion {
    std::string text;    // may contain #k references to earlier answers
    std::string answer;
};

struct MusiqueRecord {
    std::string id;
    std::string question;
    std::string answer;
    std::string reasoning_type;  // 2hop, 3hop1, 3hop2, 4hop1, 4hop2, 4hop3
    std::vector<MusiqueSubQuestion> sub_questions;
    std::vector<PassageRef> passages;
};

struct EvidenceTriple {
    std::string subject;
    std::string relation;
    std::string object;
};

struct TwoWikiRecord {
    std::string id;
    std::string question;
    std::string answer;
    std::string reasoning_type;  // comparison, compositional/bridge, bridge_comparison, inference
    std::vector<EvidenceTriple> evidences;
    std::vector<PassageRef> passages;
};

// ---------------------------------------------------------------------------
// Templates

/// Relation -> natural-question template with a {subject} slot; unseen
/// relations fall back to "What is {relation} of {subject}?".
class TemplateTable {
public:
    TemplateTable() = default;

    static const TemplateTable& builtin() {
        static const TemplateTable table = [] {
            TemplateTable t;
            t.set("country", "What is country of {subject}?");
            t.set("place of birth", "What is place of birth of {subject}?");
            t.set("place of death", "Where is {subject}'s place of death?");
            t.set("publication date", "What is publication date of {subject}?");
            t.set("date of birth", "When is date of birth of {subject}?");
            t.set("date of death", "When is date of death of {subject}?");
            t.set("director", "Who is director of {subject}?");
            t.set("founded by", "{subject} is founded by Who?");
            t.set("founder", "Who is founder of {subject}?");
            t.set("spouse", "Who is spouse of {subject}?");
            t.set("sibling", "Who is sibling of {subject}?");
            t.set("member of sports team", "What is member of sports team of {subject}?");
            t.set("winner", "Who is winner of {subject}?");
            t.set("residence", "What is residence of {subject}?");
            t.set("capital", "{subject} is the capital city of which country?");
            t.set("named after", "{subject} is named after What?");
            t.set("followed by", "{subject} is followed by What?");
            t.set("country of citizenship", "What is country of citizenship of {subject}?");
            return t;
        }();
        return table;
    }

    /// JSON object {"relation": "template with {subject}", ...}; entries
    /// extend the builtin table.
    static TemplateTable from_json_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path);
        ojson j = ojson::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw IoError(path + ": expected a JSON object of relation -> template");
        }
        TemplateTable table = builtin();
        for (auto it = j.begin(); it != j.end(); ++it) {
            table.set(it.key(), it.value().get<std::string>());
        }
        return table;
    }

    void set(const std::string& relation, const std::string& tmpl) {
        if (count_subject_slots(tmpl) != 1) {
            throw std::invalid_argument("template for '" + relation +
                                        "' must contain exactly one {subject} slot");
        }
        templates_[normalize_answer(relation)] = tmpl;
    }

    std::string question_for(const std::string& subject, const std::string& relation) const {
        auto it = templates_.find(normalize_answer(relation));
        std::string tmpl = it != templates_.end() ? it->second : default_template_;
        replace_all(tmpl, "{relation}", relation);
        replace_all(tmpl, "{subject}", subject);
        return tmpl;
    }

private:
    static size_t count_subject_slots(const std::string& tmpl) {
        size_t count = 0, at = 0;
        while ((at = tmpl.find("{subject}", at)) != std::string::npos) {
            ++count;
            at += 9;
        }
        return count;
    }

    static void replace_all(std::string& s, std::string_view from, std::string_view to) {
        size_t at = 0;
        while ((at = s.find(from, at)) != std::string::npos) {
            s.replace(at, from.size(), to);
            at += to.size();
        }
    }

    std::map<std::string, std::string> templates_;
    std::string default_template_ = "What is {relation} of {subject}?";
};

inline std::string template_question(const std::string& subject, const std::string& relation,
                                     const TemplateTable& templates = TemplateTable::builtin()) {
    return templates.question_for(subject, relation);
}

// ---------------------------------------------------------------------------
// Record loading (published field names; unknown fields ignored)

namespace detail {

inline std::string id_from_json(const ojson& j) {
    for (const char* key : {"id", "_id"}) {
        if (j.contains(key)) {
            const auto& v = j.at(key);
            return v.is_string() ? v.get<std::string>() : v.dump();
        }
    }
    return "";
}

inline std::vector<PassageRef> passages_from_json(const ojson& j) {
    std::vector<PassageRef> out;
    if (j.contains("paragraphs")) {  // MuSiQue style
        for (const auto& p : j.at("paragraphs")) {
            out.push_back({p.value("title", ""), p.value("paragraph_text", "")});
        }
    } else if (j.contains("context")) {  // 2WikiQA style: [title, [sentences...]]
        for (const auto& c : j.at("context")) {
            if (!c.is_array() || c.size() < 2) continue;
            std::string text;
            for (const auto& s : c.at(1)) {
                if (!text.empty()) text.push_back(' ');
                text += s.get<std::string>();
            }
            out.push_back({c.at(0).get<std::string>(), text});
        }
    }
    return out;
}

}  // namespace detail

inline MusiqueRecord musique_record_from_json(const ojson& j) {
    MusiqueRecord record;
    record.id = detail::id_from_json(j);
    record.question = j.value("question", "");
    record.answer = j.value("answer", "");
    if (j.contains("reasoning_type")) {
        record.reasoning_type = j.at("reasoning_type").get<std::string>();
    } else {
        // Published ids look like "2hop__123_456".
        size_t sep = record.id.find("__");
        if (sep != std::string::npos) record.reasoning_type = record.id.substr(0, sep);
    }
    const char* key = j.contains("question_decomposition") ? "question_decomposition"
                                                           : "sub_questions";
    if (j.contains(key)) {
        for (const auto& q : j.at(key)) {
            record.sub_questions.push_back(
                {q.value("question", q.value("text", "")), q.value("answer", "")});
        }
    }
    record.passages = detail::passages_from_json(j);

    // Dataset guarantee: #k in sub-question j only points backwards.
    for (size_t i = 0; i < record.sub_questions.size(); ++i) {
        for (const auto& ref : find_placeholders(record.sub_questions[i].text)) {
            if (ref.index >= static_cast<int>(i) + 1) {
                throw UnsupportedShape(record.id, "sub-question " + std::to_string(i + 1) +
                                                      " references " + ref.surface +
                                                      " which is not an earlier answer");
            }
        }
    }
    return record;
}

inline TwoWikiRecord two_wiki_record_from_json(const ojson& j) {
    TwoWikiRecord record;
    record.id = detail::id_from_json(j);
    record.question = j.value("question", "");
    record.answer = j.value("answer", "");
    record.reasoning_type = j.value("type", j.value("reasoning_type", ""));
    if (j.contains("evidences")) {
        for (const auto& e : j.at("evidences")) {
            EvidenceTriple triple;
            if (e.is_array() && e.size() == 3) {
                triple = {e.at(0).get<std::string>(), e.at(1).get<std::string>(),
                          e.at(2).get<std::string>()};
            } else if (e.is_object()) {
                triple = {e.value("subject", ""), e.value("relation", ""),
                          e.value("object", "")};
            }
            if (triple.subject.empty() || triple.relation.empty()) {
                throw UnsupportedShape(record.id, "evidence triple needs subject and relation");
            }
            record.evidences.push_back(std::move(triple));
        }
    }
    record.passages = detail::passages_from_json(j);
    return record;
}

// ---------------------------------------------------------------------------
// Comparison keyword rule

struct ComparisonChoice {
    OpKind kind = OpKind::CompEq;
    bool keyword_found = false;
};

/// Scan the complex question left to right; the first comparison keyword
/// decides the kind. No keyword defaults to COMP_= (callers may warn).
inline ComparisonChoice choose_comparison_kind(const std::string& complex_question) {
    static const std::vector<std::pair<std::string, OpKind>> keywords = {
        {"first", OpKind::CompLt},  {"earlier", OpKind::CompLt}, {"earliest", OpKind::CompLt},
        {"later", OpKind::CompGt},  {"latest", OpKind::CompGt},  {"last", OpKind::CompGt},
        {"longer", OpKind::CompGt}, {"more", OpKind::CompGt},    {"same", OpKind::CompEq},
        {"both", OpKind::CompEq},
    };
    for (const auto& token : answer_tokens(complex_question)) {
        for (const auto& [word, kind] : keywords) {
            if (token == word) return {kind, true};
        }
    }
    return {OpKind::CompEq, false};
}

// ---------------------------------------------------------------------------
// MuSiQue construction

namespace detail {

/// Rewrite every placeholder to the canonical "Ans#k" spelling.
inline std::string canonicalize_placeholders(const std::string& text,
                                             const PlaceholderSyntax& syntax) {
    std::string out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        int index = 0;
        size_t len = match_placeholder(text, pos, syntax, index);
        if (len > 0) {
            out += "Ans#" + std::to_string(index);
            pos += len;
        } else {
            out.push_back(text[pos]);
            ++pos;
        }
    }
    return out;
}

}  // namespace detail

/// Fold the decomposition into a tree. Sub-questions are taken in dataset
/// order, which is also execution order, so dataset #k references line up
/// with global answer slots:
///   - a sub-question consuming earlier answers JOINs onto what came before;
///   - an independent sub-question opens a parallel branch via UNION;
///   - exactly two independent sub-questions sharing one answer form an AND.
inline HExpr::Ptr build_from_musique(const MusiqueRecord& record,
                                     const PlaceholderSyntax& syntax = {}) {
    const auto& subs = record.sub_questions;
    if (subs.empty()) {
        throw UnsupportedShape(record.id, "record has no sub-questions");
    }

    auto primitive_for = [&](size_t i) {
        return HExpr::primitive(detail::canonicalize_placeholders(subs[i].text, syntax));
    };

    if (subs.size() == 1) {
        return primitive_for(0);
    }

    // Intersection detection: two independent questions, same answer.
    if (subs.size() == 2 && find_placeholders(subs[0].text, syntax).empty() &&
        find_placeholders(subs[1].text, syntax).empty() &&
        normalize_answer(subs[0].answer) == normalize_answer(subs[1].answer) &&
        !subs[0].answer.empty()) {
        return HExpr::operation(OpKind::And, primitive_for(1), primitive_for(0));
    }

    if (!find_placeholders(subs[0].text, syntax).empty()) {
        throw UnsupportedShape(record.id, "first sub-question cannot reference an answer");
    }

    HExpr::Ptr acc = primitive_for(0);
    for (size_t i = 1; i < subs.size(); ++i) {
        bool consumes = !find_placeholders(subs[i].text, syntax).empty();
        acc = HExpr::operation(consumes ? OpKind::Join : OpKind::Union, primitive_for(i),
                               std::move(acc));
    }
    return acc;
}

// ---------------------------------------------------------------------------
// 2WikiQA construction

namespace detail {

inline std::string normalized_reasoning_type(std::string s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
        else if (!out.empty() && out.back() != '_') out.push_back('_');
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

/// Order two evidence triples as (independent, dependent) when they chain
/// through a shared entity; falls back to dataset order.
inline std::pair<const EvidenceTriple*, const EvidenceTriple*> orient_chain(
    const EvidenceTriple& a, const EvidenceTriple& b) {
    if (normalize_answer(b.subject) == normalize_answer(a.object)) return {&a, &b};
    if (normalize_answer(a.subject) == normalize_answer(b.object)) return {&b, &a};
    return {&a, &b};
}

inline HExpr::Ptr bridge_join(const EvidenceTriple& base, const EvidenceTriple& dependent,
                              int placeholder_index, const TemplateTable& templates) {
    auto inner = HExpr::primitive(templates.question_for(base.subject, base.relation),
                                  base.subject);
    auto outer = HExpr::primitive(
        templates.question_for("#" + std::to_string(placeholder_index), dependent.relation),
        dependent.subject);
    return HExpr::operation(OpKind::Join, std::move(outer), std::move(inner));
}

}  // namespace detail

/// Build per reasoning type: comparison -> COMP over two template
/// questions; compositional/bridge/inference -> JOIN with a #1 reference;
/// bridge_comparison -> COMP over two JOIN chains with global-slot
/// placeholders (#1 and #3).
inline HExpr::Ptr build_from_2wiki(const TwoWikiRecord& record,
                                   const TemplateTable& templates = TemplateTable::builtin()) {
    std::string type = detail::normalized_reasoning_type(record.reasoning_type);
    const auto& ev = record.evidences;

    if (type == "comparison") {
        if (ev.size() < 2) {
            throw UnsupportedShape(record.id, "comparison needs two evidence triples");
        }
        auto kind = choose_comparison_kind(record.question).kind;
        auto left = HExpr::primitive(templates.question_for(ev[0].subject, ev[0].relation),
                                     ev[0].subject);
        auto right = HExpr::primitive(templates.question_for(ev[1].subject, ev[1].relation),
                                      ev[1].subject);
        return HExpr::operation(kind, std::move(left), std::move(right));
    }

    if (type == "compositional" || type == "bridge" || type == "inference") {
        if (ev.size() < 2) {
            throw UnsupportedShape(record.id, type + " needs two evidence triples");
        }
        auto [base, dependent] = detail::orient_chain(ev[0], ev[1]);
        return detail::bridge_join(*base, *dependent, 1, templates);
    }

    if (type == "bridge_comparison") {
        if (ev.size() < 4) {
            throw UnsupportedShape(record.id, "bridge comparison needs four evidence triples");
        }
        // Two chains of two triples each; accept block or interleaved order.
        auto chained = [&](const EvidenceTriple& base, const EvidenceTriple& dep) {
            return normalize_answer(dep.subject) == normalize_answer(base.object);
        };
        const EvidenceTriple *a1, *a2, *b1, *b2;
        if (chained(ev[0], ev[1]) && chained(ev[2], ev[3])) {
            a1 = &ev[0]; a2 = &ev[1]; b1 = &ev[2]; b2 = &ev[3];
        } else if (chained(ev[0], ev[2]) && chained(ev[1], ev[3])) {
            a1 = &ev[0]; a2 = &ev[2]; b1 = &ev[1]; b2 = &ev[3];
        } else {
            throw UnsupportedShape(record.id,
                                   "bridge comparison evidences do not form two chains");
        }
        auto kind = choose_comparison_kind(record.question).kind;
        // The right chain executes first (slots 1-2), the left chain
        // afterwards (slots 3-4).
        auto right = detail::bridge_join(*b1, *b2, 1, templates);
        auto left = detail::bridge_join(*a1, *a2, 3, templates);
        return HExpr::operation(kind, std::move(left), std::move(right));
    }

    throw UnsupportedReasoningType(record.id,
                                   "unsupported reasoning type '" + record.reasoning_type + "'");
}

}  // namespace hexec
