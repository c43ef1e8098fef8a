#pragma once

#include <string>

#include "hexec/builder.hpp"
#include "hexec/execute.hpp"
#include "hexec/reader.hpp"

// Seeding an oracle from a record's own annotations, so that executing the
// built expression replays the dataset's decomposition.

namespace hexec_test {

/// Replace dataset #k references with the k-th sub-question's answer.
/// Dataset numbering coincides with execution-slot numbering.
inline std::string substitute_dataset_refs(const std::string& text,
                                           const hexec::MusiqueRecord& record) {
    std::string out;
    size_t cursor = 0;
    for (const auto& ref : hexec::find_placeholders(text)) {
        if (ref.index < 1 || static_cast<size_t>(ref.index) > record.sub_questions.size()) {
            continue;
        }
        out += text.substr(cursor, ref.position - cursor);
        out += record.sub_questions[static_cast<size_t>(ref.index) - 1].answer;
        cursor = ref.position + ref.surface.size();
    }
    out += text.substr(cursor);
    return out;
}

inline hexec::FactStore oracle_from_musique(const hexec::MusiqueRecord& record) {
    hexec::FactStore store;
    for (const auto& sub : record.sub_questions) {
        store.add(substitute_dataset_refs(sub.text, record), {sub.answer});
    }
    return store;
}

inline hexec::FactStore oracle_from_2wiki(
    const hexec::TwoWikiRecord& record,
    const hexec::TemplateTable& templates = hexec::TemplateTable::builtin()) {
    hexec::FactStore store;
    for (const auto& e : record.evidences) {
        store.add(templates.question_for(e.subject, e.relation), {e.object});
    }
    return store;
}

}  // namespace hexec_test
