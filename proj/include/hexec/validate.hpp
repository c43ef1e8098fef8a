#pragma once

#include <string>
#include <vector>

#include "hexec/hexpr.hpp"

// Static executability checks: an expression is executable when every
// placeholder can be resolved from answer slots filled before the
// primitive containing it runs, and the tree stays within the depth
// bound. Problems are reported, not thrown.

namespace hexec {

enum class Severity { Warning, Error };

inline std::string_view severity_name(Severity s) {
    return s == Severity::Error ? "ERROR" : "WARNING";
}

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;
    std::string message;
    std::string node_path;
};

struct ValidationReport {
    bool executable = true;
    std::vector<Diagnostic> diagnostics;

    bool has_errors() const {
        for (const auto& d : diagnostics) {
            if (d.severity == Severity::Error) return true;
        }
        return false;
    }
};

struct ValidateOptions {
    int max_depth = 16;
    PlaceholderSyntax placeholders{};
};

namespace detail {

inline bool subtree_has_placeholder(const HExpr& node, const PlaceholderSyntax& syntax) {
    if (node.is_primitive()) {
        return !find_placeholders(node.as_primitive().text, syntax).empty();
    }
    const Operation& op = node.as_operation();
    return subtree_has_placeholder(*op.left, syntax) ||
           subtree_has_placeholder(*op.right, syntax);
}

inline void check_join_left(const HExpr& node, const std::string& path,
                            const PlaceholderSyntax& syntax,
                            std::vector<Diagnostic>& out) {
    if (node.is_primitive()) return;
    const Operation& op = node.as_operation();
    if (op.kind == OpKind::Join && !subtree_has_placeholder(*op.left, syntax)) {
        out.push_back({Severity::Warning, "join_left_without_placeholder",
                       "JOIN left operand contains no placeholder", path});
    }
    check_join_left(*op.left, child_path(path, true), syntax, out);
    check_join_left(*op.right, child_path(path, false), syntax, out);
}

}  // namespace detail

inline ValidationReport validate(const HExpr& expr, const ValidateOptions& options = {}) {
    ValidationReport report;

    int d = depth(expr);
    if (d > options.max_depth) {
        report.diagnostics.push_back(
            {Severity::Error, "depth_exceeded",
             "tree depth " + std::to_string(d) + " exceeds limit " +
                 std::to_string(options.max_depth),
             ""});
    }

    // Slot k is filled by the k-th executed primitive, so a primitive at
    // execution position i may only reference slots 1..i-1.
    auto primitives = execution_primitives(expr);
    for (size_t i = 0; i < primitives.size(); ++i) {
        int position = static_cast<int>(i) + 1;
        const auto& prim = primitives[i].node->as_primitive();
        for (const auto& ref : find_placeholders(prim.text, options.placeholders)) {
            if (ref.index >= position) {
                report.diagnostics.push_back(
                    {Severity::Error, "unresolvable_placeholder",
                     "placeholder " + ref.surface + " in primitive at execution position " +
                         std::to_string(position) + " references a slot not yet filled",
                     primitives[i].path});
            }
        }
    }

    detail::check_join_left(expr, "", options.placeholders, report.diagnostics);

    report.executable = !report.has_errors();
    return report;
}

}  // namespace hexec
