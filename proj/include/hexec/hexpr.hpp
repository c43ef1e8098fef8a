#pragma once

#include <cctype>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hexec/answer.hpp"

// The H-expression AST: single-hop questions (primitives) composed by
// binary operations into a tree. Trees are immutable after construction
// and safe to share across threads.

namespace hexec {

enum class OpKind { Join, Union, And, CompEq, CompLt, CompGt, Sub, Add };

/// Canonical grammar spelling of an operation name.
inline std::string_view op_name(OpKind kind) {
    switch (kind) {
        case OpKind::Join: return "JOIN";
        case OpKind::Union: return "UNION";
        case OpKind::And: return "AND";
        case OpKind::CompEq: return "COMP_=";
        case OpKind::CompLt: return "COMP_<";
        case OpKind::CompGt: return "COMP_>";
        case OpKind::Sub: return "SUB";
        case OpKind::Add: return "ADD";
    }
    return "";
}

/// Case-insensitive lookup covering the canonical spellings plus the
/// COMP_EQ/COMP_LT/COMP_GT aliases. Anything else is not an operation.
inline std::optional<OpKind> op_from_name(std::string_view name) {
    std::string upper;
    upper.reserve(name.size());
    for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (upper == "JOIN") return OpKind::Join;
    if (upper == "UNION") return OpKind::Union;
    if (upper == "AND") return OpKind::And;
    if (upper == "SUB") return OpKind::Sub;
    if (upper == "ADD") return OpKind::Add;
    if (upper == "COMP_=" || upper == "COMP_EQ") return OpKind::CompEq;
    if (upper == "COMP_<" || upper == "COMP_LT") return OpKind::CompLt;
    if (upper == "COMP_>" || upper == "COMP_GT") return OpKind::CompGt;
    return std::nullopt;
}

class HExpr;

/// A single-hop question (leaf). The entity hint is dataset metadata set
/// by the builders; it is never part of the textual form.
struct Primitive {
    std::string text;
    std::optional<std::string> entity_hint;
};

/// A binary operation node, written OP[q2, q1]: left is q2, right is q1.
/// The right operand is executed first.
struct Operation {
    OpKind kind;
    std::shared_ptr<const HExpr> left;
    std::shared_ptr<const HExpr> right;
};

class HExpr {
public:
    using Ptr = std::shared_ptr<const HExpr>;

    static Ptr primitive(std::string text,
                         std::optional<std::string> entity_hint = std::nullopt) {
        std::string trimmed = trim_copy(text);
        if (trimmed.empty()) {
            throw std::invalid_argument("primitive text must be non-empty");
        }
        return Ptr(new HExpr(Primitive{std::move(trimmed), std::move(entity_hint)}));
    }

    static Ptr operation(OpKind kind, Ptr left, Ptr right) {
        if (!left || !right) {
            throw std::invalid_argument("operation requires two operands");
        }
        return Ptr(new HExpr(Operation{kind, std::move(left), std::move(right)}));
    }

    bool is_primitive() const { return std::holds_alternative<Primitive>(node_); }
    bool is_operation() const { return std::holds_alternative<Operation>(node_); }

    const Primitive& as_primitive() const { return std::get<Primitive>(node_); }
    const Operation& as_operation() const { return std::get<Operation>(node_); }

private:
    explicit HExpr(Primitive p) : node_(std::move(p)) {}
    explicit HExpr(Operation o) : node_(std::move(o)) {}

    std::variant<Primitive, Operation> node_;
};

/// Structural equality over the textual form: kinds, shape and primitive
/// texts. Entity hints are metadata and do not participate.
inline bool structurally_equal(const HExpr& a, const HExpr& b) {
    if (a.is_primitive() != b.is_primitive()) return false;
    if (a.is_primitive()) {
        return a.as_primitive().text == b.as_primitive().text;
    }
    const Operation& oa = a.as_operation();
    const Operation& ob = b.as_operation();
    return oa.kind == ob.kind && structurally_equal(*oa.left, *ob.left) &&
           structurally_equal(*oa.right, *ob.right);
}

/// Number of levels in the tree; a bare primitive has depth 1.
inline int depth(const HExpr& expr) {
    if (expr.is_primitive()) return 1;
    const Operation& op = expr.as_operation();
    return 1 + std::max(depth(*op.left), depth(*op.right));
}

// ---------------------------------------------------------------------------
// Placeholders

/// Which placeholder spellings the scanner recognizes. "Ans#k" and "#k"
/// are both used in the wild; the terser "A1" style is off by default
/// because it collides with ordinary words.
struct PlaceholderSyntax {
    bool ans_hash = true;   // Ans#1
    bool bare_hash = true;  // #1
    bool a_number = false;  // A1
};

struct PlaceholderRef {
    int index = 0;            // answer slot k, always >= 1
    std::string surface;      // matched text, e.g. "Ans#1"
    size_t position = 0;      // byte offset in the scanned string

    friend bool operator==(const PlaceholderRef&, const PlaceholderRef&) = default;
};

namespace detail {

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// Match one placeholder at `pos`; returns its length or 0.
inline size_t match_placeholder(std::string_view text, size_t pos,
                                const PlaceholderSyntax& syntax, int& index_out) {
    auto digits_at = [&](size_t p, size_t& len, long long& value) {
        len = 0;
        value = 0;
        while (p + len < text.size() && std::isdigit(static_cast<unsigned char>(text[p + len]))) {
            value = value * 10 + (text[p + len] - '0');
            ++len;
            if (value > 1000000) return;  // implausible slot index
        }
    };

    if (syntax.ans_hash && pos + 4 < text.size() + 1) {
        auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
        if (pos + 4 <= text.size() && lower(text[pos]) == 'a' && lower(text[pos + 1]) == 'n' &&
            lower(text[pos + 2]) == 's' && text[pos + 3] == '#') {
            size_t len;
            long long value;
            digits_at(pos + 4, len, value);
            if (len > 0 && value >= 1 && value <= 1000000) {
                index_out = static_cast<int>(value);
                return 4 + len;
            }
        }
    }
    if (syntax.bare_hash && text[pos] == '#') {
        size_t len;
        long long value;
        digits_at(pos + 1, len, value);
        if (len > 0 && value >= 1 && value <= 1000000) {
            index_out = static_cast<int>(value);
            return 1 + len;
        }
    }
    if (syntax.a_number && text[pos] == 'A') {
        if (pos > 0 && is_word_char(text[pos - 1])) return 0;
        size_t len;
        long long value;
        digits_at(pos + 1, len, value);
        if (len > 0 && value >= 1 && value <= 1000000) {
            size_t end = pos + 1 + len;
            if (end < text.size() && is_word_char(text[end])) return 0;
            index_out = static_cast<int>(value);
            return 1 + len;
        }
    }
    return 0;
}

}  // namespace detail

/// All placeholder references in `text`, in order of appearance.
inline std::vector<PlaceholderRef> find_placeholders(
    std::string_view text, const PlaceholderSyntax& syntax = {}) {
    std::vector<PlaceholderRef> refs;
    size_t pos = 0;
    while (pos < text.size()) {
        int index = 0;
        size_t len = detail::match_placeholder(text, pos, syntax, index);
        if (len > 0) {
            refs.push_back({index, std::string(text.substr(pos, len)), pos});
            pos += len;
        } else {
            ++pos;
        }
    }
    return refs;
}

// ---------------------------------------------------------------------------
// Execution order

/// Node paths are dotted left/right chains from the root; the root itself
/// is the empty path.
inline std::string child_path(const std::string& parent, bool left) {
    const char* seg = left ? "left" : "right";
    return parent.empty() ? seg : parent + "." + seg;
}

struct PrimitiveSite {
    std::string path;
    const HExpr* node = nullptr;
};

namespace detail {

inline void collect_execution_primitives(const HExpr& node, const std::string& path,
                                         std::vector<PrimitiveSite>& out) {
    if (node.is_primitive()) {
        out.push_back({path, &node});
        return;
    }
    const Operation& op = node.as_operation();
    collect_execution_primitives(*op.right, child_path(path, false), out);
    collect_execution_primitives(*op.left, child_path(path, true), out);
}

}  // namespace detail

/// Primitives in execution order: the whole right subtree before the left
/// subtree, recursively. The k-th element owns answer slot Ans#k.
inline std::vector<PrimitiveSite> execution_primitives(const HExpr& expr) {
    std::vector<PrimitiveSite> out;
    detail::collect_execution_primitives(expr, "", out);
    return out;
}

inline std::vector<std::string> execution_order(const HExpr& expr) {
    std::vector<std::string> paths;
    for (auto& site : execution_primitives(expr)) paths.push_back(site.path);
    return paths;
}

}  // namespace hexec
