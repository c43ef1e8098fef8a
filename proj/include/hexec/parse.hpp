#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hexec/hexpr.hpp"

// Textual H-expression grammar:
//
//   expr    := OPNAME '[' expr ',' expr ']' | primitive
//   OPNAME  := JOIN | UNION | AND | COMP_= | COMP_< | COMP_> | SUB | ADD
//
// Operation names are case-insensitive; whitespace around brackets and
// commas is insignificant. Inside an operand, `\,` `\[` `\]` `\\` escape
// the grammar characters; a literal comma in a primitive must be escaped.

namespace hexec {

class ParseError : public std::runtime_error {
public:
    ParseError(std::string code, size_t position, const std::string& message)
        : std::runtime_error(message + " (at offset " + std::to_string(position) + ")"),
          code_(std::move(code)),
          position_(position) {}

    const std::string& code() const { return code_; }
    size_t position() const { return position_; }

private:
    std::string code_;
    size_t position_;
};

namespace detail {

inline bool is_op_name_char(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '=' ||
           c == '<' || c == '>';
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    HExpr::Ptr parse() {
        skip_ws();
        HExpr::Ptr expr;
        if (auto op = peek_op_prefix()) {
            expr = parse_operation();
        } else {
            expr = parse_primitive(/*top_level=*/true);
        }
        skip_ws();
        if (pos_ < text_.size()) {
            throw ParseError("trailing_content", pos_,
                             "unexpected content after expression");
        }
        return expr;
    }

private:
    struct OpPrefix {
        std::string name;
        size_t name_pos;
        size_t bracket_pos;
    };

    // An operation prefix is a run of op-name characters followed
    // (whitespace aside) by '['. Known names parse in any case; an
    // unknown name in operation shape (no lowercase letters) is an
    // error rather than a primitive.
    std::optional<OpPrefix> peek_op_prefix() const {
        size_t p = pos_;
        size_t start = p;
        while (p < text_.size() && is_op_name_char(text_[p])) ++p;
        if (p == start) return std::nullopt;
        size_t name_end = p;
        while (p < text_.size() && std::isspace(static_cast<unsigned char>(text_[p]))) ++p;
        if (p >= text_.size() || text_[p] != '[') return std::nullopt;
        std::string name(text_.substr(start, name_end - start));
        if (!op_from_name(name) && !op_shaped(name)) return std::nullopt;
        return OpPrefix{std::move(name), start, p};
    }

    static bool op_shaped(std::string_view name) {
        for (char c : name) {
            if (std::islower(static_cast<unsigned char>(c))) return false;
        }
        return true;
    }

    HExpr::Ptr parse_operation() {
        auto prefix = peek_op_prefix();
        auto kind = op_from_name(prefix->name);
        if (!kind) {
            throw ParseError("unknown_operation", prefix->name_pos,
                             "unknown operation name '" + prefix->name + "'");
        }
        size_t open_pos = prefix->bracket_pos;
        pos_ = prefix->bracket_pos + 1;

        HExpr::Ptr left = parse_operand(open_pos);
        skip_ws();
        if (pos_ >= text_.size()) {
            throw ParseError("unbalanced_brackets", open_pos, "missing closing ']'");
        }
        if (text_[pos_] == ']') {
            throw ParseError("operand_count", pos_,
                             std::string(op_name(*kind)) + " requires two operands, got one");
        }
        expect(',');
        HExpr::Ptr right = parse_operand(open_pos);
        skip_ws();
        if (pos_ >= text_.size()) {
            throw ParseError("unbalanced_brackets", open_pos, "missing closing ']'");
        }
        if (text_[pos_] == ',') {
            throw ParseError("operand_count", pos_,
                             std::string(op_name(*kind)) + " requires two operands, got more");
        }
        expect(']');
        return HExpr::operation(*kind, std::move(left), std::move(right));
    }

    HExpr::Ptr parse_operand(size_t open_pos) {
        skip_ws();
        if (pos_ >= text_.size()) {
            throw ParseError("unbalanced_brackets", open_pos, "missing closing ']'");
        }
        if (peek_op_prefix()) {
            HExpr::Ptr nested = parse_operation();
            skip_ws();
            if (pos_ >= text_.size()) {
                throw ParseError("unbalanced_brackets", open_pos, "missing closing ']'");
            }
            if (text_[pos_] != ',' && text_[pos_] != ']') {
                throw ParseError("operand_syntax", pos_,
                                 "expected ',' or ']' after nested operation");
            }
            return nested;
        }
        return parse_primitive(/*top_level=*/false);
    }

    HExpr::Ptr parse_primitive(bool top_level) {
        size_t start = pos_;
        std::string text;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\\') {
                if (pos_ + 1 < text_.size()) {
                    text.push_back(text_[pos_ + 1]);
                    pos_ += 2;
                } else {
                    text.push_back('\\');
                    ++pos_;
                }
                continue;
            }
            if (c == '[') {
                throw ParseError("unescaped_bracket", pos_,
                                 "unescaped '[' in primitive text");
            }
            if (c == ']') {
                if (top_level) {
                    throw ParseError("unescaped_bracket", pos_,
                                     "unescaped ']' in primitive text");
                }
                break;
            }
            if (c == ',' && !top_level) {
                break;
            }
            text.push_back(c);
            ++pos_;
        }
        std::string trimmed = trim_copy(text);
        if (trimmed.empty()) {
            throw ParseError("empty_operand", start, "empty operand");
        }
        return HExpr::primitive(std::move(trimmed));
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c) {
            throw ParseError("unbalanced_brackets", pos_,
                             std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    std::string_view text_;
    size_t pos_ = 0;
};

inline void escape_primitive_into(std::string_view text, std::string& out) {
    for (char c : text) {
        if (c == '\\' || c == ',' || c == '[' || c == ']') out.push_back('\\');
        out.push_back(c);
    }
}

inline void serialize_into(const HExpr& expr, std::string& out) {
    if (expr.is_primitive()) {
        escape_primitive_into(expr.as_primitive().text, out);
        return;
    }
    const Operation& op = expr.as_operation();
    out += op_name(op.kind);
    out += "[ ";
    serialize_into(*op.left, out);
    out += ", ";
    serialize_into(*op.right, out);
    out += " ]";
}

}  // namespace detail

/// Parse a textual H-expression. Text with no operation prefix parses as
/// a bare primitive; an unknown name followed by '[' is an error.
inline HExpr::Ptr parse_hexpression(std::string_view text) {
    if (trim_copy(text).empty()) {
        throw ParseError("empty_input", 0, "empty H-expression");
    }
    return detail::Parser(text).parse();
}

/// Canonical textual form: upper-case names, "OP[ q2, q1 ]" spacing,
/// grammar characters escaped inside primitives. parse(serialize(e))
/// is structurally equal to e.
inline std::string serialize(const HExpr& expr) {
    std::string out;
    detail::serialize_into(expr, out);
    return out;
}

}  // namespace hexec
