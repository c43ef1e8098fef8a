#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

// Answer values and the string machinery shared by the executor and the
// metrics: SQuAD-style normalization, numeric coercion and comparable keys
// (numbers, dates, normalized text).

namespace hexec {

struct NormalizeOptions {
    bool lowercase = true;
    bool strip_articles = true;
    bool strip_punctuation = true;
};

/// Lower-case, strip punctuation, drop the articles a/an/the, collapse
/// whitespace. This is the normalization used for answer equality
/// everywhere (EM, fact-store keys, AND intersection).
inline std::string normalize_answer(std::string_view text,
                                    const NormalizeOptions& opts = {}) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (unsigned char c : text) {
        char d = opts.lowercase ? static_cast<char>(std::tolower(c))
                                : static_cast<char>(c);
        if (opts.strip_punctuation && d >= 0 && std::ispunct(static_cast<unsigned char>(d))) {
            continue;
        }
        cleaned.push_back(d);
    }
    std::istringstream iss(cleaned);
    std::string token;
    std::string out;
    while (iss >> token) {
        if (opts.strip_articles && (token == "a" || token == "an" || token == "the")) {
            continue;
        }
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

/// Normalized bag-of-words tokens, as used by token-level F1.
inline std::vector<std::string> answer_tokens(std::string_view text,
                                              const NormalizeOptions& opts = {}) {
    std::istringstream iss(normalize_answer(text, opts));
    std::vector<std::string> tokens;
    std::string token;
    while (iss >> token) tokens.push_back(std::move(token));
    return tokens;
}

inline std::string trim_copy(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// ---------------------------------------------------------------------------
// Reader candidates

/// One ranked answer hypothesis from a single-hop reader. Lists are sorted
/// by descending score; only the rank order is meaningful.
struct ReaderCandidate {
    std::string answer;
    double score = 0.0;

    friend bool operator==(const ReaderCandidate&, const ReaderCandidate&) = default;
};

// ---------------------------------------------------------------------------
// Number rendering

/// Render an arithmetic result: integers print without a decimal part
/// ("72", not "72.0").
inline std::string render_number(double value) {
    if (std::isfinite(value) && value == std::floor(value) &&
        std::abs(value) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(value));
        return buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

// ---------------------------------------------------------------------------
// Dates and comparable keys

enum class DateFormat {
    DayMonthYear,   // 1 December 2010
    MonthDayYear,   // December 1, 2010
    MonthYear,      // December 2010
    IsoYmd,         // 2010-12-01
};

inline const std::vector<DateFormat>& default_date_formats() {
    static const std::vector<DateFormat> formats = {
        DateFormat::DayMonthYear,
        DateFormat::MonthDayYear,
        DateFormat::MonthYear,
        DateFormat::IsoYmd,
    };
    return formats;
}

/// Calendar key for date comparisons. Missing month/day have already been
/// defaulted to 1/1 by the parser (smallest consistent completion).
struct DateKey {
    int year = 0;
    int month = 1;
    int day = 1;

    friend auto operator<=>(const DateKey&, const DateKey&) = default;
};

namespace detail {

inline std::optional<int> month_from_name(std::string_view word) {
    static const char* names[12] = {"january", "february", "march",     "april",
                                    "may",     "june",     "july",      "august",
                                    "september", "october", "november", "december"};
    std::string w;
    w.reserve(word.size());
    for (char c : word) w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (!w.empty() && w.back() == '.') w.pop_back();
    for (int i = 0; i < 12; ++i) {
        std::string_view full = names[i];
        if (w == full) return i + 1;
        if (w.size() == 3 && full.substr(0, 3) == w) return i + 1;
    }
    return std::nullopt;
}

inline std::optional<long long> to_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::vector<std::string> whitespace_tokens(std::string_view s) {
    std::vector<std::string> toks;
    std::string cur;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) toks.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) toks.push_back(std::move(cur));
    return toks;
}

inline bool valid_date(long long year, long long month, long long day) {
    return year >= 1 && year <= 9999 && month >= 1 && month <= 12 && day >= 1 &&
           day <= 31;
}

inline std::optional<DateKey> parse_date_as(DateFormat format, std::string_view text) {
    std::string t = trim_copy(text);
    if (format == DateFormat::IsoYmd) {
        // YYYY-MM-DD, single token
        auto toks = whitespace_tokens(t);
        if (toks.size() != 1) return std::nullopt;
        const std::string& s = toks[0];
        size_t d1 = s.find('-');
        if (d1 == std::string::npos) return std::nullopt;
        size_t d2 = s.find('-', d1 + 1);
        if (d2 == std::string::npos) return std::nullopt;
        auto y = to_int(std::string_view(s).substr(0, d1));
        auto m = to_int(std::string_view(s).substr(d1 + 1, d2 - d1 - 1));
        auto d = to_int(std::string_view(s).substr(d2 + 1));
        if (!y || !m || !d || !valid_date(*y, *m, *d)) return std::nullopt;
        return DateKey{static_cast<int>(*y), static_cast<int>(*m), static_cast<int>(*d)};
    }
    // Word-based formats; commas are separators ("December 1, 2010").
    std::string no_commas;
    no_commas.reserve(t.size());
    for (char c : t) no_commas.push_back(c == ',' ? ' ' : c);
    auto toks = whitespace_tokens(no_commas);
    switch (format) {
        case DateFormat::DayMonthYear: {
            if (toks.size() != 3) return std::nullopt;
            auto d = to_int(toks[0]);
            auto m = month_from_name(toks[1]);
            auto y = to_int(toks[2]);
            if (!d || !m || !y || !valid_date(*y, *m, *d)) return std::nullopt;
            return DateKey{static_cast<int>(*y), *m, static_cast<int>(*d)};
        }
        case DateFormat::MonthDayYear: {
            if (toks.size() != 3) return std::nullopt;
            auto m = month_from_name(toks[0]);
            auto d = to_int(toks[1]);
            auto y = to_int(toks[2]);
            if (!m || !d || !y || !valid_date(*y, *m, *d)) return std::nullopt;
            return DateKey{static_cast<int>(*y), *m, static_cast<int>(*d)};
        }
        case DateFormat::MonthYear: {
            if (toks.size() != 2) return std::nullopt;
            auto m = month_from_name(toks[0]);
            auto y = to_int(toks[1]);
            if (!m || !y || !valid_date(*y, *m, 1)) return std::nullopt;
            return DateKey{static_cast<int>(*y), *m, 1};
        }
        default:
            return std::nullopt;
    }
}

/// Integer with optional thousands separators: "1,234,567" or "1234".
inline std::optional<long long> parse_grouped_integer(std::string_view s) {
    if (s.empty()) return std::nullopt;
    size_t i = 0;
    if (s[0] == '+' || s[0] == '-') ++i;
    if (i >= s.size()) return std::nullopt;
    std::string digits = i > 0 ? std::string(s.substr(0, i)) : std::string();
    bool grouped = s.find(',', i) != std::string_view::npos;
    if (!grouped) {
        for (size_t j = i; j < s.size(); ++j) {
            if (!std::isdigit(static_cast<unsigned char>(s[j]))) return std::nullopt;
        }
        digits += std::string(s.substr(i));
    } else {
        // leading group of 1-3 digits, then ",ddd" groups
        size_t j = i;
        size_t lead = 0;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j, ++lead;
        if (lead < 1 || lead > 3) return std::nullopt;
        digits += std::string(s.substr(i, lead));
        while (j < s.size()) {
            if (s[j] != ',') return std::nullopt;
            if (j + 3 >= s.size()) return std::nullopt;
            for (size_t k = j + 1; k <= j + 3; ++k) {
                if (!std::isdigit(static_cast<unsigned char>(s[k]))) return std::nullopt;
            }
            digits += std::string(s.substr(j + 1, 3));
            j += 4;
        }
    }
    return to_int(digits);
}

inline std::optional<double> parse_decimal(std::string_view s) {
    if (s.empty()) return std::nullopt;
    size_t i = 0;
    if (s[0] == '+' || s[0] == '-') ++i;
    bool digit = false, dot = false;
    for (size_t j = i; j < s.size(); ++j) {
        if (std::isdigit(static_cast<unsigned char>(s[j]))) {
            digit = true;
        } else if (s[j] == '.' && !dot) {
            dot = true;
        } else {
            return std::nullopt;
        }
    }
    if (!digit) return std::nullopt;
    double v = 0;
    std::string tmp(s[0] == '+' ? s.substr(1) : s);
    auto [p, ec] = std::from_chars(tmp.data(), tmp.data() + tmp.size(), v);
    if (ec != std::errc() || p != tmp.data() + tmp.size()) return std::nullopt;
    return v;
}

}  // namespace detail

/// Key a textual answer can be compared under: a number, a calendar date,
/// or (fallback) its normalized text.
struct ComparableValue {
    enum class Kind { Numeric, Date, Lexical };

    Kind kind = Kind::Lexical;
    double number = 0.0;
    DateKey date{};
    std::string lexical;

    static ComparableValue numeric(double v) {
        ComparableValue c;
        c.kind = Kind::Numeric;
        c.number = v;
        return c;
    }
    static ComparableValue from_date(DateKey d) {
        ComparableValue c;
        c.kind = Kind::Date;
        c.date = d;
        return c;
    }
    static ComparableValue from_lexical(std::string s) {
        ComparableValue c;
        c.kind = Kind::Lexical;
        c.lexical = std::move(s);
        return c;
    }
};

/// Three-way comparison within a variant; nullopt when the variants differ
/// (cross-variant comparisons are not defined).
inline std::optional<int> compare(const ComparableValue& a, const ComparableValue& b) {
    if (a.kind != b.kind) return std::nullopt;
    switch (a.kind) {
        case ComparableValue::Kind::Numeric:
            return a.number < b.number ? -1 : a.number > b.number ? 1 : 0;
        case ComparableValue::Kind::Date: {
            auto c = a.date <=> b.date;
            return c < 0 ? -1 : c > 0 ? 1 : 0;
        }
        case ComparableValue::Kind::Lexical: {
            int c = a.lexical.compare(b.lexical);
            return c < 0 ? -1 : c > 0 ? 1 : 0;
        }
    }
    return std::nullopt;
}

/// Numeric first, then the configured date formats in order, else the
/// normalized text. A bare integer ("1932") stays Numeric; it compares
/// the same way a year would.
inline ComparableValue parse_comparable(
    std::string_view text,
    const std::vector<DateFormat>& formats = default_date_formats(),
    const NormalizeOptions& norm = {}) {
    std::string t = trim_copy(text);
    if (auto i = detail::parse_grouped_integer(t)) {
        return ComparableValue::numeric(static_cast<double>(*i));
    }
    if (auto d = detail::parse_decimal(t)) {
        return ComparableValue::numeric(*d);
    }
    for (DateFormat f : formats) {
        if (auto dk = detail::parse_date_as(f, t)) {
            return ComparableValue::from_date(*dk);
        }
    }
    return ComparableValue::from_lexical(normalize_answer(t, norm));
}

/// Coerce an answer string to a number: integer (thousands separators
/// stripped), then decimal, then a date (which coerces to its year).
/// A single leading or trailing prose token is tolerated ("4 siblings").
inline std::optional<double> coerce_number(
    std::string_view text,
    const std::vector<DateFormat>& formats = default_date_formats()) {
    auto attempt = [&](const std::string& s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        if (auto i = detail::parse_grouped_integer(s)) return static_cast<double>(*i);
        if (auto d = detail::parse_decimal(s)) return *d;
        for (DateFormat f : formats) {
            if (auto dk = detail::parse_date_as(f, s)) return static_cast<double>(dk->year);
        }
        return std::nullopt;
    };

    std::string full = trim_copy(text);
    if (auto v = attempt(full)) return v;

    auto toks = detail::whitespace_tokens(full);
    auto join = [](auto begin, auto end) {
        std::string out;
        for (auto it = begin; it != end; ++it) {
            if (!out.empty()) out.push_back(' ');
            out += *it;
        }
        return out;
    };
    if (toks.size() >= 2) {
        if (auto v = attempt(join(toks.begin(), toks.end() - 1))) return v;
        if (auto v = attempt(join(toks.begin() + 1, toks.end()))) return v;
    }
    if (toks.size() >= 3) {
        if (auto v = attempt(join(toks.begin() + 1, toks.end() - 1))) return v;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// AnswerValue

struct EmptyAnswer {
    friend bool operator==(const EmptyAnswer&, const EmptyAnswer&) = default;
};
struct SpanAnswer {
    std::string text;
    friend bool operator==(const SpanAnswer&, const SpanAnswer&) = default;
};
struct YesNoAnswer {
    bool value = false;
    friend bool operator==(const YesNoAnswer&, const YesNoAnswer&) = default;
};
struct NumberAnswer {
    double value = 0.0;
    friend bool operator==(const NumberAnswer&, const NumberAnswer&) = default;
};
/// Slot-indexed answers of a UNION, ordered by slot.
struct DictAnswer {
    std::vector<std::pair<int, std::string>> entries;
    friend bool operator==(const DictAnswer&, const DictAnswer&) = default;
};

/// Result of executing one node: a tagged value plus the ranked candidate
/// list retained for set operations, and (for primitive-derived values)
/// the answer-memory slot it was stored in.
struct AnswerValue {
    using Data = std::variant<EmptyAnswer, SpanAnswer, YesNoAnswer, NumberAnswer, DictAnswer>;

    Data data{EmptyAnswer{}};
    std::vector<ReaderCandidate> candidates;
    std::optional<int> slot;

    static AnswerValue empty() { return AnswerValue{}; }
    static AnswerValue span(std::string text) {
        AnswerValue v;
        v.data = SpanAnswer{std::move(text)};
        return v;
    }
    static AnswerValue yes_no(bool value) {
        AnswerValue v;
        v.data = YesNoAnswer{value};
        v.candidates = {{value ? "Yes" : "No", 1.0}};
        return v;
    }
    static AnswerValue number(double value) {
        AnswerValue v;
        v.data = NumberAnswer{value};
        v.candidates = {{render_number(value), 1.0}};
        return v;
    }
    static AnswerValue dict(std::vector<std::pair<int, std::string>> entries) {
        AnswerValue v;
        v.data = DictAnswer{std::move(entries)};
        return v;
    }

    bool is_empty() const { return std::holds_alternative<EmptyAnswer>(data); }
    bool is_span() const { return std::holds_alternative<SpanAnswer>(data); }
    bool is_yes_no() const { return std::holds_alternative<YesNoAnswer>(data); }
    bool is_number() const { return std::holds_alternative<NumberAnswer>(data); }
    bool is_dict() const { return std::holds_alternative<DictAnswer>(data); }

    const SpanAnswer& as_span() const { return std::get<SpanAnswer>(data); }
    const YesNoAnswer& as_yes_no() const { return std::get<YesNoAnswer>(data); }
    const NumberAnswer& as_number() const { return std::get<NumberAnswer>(data); }
    const DictAnswer& as_dict() const { return std::get<DictAnswer>(data); }

    /// Human-facing rendering; dictionaries print as
    /// "{Ans#1: v1, Ans#2: v2}" in slot order.
    std::string display_text() const {
        struct Visitor {
            std::string operator()(const EmptyAnswer&) const { return ""; }
            std::string operator()(const SpanAnswer& s) const { return s.text; }
            std::string operator()(const YesNoAnswer& y) const { return y.value ? "Yes" : "No"; }
            std::string operator()(const NumberAnswer& n) const { return render_number(n.value); }
            std::string operator()(const DictAnswer& d) const {
                std::string out = "{";
                for (size_t i = 0; i < d.entries.size(); ++i) {
                    if (i > 0) out += ", ";
                    out += "Ans#" + std::to_string(d.entries[i].first) + ": " +
                           d.entries[i].second;
                }
                out += "}";
                return out;
            }
        };
        return std::visit(Visitor{}, data);
    }

    /// Form used for EM/F1 scoring; dictionaries score as the
    /// concatenation of their values in slot order.
    std::string scoring_text() const {
        if (const auto* d = std::get_if<DictAnswer>(&data)) {
            std::string out;
            for (const auto& [k, v] : d->entries) {
                (void)k;
                if (!out.empty()) out.push_back(' ');
                out += v;
            }
            return out;
        }
        return display_text();
    }
};

}  // namespace hexec
