#pragma once

#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hexec/answer.hpp"

// JSONL plumbing shared by the CLI and file-backed stores. ordered_json
// keeps output key order stable so batch outputs diff cleanly.

namespace hexec {

using ojson = nlohmann::ordered_json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Read a JSONL file: one JSON value per non-blank line.
inline std::vector<ojson> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::vector<ojson> lines;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_copy(line).empty()) continue;
        ojson parsed = ojson::parse(line, nullptr, false);
        if (parsed.is_discarded()) {
            throw IoError(path + ":" + std::to_string(line_no) + ": invalid JSON");
        }
        lines.push_back(std::move(parsed));
    }
    return lines;
}

inline void write_jsonl(std::ostream& out, const std::vector<ojson>& lines) {
    for (const auto& line : lines) {
        out << line.dump() << "\n";
    }
}

inline void write_jsonl_file(const std::string& path, const std::vector<ojson>& lines) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    write_jsonl(out, lines);
}

}  // namespace hexec
