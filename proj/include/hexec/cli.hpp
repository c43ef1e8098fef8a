#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "hexec/builder.hpp"
#include "hexec/execute.hpp"
#include "hexec/http_reader.hpp"
#include "hexec/jsonl.hpp"
#include "hexec/metrics.hpp"
#include "hexec/parse.hpp"
#include "hexec/reader.hpp"
#include "hexec/validate.hpp"

// Batch command surface behind the hexec binary. Exit codes: 0 success,
// 1 any item-level failure, 2 configuration or IO failure. Batch outputs
// are byte-stable across runs; items may execute concurrently but output
// order always matches input order.

namespace hexec {

struct ReaderSettings {
    std::string kind = "oracle";  // oracle | remote | fixture
    std::string facts;            // oracle fact store (JSONL)
    std::string script;           // fixture rules (JSONL)
    std::string endpoint;         // remote reader URL
    int timeout_ms = 30000;
    int retries = 2;
};

struct RunConfig {
    ReaderSettings reader;
    int top_k = 5;
    int fallback = 10;      // max candidates tried per item
    std::string trace_dir;  // one trace JSON per item when set
    int parallel = 0;       // 0 = hardware concurrency
    bool a_number_placeholders = false;
    int max_depth = 16;
    std::vector<DateFormat> date_formats = default_date_formats();
    std::vector<std::string> entity_template_heads = default_entity_template_heads();

    ExecConfig to_exec_config() const {
        ExecConfig config;
        config.top_k = top_k;
        config.placeholders.a_number = a_number_placeholders;
        config.max_depth = max_depth;
        config.date_formats = date_formats;
        config.entity_template_heads = entity_template_heads;
        return config;
    }
};

inline DateFormat date_format_from_name(const std::string& name) {
    if (name == "d_month_yyyy") return DateFormat::DayMonthYear;
    if (name == "month_d_yyyy") return DateFormat::MonthDayYear;
    if (name == "month_yyyy") return DateFormat::MonthYear;
    if (name == "iso_ymd" || name == "yyyy-mm-dd") return DateFormat::IsoYmd;
    throw IoError("unknown date format '" + name + "'");
}

/// Merge settings from a JSON config file; command-line flags applied
/// afterwards take precedence.
inline void apply_config_json(RunConfig& config, const ojson& j) {
    if (j.contains("reader")) {
        const auto& r = j.at("reader");
        config.reader.kind = r.value("kind", config.reader.kind);
        config.reader.facts = r.value("facts", config.reader.facts);
        config.reader.script = r.value("script", config.reader.script);
        config.reader.endpoint = r.value("endpoint", config.reader.endpoint);
        config.reader.timeout_ms = r.value("timeout_ms", config.reader.timeout_ms);
        config.reader.retries = r.value("retries", config.reader.retries);
    }
    config.top_k = j.value("top_k", config.top_k);
    config.fallback = j.value("fallback", config.fallback);
    config.trace_dir = j.value("trace_dir", config.trace_dir);
    config.parallel = j.value("parallel", config.parallel);
    config.max_depth = j.value("max_depth", config.max_depth);
    if (j.contains("placeholders")) {
        config.a_number_placeholders =
            j.at("placeholders").value("a_number", config.a_number_placeholders);
    }
    if (j.contains("date_formats")) {
        config.date_formats.clear();
        for (const auto& f : j.at("date_formats")) {
            config.date_formats.push_back(date_format_from_name(f.get<std::string>()));
        }
    }
    if (j.contains("entity_template_heads")) {
        config.entity_template_heads.clear();
        for (const auto& h : j.at("entity_template_heads")) {
            config.entity_template_heads.push_back(h.get<std::string>());
        }
    }
}

inline void apply_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    ojson j = ojson::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw IoError(path + ": invalid config JSON");
    apply_config_json(config, j);
}

inline std::unique_ptr<Reader> make_reader(const RunConfig& config) {
    const auto& r = config.reader;
    if (r.kind == "oracle") {
        if (r.facts.empty()) throw IoError("oracle reader requires a facts file (--facts)");
        return std::make_unique<OracleReader>(FactStore::from_jsonl(r.facts));
    }
    if (r.kind == "fixture") {
        const std::string& path = !r.script.empty() ? r.script : r.facts;
        if (path.empty()) throw IoError("fixture reader requires a script file (--script)");
        return std::make_unique<FixtureReader>(FixtureReader::from_jsonl(path));
    }
    if (r.kind == "remote") {
        if (r.endpoint.empty()) throw IoError("remote reader requires an endpoint (--endpoint)");
        RemoteReaderConfig rc;
        rc.endpoint = r.endpoint;
        rc.timeout_ms = r.timeout_ms;
        rc.retries = r.retries;
        return std::make_unique<RemoteReader>(rc);
    }
    throw IoError("unknown reader kind '" + r.kind + "'");
}

namespace detail {

inline ojson diagnostics_to_json(const ValidationReport& report) {
    ojson out = ojson::array();
    for (const auto& d : report.diagnostics) {
        out.push_back({{"severity", std::string(severity_name(d.severity))},
                       {"code", d.code},
                       {"message", d.message},
                       {"node_path", d.node_path}});
    }
    return out;
}

inline std::string sanitize_filename(const std::string& id) {
    std::string out;
    for (char c : id) {
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ||
                              c == '_'
                          ? c
                          : '_');
    }
    return out.empty() ? "item" : out;
}

/// Run `work(i)` for i in [0, n) on up to `parallel` threads.
inline void parallel_for(size_t n, int parallel, const std::function<void(size_t)>& work) {
    unsigned threads = parallel > 0 ? static_cast<unsigned>(parallel)
                                    : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, n == 0 ? 1 : static_cast<unsigned>(n));
    if (threads <= 1) {
        for (size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) work(i);
        });
    }
    for (auto& t : pool) t.join();
}

class OutputTarget {
public:
    OutputTarget(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw IoError("cannot write " + path);
            stream_ = &file_;
        }
    }
    std::ostream& stream() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// parse

/// Parse + validate one expression, or a JSONL file of {"hexpression"}
/// lines. Exit 0 iff everything is executable.
inline int run_parse(const std::string& expression, const std::string& input_path,
                     std::ostream& out, std::ostream& err) {
    auto handle_one = [&](const std::string& text, ojson& line) {
        try {
            auto expr = parse_hexpression(text);
            auto report = validate(*expr);
            line["canonical"] = serialize(*expr);
            line["executable"] = report.executable;
            line["diagnostics"] = detail::diagnostics_to_json(report);
            return report.executable;
        } catch (const ParseError& e) {
            line["executable"] = false;
            line["error"] = {{"code", e.code()},
                             {"position", e.position()},
                             {"message", e.what()}};
            return false;
        }
    };

    if (input_path.empty()) {
        ojson line;
        line["hexpression"] = expression;
        bool ok = handle_one(expression, line);
        out << line.dump(2) << "\n";
        return ok ? 0 : 1;
    }

    int executable = 0;
    int total = 0;
    try {
        for (const auto& item : read_jsonl(input_path)) {
            if (!item.contains("hexpression")) {
                throw IoError(input_path + ": every line needs an \"hexpression\" field");
            }
            std::string text = item.at("hexpression").get<std::string>();
            ojson line;
            line["hexpression"] = text;
            if (item.contains("id")) line["id"] = item.at("id");
            if (handle_one(text, line)) ++executable;
            ++total;
            out << line.dump() << "\n";
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << executable << "/" << total << " executable\n";
    return executable == total ? 0 : 1;
}

// ---------------------------------------------------------------------------
// exec

/// Execute a batch: JSONL of {"id", "hexpression" | "candidates": [...],
/// "passages": [{"title","text"}]}. Per-item failures are recorded in the
/// output and never abort the batch.
inline int run_exec(const std::string& input_path, const std::string& output_path,
                    const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::vector<ojson> items;
    std::unique_ptr<Reader> reader;
    std::unique_ptr<detail::OutputTarget> target;
    try {
        items = read_jsonl(input_path);
        reader = make_reader(config);
        target = std::make_unique<detail::OutputTarget>(output_path, out);
        if (!config.trace_dir.empty()) {
            std::filesystem::create_directories(config.trace_dir);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    ExecConfig exec_config = config.to_exec_config();
    std::vector<ojson> results(items.size());
    std::vector<bool> hard_failed(items.size(), false);

    detail::parallel_for(items.size(), config.parallel, [&](size_t i) {
        const ojson& item = items[i];
        std::string id = detail::id_from_json(item);
        if (id.empty()) id = "item" + std::to_string(i + 1);

        std::vector<std::string> candidates;
        if (item.contains("candidates") && item.at("candidates").is_array()) {
            for (const auto& c : item.at("candidates")) {
                candidates.push_back(c.get<std::string>());
            }
        } else if (item.contains("hexpression")) {
            candidates.push_back(item.at("hexpression").get<std::string>());
        }
        if (config.fallback > 0 && candidates.size() > static_cast<size_t>(config.fallback)) {
            candidates.resize(static_cast<size_t>(config.fallback));
        }

        std::vector<PassageRef> passages;
        if (item.contains("passages")) {
            for (const auto& p : item.at("passages")) {
                passages.push_back({p.value("title", ""), p.value("text", "")});
            }
        }

        ojson line;
        line["id"] = id;
        if (candidates.empty()) {
            line["predicted"] = "";
            line["exec_status"] = "HARD_FAIL:no_candidates";
            hard_failed[i] = true;
            results[i] = std::move(line);
            return;
        }

        ExecutionResult result =
            execute_with_fallback(candidates, passages, *reader, exec_config);
        line["predicted"] = result.answer.scoring_text();
        line["display"] = result.answer.display_text();
        line["exec_status"] = result.trace.status.to_string();
        if (result.answer.is_dict()) line["answer_kind"] = "dict";
        if (result.trace.chosen_candidate) {
            line["chosen_candidate"] = *result.trace.chosen_candidate;
        }
        hard_failed[i] = result.trace.status.hard();

        if (!config.trace_dir.empty()) {
            std::string trace_path =
                (std::filesystem::path(config.trace_dir) /
                 (detail::sanitize_filename(id) + ".json"))
                    .string();
            std::ofstream trace_out(trace_path);
            if (trace_out) {
                ojson trace = trace_to_json(result.trace);
                trace["id"] = id;
                trace_out << trace.dump(2) << "\n";
                line["trace_path"] = trace_path;
            }
        }
        results[i] = std::move(line);
    });

    bool any_hard = false;
    for (size_t i = 0; i < results.size(); ++i) {
        target->stream() << results[i].dump() << "\n";
        if (hard_failed[i]) any_hard = true;
    }
    return any_hard ? 1 : 0;
}

// ---------------------------------------------------------------------------
// convert

/// Convert dataset records to gold H-expressions:
/// {"id","question","hexpression","answer","reasoning_type"} per line.
inline int run_convert(const std::string& dataset, const std::string& input_path,
                       const std::string& output_path, const std::string& templates_path,
                       std::ostream& out, std::ostream& err) {
    bool musique = dataset == "musique";
    if (!musique && dataset != "2wiki") {
        err << "error: unknown dataset '" << dataset << "' (expected musique or 2wiki)\n";
        return 2;
    }

    std::vector<ojson> lines;
    TemplateTable templates = TemplateTable::builtin();
    std::unique_ptr<detail::OutputTarget> target;
    try {
        lines = read_jsonl(input_path);
        if (!templates_path.empty()) {
            templates = TemplateTable::from_json_file(templates_path);
        }
        target = std::make_unique<detail::OutputTarget>(output_path, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    int failures = 0;
    for (const auto& raw : lines) {
        ojson line;
        try {
            if (musique) {
                MusiqueRecord record = musique_record_from_json(raw);
                auto expr = build_from_musique(record);
                line["id"] = record.id;
                line["question"] = record.question;
                line["hexpression"] = serialize(*expr);
                line["answer"] = record.answer;
                line["reasoning_type"] = record.reasoning_type;
            } else {
                TwoWikiRecord record = two_wiki_record_from_json(raw);
                auto expr = build_from_2wiki(record, templates);
                line["id"] = record.id;
                line["question"] = record.question;
                line["hexpression"] = serialize(*expr);
                line["answer"] = record.answer;
                line["reasoning_type"] = record.reasoning_type;
            }
        } catch (const BuildError& e) {
            line["id"] = detail::id_from_json(raw);
            line["error"] = e.what();
            ++failures;
        }
        target->stream() << line.dump() << "\n";
    }
    if (failures > 0) {
        err << failures << "/" << lines.size() << " records failed to convert\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval

/// Score predictions against gold answers and print the report JSON.
/// Gold may come from a separate JSONL (matched on id) or be inlined in
/// the predictions file as "gold": [...].
inline int run_eval(const std::string& predictions_path, const std::string& gold_path,
                    bool group_by_reasoning_type, const std::string& output_path,
                    std::ostream& out, std::ostream& err) {
    std::vector<ScoredPrediction> scored;
    try {
        std::map<std::string, std::pair<std::vector<std::string>, std::string>> gold_by_id;
        if (!gold_path.empty()) {
            for (const auto& g : read_jsonl(gold_path)) {
                std::vector<std::string> answers;
                if (g.contains("gold") && g.at("gold").is_array()) {
                    for (const auto& a : g.at("gold")) answers.push_back(a.get<std::string>());
                } else if (g.contains("answers") && g.at("answers").is_array()) {
                    for (const auto& a : g.at("answers")) answers.push_back(a.get<std::string>());
                } else if (g.contains("answer")) {
                    answers.push_back(g.at("answer").get<std::string>());
                }
                gold_by_id[detail::id_from_json(g)] = {answers,
                                                       g.value("reasoning_type", "")};
            }
        }

        for (const auto& p : read_jsonl(predictions_path)) {
            ScoredPrediction item;
            item.id = detail::id_from_json(p);
            item.predicted = p.value("predicted", "");
            item.exec_status = ExecStatus::from_string(p.value("exec_status", "SUCCESS"));
            item.dict_answer = p.value("answer_kind", "") == "dict";
            if (p.contains("reasoning_type")) {
                item.reasoning_type = p.at("reasoning_type").get<std::string>();
            }
            if (p.contains("gold") && p.at("gold").is_array()) {
                for (const auto& a : p.at("gold")) {
                    item.gold.push_back(a.get<std::string>());
                }
            }
            auto it = gold_by_id.find(item.id);
            if (it != gold_by_id.end()) {
                if (item.gold.empty()) item.gold = it->second.first;
                if (!item.reasoning_type && !it->second.second.empty()) {
                    item.reasoning_type = it->second.second;
                }
            }
            if (item.gold.empty()) {
                throw IoError("no gold answer for id '" + item.id + "'");
            }
            scored.push_back(std::move(item));
        }

        EvalReport report = aggregate(
            scored, group_by_reasoning_type ? GroupBy::ReasoningType : GroupBy::None);
        detail::OutputTarget target(output_path, out);
        target.stream() << report_to_json(report).dump(2) << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace hexec
