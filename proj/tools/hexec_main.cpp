// hexec: parse, execute, convert and score H-expressions from the
// command line. See README.md for file formats.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hexec/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"H-expression question execution engine"};
    app.require_subcommand(1);

    hexec::RunConfig config;

    // Config file first, flags override (precedence: flags > file > defaults).
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                hexec::apply_config_file(config, argv[i + 1]);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
        }
    }
    std::string config_path;

    // parse ------------------------------------------------------------
    auto* parse_cmd = app.add_subcommand(
        "parse", "Parse and validate an H-expression (or a JSONL batch)");
    std::string parse_expression;
    std::string parse_input;
    parse_cmd->add_option("expression", parse_expression, "H-expression string");
    parse_cmd->add_option("--input", parse_input,
                          "JSONL file of {\"hexpression\": ...} lines");
    parse_cmd->add_option("--config", config_path, "JSON config file");

    // exec -------------------------------------------------------------
    auto* exec_cmd = app.add_subcommand("exec", "Execute a JSONL batch of items");
    std::string exec_input, exec_output;
    exec_cmd->add_option("--input", exec_input, "JSONL batch input")->required();
    exec_cmd->add_option("--output", exec_output, "output path (default stdout)");
    exec_cmd->add_option("--reader", config.reader.kind, "oracle | remote | fixture");
    exec_cmd->add_option("--facts", config.reader.facts, "oracle fact store (JSONL)");
    exec_cmd->add_option("--script", config.reader.script, "fixture script (JSONL)");
    exec_cmd->add_option("--endpoint", config.reader.endpoint, "remote reader URL");
    exec_cmd->add_option("--timeout-ms", config.reader.timeout_ms, "remote timeout");
    exec_cmd->add_option("--retries", config.reader.retries, "remote retries");
    exec_cmd->add_option("--top-k", config.top_k, "reader candidates per primitive");
    exec_cmd->add_option("--fallback", config.fallback, "max candidates tried per item");
    exec_cmd->add_option("--trace-dir", config.trace_dir, "write one trace JSON per item");
    exec_cmd->add_option("--parallel", config.parallel, "worker threads (0 = cores)");
    exec_cmd->add_option("--config", config_path, "JSON config file");

    // convert ----------------------------------------------------------
    auto* convert_cmd =
        app.add_subcommand("convert", "Build gold H-expressions from dataset records");
    std::string convert_dataset, convert_input, convert_output, convert_templates;
    convert_cmd->add_option("--dataset", convert_dataset, "musique | 2wiki")->required();
    convert_cmd->add_option("--input", convert_input, "dataset JSONL")->required();
    convert_cmd->add_option("--output", convert_output, "output path (default stdout)");
    convert_cmd->add_option("--templates", convert_templates,
                            "JSON file of relation -> question template");
    convert_cmd->add_option("--config", config_path, "JSON config file");

    // eval ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions (EM / token F1)");
    std::string eval_predictions, eval_gold, eval_output;
    std::string eval_group = "none";
    eval_cmd->add_option("--predictions", eval_predictions, "predictions JSONL")->required();
    eval_cmd->add_option("--gold", eval_gold, "gold JSONL (optional if gold is inline)");
    eval_cmd->add_option("--group-by", eval_group, "reasoning_type | none");
    eval_cmd->add_option("--output", eval_output, "report path (default stdout)");
    eval_cmd->add_option("--config", config_path, "JSON config file");

    CLI11_PARSE(app, argc, argv);

    if (parse_cmd->parsed()) {
        if (parse_expression.empty() && parse_input.empty()) {
            std::cerr << "error: provide an expression or --input\n";
            return 2;
        }
        return hexec::run_parse(parse_expression, parse_input, std::cout, std::cerr);
    }
    if (exec_cmd->parsed()) {
        return hexec::run_exec(exec_input, exec_output, config, std::cout, std::cerr);
    }
    if (convert_cmd->parsed()) {
        return hexec::run_convert(convert_dataset, convert_input, convert_output,
                                  convert_templates, std::cout, std::cerr);
    }
    if (eval_cmd->parsed()) {
        return hexec::run_eval(eval_predictions, eval_gold, eval_group == "reasoning_type",
                               eval_output, std::cout, std::cerr);
    }
    return 2;
}
