#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "sdesql/error.hpp"
#include "sdesql/evaluation.hpp"
#include "sdesql/harness.hpp"
#include "sdesql/pipeline.hpp"

namespace {

using namespace sdesql;
namespace fs = std::filesystem;

struct RunArgs {
    std::string dataset;
    std::string split = "dev";
    std::string questions;
    std::string mode = "replay";
    std::string cassette;
    std::string script;
    std::string templates;
    int consistency_n = 8;
    int workers = 1;
    long budget_ms = 120000;
    std::vector<std::string> disable;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
    cmd->add_option("--dataset", a.dataset, "Dataset root holding <split>.json and databases/");
    cmd->add_option("--split", a.split, "Split name");
    cmd->add_option("--questions", a.questions, "Questions file (instead of --dataset/--split)");
    cmd->add_option("--mode", a.mode, "live, record or replay");
    cmd->add_option("--cassette", a.cassette, "Cassette JSONL");
    cmd->add_option("--script", a.script, "Scripted backend rules (live/record without an endpoint)");
    cmd->add_option("--templates", a.templates, "Prompt template directory");
    cmd->add_option("--consistency-n", a.consistency_n, "Generation samples per question");
    cmd->add_option("--workers", a.workers, "Questions in flight");
    cmd->add_option("--budget-ms", a.budget_ms, "Per-question wall-clock budget");
}

Dataset load(const RunArgs& a) {
    if (!a.questions.empty()) return load_questions_file(a.questions);
    if (a.dataset.empty()) throw ConfigError("--dataset or --questions is required");
    return load_dataset(a.dataset, a.split);
}

std::shared_ptr<LlmClient> client_for(const RunArgs& a) {
    ClientOptions o;
    o.mode = parse_llm_mode(a.mode);
    o.cassette = a.cassette;
    o.templates_dir = a.templates;
    if (!a.script.empty()) o.script = fs::path(a.script);
    return make_client(o);
}

PipelineConfig config_for(const RunArgs& a, const AblationFlags& flags) {
    if (a.consistency_n < 1) throw ConfigError("--consistency-n must be at least 1");
    if (a.workers < 1) throw ConfigError("--workers must be at least 1");
    if (a.budget_ms < 1) throw ConfigError("--budget-ms must be positive");
    PipelineConfig c;
    c.flags = flags;
    c.consistency_n = a.consistency_n;
    c.workers = a.workers;
    c.question_budget = std::chrono::milliseconds(a.budget_ms);
    return c;
}

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

std::size_t count_errors(const std::vector<Trajectory>& ts) {
    std::size_t n = 0;
    for (const auto& t : ts) n += t.error ? 1 : 0;
    return n;
}

Dataset gold_for(const std::string& gold, const std::string& db_root) {
    auto ds = load_questions_file(gold);
    if (!db_root.empty()) ds.db_root = db_root;
    return ds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-to-SQL pipeline with database exploration"};
    app.require_subcommand(1);

    RunArgs run_args;
    std::string run_out = "trajectories.jsonl";
    std::string run_report;
    auto* run = app.add_subcommand("run", "Run the pipeline over a dataset split");
    add_run_options(run, run_args);
    run->add_option("--out", run_out, "Trajectory JSONL output");
    run->add_option("--disable", run_args.disable, "Stages to disable")->take_all();
    run->add_option("--report", run_report, "Also evaluate against gold and write a JSON report");

    RunArgs abl_args;
    std::string abl_rows = "all";
    std::string abl_out_dir = "ablation";
    bool abl_full = false;
    auto* ablate = app.add_subcommand("ablate", "Run one pipeline configuration per ablation row");
    add_run_options(ablate, abl_args);
    ablate->add_option("--rows", abl_rows, "all or a comma-separated list of row names");
    ablate->add_flag("--with-full", abl_full, "Prepend the full configuration");
    ablate->add_option("--out-dir", abl_out_dir, "Directory for per-row trajectories and reports");

    std::string sft_in, sft_gold, sft_out = "sft.jsonl", sft_db_root;
    bool sft_order = false;
    auto* sft = app.add_subcommand("export-sft", "Export SFT samples from correct trajectories");
    sft->add_option("--in", sft_in, "Trajectory JSONL")->required();
    sft->add_option("--gold", sft_gold, "Questions file with gold SQL")->required();
    sft->add_option("--db-root", sft_db_root, "Database root (default: sibling databases/)");
    sft->add_option("--out", sft_out, "SFT JSONL output");
    sft->add_flag("--order-sensitive", sft_order, "Compare row order");

    std::string ev_pred, ev_gold, ev_db_root, ev_json;
    bool ev_order = false;
    auto* eval = app.add_subcommand("eval", "Execution accuracy of predictions against gold");
    eval->add_option("--pred", ev_pred, "Trajectory JSONL or JSON map of id to SQL")->required();
    eval->add_option("--gold", ev_gold, "Questions file with gold SQL")->required();
    eval->add_option("--db-root", ev_db_root, "Database root (default: sibling databases/)");
    eval->add_option("--json", ev_json, "Write the JSON report here");
    eval->add_flag("--order-sensitive", ev_order, "Compare row order");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto flags = parse_disable_flags(run_args.disable);
            auto config = config_for(run_args, flags);
            auto ds = load(run_args);
            auto client = client_for(run_args);
            ResourceCache cache(ds.db_root, config.index, config.value_examples);
            auto ts = run_batch(ds.questions, *client, cache, config);
            write_trajectories(run_out, ts);
            std::cout << "questions: " << ts.size() << "  failed: " << count_errors(ts) << "  out: " << run_out
                      << "\n";
            if (!run_report.empty()) {
                auto report = evaluate(predictions_from(ts), ds);
                report.config = config.snapshot();
                write_text(run_report, to_json(report).dump(2) + "\n");
                std::cout << render_text(report);
            }
        } else if (*ablate) {
            auto rows = parse_ablation_rows(abl_rows);
            if (abl_full) rows.insert(rows.begin(), &kAblationRows[0]);
            std::vector<std::pair<const AblationRow*, PipelineConfig>> configs;
            for (const auto* row : rows) configs.emplace_back(row, config_for(abl_args, row_flags(*row)));
            auto ds = load(abl_args);
            auto client = client_for(abl_args);
            ResourceCache cache(ds.db_root, configs.front().second.index, configs.front().second.value_examples);
            std::vector<AblationResult> results;
            for (const auto& [row, config] : configs) {
                auto ts = run_batch(ds.questions, *client, cache, config);
                fs::path dir = fs::path(abl_out_dir) / std::string(row->name);
                fs::create_directories(dir);
                write_trajectories(dir / "trajectories.jsonl", ts);
                auto report = evaluate(predictions_from(ts), ds);
                report.config = config.snapshot();
                write_text(dir / "report.json", to_json(report).dump(2) + "\n");
                results.push_back({row, std::move(report)});
            }
            auto table = render_ablation_table(results);
            write_text(fs::path(abl_out_dir) / "ablation.json", ablation_json(results).dump(2) + "\n");
            write_text(fs::path(abl_out_dir) / "ablation.txt", table);
            std::cout << table;
        } else if (*sft) {
            auto ts = read_trajectories(sft_in);
            auto ds = gold_for(sft_gold, sft_db_root);
            EvalOptions opts;
            opts.order_sensitive = sft_order;
            auto report = evaluate(predictions_from(ts), ds, opts);
            auto out = extract_sft(ts, report);
            write_sft(sft_out, out.samples);
            std::cout << "correct: " << out.correct_trajectories << "  samples: " << out.samples.size()
                      << "  skipped: " << out.skipped << "  out: " << sft_out << "\n";
        } else if (*eval) {
            auto preds = read_predictions(ev_pred);
            auto ds = gold_for(ev_gold, ev_db_root);
            EvalOptions opts;
            opts.order_sensitive = ev_order;
            auto report = evaluate(preds, ds, opts);
            report.config = {{"order_sensitive", ev_order}};
            if (!ev_json.empty()) write_text(ev_json, to_json(report).dump(2) + "\n");
            std::cout << render_text(report);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
