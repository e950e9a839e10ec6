#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdesql/dataset.hpp"
#include "sdesql/executor.hpp"
#include "sdesql/pipeline.hpp"
#include "sdesql/trajectory.hpp"

namespace sdesql {

struct Prediction {
    std::string question_id;
    std::string sql;
};

enum class Verdict { correct, incorrect, unevaluable };
std::string_view to_string(Verdict v);

struct QuestionVerdict {
    std::string question_id;
    std::string db_id;
    Difficulty difficulty = Difficulty::unknown;
    Verdict verdict = Verdict::incorrect;
    std::string predicted_sql;
    std::string gold_sql;
    std::string note;  // why a prediction failed or gold was unevaluable
};

struct BucketStats {
    std::size_t correct = 0;
    std::size_t total = 0;
    /// Percentage; 0 when the bucket is empty.
    double ex() const;
};

/// Published figures carried alongside every report; never computed here.
struct ReferenceRow {
    std::string_view label;
    double simple, moderate, challenging, all;
};

inline constexpr ReferenceRow kReferenceFull{"full", 74.92, 57.76, 53.10, 67.67};
inline constexpr double kReferenceSftAll = 68.19;
inline constexpr double kReferenceSpiderDev = 87.5;
inline constexpr double kReferenceSpiderTest = 88.5;
inline constexpr std::size_t kReferenceTrainQuestions = 9428;
inline constexpr std::size_t kReferenceValidRollouts = 5231;

struct EvalReport {
    std::map<Difficulty, BucketStats> buckets;  // simple, moderate, challenging always present
    BucketStats overall;
    std::size_t unevaluable = 0;
    bool ex_undefined = false;  // no evaluated question; EX reported as 0
    std::vector<QuestionVerdict> verdicts;  // sorted by question id
    nlohmann::json config = nlohmann::json::object();
};

struct EvalOptions {
    bool order_sensitive = false;
    ExecutionLimits limits{std::chrono::milliseconds(30000), 1000000};
};

/// Executes gold and predicted SQL per question and compares canonical results.
/// Questions without a prediction count as incorrect; gold that fails to
/// execute marks the question unevaluable.
EvalReport evaluate(const std::vector<Prediction>& predictions, const Dataset& gold, const EvalOptions& options = {});

std::vector<Prediction> predictions_from(const std::vector<Trajectory>& trajectories);

/// Trajectories JSONL or a JSON object mapping question id to SQL (a trailing
/// tab-separated db tag is dropped).
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

nlohmann::json to_json(const EvalReport& report);
std::string render_text(const EvalReport& report);

struct AblationRow {
    std::string_view name;   // used with --rows
    std::string_view label;  // table label
    std::array<std::string_view, 2> disable;  // empty entries are unused
    ReferenceRow reference;
};

inline constexpr std::array<AblationRow, 7> kAblationRows = {{
    {"full", "Full pipeline", {"", ""}, kReferenceFull},
    {"soft-linker", "w/o Soft Schema Linker", {"soft-linker", ""}, {"", 73.51, 58.84, 50.34, 66.88}},
    {"gen-exploration", "w/o Exploration Before Generation", {"gen-exploration", ""},
     {"", 72.97, 56.46, 48.97, 65.71}},
    {"refinement", "w/o Refinement Module", {"refinement", ""}, {"", 72.97, 55.60, 48.97, 65.45}},
    {"refine-exploration", "w/o Exploration in Refinement", {"refine-exploration", ""},
     {"", 72.86, 56.68, 51.72, 65.97}},
    {"target-check", "w/o Target Checking", {"target-check", ""}, {"", 73.19, 57.76, 49.66, 66.30}},
    {"gen-ref-exploration", "w/o Exploration in Gen & Ref", {"gen-exploration", "refine-exploration"},
     {"", 72.11, 54.31, 48.28, 64.47}},
}};

/// `all` expands to the six ablation rows in table order; otherwise a
/// comma-separated list of row names. Throws ConfigError on unknown names.
std::vector<const AblationRow*> parse_ablation_rows(std::string_view spec);
AblationFlags row_flags(const AblationRow& row);

struct AblationResult {
    const AblationRow* row = nullptr;
    EvalReport report;
};

nlohmann::json ablation_json(const std::vector<AblationResult>& results);
std::string render_ablation_table(const std::vector<AblationResult>& results);

enum class SftPhase { exploration, prediction };
std::string_view to_string(SftPhase p);

struct SftSample {
    SftPhase phase = SftPhase::exploration;
    std::string question_id;
    std::string prompt;
    std::string completion;
};

struct SftExport {
    std::vector<SftSample> samples;
    std::size_t correct_trajectories = 0;
    std::size_t skipped = 0;  // correct but missing a phase
};

/// Two samples per trajectory whose verdict is correct: the last exploration
/// prompt/completion and the generation prompt with the selected completion.
SftExport extract_sft(const std::vector<Trajectory>& trajectories, const EvalReport& report);
void write_sft(const std::filesystem::path& path, const std::vector<SftSample>& samples);

}  // namespace sdesql
