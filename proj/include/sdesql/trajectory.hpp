#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdesql/dataset.hpp"
#include "sdesql/executor.hpp"
#include "sdesql/llm_client.hpp"

namespace sdesql {

inline constexpr std::string_view kStageLinking = "linking";
inline constexpr std::string_view kStageCandidates = "candidates_exploration";
inline constexpr std::string_view kStageCombinations = "combinations_exploration";
inline constexpr std::string_view kStageGeneration = "generation";
inline constexpr std::string_view kStageRefinement = "refinement";
inline constexpr std::string_view kStageTargetCheck = "target_check";

struct StageRecord {
    std::string stage;
    std::vector<LlmCall> calls;
    nlohmann::json detail = nlohmann::json::object();
};

/// Per-question log of every stage that ran. Timings are not serialized so
/// replayed runs produce identical files.
struct Trajectory {
    std::string question_id;
    std::string db_id;
    std::string question;
    std::string evidence;
    Difficulty difficulty = Difficulty::unknown;
    std::vector<StageRecord> stages;
    std::string final_sql;
    ExecStatus final_status = ExecStatus::error;
    std::size_t final_row_count = 0;
    std::optional<std::string> error;  // per-question failure verdict
    nlohmann::json config = nlohmann::json::object();

    const StageRecord* stage(std::string_view name) const;
    std::vector<std::string> stage_names() const;
};

nlohmann::json probe_json(const std::string& kind, const std::string& sql, const ExecutionOutcome& outcome);
nlohmann::json calls_json(const std::vector<LlmCall>& calls);

nlohmann::json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

void write_trajectories(const std::filesystem::path& path, const std::vector<Trajectory>& trajectories);
/// Throws MissingFile or MalformedRecord.
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path);

}  // namespace sdesql
