#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "sdesql/catalog.hpp"
#include "sdesql/dataset.hpp"
#include "sdesql/explorer.hpp"
#include "sdesql/linker.hpp"
#include "sdesql/llm_client.hpp"
#include "sdesql/refiner.hpp"
#include "sdesql/trajectory.hpp"
#include "sdesql/value_index.hpp"

namespace sdesql {

/// Stage switches; everything is enabled by default.
struct AblationFlags {
    bool soft_linker = true;
    bool gen_exploration = true;
    bool refinement = true;
    bool refine_exploration = true;
    bool target_check = true;

    bool operator==(const AblationFlags&) const = default;

    /// Names of disabled stages, in flag order.
    std::vector<std::string> disabled() const;
};

inline constexpr std::array<std::string_view, 5> kDisableFlagNames = {
    "soft-linker", "gen-exploration", "refinement", "refine-exploration", "target-check"};

/// Builds flags from `--disable` names. Throws ConfigError for unknown names and
/// for refine-exploration combined with refinement.
AblationFlags parse_disable_flags(const std::vector<std::string>& names);

struct PipelineConfig {
    AblationFlags flags;
    int consistency_n = 8;
    LinkerConfig linker;
    ValueIndexConfig index;
    ExplorerConfig explorer;
    RefinerConfig refiner;
    ExecutionLimits limits{};
    std::chrono::milliseconds question_budget{120000};
    int workers = 1;
    std::size_t value_examples = 3;

    nlohmann::json snapshot() const;
};

/// Catalog and value index of one database, immutable once built.
struct DatabaseResources {
    std::filesystem::path path;
    DatabaseCatalog catalog;
    ValueIndex index;
};

/// Lazily builds and shares per-database resources across workers.
class ResourceCache {
public:
    ResourceCache(std::filesystem::path db_root, ValueIndexConfig index_config, std::size_t value_examples = 3);
    std::shared_ptr<const DatabaseResources> get(const std::string& db_id);

private:
    std::filesystem::path db_root_;
    ValueIndexConfig index_config_;
    std::size_t value_examples_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<const DatabaseResources>> cache_;
};

/// Runs every enabled stage for one question. Failures become an error verdict
/// on the trajectory; nothing propagates.
Trajectory run_pipeline(const QuestionRecord& question, const LlmClient& client, ResourceCache& cache,
                        const PipelineConfig& config);

/// Question-level parallelism; the result is sorted by question id.
std::vector<Trajectory> run_batch(const std::vector<QuestionRecord>& questions, const LlmClient& client,
                                  ResourceCache& cache, const PipelineConfig& config);

}  // namespace sdesql
