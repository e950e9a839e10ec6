#include "sdesql/trajectory.hpp"

#include <fstream>

#include "sdesql/error.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

using nlohmann::json;

namespace {

ExecStatus parse_status(const std::string& s) {
    if (s == "rows") return ExecStatus::rows;
    if (s == "empty") return ExecStatus::empty;
    if (s == "timeout") return ExecStatus::timeout;
    return ExecStatus::error;
}

}  // namespace

const StageRecord* Trajectory::stage(std::string_view name) const {
    for (const auto& s : stages) {
        if (s.stage == name) return &s;
    }
    return nullptr;
}

std::vector<std::string> Trajectory::stage_names() const {
    std::vector<std::string> out;
    for (const auto& s : stages) out.push_back(s.stage);
    return out;
}

json probe_json(const std::string& kind, const std::string& sql, const ExecutionOutcome& outcome) {
    json j = {{"kind", kind}, {"sql", sql}, {"status", std::string(to_string(outcome.status))},
              {"row_count", outcome.row_count}};
    if (outcome.status == ExecStatus::rows) {
        json row = json::array();
        for (const auto& c : outcome.rows.front()) row.push_back(text::truncate(cell_to_string(c), 40));
        j["first_row"] = row;
    }
    if (outcome.status == ExecStatus::error) j["error"] = outcome.error_message;
    return j;
}

json calls_json(const std::vector<LlmCall>& calls) {
    json arr = json::array();
    for (const auto& c : calls) {
        arr.push_back({{"template_id", std::string(to_string(c.template_id))},
                       {"fingerprint", c.fingerprint},
                       {"prompt", c.prompt},
                       {"completions", c.completions},
                       {"retry", c.retry}});
    }
    return arr;
}

json to_json(const Trajectory& t) {
    json stages = json::array();
    for (const auto& s : t.stages) {
        stages.push_back({{"stage", s.stage}, {"calls", calls_json(s.calls)}, {"detail", s.detail}});
    }
    json j = {{"question_id", t.question_id},
              {"db_id", t.db_id},
              {"question", t.question},
              {"evidence", t.evidence},
              {"difficulty", std::string(to_string(t.difficulty))},
              {"stages", stages},
              {"final_sql", t.final_sql},
              {"final_status", std::string(to_string(t.final_status))},
              {"final_row_count", t.final_row_count},
              {"config", t.config}};
    j["error"] = t.error ? json(*t.error) : json(nullptr);
    return j;
}

Trajectory trajectory_from_json(const json& j) {
    Trajectory t;
    t.question_id = j.at("question_id").get<std::string>();
    t.db_id = j.value("db_id", "");
    t.question = j.value("question", "");
    t.evidence = j.value("evidence", "");
    t.difficulty = parse_difficulty(j.value("difficulty", "unknown"));
    for (const auto& s : j.value("stages", json::array())) {
        StageRecord r;
        r.stage = s.at("stage").get<std::string>();
        for (const auto& c : s.value("calls", json::array())) {
            r.calls.push_back({parse_template_id(c.at("template_id").get<std::string>()),
                               c.value("fingerprint", ""), c.value("prompt", ""),
                               c.value("completions", std::vector<std::string>{}), c.value("retry", false)});
        }
        r.detail = s.value("detail", json::object());
        t.stages.push_back(std::move(r));
    }
    t.final_sql = j.value("final_sql", "");
    t.final_status = parse_status(j.value("final_status", "error"));
    t.final_row_count = j.value("final_row_count", std::size_t{0});
    if (j.contains("error") && j["error"].is_string()) t.error = j["error"].get<std::string>();
    t.config = j.value("config", json::object());
    return t;
}

void write_trajectories(const std::filesystem::path& path, const std::vector<Trajectory>& trajectories) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& t : trajectories) out << to_json(t).dump() << '\n';
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile(path.string());
    std::vector<Trajectory> out;
    std::string line;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        if (!text::trim(line).empty()) {
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded()) throw MalformedRecord(index, "line", "not JSON");
            try {
                out.push_back(trajectory_from_json(j));
            } catch (const json::exception& e) {
                throw MalformedRecord(index, "question_id", e.what());
            }
        }
        ++index;
    }
    return out;
}

}  // namespace sdesql
