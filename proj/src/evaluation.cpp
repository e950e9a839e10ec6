#include "sdesql/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sdesql/error.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

using nlohmann::json;

namespace {

constexpr std::array<Difficulty, 3> kBuckets = {Difficulty::simple, Difficulty::moderate, Difficulty::challenging};

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

json reference_json() {
    return {{"note", "published figures, not produced by this harness"},
            {"bird_dev", {{"simple", kReferenceFull.simple},
                          {"moderate", kReferenceFull.moderate},
                          {"challenging", kReferenceFull.challenging},
                          {"all", kReferenceFull.all}}},
            {"bird_dev_sft_all", kReferenceSftAll},
            {"spider_dev", kReferenceSpiderDev},
            {"spider_test", kReferenceSpiderTest},
            {"sft_train_questions", kReferenceTrainQuestions},
            {"sft_valid_rollouts", kReferenceValidRollouts},
            {"sft_samples", 2 * kReferenceValidRollouts}};
}

json bucket_json(const BucketStats& b) {
    return {{"correct", b.correct}, {"total", b.total}, {"ex", std::stod(fixed2(b.ex()))}};
}

std::string pad(std::string s, std::size_t width, bool left = true) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::string strip_db_tag(const std::string& sql) {
    auto tab = sql.find('\t');
    return std::string(text::trim(tab == std::string::npos ? sql : sql.substr(0, tab)));
}

}  // namespace

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::correct: return "correct";
        case Verdict::incorrect: return "incorrect";
        case Verdict::unevaluable: return "unevaluable";
    }
    return "incorrect";
}

std::string_view to_string(SftPhase p) { return p == SftPhase::exploration ? "exploration" : "prediction"; }

double BucketStats::ex() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total); }

EvalReport evaluate(const std::vector<Prediction>& predictions, const Dataset& gold, const EvalOptions& options) {
    EvalReport report;
    for (auto d : kBuckets) report.buckets[d];
    std::map<std::string, std::string> pred;
    for (const auto& p : predictions) pred[p.question_id] = p.sql;
    std::map<std::string, Database> handles;
    auto handle = [&](const std::string& db_id) -> Database& {
        auto it = handles.find(db_id);
        if (it == handles.end()) {
            it = handles.emplace(db_id, Database::open_readonly(database_path(gold.db_root, db_id))).first;
        }
        return it->second;
    };

    for (const auto& q : gold.questions) {
        QuestionVerdict v;
        v.question_id = q.id;
        v.db_id = q.db_id;
        v.difficulty = q.difficulty;
        v.gold_sql = q.gold_sql.value_or("");
        auto pit = pred.find(q.id);
        if (pit != pred.end()) v.predicted_sql = pit->second;

        std::optional<CanonicalResult> gold_result;
        Database* db = nullptr;
        try {
            db = &handle(q.db_id);
        } catch (const std::exception& e) {
            v.note = e.what();
        }
        if (db && !q.gold_sql) v.note = "no gold SQL";
        if (db && q.gold_sql) {
            auto out = db->execute(*q.gold_sql, options.limits);
            if (out.status == ExecStatus::error || out.status == ExecStatus::timeout) {
                v.note = "gold: " + (out.status == ExecStatus::timeout ? std::string("timeout") : out.error_message);
            } else {
                gold_result = canonicalize(out, options.order_sensitive);
            }
        }
        if (!gold_result) {
            v.verdict = Verdict::unevaluable;
            ++report.unevaluable;
            report.verdicts.push_back(std::move(v));
            continue;
        }

        if (pit == pred.end()) {
            v.note = "no prediction";
        } else if (text::trim(v.predicted_sql).empty()) {
            v.note = "empty prediction";
        } else {
            auto out = db->execute(v.predicted_sql, options.limits);
            if (out.status == ExecStatus::error) {
                v.note = "prediction: " + out.error_message;
            } else if (out.status == ExecStatus::timeout) {
                v.note = "prediction: timeout";
            } else if (results_equal(canonicalize(out, options.order_sensitive), *gold_result)) {
                v.verdict = Verdict::correct;
            }
        }
        auto& bucket = report.buckets[q.difficulty];
        ++bucket.total;
        ++report.overall.total;
        if (v.verdict == Verdict::correct) {
            ++bucket.correct;
            ++report.overall.correct;
        }
        report.verdicts.push_back(std::move(v));
    }
    report.ex_undefined = report.overall.total == 0;
    std::stable_sort(report.verdicts.begin(), report.verdicts.end(),
                     [](const auto& a, const auto& b) { return question_id_less(a.question_id, b.question_id); });
    return report;
}

std::vector<Prediction> predictions_from(const std::vector<Trajectory>& trajectories) {
    std::vector<Prediction> out;
    out.reserve(trajectories.size());
    for (const auto& t : trajectories) out.push_back({t.question_id, t.final_sql});
    return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile(path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();
    auto trimmed = text::trim(content);
    if (trimmed.empty()) return {};
    if (trimmed.front() == '{') {
        json doc;
        try {
            doc = json::parse(content);
        } catch (const json::parse_error&) {
            doc = nullptr;
        }
        if (doc.is_object() && !doc.contains("question_id")) {
            std::vector<Prediction> out;
            for (const auto& [k, v] : doc.items()) {
                if (!v.is_string()) throw MalformedRecord(out.size(), k, "expected SQL string");
                out.push_back({k, strip_db_tag(v.get<std::string>())});
            }
            std::stable_sort(out.begin(), out.end(),
                             [](const auto& a, const auto& b) { return question_id_less(a.question_id, b.question_id); });
            return out;
        }
    }
    return predictions_from(read_trajectories(path));
}

json to_json(const EvalReport& r) {
    json buckets = json::object();
    for (auto d : kBuckets) buckets[std::string(to_string(d))] = bucket_json(r.buckets.at(d));
    if (auto it = r.buckets.find(Difficulty::unknown); it != r.buckets.end() && it->second.total > 0) {
        buckets["unknown"] = bucket_json(it->second);
    }
    json verdicts = json::array();
    for (const auto& v : r.verdicts) {
        json j = {{"question_id", v.question_id},
                  {"db_id", v.db_id},
                  {"difficulty", std::string(to_string(v.difficulty))},
                  {"verdict", std::string(to_string(v.verdict))},
                  {"predicted_sql", v.predicted_sql},
                  {"gold_sql", v.gold_sql}};
        if (!v.note.empty()) j["note"] = v.note;
        verdicts.push_back(std::move(j));
    }
    return {{"buckets", buckets},
            {"overall", bucket_json(r.overall)},
            {"unevaluable", r.unevaluable},
            {"ex_undefined", r.ex_undefined},
            {"verdicts", verdicts},
            {"config", r.config},
            {"reference", reference_json()}};
}

std::string render_text(const EvalReport& r) {
    std::ostringstream os;
    os << pad("", 12) << pad("Simple", 10, false) << pad("Moderate", 10, false) << pad("Challenging", 13, false)
       << pad("All", 10, false) << "\n";
    os << pad("EX", 12);
    for (auto d : kBuckets) os << pad(fixed2(r.buckets.at(d).ex()), d == Difficulty::challenging ? 13 : 10, false);
    os << pad(fixed2(r.overall.ex()), 10, false) << "\n";
    os << pad("count", 12);
    for (auto d : kBuckets) {
        const auto& b = r.buckets.at(d);
        os << pad(std::to_string(b.correct) + "/" + std::to_string(b.total), d == Difficulty::challenging ? 13 : 10,
                  false);
    }
    os << pad(std::to_string(r.overall.correct) + "/" + std::to_string(r.overall.total), 10, false) << "\n";
    os << pad("reference", 12) << pad(fixed2(kReferenceFull.simple), 10, false)
       << pad(fixed2(kReferenceFull.moderate), 10, false) << pad(fixed2(kReferenceFull.challenging), 13, false)
       << pad(fixed2(kReferenceFull.all), 10, false) << "\n";
    if (r.unevaluable > 0) os << "unevaluable: " << r.unevaluable << "\n";
    if (r.ex_undefined) os << "EX undefined: no evaluated questions\n";
    return os.str();
}

std::vector<const AblationRow*> parse_ablation_rows(std::string_view spec) {
    std::vector<const AblationRow*> out;
    if (text::trim(spec) == "all") {
        for (std::size_t i = 1; i < kAblationRows.size(); ++i) out.push_back(&kAblationRows[i]);
        return out;
    }
    for (const auto& part : text::split(spec, ',')) {
        auto name = text::trim(part);
        if (name.empty()) continue;
        auto it = std::find_if(kAblationRows.begin(), kAblationRows.end(),
                               [&](const AblationRow& r) { return r.name == name; });
        if (it == kAblationRows.end()) throw ConfigError("unknown ablation row: " + std::string(name));
        out.push_back(&*it);
    }
    if (out.empty()) throw ConfigError("no ablation rows selected");
    return out;
}

AblationFlags row_flags(const AblationRow& row) {
    std::vector<std::string> names;
    for (auto d : row.disable) {
        if (!d.empty()) names.emplace_back(d);
    }
    return parse_disable_flags(names);
}

json ablation_json(const std::vector<AblationResult>& results) {
    json rows = json::array();
    for (const auto& r : results) {
        json ref = {{"simple", r.row->reference.simple},
                    {"moderate", r.row->reference.moderate},
                    {"challenging", r.row->reference.challenging},
                    {"all", r.row->reference.all}};
        rows.push_back({{"row", std::string(r.row->name)},
                        {"label", std::string(r.row->label)},
                        {"report", to_json(r.report)},
                        {"reference", ref}});
    }
    return {{"rows", rows}};
}

std::string render_ablation_table(const std::vector<AblationResult>& results) {
    std::size_t w = 14;
    for (const auto& r : results) w = std::max(w, r.row->label.size() + 2);
    std::ostringstream os;
    os << pad("Configuration", w) << pad("Simple", 10, false) << pad("Moderate", 10, false)
       << pad("Challenging", 13, false) << pad("All", 10, false) << pad("Ref All", 10, false) << "\n";
    for (const auto& r : results) {
        const auto& b = r.report.buckets;
        os << pad(std::string(r.row->label), w) << pad(fixed2(b.at(Difficulty::simple).ex()), 10, false)
           << pad(fixed2(b.at(Difficulty::moderate).ex()), 10, false)
           << pad(fixed2(b.at(Difficulty::challenging).ex()), 13, false)
           << pad(fixed2(r.report.overall.ex()), 10, false) << pad(fixed2(r.row->reference.all), 10, false) << "\n";
    }
    return os.str();
}

SftExport extract_sft(const std::vector<Trajectory>& trajectories, const EvalReport& report) {
    std::map<std::string, Verdict> verdicts;
    for (const auto& v : report.verdicts) verdicts[v.question_id] = v.verdict;
    SftExport out;
    for (const auto& t : trajectories) {
        auto it = verdicts.find(t.question_id);
        if (it == verdicts.end() || it->second != Verdict::correct) continue;
        ++out.correct_trajectories;

        const LlmCall* exploration = nullptr;
        if (const auto* s = t.stage(kStageCandidates)) {
            for (const auto& c : s->calls) {
                if (c.template_id == TemplateId::candidates_exploration && !c.completions.empty()) exploration = &c;
            }
        }
        const LlmCall* generation = nullptr;
        std::size_t selected = 0;
        if (const auto* s = t.stage(kStageGeneration)) {
            for (const auto& c : s->calls) {
                if (c.template_id == TemplateId::zero_shot_generation) generation = &c;
            }
            selected = s->detail.value("selected_sample_index", std::size_t{0});
        }
        if (!exploration || !generation || selected >= generation->completions.size()) {
            ++out.skipped;
            continue;
        }
        out.samples.push_back({SftPhase::exploration, t.question_id, exploration->prompt, exploration->completions.front()});
        out.samples.push_back({SftPhase::prediction, t.question_id, generation->prompt, generation->completions[selected]});
    }
    return out;
}

void write_sft(const std::filesystem::path& path, const std::vector<SftSample>& samples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& s : samples) {
        json j = {{"question_id", s.question_id},
                  {"phase", std::string(to_string(s.phase))},
                  {"prompt", s.prompt},
                  {"completion", s.completion}};
        out << j.dump() << "\n";
    }
}

}  // namespace sdesql
