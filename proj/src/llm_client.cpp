#include "sdesql/llm_client.hpp"

#include <nlohmann/json.hpp>

#include <ctime>
#include <fstream>

#include "sdesql/error.hpp"
#include "sdesql/text.hpp"

namespace sdesql {

using nlohmann::json;

namespace {

json sampling_json(const Sampling& s) {
    json j = {{"temperature", s.temperature}, {"n_samples", s.n_samples}, {"max_tokens", s.max_tokens}};
    j["seed"] = s.seed ? json(*s.seed) : json(nullptr);
    return j;
}

Sampling sampling_from(const json& j) {
    Sampling s;
    s.temperature = j.at("temperature").get<double>();
    s.n_samples = j.at("n_samples").get<int>();
    s.max_tokens = j.value("max_tokens", 1024);
    if (j.contains("seed") && !j["seed"].is_null()) s.seed = j["seed"].get<std::int64_t>();
    return s;
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json record_json(const CassetteRecord& r) {
    return {{"fingerprint", r.fingerprint},
            {"template_id", std::string(to_string(r.template_id))},
            {"bindings", r.bindings},
            {"sampling", sampling_json(r.sampling)},
            {"completions", r.completions},
            {"recorded_at", r.recorded_at}};
}

}  // namespace

std::string_view to_string(BackendTag t) { return t == BackendTag::live ? "live" : "replay"; }

std::string_view to_string(LlmMode m) {
    switch (m) {
        case LlmMode::live: return "live";
        case LlmMode::record: return "record";
        case LlmMode::replay: return "replay";
    }
    return "?";
}

LlmMode parse_llm_mode(std::string_view s) {
    if (s == "live") return LlmMode::live;
    if (s == "record") return LlmMode::record;
    if (s == "replay") return LlmMode::replay;
    throw ConfigError("unknown mode: " + std::string(s));
}

std::string fingerprint(const LlmRequest& request) {
    // json objects keep keys sorted, so binding insertion order never matters.
    json j = {{"template_id", std::string(to_string(request.template_id))},
              {"bindings", request.bindings},
              {"sampling", sampling_json(request.sampling)}};
    return text::sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------

std::shared_ptr<Cassette> Cassette::open(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        auto c = std::make_shared<Cassette>();
        c->path_ = path;
        return c;
    }
    return open_existing(path);
}

std::shared_ptr<Cassette> Cassette::open_existing(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile(path.string());
    auto c = std::make_shared<Cassette>();
    c->path_ = path;
    std::string line;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) {
            ++index;
            continue;
        }
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw MalformedRecord(index, "line", "not a JSON object");
        CassetteRecord r;
        try {
            r.fingerprint = j.at("fingerprint").get<std::string>();
            r.template_id = parse_template_id(j.at("template_id").get<std::string>());
            r.bindings = j.at("bindings").get<Bindings>();
            r.sampling = sampling_from(j.at("sampling"));
            r.completions = j.at("completions").get<std::vector<std::string>>();
            r.recorded_at = j.value("recorded_at", "");
        } catch (const json::exception& e) {
            throw MalformedRecord(index, "record", e.what());
        }
        c->latest_[r.fingerprint] = c->records_.size();
        c->records_.push_back(std::move(r));
        ++index;
    }
    return c;
}

const CassetteRecord* Cassette::find(const std::string& fp) const {
    std::lock_guard lock(mu_);
    auto it = latest_.find(fp);
    return it == latest_.end() ? nullptr : &records_[it->second];
}

void Cassette::append(CassetteRecord record) {
    std::lock_guard lock(mu_);
    if (record.recorded_at.empty()) record.recorded_at = utc_now();
    if (!path_.empty()) {
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        std::ofstream out(path_, std::ios::binary | std::ios::app);
        if (!out) throw Error("cannot append to cassette " + path_.string());
        out << record_json(record).dump() << '\n';
    }
    latest_[record.fingerprint] = records_.size();
    records_.push_back(std::move(record));
}

std::vector<CassetteRecord> Cassette::records() const {
    std::lock_guard lock(mu_);
    return {records_.begin(), records_.end()};
}

std::size_t Cassette::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

// ---------------------------------------------------------------------------

LlmClient::LlmClient(LlmMode mode, std::shared_ptr<const TemplateRegistry> templates,
                     std::shared_ptr<CompletionBackend> backend, std::shared_ptr<Cassette> cassette)
    : mode_(mode), templates_(std::move(templates)), backend_(std::move(backend)), cassette_(std::move(cassette)) {
    if (!templates_) throw ConfigError("template registry required");
    if (mode_ != LlmMode::replay && !backend_) throw ConfigError("live and record modes need a backend");
    if (mode_ != LlmMode::live && !cassette_) throw ConfigError("record and replay modes need a cassette");
}

std::string LlmClient::render(const LlmRequest& request) const {
    return render_prompt(*templates_, request.template_id, request.bindings);
}

LlmResponse LlmClient::complete(const LlmRequest& request) const {
    if (request.sampling.n_samples < 1) throw ConfigError("n_samples must be at least 1");
    std::string prompt = render(request);
    LlmResponse resp;
    resp.fingerprint = fingerprint(request);
    if (mode_ == LlmMode::replay) {
        const CassetteRecord* rec = cassette_->find(resp.fingerprint);
        if (!rec) throw ReplayMiss(resp.fingerprint);
        resp.completions = rec->completions;
        resp.backend = BackendTag::replay;
        return resp;
    }
    resp.completions = backend_->complete(request, prompt, resp.usage);
    if (resp.completions.size() != static_cast<std::size_t>(request.sampling.n_samples)) {
        throw EndpointError(200, "expected " + std::to_string(request.sampling.n_samples) + " completions, got " +
                                     std::to_string(resp.completions.size()));
    }
    resp.backend = BackendTag::live;
    if (mode_ == LlmMode::record) {
        cassette_->append({resp.fingerprint, request.template_id, request.bindings, request.sampling,
                           resp.completions, {}});
    }
    return resp;
}

// ---------------------------------------------------------------------------

LlmResponse Conversation::ask(LlmRequest request, bool retry) {
    request.bindings.emplace("format_reminder", "");
    auto resp = client_->complete(request);
    calls_.push_back({request.template_id, resp.fingerprint, client_->render(request), resp.completions, retry});
    return resp;
}

std::vector<LlmCall> Conversation::take_calls() {
    std::vector<LlmCall> out;
    out.swap(calls_);
    return out;
}

}  // namespace sdesql
