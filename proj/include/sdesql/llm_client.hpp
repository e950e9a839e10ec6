#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdesql/templates.hpp"

namespace sdesql {

struct Sampling {
    double temperature = 0.0;
    int n_samples = 1;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed;
    bool operator==(const Sampling&) const = default;
};

/// Linking and refinement run greedy; generation samples eight completions.
inline Sampling greedy() { return {}; }
inline Sampling consistency_sampling(int n = 8) { return {0.8, n, 1024, std::nullopt}; }

struct LlmRequest {
    TemplateId template_id = TemplateId::entity_extraction;
    Bindings bindings;
    Sampling sampling;
};

enum class BackendTag { live, replay };
std::string_view to_string(BackendTag t);

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct LlmResponse {
    std::vector<std::string> completions;
    Usage usage;
    BackendTag backend = BackendTag::live;
    std::string fingerprint;
};

/// SHA-256 over a canonical serialization of (template_id, bindings, sampling).
std::string fingerprint(const LlmRequest& request);

/// Source of live completions.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    /// Returns exactly `request.sampling.n_samples` completions or throws
    /// EndpointError / LlmTimeout.
    virtual std::vector<std::string> complete(const LlmRequest& request, const std::string& prompt, Usage& usage) = 0;
};

struct CassetteRecord {
    std::string fingerprint;
    TemplateId template_id = TemplateId::entity_extraction;
    Bindings bindings;
    Sampling sampling;
    std::vector<std::string> completions;
    std::string recorded_at;
};

/// JSON-lines log of calls. Appends are serialized; lookups return the last
/// record for a fingerprint.
class Cassette {
public:
    Cassette() = default;
    /// Loads an existing file; a missing file yields an empty cassette bound to `path`.
    static std::shared_ptr<Cassette> open(const std::filesystem::path& path);
    /// Like open(), but a missing file is an error. Throws MissingFile / MalformedRecord.
    static std::shared_ptr<Cassette> open_existing(const std::filesystem::path& path);

    const CassetteRecord* find(const std::string& fingerprint) const;
    void append(CassetteRecord record);

    std::vector<CassetteRecord> records() const;
    std::size_t size() const;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::deque<CassetteRecord> records_;
    std::unordered_map<std::string, std::size_t> latest_;
};

enum class LlmMode { live, record, replay };
std::string_view to_string(LlmMode m);
LlmMode parse_llm_mode(std::string_view s);

/// Reentrant client: renders the template, then serves the call from the
/// cassette (replay) or the backend (live, record).
class LlmClient {
public:
    LlmClient(LlmMode mode, std::shared_ptr<const TemplateRegistry> templates,
              std::shared_ptr<CompletionBackend> backend, std::shared_ptr<Cassette> cassette);

    LlmMode mode() const noexcept { return mode_; }
    const TemplateRegistry& templates() const noexcept { return *templates_; }

    std::string render(const LlmRequest& request) const;

    /// Throws UnknownTemplate, MissingBinding, EndpointError, ReplayMiss, LlmTimeout.
    LlmResponse complete(const LlmRequest& request) const;

private:
    LlmMode mode_;
    std::shared_ptr<const TemplateRegistry> templates_;
    std::shared_ptr<CompletionBackend> backend_;
    std::shared_ptr<Cassette> cassette_;
};

/// One call as logged into a trajectory.
struct LlmCall {
    TemplateId template_id = TemplateId::entity_extraction;
    std::string fingerprint;
    std::string prompt;
    std::vector<std::string> completions;
    bool retry = false;
};

/// Per-question call log on top of a shared client.
class Conversation {
public:
    explicit Conversation(const LlmClient& client) : client_(&client) {}

    /// Issues the call with `format_reminder` bound to "" unless already bound.
    LlmResponse ask(LlmRequest request, bool retry = false);

    /// Asks, parses completions[0]; on ParseFailure re-asks once with `reminder`
    /// bound to `format_reminder`. Returns nullopt when both attempts fail.
    template <class T>
    std::optional<T> ask_structured(const LlmRequest& request, const std::function<T(const std::string&)>& parse,
                                    const std::string& reminder);

    std::vector<LlmCall> take_calls();
    const std::vector<LlmCall>& calls() const noexcept { return calls_; }

private:
    const LlmClient* client_;
    std::vector<LlmCall> calls_;
};

}  // namespace sdesql

#include "sdesql/error.hpp"

namespace sdesql {

template <class T>
std::optional<T> Conversation::ask_structured(const LlmRequest& request,
                                              const std::function<T(const std::string&)>& parse,
                                              const std::string& reminder) {
    LlmRequest first = request;
    first.bindings.emplace("format_reminder", "");
    auto r1 = ask(first);
    try {
        return parse(r1.completions.at(0));
    } catch (const ParseFailure&) {
    }
    LlmRequest second = request;
    second.bindings["format_reminder"] = reminder;
    auto r2 = ask(second, true);
    try {
        return parse(r2.completions.at(0));
    } catch (const ParseFailure&) {
        return std::nullopt;
    }
}

}  // namespace sdesql
