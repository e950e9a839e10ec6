#include "sdesql/harness.hpp"

#include "sdesql/error.hpp"
#include "sdesql/http_backend.hpp"
#include "sdesql/scripted_backend.hpp"

namespace sdesql {

std::shared_ptr<LlmClient> make_client(const ClientOptions& options) {
    auto dir = options.templates_dir.empty() ? TemplateRegistry::default_dir() : options.templates_dir;
    auto registry = std::make_shared<TemplateRegistry>(TemplateRegistry::load(dir));
    registry->verify_complete();

    std::shared_ptr<Cassette> cassette;
    std::shared_ptr<CompletionBackend> backend;
    if (options.mode != LlmMode::live) {
        if (options.cassette.empty()) throw ConfigError("--cassette is required in record and replay modes");
        cassette = options.mode == LlmMode::replay ? Cassette::open_existing(options.cassette)
                                                   : Cassette::open(options.cassette);
    }
    if (options.mode != LlmMode::replay) {
        if (options.script) {
            backend = ScriptedBackend::load(*options.script);
        } else {
            backend = std::make_shared<HttpChatBackend>(http_config_from_env());
        }
    }
    return std::make_shared<LlmClient>(options.mode, std::move(registry), std::move(backend), std::move(cassette));
}

}  // namespace sdesql
