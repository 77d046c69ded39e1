#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "streetcrime/core/error.hpp"
#include "streetcrime/core/io.hpp"
#include "streetcrime/core/parallel.hpp"
#include "streetcrime/ingest/manifest.hpp"

namespace streetcrime::ingest {

inline const char* const kApiKeyEnv = "STREETVIEW_API_KEY";

struct HttpResponse {
    int status = 0;  // 0 on transport failure
    std::string body;
};

// Performs one GET. Implementations must not log the URL (it carries the key).
using HttpGet = std::function<HttpResponse(const std::string& url)>;

struct FetchOptions {
    std::string api_key;
    std::size_t max_concurrent = 8;
    int retries = 3;                          // extra attempts after the first
    std::chrono::milliseconds backoff{250};   // doubled after each failed attempt
    std::size_t checkpoint_every = 100;       // manifest rewrite cadence
};

struct FetchSummary {
    std::size_t fetched = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;  // already fetched with the image on disk
    std::size_t requests = 0;
};

inline std::string with_api_key(std::string url, const std::string& key) {
    if (auto pos = url.find(kApiKeyPlaceholder); pos != std::string::npos)
        url.replace(pos, kApiKeyPlaceholder.size(), key);
    return url;
}

// Downloads every entry not yet fetched. Each worker owns one request at a
// time, so at most max_concurrent requests are in flight. Failures mark the
// entry `failed` and never abort the batch. Manifest updates and checkpoints
// are serialized; `manifest_path`, when given, is rewritten atomically.
inline FetchSummary fetch_images(std::vector<ManifestEntry>& manifest, const std::filesystem::path& out_dir,
                                 const FetchOptions& options, const HttpGet& get,
                                 const std::optional<std::filesystem::path>& manifest_path = std::nullopt) {
    if (options.api_key.empty())
        throw ConfigError(std::string("street-view API key missing: set ") + kApiKeyEnv);
    if (options.max_concurrent == 0) throw ConfigError("max_concurrent must be at least 1");
    std::filesystem::create_directories(out_dir);

    FetchSummary summary;
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& e = manifest[i];
        if (e.status == FetchStatus::fetched && std::filesystem::exists(out_dir / e.image_file))
            ++summary.skipped;
        else
            todo.push_back(i);
    }

    std::mutex mutex;
    std::size_t since_checkpoint = 0;
    std::atomic<std::size_t> requests{0};
    auto checkpoint = [&] {
        if (manifest_path) io::write_file_atomic(*manifest_path, manifest_to_string(manifest));
    };

    parallel_for(todo.size(), options.max_concurrent, [&](std::size_t k) {
        const std::size_t i = todo[k];
        std::string url, file;
        {
            std::lock_guard lock(mutex);
            url = with_api_key(manifest[i].request_url, options.api_key);
            file = manifest[i].image_file;
        }
        bool ok = false;
        auto delay = options.backoff;
        for (int attempt = 0; attempt <= options.retries && !ok; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(delay);
                delay *= 2;
            }
            ++requests;
            HttpResponse r;
            try {
                r = get(url);
            } catch (const std::exception&) {
                r.status = 0;
            }
            if (r.status == 200 && !r.body.empty()) {
                io::write_file_atomic(out_dir / file, r.body);
                ok = true;
            }
        }
        std::lock_guard lock(mutex);
        manifest[i].status = ok ? FetchStatus::fetched : FetchStatus::failed;
        ok ? ++summary.fetched : ++summary.failed;
        if (++since_checkpoint >= options.checkpoint_every) {
            since_checkpoint = 0;
            checkpoint();
        }
    });
    checkpoint();
    summary.requests = requests.load();
    return summary;
}

} // namespace streetcrime::ingest
