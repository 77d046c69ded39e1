#pragma once

// cpp-httplib backed HttpGet. Define STREETCRIME_WITH_OPENSSL (the CMake
// target does so when OpenSSL is found) to enable https endpoints.
#if defined(STREETCRIME_WITH_OPENSSL) && !defined(CPPHTTPLIB_OPENSSL_SUPPORT)
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include <string>

#include "streetcrime/ingest/fetch.hpp"

namespace streetcrime::ingest {

// Splits "scheme://host[:port]/path?query" into the client base and the
// path-plus-query part.
inline std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("URL has no scheme");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline HttpGet make_http_get(std::chrono::seconds timeout = std::chrono::seconds(30)) {
    return [timeout](const std::string& url) -> HttpResponse {
        const auto [base, path] = split_url(url);
        httplib::Client client(base);
        client.set_follow_location(true);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        auto res = client.Get(path);
        if (!res) return {0, {}};
        return {res->status, res->body};
    };
}

} // namespace streetcrime::ingest
