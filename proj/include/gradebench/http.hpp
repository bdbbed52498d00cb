#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gradebench {

struct HttpRequest {
    std::string base_url;  // scheme://host[:port][/base-path]
    std::string path;      // appended to the base path
    std::string body;      // JSON
    std::vector<std::pair<std::string, std::string>> headers;
    double timeout_s = 120.0;
};

struct HttpResponse {
    int status = 0;
    std::string body;
    std::string request_id;  // x-request-id header when present
};

/// POSTs a JSON body. Throws TransportError (retryable) on connection or
/// timeout failures; any HTTP status is returned as-is.
HttpResponse http_post_json(const HttpRequest& request);

}  // namespace gradebench
