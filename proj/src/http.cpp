#include "gradebench/http.hpp"

#include <chrono>
#include <cmath>

#include <httplib.h>  // CPPHTTPLIB_OPENSSL_SUPPORT comes from the build

#include "gradebench/error.hpp"

namespace gradebench {

namespace {

// Splits "https://api.example.com/v1" into origin and base path.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    std::size_t host_start = (scheme_end == std::string::npos) ? 0 : scheme_end + 3;
    auto path_start = base_url.find('/', host_start);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string path = base_url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {base_url.substr(0, path_start), path};
}

}  // namespace

HttpResponse http_post_json(const HttpRequest& request) {
    auto [origin, base_path] = split_base_url(request.base_url);
    httplib::Client client(origin);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<long long>(std::llround(request.timeout_s * 1000.0))));
    client.set_read_timeout(std::chrono::milliseconds(
        static_cast<long long>(std::llround(request.timeout_s * 1000.0))));
    client.set_write_timeout(std::chrono::milliseconds(
        static_cast<long long>(std::llround(request.timeout_s * 1000.0))));

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);

    auto result = client.Post(base_path + request.path, headers, request.body, "application/json");
    if (!result)
        throw Error(ErrorCode::TransportError,
                    "POST " + origin + base_path + request.path + " failed: " +
                        httplib::to_string(result.error()),
                    /*retryable=*/true);

    HttpResponse response;
    response.status = result->status;
    response.body = result->body;
    if (result->has_header("x-request-id")) response.request_id = result->get_header_value("x-request-id");
    return response;
}

}  // namespace gradebench
