#include "common/http.hpp"

#include "common/httplib_config.hpp"

#include <chrono>

namespace vultriage::http {

namespace {

struct Target {
    std::string origin; // scheme://host[:port]
    std::string path;
};

Target split_url(const std::string& url)
{
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw HttpFailure(Failure::Transport, "invalid URL '" + url + "'");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

Response post_json(const std::string& url, const std::string& body, const Headers& headers,
                   double timeout_seconds)
{
    Target t = split_url(url);
#ifndef VULTRIAGE_WITH_OPENSSL
    if (t.origin.rfind("https://", 0) == 0)
        throw HttpFailure(Failure::Transport, "https endpoints need a build with OpenSSL");
#endif
    httplib::Client client(t.origin);
    if (!client.is_valid())
        throw HttpFailure(Failure::Transport, "cannot create client for '" + t.origin + "'");
    if (timeout_seconds <= 0)
        throw HttpFailure(Failure::Timeout, "deadline already passed");
    auto usec = std::chrono::microseconds(static_cast<long long>(timeout_seconds * 1e6));
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(usec));
    client.set_read_timeout(usec);
    client.set_write_timeout(usec);

    httplib::Headers h;
    for (const auto& [k, v] : headers)
        h.emplace(k, v);

    auto start = std::chrono::steady_clock::now();
    auto res = client.Post(t.path, h, body, "application/json");
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!res) {
        auto err = res.error();
        bool timed_out = err == httplib::Error::ConnectionTimeout ||
                         (err == httplib::Error::Read && elapsed >= timeout_seconds * 0.95);
        throw HttpFailure(timed_out ? Failure::Timeout : Failure::Transport,
                          "request to " + t.origin + " failed: " + httplib::to_string(err));
    }
    Response out;
    out.status = res->status;
    out.body = res->body;
    out.retry_after = res->get_header_value("Retry-After");
    return out;
}

} // namespace vultriage::http
