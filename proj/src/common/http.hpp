#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vultriage::http {

enum class Failure { Transport, Timeout };

class HttpFailure : public std::runtime_error {
public:
    HttpFailure(Failure kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Failure kind() const { return kind_; }

private:
    Failure kind_;
};

struct Response {
    int status = 0;
    std::string body;
    std::string retry_after; // Retry-After header, if present
};

using Headers = std::vector<std::pair<std::string, std::string>>;

// POSTs a JSON body to an absolute http:// or https:// URL.
// Throws HttpFailure when no HTTP response arrives within timeout_seconds.
Response post_json(const std::string& url, const std::string& body, const Headers& headers,
                   double timeout_seconds);

} // namespace vultriage::http
