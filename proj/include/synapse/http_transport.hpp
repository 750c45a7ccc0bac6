#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <httplib.h>

#include "synapse/error.hpp"
#include "synapse/llm_client.hpp"

namespace synapse {

/// Transport over a generic chat-completion style HTTP endpoint.
class HttpTransport : public Transport {
public:
    TransportResponse post_json(const std::string& endpoint, const std::string& body,
                                std::chrono::milliseconds timeout, const std::string& api_key) override {
        const auto [base, path] = split_endpoint(endpoint);
        httplib::Client client(base);
        const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout);
        client.set_connection_timeout(seconds.count() > 0 ? seconds.count() : 1, 0);
        client.set_read_timeout(seconds.count() > 0 ? seconds.count() : 1, 0);
        client.set_write_timeout(seconds.count() > 0 ? seconds.count() : 1, 0);

        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        auto response = client.Post(path, headers, body, "application/json");
        if (!response) return TransportResponse{0, httplib::to_string(response.error())};
        return TransportResponse{response->status, response->body};
    }

private:
    static std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
        const auto scheme = endpoint.find("://");
        if (scheme == std::string::npos)
            throw ConfigError("endpoint must include a scheme, e.g. http://host:port/v1/chat/completions");
        const auto path_start = endpoint.find('/', scheme + 3);
        if (path_start == std::string::npos) return {endpoint, "/"};
        return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
    }
};

inline std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttpTransport>(); }

} // namespace synapse
