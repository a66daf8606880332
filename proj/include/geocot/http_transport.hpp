#pragma once

#include <chrono>
#include <string>

#include "httplib.h"

#include "geocot/annotation.hpp"
#include "geocot/error.hpp"

namespace geocot::annotate {

struct Endpoint {
    std::string origin; // scheme://host[:port]
    std::string path;
};

inline Endpoint split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(Errc::InvalidConfig, "annotator url lacks a scheme: " + url);
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw Error(Errc::InvalidConfig, "unsupported url scheme " + scheme);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

// POSTs JSON to the configured URL with an optional bearer token.
class HttpTransport : public AnnotatorTransport {
public:
    HttpTransport(const std::string& url, std::string token, double timeout_s)
        : ep_(split_url(url)), token_(std::move(token)), timeout_s_(timeout_s) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (ep_.origin.rfind("https", 0) == 0)
            throw Error(Errc::InvalidConfig, "https annotator url but this build has no TLS support");
#endif
    }

    TransportResponse post(const std::string& body) override {
        httplib::Client cli(ep_.origin);
        const auto secs = static_cast<time_t>(timeout_s_);
        const auto usecs = static_cast<time_t>((timeout_s_ - static_cast<double>(secs)) * 1e6);
        cli.set_connection_timeout(secs, usecs);
        cli.set_read_timeout(secs, usecs);
        cli.set_write_timeout(secs, usecs);
        httplib::Headers headers;
        if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
        const auto t0 = std::chrono::steady_clock::now();
        auto res = cli.Post(ep_.path, headers, body, "application/json");
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        TransportResponse out;
        if (!res) {
            const auto err = res.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                   (err == httplib::Error::Read && elapsed >= 0.9 * timeout_s_);
            out.failure = timed_out ? TransportResponse::Failure::Timeout : TransportResponse::Failure::Transport;
            out.detail = httplib::to_string(err);
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        return out;
    }

private:
    Endpoint ep_;
    std::string token_;
    double timeout_s_;
};

} // namespace geocot::annotate
