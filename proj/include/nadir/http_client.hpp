// Copyright 2026 The nadir authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

// Separate header so only network-using binaries pull in httplib/OpenSSL.

#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <string>

#include "nadir/provider.hpp"

namespace nadir {

/// Transport that issues one GET per call. A fresh client per request keeps
/// the function safe to share across download workers.
inline Transport make_http_transport(int timeout_sec = 30) {
    return [timeout_sec](const std::string& url) -> std::optional<HttpResponse> {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) return std::nullopt;
        const auto path_start = url.find('/', scheme_end + 3);
        const std::string origin = path_start == std::string::npos
                                       ? url
                                       : url.substr(0, path_start);
        const std::string path = path_start == std::string::npos
                                     ? std::string("/")
                                     : url.substr(path_start);
        httplib::Client client(origin);
        client.set_connection_timeout(timeout_sec, 0);
        client.set_read_timeout(timeout_sec, 0);
        client.set_follow_location(true);
        auto res = client.Get(path);
        if (!res) return std::nullopt;
        HttpResponse out;
        out.status = res->status;
        out.content_type = res->get_header_value("Content-Type");
        out.body = std::move(res->body);
        return out;
    };
}

}  // namespace nadir
