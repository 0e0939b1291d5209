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

#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>

#include "nadir/geo.hpp"
#include "nadir/image_io.hpp"
#include "nadir/imaging.hpp"
#include "nadir/mission.hpp"

namespace nadir {

/// One static-map request: a window of res_x x res_y zoom-level pixels
/// centred on a point.
struct CaptureSpec {
    GeoPoint center;
    int zoom = 0;
    int res_x = 0;
    int res_y = 0;
    MapType map_type = MapType::satellite;
    bool hide_labels = true;
};

inline void validate_capture(const CaptureSpec& spec) {
    require_mercator(spec.center, "validate_capture");
    if (spec.zoom < kMinZoom || spec.zoom > kMaxZoom) {
        throw DomainError("validate_capture: zoom outside [0, 22]");
    }
    if (spec.res_x < 1 || spec.res_x > kMaxApiRes ||
        spec.res_y < 1 || spec.res_y > kMaxApiRes) {
        throw DomainError("validate_capture: resolution outside [1, 640]");
    }
}

/// Grows the request window vertically so that cropping the margin back out
/// restores roughly the requested height. Capped by the API limit.
inline CaptureSpec with_vertical_margin(CaptureSpec spec, double vmargin) {
    if (!(vmargin >= 0.0) || !(vmargin < 1.0)) {
        throw DomainError("with_vertical_margin: vmargin must lie in [0, 1)");
    }
    const long grown = std::lround(spec.res_y / (1.0 - vmargin));
    spec.res_y = static_cast<int>(std::clamp<long>(grown, spec.res_y, kMaxApiRes));
    return spec;
}

inline constexpr const char* kDefaultEndpoint =
    "https://maps.googleapis.com/maps/api/staticmap";

/// Label-suppression style, pipe characters percent-encoded for the query.
inline constexpr const char* kHideLabelsStyle =
    "feature:all%7Celement:labels%7Cvisibility:off";

/// Static-map GET URL. Parameter order is fixed: center, zoom, size,
/// maptype, key, then the optional style. This is the only place the API
/// key is ever serialized.
inline std::string build_url(const CaptureSpec& spec, const std::string& key,
                             const std::string& endpoint = kDefaultEndpoint) {
    validate_capture(spec);
    char head[128];
    std::snprintf(head, sizeof(head), "?center=%.6f,%.6f&zoom=%d&size=%dx%d",
                  spec.center.lat, spec.center.lon, spec.zoom, spec.res_x, spec.res_y);
    std::string url = endpoint;
    url += head;
    url += "&maptype=" + to_string(spec.map_type);
    url += "&key=" + key;
    if (spec.hide_labels) {
        url += "&style=";
        url += kHideLabelsStyle;
    }
    return url;
}

struct ProviderResult {
    Image image;
    int attempts = 1;
    std::string content_type;
};

/// Source of map imagery. Implementations must be safe to call from
/// several threads at once.
class Provider {
public:
    virtual ~Provider() = default;
    virtual ProviderResult capture(const CaptureSpec& spec) = 0;
};

// ------------------------- network-backed provider -------------------------

struct HttpResponse {
    int status = 0;
    std::string content_type;
    std::string body;
};

/// Performs one GET; nullopt models a connection-level failure.
using Transport = std::function<std::optional<HttpResponse>(const std::string& url)>;

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct RetryPolicy {
    int retries = 3;  // extra attempts after the first; budget = retries + 1
    std::chrono::milliseconds base_delay{1000};
    double factor = 2.0;
    double jitter = 0.2;          // +/- fraction of the nominal delay
    uint32_t jitter_seed = 2024;  // fixed so delay sequences are replayable

    int max_attempts() const { return retries + 1; }
};

/// Static-map client with exponential backoff on transient failures.
/// HTTP 403 is treated as an authorization/quota rejection and is never
/// retried; other non-2xx, connection drops and 5xx are retried until the
/// attempt budget runs out.
class StaticMapClient : public Provider {
public:
    StaticMapClient(std::string api_key, Transport transport,
                    RetryPolicy policy = {},
                    Sleeper sleeper = [](std::chrono::milliseconds d) {
                        std::this_thread::sleep_for(d);
                    },
                    std::string endpoint = kDefaultEndpoint)
        : key_(std::move(api_key)),
          transport_(std::move(transport)),
          policy_(policy),
          sleeper_(std::move(sleeper)),
          endpoint_(std::move(endpoint)),
          rng_(policy.jitter_seed) {
        if (policy_.retries < 0) {
            throw DomainError("StaticMapClient: retries must be >= 0");
        }
    }

    ProviderResult capture(const CaptureSpec& spec) override {
        const std::string url = build_url(spec, key_, endpoint_);
        int last_status = 0;
        for (int attempt = 1; attempt <= policy_.max_attempts(); ++attempt) {
            // The transport itself must be thread-safe; only the jitter RNG
            // is guarded here.
            std::optional<HttpResponse> resp = transport_(url);
            if (resp && resp->status == 403) {
                throw AuthError("static map service rejected the request (HTTP 403): "
                                "check the API key and quota");
            }
            if (resp && resp->status == 200) {
                Image img;
                try {
                    img = decode_image(reinterpret_cast<const uint8_t*>(resp->body.data()),
                                       resp->body.size());
                } catch (const ProtocolError& e) {
                    throw ProtocolError(std::string(e.what()) + " (content-type '" +
                                        resp->content_type + "')");
                }
                if (img.width != spec.res_x || img.height != spec.res_y) {
                    throw ProtocolError("service returned " + std::to_string(img.width) +
                                        "x" + std::to_string(img.height) + ", requested " +
                                        std::to_string(spec.res_x) + "x" +
                                        std::to_string(spec.res_y));
                }
                ProviderResult out;
                out.image = std::move(img);
                out.attempts = attempt;
                out.content_type = resp->content_type;
                return out;
            }
            last_status = resp ? resp->status : 0;
            if (attempt < policy_.max_attempts()) {
                sleeper_(next_delay(attempt));
            }
        }
        throw TransportError("static map request failed after " +
                             std::to_string(policy_.max_attempts()) + " attempts" +
                             (last_status ? " (last HTTP status " +
                                            std::to_string(last_status) + ")"
                                          : " (connection failures)"),
                             last_status, policy_.max_attempts());
    }

private:
    std::chrono::milliseconds next_delay(int failed_attempts) {
        const double nominal = static_cast<double>(policy_.base_delay.count()) *
                               std::pow(policy_.factor, failed_attempts - 1);
        double u = 0.0;
        {
            std::lock_guard<std::mutex> lock(mu_);
            u = std::uniform_real_distribution<double>(-1.0, 1.0)(rng_);
        }
        const double jittered = nominal * (1.0 + policy_.jitter * u);
        return std::chrono::milliseconds(std::max<long>(0, std::lround(jittered)));
    }

    std::string key_;
    Transport transport_;
    RetryPolicy policy_;
    Sleeper sleeper_;
    std::string endpoint_;
    std::mt19937 rng_;
    std::mutex mu_;
};

// ------------------------------ offline mock --------------------------------

struct MockOptions {
    uint64_t seed = 2024;
    double roadmap_density = 0.5;  // fraction of road cells, drives entropy
};

namespace detail {

inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t cell_hash(int64_t u, int64_t v, uint64_t seed, uint64_t salt) {
    uint64_t h = mix64(seed ^ salt);
    h = mix64(h ^ static_cast<uint64_t>(u));
    h = mix64(h ^ static_cast<uint64_t>(v));
    return h;
}

}  // namespace detail

/// Renders a deterministic synthetic map. Every pixel is a pure function of
/// its absolute world position, the map type and the seed, so captures of
/// adjacent windows continue each other seamlessly and reruns are
/// byte-identical.
inline Image mock_render(const CaptureSpec& spec, const MockOptions& opt = {}) {
    validate_capture(spec);
    const double ps = pixel_size(spec.zoom);
    const double scale = std::exp2(static_cast<double>(spec.zoom));
    const WorldPx c = latlon_to_world(spec.center);

    Image img(spec.res_x, spec.res_y, 3);
    for (int y = 0; y < spec.res_y; ++y) {
        const double wy = c.y + (y + 0.5 - spec.res_y / 2.0) * ps;
        const int64_t v = static_cast<int64_t>(std::floor(wy * scale));
        for (int x = 0; x < spec.res_x; ++x) {
            const double wx = c.x + (x + 0.5 - spec.res_x / 2.0) * ps;
            const int64_t u = static_cast<int64_t>(std::floor(wx * scale));

            uint8_t r = 0, g = 0, b = 0;
            switch (spec.map_type) {
                case MapType::satellite: {
                    const uint64_t h = detail::cell_hash(u, v, opt.seed, 0x5354ull);
                    r = static_cast<uint8_t>(h & 0xff);
                    g = static_cast<uint8_t>((h >> 8) & 0xff);
                    b = static_cast<uint8_t>((h >> 16) & 0xff);
                    // 256-pixel graticule, a stand-in for tile seams.
                    if (u % 256 == 0 || v % 256 == 0) { r = g = b = 32; }
                    break;
                }
                case MapType::roadmap: {
                    const int64_t cu = u >> 4, cv = v >> 4;
                    const uint64_t h = detail::cell_hash(cu, cv, opt.seed, 0x524dull);
                    const double p = static_cast<double>(h >> 11) * 0x1.0p-53;
                    if (p < opt.roadmap_density) {
                        const uint8_t gray = static_cast<uint8_t>(
                            detail::cell_hash(cu, cv, opt.seed, 0x524d32ull) & 0xff);
                        r = g = b = gray;
                    } else {
                        r = 232; g = 234; b = 237;
                    }
                    break;
                }
                case MapType::terrain: {
                    // Value noise on a 64-pixel lattice.
                    const double fu = wx * scale / 64.0;
                    const double fv = wy * scale / 64.0;
                    const int64_t u0 = static_cast<int64_t>(std::floor(fu));
                    const int64_t v0 = static_cast<int64_t>(std::floor(fv));
                    const double tx = fu - static_cast<double>(u0);
                    const double ty = fv - static_cast<double>(v0);
                    auto corner = [&](int64_t du, int64_t dv) {
                        return static_cast<double>(
                            detail::cell_hash(u0 + du, v0 + dv, opt.seed, 0x5452ull) & 0xff);
                    };
                    const double top = corner(0, 0) * (1.0 - tx) + corner(1, 0) * tx;
                    const double bot = corner(0, 1) * (1.0 - tx) + corner(1, 1) * tx;
                    const double e = (top * (1.0 - ty) + bot * ty) / 255.0;
                    r = static_cast<uint8_t>(std::lround(70.0 + 150.0 * e));
                    g = static_cast<uint8_t>(std::lround(90.0 + 140.0 * e));
                    b = static_cast<uint8_t>(std::lround(60.0 + 110.0 * e));
                    if (u % 256 == 0 || v % 256 == 0) { r = g = b = 32; }
                    break;
                }
            }
            img.at(x, y, 0) = r;
            img.at(x, y, 1) = g;
            img.at(x, y, 2) = b;
        }
    }
    return img;
}

/// Offline provider producing mock_render imagery. No network, no key.
class MockProvider : public Provider {
public:
    explicit MockProvider(MockOptions opt = {}) : opt_(opt) {}

    ProviderResult capture(const CaptureSpec& spec) override {
        ProviderResult out;
        out.image = mock_render(spec, opt_);
        out.attempts = 1;
        out.content_type = "image/png";
        return out;
    }

private:
    MockOptions opt_;
};

}  // namespace nadir
