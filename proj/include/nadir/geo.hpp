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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nadir/error.hpp"

namespace nadir {

// Web Mercator world plane: 256 x 256 "map pixels" at zoom 0, x east, y south.
// A zoom-z pixel covers 2^-z map pixels; the whole world is 256*2^z of them.

inline constexpr double kWorldSizePx = 256.0;
inline constexpr double kPxPerRad = kWorldSizePx / (2.0 * std::numbers::pi);  // alpha
inline constexpr double kDegToRad = std::numbers::pi / 180.0;                 // beta

/// Equatorial circumference of the spherical earth model, meters.
inline constexpr double kEarthCircumferenceM = 40'075'017.0;

/// Ground size of one map pixel at the equator, zoom 0 (~156.5 km).
inline constexpr double kBaseMetersPerPx = kEarthCircumferenceM / kWorldSizePx;

inline constexpr int kMinZoom = 0;
inline constexpr int kMaxZoom = 22;

/// Largest image edge the static-map API serves at scale 1.
inline constexpr int kMaxApiRes = 640;

/// Latitude where Web Mercator y reaches the edge of the world square,
/// asin(tanh(pi)) in degrees.
inline constexpr double kMercatorLatLimitDeg = 85.05112878;

struct GeoPoint {
    double lat = 0.0;  // degrees, + north
    double lon = 0.0;  // degrees, + east
};

struct WorldPx {
    double x = 0.0;
    double y = 0.0;
};

/// Wraps a longitude into [-180, 180).
inline double normalize_lon(double lon) {
    double r = std::fmod(lon + 180.0, 360.0);
    if (r < 0.0) r += 360.0;
    return r - 180.0;
}

inline bool mercator_representable(const GeoPoint& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lon) &&
           std::fabs(p.lat) <= kMercatorLatLimitDeg &&
           p.lon >= -180.0 && p.lon <= 180.0;
}

inline void require_mercator(const GeoPoint& p, const char* what) {
    if (!mercator_representable(p)) {
        throw DomainError(std::string(what) + ": point (" + std::to_string(p.lat) +
                          ", " + std::to_string(p.lon) + ") outside |lat| <= " +
                          std::to_string(kMercatorLatLimitDeg) + ", lon in [-180, 180]");
    }
}

/// Forward Web Mercator projection onto the 256 x 256 world plane.
/// North latitudes map to smaller y.
inline WorldPx latlon_to_world(const GeoPoint& p) {
    require_mercator(p, "latlon_to_world");
    const double s = std::sin(kDegToRad * p.lat);
    WorldPx w;
    w.x = kWorldSizePx / 2.0 + kPxPerRad * kDegToRad * p.lon;
    w.y = kWorldSizePx / 2.0 - (kPxPerRad / 2.0) * std::log((1.0 + s) / (1.0 - s));
    return w;
}

namespace detail {

// Inverse projection without longitude wrapping; x = 256 yields lon = +180.
inline GeoPoint unproject(const WorldPx& w) {
    GeoPoint p;
    p.lon = (w.x - kWorldSizePx / 2.0) / (kPxPerRad * kDegToRad);
    // Exact inverse of y(lat): lat = asin(tanh((128 - y) / alpha)).
    p.lat = std::asin(std::tanh((kWorldSizePx / 2.0 - w.y) / kPxPerRad)) / kDegToRad;
    return p;
}

}  // namespace detail

/// Inverse Web Mercator projection. Longitude is wrapped into [-180, 180).
inline GeoPoint world_to_latlon(const WorldPx& w) {
    if (!std::isfinite(w.x) || !std::isfinite(w.y) ||
        w.y < 0.0 || w.y > kWorldSizePx) {
        throw DomainError("world_to_latlon: y outside [0, 256]");
    }
    GeoPoint p = detail::unproject(w);
    p.lon = normalize_lon(p.lon);
    return p;
}

/// Side of one zoom-z pixel in map-pixel units: 2^-z.
inline double pixel_size(int zoom) {
    if (zoom < kMinZoom || zoom > kMaxZoom) {
        throw DomainError("pixel_size: zoom outside [0, 22]");
    }
    return std::exp2(static_cast<double>(-zoom));
}

/// Ground size of one zoom-z pixel at the given latitude, meters.
inline double meters_per_pixel(int zoom, double lat) {
    if (zoom < kMinZoom || zoom > kMaxZoom) {
        throw DomainError("meters_per_pixel: zoom outside [0, 22]");
    }
    if (!std::isfinite(lat) || std::fabs(lat) > kMercatorLatLimitDeg) {
        throw DomainError("meters_per_pixel: latitude outside Mercator range");
    }
    return kBaseMetersPerPx * std::cos(kDegToRad * lat) / std::exp2(static_cast<double>(zoom));
}

/// Ground size of one 256 px tile edge at the equator, meters: circumference / 2^z.
inline double meters_per_tile(int zoom) {
    if (zoom < kMinZoom || zoom > kMaxZoom) {
        throw DomainError("meters_per_tile: zoom outside [0, 22]");
    }
    return kEarthCircumferenceM / std::exp2(static_cast<double>(zoom));
}

/// Axis-aligned geographic box. Top-left is the north-west corner.
struct GeoBBox {
    GeoPoint top_left;
    GeoPoint bottom_right;

    GeoBBox() = default;
    GeoBBox(const GeoPoint& tl, const GeoPoint& br) : top_left(tl), bottom_right(br) {
        require_mercator(tl, "GeoBBox top-left");
        require_mercator(br, "GeoBBox bottom-right");
        if (!(tl.lat > br.lat) || !(tl.lon < br.lon)) {
            throw DomainError("GeoBBox: requires top_left.lat > bottom_right.lat and "
                              "top_left.lon < bottom_right.lon");
        }
    }

    GeoPoint center() const {
        return {(top_left.lat + bottom_right.lat) / 2.0,
                (top_left.lon + bottom_right.lon) / 2.0};
    }
};

/// Chosen zoom level and pixel resolution for one capture.
struct ZoomRes {
    int zoom = 0;
    int res_x = 0;
    int res_y = 0;
};

namespace detail {

// Relative guard so a span that equals max_res pixels up to rounding noise
// still counts as fitting. Shared with the brute-force check in the tests.
inline constexpr double kFitSlack = 1e-9;

inline bool spans_fit(double dx_world, double dy_world, int zoom, int max_res) {
    const double scale = std::exp2(static_cast<double>(zoom));
    const double limit = static_cast<double>(max_res) * (1.0 + kFitSlack);
    return std::max(dx_world, dy_world) * scale <= limit;
}

}  // namespace detail

/// Deepest zoom in [0, 22] at which the box spans at most max_res pixels on
/// both axes, and the resulting (rounded, clamped) image resolution.
inline ZoomRes zoom_from_bbox(const GeoBBox& box, int max_res = kMaxApiRes) {
    if (max_res < 1) throw DomainError("zoom_from_bbox: max_res < 1");
    const WorldPx tl = latlon_to_world(box.top_left);
    const WorldPx br = latlon_to_world(box.bottom_right);
    const double dx = br.x - tl.x;
    const double dy = br.y - tl.y;
    if (!(dx > 0.0) || !(dy > 0.0)) {
        throw DomainError("zoom_from_bbox: degenerate box");
    }

    const double dmax = std::max(dx, dy);
    int z = static_cast<int>(std::floor(-std::log2(dmax / static_cast<double>(max_res))));
    z = std::clamp(z, kMinZoom, kMaxZoom);
    // log2 rounding can land one level off either way; settle it exactly.
    while (z > kMinZoom && !detail::spans_fit(dx, dy, z, max_res)) --z;
    while (z < kMaxZoom && detail::spans_fit(dx, dy, z + 1, max_res)) ++z;
    if (!detail::spans_fit(dx, dy, z, max_res)) {
        throw DomainError("zoom_from_bbox: box does not fit even at zoom 0");
    }

    const double scale = std::exp2(static_cast<double>(z));
    ZoomRes out;
    out.zoom = z;
    out.res_x = static_cast<int>(std::clamp<long>(std::lround(dx * scale), 1, max_res));
    out.res_y = static_cast<int>(std::clamp<long>(std::lround(dy * scale), 1, max_res));
    return out;
}

/// Geographic box covering a w x h zoom-z pixel window centred on a point.
inline GeoBBox bbox_from_center_zoom(const GeoPoint& center, int zoom,
                                     int res_x, int res_y) {
    if (res_x < 1 || res_y < 1) {
        throw DomainError("bbox_from_center_zoom: resolution < 1");
    }
    const double ps = pixel_size(zoom);
    const WorldPx c = latlon_to_world(center);
    const double hx = ps * static_cast<double>(res_x) / 2.0;
    const double hy = ps * static_cast<double>(res_y) / 2.0;
    const WorldPx tl{c.x - hx, c.y - hy};
    const WorldPx br{c.x + hx, c.y + hy};
    if (tl.x < 0.0 || tl.y < 0.0 || br.x > kWorldSizePx || br.y > kWorldSizePx) {
        throw DomainError("bbox_from_center_zoom: window leaves the world square");
    }
    return GeoBBox(detail::unproject(tl), detail::unproject(br));
}

}  // namespace nadir
