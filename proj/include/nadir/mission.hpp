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

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nadir/geodesy.hpp"

namespace nadir {

enum class MapType { satellite, roadmap, terrain };

inline std::string to_string(MapType t) {
    switch (t) {
        case MapType::satellite: return "satellite";
        case MapType::roadmap: return "roadmap";
        case MapType::terrain: return "terrain";
    }
    throw DomainError("to_string: bad MapType");
}

inline MapType map_type_from_string(std::string_view s) {
    if (s == "satellite") return MapType::satellite;
    if (s == "roadmap") return MapType::roadmap;
    if (s == "terrain") return MapType::terrain;
    throw ParseError("unknown map type '" + std::string(s) +
                     "' (expected satellite, roadmap or terrain)");
}

/// How fractional grid cells at the bbox fringe are handled.
/// truncate: n = max(1, floor(span/step)), stays inside the box.
/// cover:    n = floor(span/step) + 1, footprints overhang to cover it.
enum class Stepping { truncate, cover };

inline std::string to_string(Stepping s) {
    return s == Stepping::truncate ? "truncate" : "cover";
}

inline Stepping stepping_from_string(std::string_view s) {
    if (s == "truncate") return Stepping::truncate;
    if (s == "cover") return Stepping::cover;
    throw ParseError("unknown stepping '" + std::string(s) +
                     "' (expected truncate or cover)");
}

struct Waypoint {
    int row = 0;  // 0 at the north edge, grows south
    int col = 0;  // 0 at the west edge, grows east
    GeoPoint center;
    double agl_m = 0.0;
    int zoom = 0;
    int res_x = 0;
    int res_y = 0;
};

struct MissionPlan {
    std::vector<Waypoint> waypoints;
    int n_rows = 0;
    int n_cols = 0;
    int utm_zone = 0;       // 0 for non-raster plans
    double step_east_m = 0.0;
    double step_north_m = 0.0;
};

/// Zoom and image resolution for one capture: footprint on the ground,
/// projected around the point, deepest zoom that keeps it within max_res.
inline ZoomRes zoom_for_capture(const GeoPoint& center, double agl_m,
                                const CameraSpec& cam, int max_res = kMaxApiRes) {
    const Footprint f = footprint_from_agl(agl_m, cam);
    const GeoBBox box = bbox_from_meters(center, f.width_m, f.height_m);
    return zoom_from_bbox(box, max_res);
}

/// One capture at a point.
inline MissionPlan plan_single(const GeoPoint& center, double agl_m,
                               const CameraSpec& cam) {
    require_mercator(center, "plan_single");
    const ZoomRes zr = zoom_for_capture(center, agl_m, cam);
    MissionPlan plan;
    plan.n_rows = 1;
    plan.n_cols = 1;
    plan.waypoints.push_back({0, 0, center, agl_m, zr.zoom, zr.res_x, zr.res_y});
    return plan;
}

/// One capture per listed point; waypoints keep list order, row = index.
inline MissionPlan plan_list(const std::vector<std::pair<GeoPoint, double>>& points,
                             const CameraSpec& cam) {
    if (points.empty()) throw DomainError("plan_list: empty point list");
    MissionPlan plan;
    plan.n_rows = static_cast<int>(points.size());
    plan.n_cols = 1;
    int row = 0;
    for (const auto& [pt, agl] : points) {
        require_mercator(pt, "plan_list");
        const ZoomRes zr = zoom_for_capture(pt, agl, cam);
        plan.waypoints.push_back({row++, 0, pt, agl, zr.zoom, zr.res_x, zr.res_y});
    }
    return plan;
}

namespace detail {

inline int cells_for_span(double span_m, double step_m, Stepping stepping) {
    const double ratio = span_m / step_m;
    if (stepping == Stepping::cover) {
        return static_cast<int>(std::floor(ratio)) + 1;
    }
    return std::max(1, static_cast<int>(std::floor(ratio)));
}

}  // namespace detail

/// Row-major raster grid over a bbox.
///
/// The grid lives in the UTM frame of the top-left corner (the zone is pinned
/// there for the whole plan so a box straddling a zone edge stays in one
/// frame). Spans: easting from the top corners, northing measured down the
/// western meridian. Step = footprint * (1 - overlap) per axis. Centers are
/// offset from the top-left corner UTM position and unprojected back.
inline MissionPlan plan_raster(const GeoBBox& box, double agl_m, const CameraSpec& cam,
                               double overlap = 0.0,
                               Stepping stepping = Stepping::truncate) {
    if (!(overlap >= 0.0) || !(overlap < 1.0)) {
        throw DomainError("plan_raster: overlap must lie in [0, 1)");
    }
    const Footprint f = footprint_from_agl(agl_m, cam);
    const double step_e = f.width_m * (1.0 - overlap);
    const double step_n = f.height_m * (1.0 - overlap);

    const int zone = utm_zone_for(box.top_left.lon);
    const UtmCoord tl = latlon_to_utm(box.top_left, zone);
    const UtmCoord br = latlon_to_utm(box.bottom_right, zone);
    const UtmCoord bl = latlon_to_utm({box.bottom_right.lat, box.top_left.lon}, zone);
    const double span_e = br.easting - tl.easting;
    const double span_n = tl.northing - bl.northing;
    if (!(span_e > 0.0) || !(span_n > 0.0)) {
        throw DomainError("plan_raster: box degenerates in the UTM frame");
    }

    MissionPlan plan;
    plan.utm_zone = zone;
    plan.step_east_m = step_e;
    plan.step_north_m = step_n;
    plan.n_cols = detail::cells_for_span(span_e, step_e, stepping);
    plan.n_rows = detail::cells_for_span(span_n, step_n, stepping);

    // Zoom is uniform across the plan, evaluated once at the bbox center.
    const ZoomRes zr = zoom_for_capture(box.center(), agl_m, cam);

    plan.waypoints.reserve(static_cast<size_t>(plan.n_rows) * plan.n_cols);
    for (int r = 0; r < plan.n_rows; ++r) {
        for (int c = 0; c < plan.n_cols; ++c) {
            UtmCoord u = tl;
            u.easting += static_cast<double>(c) * step_e;
            u.northing -= static_cast<double>(r) * step_n;
            const GeoPoint center = utm_to_latlon(u);
            plan.waypoints.push_back({r, c, center, agl_m, zr.zoom, zr.res_x, zr.res_y});
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Coordinate string grammar.
//   raster:  {latTL}_{lonTL}_{latBR}_{lonBR}_{agl}
//   single:  {lat}_{lon}_{agl}
//   file:    one "lat lon agl" triple per line; blank lines and lines
//            starting with '#' are skipped.
// ---------------------------------------------------------------------------

struct SingleCoords {
    GeoPoint point;
    double agl_m = 0.0;
};

struct RasterCoords {
    GeoBBox box;
    double agl_m = 0.0;
};

using Coords = std::variant<SingleCoords, RasterCoords>;

namespace detail {

inline double parse_double_field(std::string_view field, const char* what) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw ParseError(std::string("bad ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        const size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace detail

/// Parses the underscore grammar. 5 fields make a raster box, 3 a single
/// point; anything else is a parse error naming the expected shapes.
inline Coords parse_coords(std::string_view text) {
    const auto fields = detail::split(text, '_');
    if (fields.size() == 5) {
        const double lat_tl = detail::parse_double_field(fields[0], "top-left latitude");
        const double lon_tl = detail::parse_double_field(fields[1], "top-left longitude");
        const double lat_br = detail::parse_double_field(fields[2], "bottom-right latitude");
        const double lon_br = detail::parse_double_field(fields[3], "bottom-right longitude");
        const double agl = detail::parse_double_field(fields[4], "altitude");
        try {
            return RasterCoords{GeoBBox({lat_tl, lon_tl}, {lat_br, lon_br}), agl};
        } catch (const DomainError& e) {
            throw ParseError(std::string("bad raster coordinates: ") + e.what());
        }
    }
    if (fields.size() == 3) {
        SingleCoords s;
        s.point.lat = detail::parse_double_field(fields[0], "latitude");
        s.point.lon = detail::parse_double_field(fields[1], "longitude");
        s.agl_m = detail::parse_double_field(fields[2], "altitude");
        if (!mercator_representable(s.point)) {
            throw ParseError("bad single coordinates: point outside Mercator range");
        }
        return s;
    }
    throw ParseError("coordinate string must be lat_lon_agl or "
                     "latTL_lonTL_latBR_lonBR_agl, got " +
                     std::to_string(fields.size()) + " fields");
}

/// Reads "lat lon agl" triples from a text file.
inline std::vector<std::pair<GeoPoint, double>> load_coords_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open coordinate file '" + path + "'");
    std::vector<std::pair<GeoPoint, double>> out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv(line);
        while (!sv.empty() && (sv.back() == '\r' || sv.back() == ' ' || sv.back() == '\t')) {
            sv.remove_suffix(1);
        }
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) {
            sv.remove_prefix(1);
        }
        if (sv.empty() || sv.front() == '#') continue;
        std::istringstream fields{std::string(sv)};
        double lat = 0.0, lon = 0.0, agl = 0.0;
        std::string extra;
        if (!(fields >> lat >> lon >> agl) || (fields >> extra)) {
            throw ParseError("expected 'lat lon agl'", lineno);
        }
        GeoPoint p{lat, lon};
        if (!mercator_representable(p)) {
            throw ParseError("point outside Mercator range", lineno);
        }
        out.emplace_back(p, agl);
    }
    if (out.empty()) throw ParseError("coordinate file '" + path + "' has no points");
    return out;
}

}  // namespace nadir
