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

#include <array>
#include <cmath>

#include "nadir/geo.hpp"

namespace nadir {

/// Ground size of one degree of arc on the spherical model, meters.
inline constexpr double kMetersPerDegree = kEarthCircumferenceM / 360.0;

struct CameraSpec {
    double fov_deg = 78.8;  // diagonal field of view
    int aspect_w = 4;
    int aspect_h = 3;
};

struct Footprint {
    double width_m = 0.0;   // across track (image x)
    double height_m = 0.0;  // along track (image y)
    double diag_m = 0.0;
};

/// Ground rectangle seen by a nadir camera at the given altitude.
/// diag = 2 * agl * tan(fov/2), split by the aspect diagonal angle.
inline Footprint footprint_from_agl(double agl_m, const CameraSpec& cam) {
    if (!(agl_m > 0.0) || !std::isfinite(agl_m)) {
        throw DomainError("footprint_from_agl: agl must be positive");
    }
    if (!(cam.fov_deg > 0.0) || !(cam.fov_deg < 180.0)) {
        throw DomainError("footprint_from_agl: fov must lie in (0, 180)");
    }
    if (cam.aspect_w <= 0 || cam.aspect_h <= 0) {
        throw DomainError("footprint_from_agl: aspect ratio must be positive");
    }
    Footprint f;
    f.diag_m = 2.0 * agl_m * std::tan(kDegToRad * cam.fov_deg / 2.0);
    const double theta = std::atan2(static_cast<double>(cam.aspect_w),
                                    static_cast<double>(cam.aspect_h));
    f.width_m = f.diag_m * std::sin(theta);
    f.height_m = f.diag_m * std::cos(theta);
    return f;
}

/// Destination after moving d_east meters along the parallel and d_north
/// meters along the meridian of the spherical model.
inline GeoPoint offset_point(const GeoPoint& p, double d_east_m, double d_north_m) {
    require_mercator(p, "offset_point");
    if (!std::isfinite(d_east_m) || !std::isfinite(d_north_m)) {
        throw DomainError("offset_point: non-finite displacement");
    }
    GeoPoint out;
    out.lat = p.lat + d_north_m / kMetersPerDegree;
    out.lon = normalize_lon(p.lon + d_east_m / (kMetersPerDegree * std::cos(kDegToRad * p.lat)));
    if (std::fabs(out.lat) > kMercatorLatLimitDeg) {
        throw DomainError("offset_point: destination latitude beyond Mercator range");
    }
    return out;
}

/// Geographic box of a width x height meter rectangle centred on a point.
inline GeoBBox bbox_from_meters(const GeoPoint& center, double width_m, double height_m) {
    if (!(width_m > 0.0) || !(height_m > 0.0)) {
        throw DomainError("bbox_from_meters: rectangle must have positive size");
    }
    const GeoPoint tl = offset_point(center, -width_m / 2.0, height_m / 2.0);
    const GeoPoint br = offset_point(center, width_m / 2.0, -height_m / 2.0);
    return GeoBBox(tl, br);
}

// ---------------------------------------------------------------------------
// Universal Transverse Mercator on WGS-84, via the 6th-order Krüger series.
// Good to well under a millimeter inside a zone and its neighbours, which is
// plenty for zone-pinned grids a few degrees wide.
// ---------------------------------------------------------------------------

inline constexpr double kWgs84A = 6378137.0;              // semi-major axis
inline constexpr double kWgs84F = 1.0 / 298.257223563;    // flattening
inline constexpr double kUtmK0 = 0.9996;                  // central scale
inline constexpr double kUtmFalseEasting = 500000.0;
inline constexpr double kUtmFalseNorthingSouth = 10'000'000.0;

struct UtmCoord {
    double easting = 0.0;
    double northing = 0.0;
    int zone = 0;
    bool north = true;
};

/// Natural UTM zone of a longitude, 1..60.
inline int utm_zone_for(double lon) {
    if (!std::isfinite(lon)) throw DomainError("utm_zone_for: non-finite longitude");
    const double l = normalize_lon(lon);
    int zone = static_cast<int>(std::floor((l + 180.0) / 6.0)) + 1;
    if (zone < 1) zone = 1;
    if (zone > 60) zone = 60;
    return zone;
}

namespace detail {

struct TmSeries {
    double n = 0.0;
    double e = 0.0;   // first eccentricity
    double e2 = 0.0;
    double A = 0.0;   // rectifying radius
    std::array<double, 6> alpha{};  // forward
    std::array<double, 6> beta{};   // inverse
};

inline const TmSeries& tm_series() {
    static const TmSeries s = [] {
        TmSeries t;
        const double n = kWgs84F / (2.0 - kWgs84F);
        const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
        t.n = n;
        t.e2 = kWgs84F * (2.0 - kWgs84F);
        t.e = std::sqrt(t.e2);
        t.A = kWgs84A / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
        t.alpha = {
            n / 2.0 - 2.0 / 3.0 * n2 + 5.0 / 16.0 * n3 + 41.0 / 180.0 * n4
                - 127.0 / 288.0 * n5 + 7891.0 / 37800.0 * n6,
            13.0 / 48.0 * n2 - 3.0 / 5.0 * n3 + 557.0 / 1440.0 * n4
                + 281.0 / 630.0 * n5 - 1983433.0 / 1935360.0 * n6,
            61.0 / 240.0 * n3 - 103.0 / 140.0 * n4 + 15061.0 / 26880.0 * n5
                + 167603.0 / 181440.0 * n6,
            49561.0 / 161280.0 * n4 - 179.0 / 168.0 * n5 + 6601661.0 / 7257600.0 * n6,
            34729.0 / 80640.0 * n5 - 3418889.0 / 1995840.0 * n6,
            212378941.0 / 319334400.0 * n6,
        };
        t.beta = {
            n / 2.0 - 2.0 / 3.0 * n2 + 37.0 / 96.0 * n3 - 1.0 / 360.0 * n4
                - 81.0 / 512.0 * n5 + 96199.0 / 604800.0 * n6,
            n2 / 48.0 + 1.0 / 15.0 * n3 - 437.0 / 1440.0 * n4
                + 46.0 / 105.0 * n5 - 1118711.0 / 3870720.0 * n6,
            17.0 / 480.0 * n3 - 37.0 / 840.0 * n4 - 209.0 / 4480.0 * n5
                + 5569.0 / 90720.0 * n6,
            4397.0 / 161280.0 * n4 - 11.0 / 504.0 * n5 - 830251.0 / 7257600.0 * n6,
            4583.0 / 161280.0 * n5 - 108847.0 / 3991680.0 * n6,
            20648693.0 / 638668800.0 * n6,
        };
        return t;
    }();
    return s;
}

}  // namespace detail

/// WGS-84 geographic to UTM. zone == 0 picks the natural zone; a nonzero
/// zone pins the projection (used to keep one grid in a single frame).
inline UtmCoord latlon_to_utm(const GeoPoint& p, int zone = 0) {
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || std::fabs(p.lat) > 84.0) {
        throw DomainError("latlon_to_utm: |lat| must be <= 84");
    }
    if (zone == 0) {
        zone = utm_zone_for(p.lon);
    } else if (zone < 1 || zone > 60) {
        throw DomainError("latlon_to_utm: zone outside [1, 60]");
    }
    const auto& s = detail::tm_series();
    const double lon0 = zone * 6.0 - 183.0;
    const double phi = kDegToRad * p.lat;
    const double lam = kDegToRad * normalize_lon(p.lon - lon0);

    const double sphi = std::sin(phi);
    // Conformal latitude via tau' = tan(chi).
    const double tau = std::tan(phi);
    const double sigma = std::sinh(s.e * std::atanh(s.e * sphi));
    const double taup = tau * std::hypot(1.0, sigma) - sigma * std::hypot(1.0, tau);

    const double xi0 = std::atan2(taup, std::cos(lam));
    const double eta0 = std::asinh(std::sin(lam) / std::hypot(taup, std::cos(lam)));

    double xi = xi0, eta = eta0;
    for (int j = 1; j <= 6; ++j) {
        const double a = s.alpha[j - 1];
        xi += a * std::sin(2.0 * j * xi0) * std::cosh(2.0 * j * eta0);
        eta += a * std::cos(2.0 * j * xi0) * std::sinh(2.0 * j * eta0);
    }

    UtmCoord u;
    u.zone = zone;
    u.north = p.lat >= 0.0;
    u.easting = kUtmFalseEasting + kUtmK0 * s.A * eta;
    u.northing = kUtmK0 * s.A * xi + (u.north ? 0.0 : kUtmFalseNorthingSouth);
    return u;
}

/// UTM to WGS-84 geographic. Inverse of latlon_to_utm with the same zone.
inline GeoPoint utm_to_latlon(const UtmCoord& u) {
    if (u.zone < 1 || u.zone > 60) {
        throw DomainError("utm_to_latlon: zone outside [1, 60]");
    }
    if (!std::isfinite(u.easting) || !std::isfinite(u.northing) ||
        std::fabs(u.easting - kUtmFalseEasting) > 2.5e6 ||
        u.northing < -1e6 || u.northing > kUtmFalseNorthingSouth + 1e6) {
        throw DomainError("utm_to_latlon: coordinate outside plausible UTM range");
    }
    const auto& s = detail::tm_series();
    const double lon0 = u.zone * 6.0 - 183.0;
    const double y = u.northing - (u.north ? 0.0 : kUtmFalseNorthingSouth);

    const double xi = y / (kUtmK0 * s.A);
    const double eta = (u.easting - kUtmFalseEasting) / (kUtmK0 * s.A);

    double xip = xi, etap = eta;
    for (int j = 1; j <= 6; ++j) {
        const double b = s.beta[j - 1];
        xip -= b * std::sin(2.0 * j * xi) * std::cosh(2.0 * j * eta);
        etap -= b * std::cos(2.0 * j * xi) * std::sinh(2.0 * j * eta);
    }

    const double taup = std::sin(xip) / std::hypot(std::sinh(etap), std::cos(xip));
    // Newton-invert tau' = tau*sqrt(1+sigma^2) - sigma*sqrt(1+tau^2).
    double tau = taup;
    for (int i = 0; i < 8; ++i) {
        const double sigma = std::sinh(s.e * std::atanh(s.e * tau / std::hypot(1.0, tau)));
        const double taupa = tau * std::hypot(1.0, sigma) - sigma * std::hypot(1.0, tau);
        const double dtau = (taup - taupa) * (1.0 + (1.0 - s.e2) * tau * tau) /
                            ((1.0 - s.e2) * std::hypot(1.0, taupa) * std::hypot(1.0, tau));
        tau += dtau;
        if (std::fabs(dtau) < 1e-16 * (1.0 + std::fabs(tau))) break;
    }

    GeoPoint p;
    p.lat = std::atan(tau) / kDegToRad;
    p.lon = normalize_lon(lon0 + std::atan2(std::sinh(etap), std::cos(xip)) / kDegToRad);
    return p;
}

}  // namespace nadir
