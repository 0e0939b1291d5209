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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nadir/geodesy.hpp"

using Catch::Approx;
using namespace nadir;

namespace {

// Ground distance between two nearby points on the spherical model, meters.
double local_distance_m(const GeoPoint& a, const GeoPoint& b) {
    const double dn = (a.lat - b.lat) * kMetersPerDegree;
    const double de = normalize_lon(a.lon - b.lon) * kMetersPerDegree *
                      std::cos(kDegToRad * (a.lat + b.lat) / 2.0);
    return std::hypot(de, dn);
}

}  // namespace

TEST_CASE("footprint reference values", "[geodesy]") {
    // Frozen from an extended-precision evaluation of
    // diag = 2 * agl * tan(fov/2), w = diag * sin(atan(w/h)), h = diag * cos(atan(w/h)).
    const Footprint f120 = footprint_from_agl(120.0, CameraSpec{});
    REQUIRE(f120.diag_m == Approx(197.1382225300276).epsilon(1e-12));
    REQUIRE(f120.width_m == Approx(157.71057802402208).epsilon(1e-12));
    REQUIRE(f120.height_m == Approx(118.28293351801656).epsilon(1e-12));

    const Footprint f126 = footprint_from_agl(126.0, CameraSpec{});
    REQUIRE(f126.diag_m == Approx(206.99513365652898).epsilon(1e-12));
    REQUIRE(f126.width_m == Approx(165.59610692522319).epsilon(1e-12));
    REQUIRE(f126.height_m == Approx(124.19708019391739).epsilon(1e-12));

    // Unit altitude, 90 degree fov, square sensor: diag 2, sides sqrt(2).
    const Footprint sq = footprint_from_agl(1.0, {90.0, 1, 1});
    REQUIRE(sq.diag_m == Approx(2.0).epsilon(1e-12));
    REQUIRE(sq.width_m == Approx(std::numbers::sqrt2).epsilon(1e-12));
    REQUIRE(sq.height_m == Approx(std::numbers::sqrt2).epsilon(1e-12));
}

TEST_CASE("footprint invariants over random specs", "[geodesy]") {
    std::mt19937 rng(7771);
    std::uniform_real_distribution<double> agl_d(1.0, 500.0);
    std::uniform_real_distribution<double> fov_d(10.0, 170.0);
    std::uniform_int_distribution<int> asp_d(1, 32);
    for (int i = 0; i < 2000; ++i) {
        const double agl = agl_d(rng);
        const CameraSpec cam{fov_d(rng), asp_d(rng), asp_d(rng)};
        const Footprint f = footprint_from_agl(agl, cam);
        REQUIRE(f.width_m > 0.0);
        REQUIRE(f.height_m > 0.0);
        // Sides recombine into the diagonal.
        REQUIRE(std::hypot(f.width_m, f.height_m) == Approx(f.diag_m).epsilon(1e-9));
        // Sides split in the sensor's aspect ratio.
        REQUIRE(f.width_m * cam.aspect_h ==
                Approx(f.height_m * cam.aspect_w).epsilon(1e-9));
    }
}

TEST_CASE("footprint domain errors", "[geodesy]") {
    REQUIRE_THROWS_AS(footprint_from_agl(0.0, CameraSpec{}), DomainError);
    REQUIRE_THROWS_AS(footprint_from_agl(-5.0, CameraSpec{}), DomainError);
    REQUIRE_THROWS_AS(footprint_from_agl(100.0, {0.0, 4, 3}), DomainError);
    REQUIRE_THROWS_AS(footprint_from_agl(100.0, {180.0, 4, 3}), DomainError);
    REQUIRE_THROWS_AS(footprint_from_agl(100.0, {78.8, 0, 3}), DomainError);
    REQUIRE_THROWS_AS(footprint_from_agl(100.0, {78.8, 4, -1}), DomainError);
}

TEST_CASE("offset_point reference values", "[geodesy]") {
    const GeoPoint p{35.1375, -89.8615};

    // 1000 m east: dlon = 1000 / ((C/360) cos lat), frozen at full precision.
    const GeoPoint e = offset_point(p, 1000.0, 0.0);
    REQUIRE(e.lat == p.lat);
    REQUIRE(e.lon == Approx(-89.850515104986334).epsilon(1e-12));

    // 1000 m north: dlat = 1000 / (C/360).
    const GeoPoint n = offset_point(p, 0.0, 1000.0);
    REQUIRE(n.lon == p.lon);
    REQUIRE(n.lat == Approx(35.146483152770715).epsilon(1e-12));

    // Opposite displacements cancel.
    const GeoPoint back = offset_point(offset_point(p, 250.0, -320.0), -250.0, 320.0);
    REQUIRE(back.lat == Approx(p.lat).margin(1e-12));
    REQUIRE(back.lon == Approx(p.lon).margin(1e-12));

    REQUIRE_THROWS_AS(offset_point({85.0, 0.0}, 0.0, 100000.0), DomainError);
    REQUIRE_THROWS_AS(offset_point({86.0, 0.0}, 10.0, 0.0), DomainError);
}

TEST_CASE("offset_point tracks an ellipsoidal geodesic within 0.5%", "[geodesy]") {
    // Destinations of true WGS-84 geodesics (azimuth 90 = east, 0 = north)
    // from (35.1375, -89.8615), frozen from an independent solver.
    const GeoPoint p{35.1375, -89.8615};
    struct Case {
        double d_east, d_north;
        GeoPoint expect;
        double dist;
    };
    const Case cases[] = {
        {1000.0, 0.0, {35.137499503251, -89.8505272911693}, 1000.0},
        {0.0, 1000.0, {35.146513623238, -89.8615}, 1000.0},
        {10000.0, 0.0, {35.137450325134, -89.7517729556841}, 10000.0},
        {0.0, 10000.0, {35.227635627642, -89.8615}, 10000.0},
        {50000.0, 0.0, {35.136258143399, -89.3128701104735}, 50000.0},
        {0.0, 50000.0, {35.588164675525, -89.8615}, 50000.0},
    };
    for (const Case& c : cases) {
        const GeoPoint got = offset_point(p, c.d_east, c.d_north);
        REQUIRE(local_distance_m(got, c.expect) <= 0.005 * c.dist);
    }
}

TEST_CASE("bbox_from_meters is centred and spans the requested rectangle", "[geodesy]") {
    const GeoPoint c{35.1375, -89.8615};
    const GeoBBox b = bbox_from_meters(c, 1000.0, 800.0);
    REQUIRE(b.top_left.lat - c.lat == Approx(c.lat - b.bottom_right.lat).epsilon(1e-12));
    REQUIRE(c.lon - b.top_left.lon == Approx(b.bottom_right.lon - c.lon).epsilon(1e-12));
    const double span_n = (b.top_left.lat - b.bottom_right.lat) * kMetersPerDegree;
    const double span_e = (b.bottom_right.lon - b.top_left.lon) * kMetersPerDegree *
                          std::cos(kDegToRad * c.lat);
    REQUIRE(span_n == Approx(800.0).epsilon(1e-9));
    REQUIRE(span_e == Approx(1000.0).epsilon(1e-9));
    REQUIRE_THROWS_AS(bbox_from_meters(c, 0.0, 10.0), DomainError);
    REQUIRE_THROWS_AS(bbox_from_meters(c, 10.0, -1.0), DomainError);
}

TEST_CASE("utm_zone_for picks the 6-degree band", "[geodesy]") {
    REQUIRE(utm_zone_for(-90.07) == 15);
    REQUIRE(utm_zone_for(-90.0) == 16);
    REQUIRE(utm_zone_for(-89.9) == 16);
    REQUIRE(utm_zone_for(-89.73) == 16);
    REQUIRE(utm_zone_for(0.0) == 31);
    REQUIRE(utm_zone_for(3.0) == 31);
    REQUIRE(utm_zone_for(151.2153) == 56);
    REQUIRE(utm_zone_for(179.999) == 60);
    REQUIRE(utm_zone_for(-180.0) == 1);
    REQUIRE(utm_zone_for(180.0) == 1);  // wraps to -180
}

TEST_CASE("geographic to UTM reference values", "[geodesy]") {
    // All expectations frozen from an independent extended-precision
    // transverse Mercator implementation; tolerance 0.1 mm.
    struct Case {
        GeoPoint p;
        int zone;
        bool north;
        double easting, northing;
    };
    const Case cases[] = {
        {{35.16, -89.90}, 16, true, 235848.0574121, 3894638.2453026},
        {{35.115, -89.823}, 16, true, 242722.0095280, 3889443.8028764},
        {{35.128039, -89.799163}, 16, true, 244935.7104548, 3890829.0194957},
        {{35.1375, -89.8615}, 16, true, 239284.0646811, 3892040.3113749},
        {{35.06, -89.73}, 16, true, 251032.6670681, 3883105.5518225},
        {{35.22, -90.07}, 15, true, 766688.9980633, 3901375.3230619},
        {{0.0, 3.0}, 31, true, 500000.0, 0.0},
        {{60.0, 5.0}, 31, true, 611544.0419768, 6653097.4352950},
        {{-33.8568, 151.2153}, 56, false, 334900.5696523, 6252288.7528883},
    };
    for (const Case& c : cases) {
        const UtmCoord u = latlon_to_utm(c.p);
        REQUIRE(u.zone == c.zone);
        REQUIRE(u.north == c.north);
        REQUIRE(u.easting == Approx(c.easting).margin(1e-4));
        REQUIRE(u.northing == Approx(c.northing).margin(1e-4));
    }
}

TEST_CASE("pinned-zone UTM keeps out-of-zone points in one frame", "[geodesy]") {
    // (35.22, -90.07) lies in zone 15; forcing zone 16 extends that frame
    // westwards. Frozen from the same independent implementation.
    const UtmCoord a = latlon_to_utm({35.22, -90.07}, 16);
    REQUIRE(a.zone == 16);
    REQUIRE(a.easting == Approx(220564.16360421755).margin(1e-4));
    REQUIRE(a.northing == Approx(3901760.5931202267).margin(1e-4));

    const UtmCoord b = latlon_to_utm({35.16, -90.02}, 16);
    REQUIRE(b.easting == Approx(224914.26610133356).margin(1e-4));
    REQUIRE(b.northing == Approx(3894963.8183028057).margin(1e-4));
}

TEST_CASE("UTM round-trip over random points", "[geodesy]") {
    std::mt19937 rng(160321);
    std::uniform_real_distribution<double> lat_d(-80.0, 80.0);
    std::uniform_real_distribution<double> lon_d(-180.0, 180.0);
    for (int i = 0; i < 2000; ++i) {
        const GeoPoint p{lat_d(rng), lon_d(rng)};
        const GeoPoint q = utm_to_latlon(latlon_to_utm(p));
        REQUIRE(std::fabs(q.lat - p.lat) <= 1e-9);
        REQUIRE(std::fabs(normalize_lon(q.lon - p.lon)) <= 1e-9);
    }
}

TEST_CASE("UTM round-trip with a pinned zone", "[geodesy]") {
    std::mt19937 rng(160322);
    std::uniform_real_distribution<double> lat_d(30.0, 40.0);
    std::uniform_real_distribution<double> lon_d(-94.0, -84.0);
    for (int i = 0; i < 500; ++i) {
        const GeoPoint p{lat_d(rng), lon_d(rng)};
        const UtmCoord u = latlon_to_utm(p, 16);
        REQUIRE(u.zone == 16);
        const GeoPoint q = utm_to_latlon(u);
        REQUIRE(std::fabs(q.lat - p.lat) <= 1e-9);
        REQUIRE(std::fabs(q.lon - p.lon) <= 1e-9);
    }
}

TEST_CASE("UTM domain errors", "[geodesy]") {
    REQUIRE_THROWS_AS(latlon_to_utm({85.0, 0.0}), DomainError);
    REQUIRE_THROWS_AS(latlon_to_utm({-84.5, 0.0}), DomainError);
    REQUIRE_THROWS_AS(latlon_to_utm({35.0, -90.0}, 61), DomainError);
    REQUIRE_THROWS_AS(latlon_to_utm({35.0, -90.0}, -1), DomainError);
    REQUIRE_THROWS_AS(utm_to_latlon({500000.0, 0.0, 0, true}), DomainError);
    REQUIRE_THROWS_AS(utm_to_latlon({5e6, 0.0, 16, true}), DomainError);
    REQUIRE_THROWS_AS(utm_to_latlon({500000.0, -2e6, 16, true}), DomainError);
    REQUIRE_THROWS_AS(utm_to_latlon({500000.0, 1.2e7, 16, false}), DomainError);
}
