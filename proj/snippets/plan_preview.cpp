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
//
// Plans a coverage raster over a survey field, then renders the first
// waypoint with the offline mock and writes it to preview.png.

#include <cstdio>

#include "nadir/imaging.hpp"
#include "nadir/mission.hpp"
#include "nadir/provider.hpp"

int main() {
    using namespace nadir;

    const GeoBBox field{{35.16, -89.90}, {35.115, -89.823}};
    const CameraSpec camera{78.8, 4, 3};
    const double agl_m = 120.0;

    const MissionPlan plan = plan_raster(field, agl_m, camera);
    std::printf("%zu waypoints (%d rows x %d cols), UTM zone %d\n",
                plan.waypoints.size(), plan.n_rows, plan.n_cols, plan.utm_zone);
    std::printf("step east %.2f m, step north %.2f m\n", plan.step_east_m,
                plan.step_north_m);

    const Waypoint& wp = plan.waypoints.front();
    std::printf("first capture: (%.6f, %.6f) zoom %d, %dx%d px\n", wp.center.lat,
                wp.center.lon, wp.zoom, wp.res_x, wp.res_y);

    const CaptureSpec spec{wp.center, wp.zoom, wp.res_x, wp.res_y,
                           MapType::satellite, true};
    const Image frame = mock_render(with_vertical_margin(spec, 0.2));
    const Image cropped = crop_vmargin(frame, 0.2);
    std::printf("entropy %.3f bits\n", shannon_entropy(cropped).bits);

    write_png_file("preview.png", cropped);
    std::printf("wrote preview.png (%dx%d)\n", cropped.width, cropped.height);
    return 0;
}
