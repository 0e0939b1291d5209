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
// Prints the zoom guide: ground resolution and tile side length at the
// equator for every supported zoom level.

#include <cstdio>

#include "nadir/geo.hpp"

int main() {
    std::printf("%4s  %16s  %16s\n", "zoom", "m/pixel", "m/tile");
    for (int z = nadir::kMinZoom; z <= nadir::kMaxZoom; ++z) {
        std::printf("%4d  %16.4f  %16.3f\n", z, nadir::meters_per_pixel(z, 0.0),
                    nadir::meters_per_tile(z));
    }
    return 0;
}
