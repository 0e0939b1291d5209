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
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nadir/error.hpp"

namespace nadir {

/// 8-bit interleaved raster, 1 (gray) or 3 (RGB) channels, row-major.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c) {
        if (w < 1 || h < 1 || (c != 1 && c != 3)) {
            throw DomainError("Image: size must be positive, channels 1 or 3");
        }
        pixels.assign(static_cast<size_t>(w) * h * c, 0);
    }

    uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    bool empty() const { return pixels.empty(); }
};

namespace detail {

inline uint8_t clamp_u8(double v) {
    return static_cast<uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
}

}  // namespace detail

/// ITU-R 601 luma, rounded half away from zero.
inline uint8_t luma(uint8_t r, uint8_t g, uint8_t b) {
    return detail::clamp_u8(0.299 * r + 0.587 * g + 0.114 * b);
}

inline Image to_grayscale(const Image& img) {
    if (img.empty()) throw DomainError("to_grayscale: empty image");
    if (img.channels == 1) return img;
    Image out(img.width, img.height, 1);
    const size_t n = static_cast<size_t>(img.width) * img.height;
    for (size_t i = 0; i < n; ++i) {
        out.pixels[i] = luma(img.pixels[3 * i], img.pixels[3 * i + 1], img.pixels[3 * i + 2]);
    }
    return out;
}

inline Image to_rgb(const Image& img) {
    if (img.empty()) throw DomainError("to_rgb: empty image");
    if (img.channels == 3) return img;
    Image out(img.width, img.height, 3);
    const size_t n = static_cast<size_t>(img.width) * img.height;
    for (size_t i = 0; i < n; ++i) {
        out.pixels[3 * i] = out.pixels[3 * i + 1] = out.pixels[3 * i + 2] = img.pixels[i];
    }
    return out;
}

/// Removes floor(height * vmargin / 2) rows from the top and the bottom.
/// vmargin is the total fraction consumed by both edges together.
inline Image crop_vmargin(const Image& img, double vmargin) {
    if (img.empty()) throw DomainError("crop_vmargin: empty image");
    if (!(vmargin >= 0.0) || !(vmargin < 1.0)) {
        throw DomainError("crop_vmargin: vmargin must lie in [0, 1)");
    }
    const int trim = static_cast<int>(std::floor(img.height * vmargin / 2.0));
    const int new_h = img.height - 2 * trim;
    if (new_h < 1) throw DomainError("crop_vmargin: margin consumes the whole image");
    if (trim == 0) return img;
    Image out(img.width, new_h, img.channels);
    const size_t row_bytes = static_cast<size_t>(img.width) * img.channels;
    std::copy_n(img.pixels.data() + static_cast<size_t>(trim) * row_bytes,
                static_cast<size_t>(new_h) * row_bytes, out.pixels.data());
    return out;
}

/// Bilinear resample to w x h with half-pixel-centre mapping, then channel
/// conversion (3->1 luma, 1->3 replication) if requested. Identity size and
/// channels returns the input bytes unchanged.
inline Image resize(const Image& img, int w, int h, int channels = 0) {
    if (img.empty()) throw DomainError("resize: empty image");
    if (w < 1 || h < 1) throw DomainError("resize: target size must be positive");
    if (channels == 0) channels = img.channels;
    if (channels != 1 && channels != 3) throw DomainError("resize: channels must be 1 or 3");

    Image mid = img;
    if (w != img.width || h != img.height) {
        mid = Image(w, h, img.channels);
        const double sx = static_cast<double>(img.width) / w;
        const double sy = static_cast<double>(img.height) / h;
        for (int y = 0; y < h; ++y) {
            const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                            static_cast<double>(img.height - 1));
            const int y0 = static_cast<int>(src_y);
            const int y1 = std::min(y0 + 1, img.height - 1);
            const double fy = src_y - y0;
            for (int x = 0; x < w; ++x) {
                const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                                static_cast<double>(img.width - 1));
                const int x0 = static_cast<int>(src_x);
                const int x1 = std::min(x0 + 1, img.width - 1);
                const double fx = src_x - x0;
                for (int c = 0; c < img.channels; ++c) {
                    const double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
                    const double bot = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
                    mid.at(x, y, c) = detail::clamp_u8(top * (1.0 - fy) + bot * fy);
                }
            }
        }
    }
    if (channels == mid.channels) return mid;
    return channels == 1 ? to_grayscale(mid) : to_rgb(mid);
}

struct EntropyReport {
    double bits = 0.0;
    std::array<uint64_t, 256> histogram{};
    uint64_t n_pixels = 0;
};

/// Shannon entropy of the grayscale intensity distribution, bits in [0, 8].
/// Zero-count bins contribute nothing (0 * log 0 == 0).
inline EntropyReport shannon_entropy(const Image& img) {
    if (img.empty()) throw DomainError("shannon_entropy: empty image");
    EntropyReport rep;
    if (img.channels == 1) {
        for (uint8_t v : img.pixels) ++rep.histogram[v];
    } else {
        const size_t n = static_cast<size_t>(img.width) * img.height;
        for (size_t i = 0; i < n; ++i) {
            ++rep.histogram[luma(img.pixels[3 * i], img.pixels[3 * i + 1],
                                 img.pixels[3 * i + 2])];
        }
    }
    rep.n_pixels = static_cast<uint64_t>(img.width) * img.height;
    const double n = static_cast<double>(rep.n_pixels);
    double h = 0.0;
    for (uint64_t count : rep.histogram) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / n;
        h -= p * std::log2(p);
    }
    rep.bits = h;
    return rep;
}

}  // namespace nadir
