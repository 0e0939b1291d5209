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

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "nadir/imaging.hpp"

namespace nadir {

enum class ImageFormat { unknown, png, jpeg };

inline ImageFormat sniff_format(const uint8_t* data, size_t size) {
    static const uint8_t png_magic[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (size >= 8 && std::memcmp(data, png_magic, 8) == 0) return ImageFormat::png;
    if (size >= 2 && data[0] == 0xff && data[1] == 0xd8) return ImageFormat::jpeg;
    return ImageFormat::unknown;
}

// --------------------------------- PNG ------------------------------------

inline Image decode_png(const uint8_t* data, size_t size) {
    png_image im;
    std::memset(&im, 0, sizeof(im));
    im.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&im, data, size)) {
        png_image_free(&im);
        throw ProtocolError(std::string("png decode: ") + im.message);
    }
    const bool gray = (im.format & PNG_FORMAT_FLAG_COLOR) == 0 &&
                      (im.format & PNG_FORMAT_FLAG_ALPHA) == 0;
    im.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    Image out(static_cast<int>(im.width), static_cast<int>(im.height), gray ? 1 : 3);
    if (!png_image_finish_read(&im, nullptr, out.pixels.data(), 0, nullptr)) {
        png_image_free(&im);
        throw ProtocolError(std::string("png decode: ") + im.message);
    }
    return out;
}

inline std::vector<uint8_t> encode_png(const Image& img) {
    if (img.empty()) throw DomainError("encode_png: empty image");
    png_image im;
    std::memset(&im, 0, sizeof(im));
    im.version = PNG_IMAGE_VERSION;
    im.width = static_cast<png_uint_32>(img.width);
    im.height = static_cast<png_uint_32>(img.height);
    im.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

    png_alloc_size_t bytes = 0;
    if (!png_image_write_to_memory(&im, nullptr, &bytes, 0, img.pixels.data(), 0, nullptr)) {
        throw IoError(std::string("png encode: ") + im.message);
    }
    std::vector<uint8_t> out(bytes);
    if (!png_image_write_to_memory(&im, out.data(), &bytes, 0, img.pixels.data(), 0, nullptr)) {
        throw IoError(std::string("png encode: ") + im.message);
    }
    out.resize(bytes);
    return out;
}

// --------------------------------- JPEG -----------------------------------

namespace detail {

struct JpegErr {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX] = {};
};

inline void jpeg_throwing_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

}  // namespace detail

inline Image decode_jpeg(const uint8_t* data, size_t size) {
    jpeg_decompress_struct cinfo;
    detail::JpegErr err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = detail::jpeg_throwing_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw ProtocolError(std::string("jpeg decode: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, const_cast<unsigned char*>(data), static_cast<unsigned long>(size));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);

    Image out(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height),
              cinfo.output_components == 1 ? 1 : 3);
    const size_t row_bytes = static_cast<size_t>(out.width) * out.channels;
    while (cinfo.output_scanline < cinfo.output_height) {
        uint8_t* row = out.pixels.data() + static_cast<size_t>(cinfo.output_scanline) * row_bytes;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

inline std::vector<uint8_t> encode_jpeg(const Image& img, int quality = 90) {
    if (img.empty()) throw DomainError("encode_jpeg: empty image");
    if (quality < 1 || quality > 100) throw DomainError("encode_jpeg: quality outside [1, 100]");

    jpeg_compress_struct cinfo;
    detail::JpegErr err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = detail::jpeg_throwing_error_exit;

    unsigned char* buf = nullptr;
    unsigned long buf_size = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        free(buf);
        throw IoError(std::string("jpeg encode: ") + err.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buf, &buf_size);
    cinfo.image_width = static_cast<JDIMENSION>(img.width);
    cinfo.image_height = static_cast<JDIMENSION>(img.height);
    cinfo.input_components = img.channels;
    cinfo.in_color_space = img.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);

    const size_t row_bytes = static_cast<size_t>(img.width) * img.channels;
    while (cinfo.next_scanline < cinfo.image_height) {
        const uint8_t* row = img.pixels.data() + static_cast<size_t>(cinfo.next_scanline) * row_bytes;
        JSAMPROW rows[1] = {const_cast<JSAMPROW>(row)};
        jpeg_write_scanlines(&cinfo, rows, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);

    std::vector<uint8_t> out(buf, buf + buf_size);
    free(buf);
    return out;
}

// ------------------------------- dispatch ----------------------------------

inline Image decode_image(const uint8_t* data, size_t size) {
    switch (sniff_format(data, size)) {
        case ImageFormat::png: return decode_png(data, size);
        case ImageFormat::jpeg: return decode_jpeg(data, size);
        case ImageFormat::unknown: break;
    }
    throw ProtocolError("decode_image: payload is neither PNG nor JPEG");
}

inline Image decode_image(const std::vector<uint8_t>& bytes) {
    return decode_image(bytes.data(), bytes.size());
}

inline std::vector<uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed on '" + path.string() + "'");
    return bytes;
}

inline void write_file(const std::filesystem::path& path, const void* data, size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw IoError("write failed on '" + path.string() + "'");
}

inline Image read_image_file(const std::filesystem::path& path) {
    return decode_image(read_file(path));
}

inline void write_png_file(const std::filesystem::path& path, const Image& img) {
    const std::vector<uint8_t> bytes = encode_png(img);
    write_file(path, bytes.data(), bytes.size());
}

}  // namespace nadir
