#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "aric/common.hpp"

namespace aric {

// Raster image with unit-interval samples. Every value is k/255 for an
// integer k, so writing and re-reading is lossless.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 (gray) or 3 (rgb)
    std::vector<double> pixels;  // row-major, channel-interleaved

    double& at(int x, int y, int c) { return pixels[(static_cast<size_t>(y) * width + x) * channels + c]; }
    double at(int x, int y, int c) const { return pixels[(static_cast<size_t>(y) * width + x) * channels + c]; }
    size_t sample_count() const { return pixels.size(); }

    static Image blank(int w, int h, int ch) {
        if (w < 1 || h < 1 || (ch != 1 && ch != 3)) fail(Err::Dimension, "bad image shape");
        Image img;
        img.width = w;
        img.height = h;
        img.channels = ch;
        img.pixels.assign(static_cast<size_t>(w) * h * ch, 0.0);
        return img;
    }
};

namespace detail {

// Netpbm header token scanning: whitespace separates tokens, '#' starts a
// comment running to end of line.
inline void skip_space(std::span<const uint8_t> b, size_t& pos) {
    while (pos < b.size()) {
        uint8_t c = b[pos];
        if (c == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
            ++pos;
        } else {
            break;
        }
    }
}

inline uint64_t read_pnm_int(std::span<const uint8_t> b, size_t& pos) {
    skip_space(b, pos);
    if (pos >= b.size() || b[pos] < '0' || b[pos] > '9')
        fail(Err::Format, "expected integer at byte " + std::to_string(pos));
    uint64_t v = 0;
    while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
        v = v * 10 + (b[pos] - '0');
        if (v > 0xFFFFFFFFull) fail(Err::Format, "oversize integer at byte " + std::to_string(pos));
        ++pos;
    }
    return v;
}

}  // namespace detail

// Binary PPM (P6) / PGM (P5), maxval 255 only.
inline Image read_ppm(std::span<const uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        fail(Err::Format, "bad magic at byte 0");
    int channels = bytes[1] == '6' ? 3 : 1;
    size_t pos = 2;
    uint64_t w = detail::read_pnm_int(bytes, pos);
    uint64_t h = detail::read_pnm_int(bytes, pos);
    uint64_t maxval = detail::read_pnm_int(bytes, pos);
    if (maxval != 255) fail(Err::Format, "maxval must be 255 at byte " + std::to_string(pos));
    if (w == 0 || h == 0 || w > 0x7FFFFFFF || h > 0x7FFFFFFF)
        fail(Err::Format, "bad dimensions at byte " + std::to_string(pos));
    if (pos >= bytes.size()) fail(Err::Format, "missing payload at byte " + std::to_string(pos));
    uint8_t sep = bytes[pos];
    if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n')
        fail(Err::Format, "expected whitespace after maxval at byte " + std::to_string(pos));
    ++pos;  // exactly one whitespace byte, then raw samples

    size_t need = static_cast<size_t>(w) * h * channels;
    if (bytes.size() - pos < need)
        fail(Err::Format, "truncated payload at byte " + std::to_string(bytes.size()));
    if (bytes.size() - pos > need)
        fail(Err::Format, "trailing data at byte " + std::to_string(pos + need));

    Image img = Image::blank(static_cast<int>(w), static_cast<int>(h), channels);
    for (size_t i = 0; i < need; ++i) img.pixels[i] = bytes[pos + i] / 255.0;
    return img;
}

// Canonical form: "P6\n<w> <h>\n255\n" + samples. round(v*255), ties away
// from zero.
inline std::vector<uint8_t> write_ppm(const Image& img) {
    if (img.channels != 1 && img.channels != 3) fail(Err::Dimension, "bad channel count");
    if (img.pixels.size() != static_cast<size_t>(img.width) * img.height * img.channels)
        fail(Err::Dimension, "pixel buffer size mismatch");
    std::string header = (img.channels == 3 ? std::string("P6\n") : std::string("P5\n")) +
                         std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + img.pixels.size());
    for (double v : img.pixels) {
        double scaled = std::floor(v * 255.0 + 0.5);
        if (scaled < 0.0) scaled = 0.0;
        if (scaled > 255.0) scaled = 255.0;
        out.push_back(static_cast<uint8_t>(scaled));
    }
    return out;
}

inline Image center_crop(const Image& img, int w, int h) {
    if (w < 1 || h < 1 || w > img.width || h > img.height)
        fail(Err::Dimension, "crop window exceeds image");
    int ox = (img.width - w) / 2;
    int oy = (img.height - h) / 2;
    Image out = Image::blank(w, h, img.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(x + ox, y + oy, c);
    return out;
}

inline std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(Err::Io, "cannot open " + path);
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (f.bad()) fail(Err::Io, "read error on " + path);
    return data;
}

inline void write_file(const std::string& path, std::span<const uint8_t> data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(Err::Io, "cannot create " + path);
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!f) fail(Err::Io, "write error on " + path);
}

inline Image load_image(const std::string& path) { return read_ppm(read_file(path)); }
inline void save_image(const std::string& path, const Image& img) {
    auto bytes = write_ppm(img);
    write_file(path, bytes);
}

}  // namespace aric
