#pragma once

// Seeded procedural inputs for tests and the bundled corpus. Everything is
// quantized to k/255 so PPM round trips are exact.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "aric/codebook.hpp"
#include "aric/common.hpp"
#include "aric/image.hpp"
#include "aric/tokenizer.hpp"

namespace synth {

inline double hash01(uint64_t seed, int64_t a, int64_t b, int64_t c) {
    aric::SplitMix64 rng(seed ^ (static_cast<uint64_t>(a) * 0x9E3779B97F4A7C15ull) ^
                         (static_cast<uint64_t>(b) * 0xC2B2AE3D27D4EB4Full) ^
                         (static_cast<uint64_t>(c) * 0x165667B19E3779F9ull));
    return rng.next_double();
}

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Bilinear value noise on a lattice with cell size `cell`.
inline double value_noise(uint64_t seed, double x, double y, int cell, int layer) {
    double fx = x / cell, fy = y / cell;
    int ix = static_cast<int>(std::floor(fx)), iy = static_cast<int>(std::floor(fy));
    double tx = smoothstep(fx - ix), ty = smoothstep(fy - iy);
    double v00 = hash01(seed, ix, iy, layer);
    double v10 = hash01(seed, ix + 1, iy, layer);
    double v01 = hash01(seed, ix, iy + 1, layer);
    double v11 = hash01(seed, ix + 1, iy + 1, layer);
    double a = v00 + (v10 - v00) * tx;
    double b = v01 + (v11 - v01) * tx;
    return a + (b - a) * ty;
}

inline double quantize8(double v) {
    double k = std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
    return std::min(k, 255.0) / 255.0;
}

// Unstructured noise: every sample an independent byte.
inline aric::Image noise_image(int w, int h, int ch, uint64_t seed) {
    aric::Image img = aric::Image::blank(w, h, ch);
    aric::SplitMix64 rng(seed);
    for (double& p : img.pixels) p = static_cast<double>(rng.next_below(256)) / 255.0;
    return img;
}

// Smooth landscape-like content: a gradient plus low-frequency value noise
// octaves and a couple of flat disks. Spatially correlated, so neighboring
// patches quantize to recurring tokens.
inline aric::Image natural_image(int w, int h, int ch, uint64_t seed) {
    aric::Image img = aric::Image::blank(w, h, ch);
    aric::SplitMix64 rng(seed);
    double gdir = rng.next_double() * 6.283185307179586;
    double gx = std::cos(gdir), gy = std::sin(gdir);
    double base = 0.25 + 0.5 * rng.next_double();

    struct Disk {
        double cx, cy, r, level;
    };
    std::vector<Disk> disks;
    int ndisks = 2 + static_cast<int>(rng.next_below(3));
    for (int i = 0; i < ndisks; ++i)
        disks.push_back({rng.next_double() * w, rng.next_double() * h,
                         (0.08 + 0.15 * rng.next_double()) * std::min(w, h), rng.next_double()});

    int big = std::max(16, std::min(w, h) / 4);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double g = (gx * x / w + gy * y / h) * 0.35;
            double n0 = value_noise(seed, x, y, big, 0) - 0.5;
            double n1 = value_noise(seed, x, y, std::max(4, big / 4), 1) - 0.5;
            double v = base + g + 0.45 * n0 + 0.12 * n1;
            for (const Disk& d : disks) {
                double dx = x - d.cx, dy = y - d.cy;
                if (dx * dx + dy * dy < d.r * d.r) v = 0.3 * v + 0.7 * d.level;
            }
            for (int c = 0; c < ch; ++c) {
                double tint = c == 0 ? 0.0 : (c == 1 ? 0.05 : -0.05);
                img.at(x, y, c) = quantize8(v + tint * (0.5 + n0));
            }
        }
    }
    return img;
}

inline aric::Codebook random_codebook(uint32_t v, uint8_t patch, uint8_t ch, uint64_t seed,
                                      bool zero_reserved) {
    uint32_t d = static_cast<uint32_t>(patch) * patch * ch;
    std::vector<float> vectors(static_cast<size_t>(v) * d);
    aric::SplitMix64 rng(seed);
    for (float& f : vectors) f = static_cast<float>(rng.next_double());
    if (zero_reserved)
        for (uint32_t i = 0; i < d; ++i) vectors[i] = 0.0f;
    return aric::Codebook::from_vectors(std::move(vectors), v, d, patch, ch, zero_reserved);
}

inline aric::FeatureMap random_features(int tw, int th, int dim, uint64_t seed, double lo = 0.0,
                                        double hi = 1.0) {
    aric::FeatureMap fm;
    fm.tw = tw;
    fm.th = th;
    fm.dim = dim;
    fm.data.resize(fm.count() * dim);
    aric::SplitMix64 rng(seed);
    for (double& v : fm.data) v = lo + (hi - lo) * rng.next_double();
    return fm;
}

}  // namespace synth
