#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "aric/codebook.hpp"
#include "aric/common.hpp"
#include "aric/image.hpp"

namespace aric {

// Grid of d-dimensional patch vectors; the stand-in for a neural encoder's
// latent map.
struct FeatureMap {
    int tw = 0;   // vectors per row
    int th = 0;   // vectors per column
    int dim = 0;
    std::vector<double> data;  // th * tw * dim, row-major

    double* vec(int x, int y) { return data.data() + (static_cast<size_t>(y) * tw + x) * dim; }
    const double* vec(int x, int y) const {
        return data.data() + (static_cast<size_t>(y) * tw + x) * dim;
    }
    size_t count() const { return static_cast<size_t>(tw) * th; }
};

struct TokenGrid {
    int tw = 0;
    int th = 0;
    std::vector<uint32_t> tokens;  // row-major

    uint32_t& at(int x, int y) { return tokens[static_cast<size_t>(y) * tw + x]; }
    uint32_t at(int x, int y) const { return tokens[static_cast<size_t>(y) * tw + x]; }
};

struct ScaleRes {
    int tw = 0;
    int th = 0;
    bool operator==(const ScaleRes&) const = default;
};

// Coarse-to-fine token maps; scales[k] has resolution plan[k], strictly
// increasing, the last matching the full feature grid.
struct ScalePyramid {
    std::vector<TokenGrid> scales;
};

inline FeatureMap extract_features(const Image& img, int patch_size) {
    if (patch_size < 1) fail(Err::Dimension, "patch size must be positive");
    if (img.width % patch_size != 0 || img.height % patch_size != 0)
        fail(Err::Dimension, "image dimensions not divisible by patch size");
    FeatureMap fm;
    fm.tw = img.width / patch_size;
    fm.th = img.height / patch_size;
    fm.dim = patch_size * patch_size * img.channels;
    fm.data.resize(fm.count() * fm.dim);
    for (int gy = 0; gy < fm.th; ++gy) {
        for (int gx = 0; gx < fm.tw; ++gx) {
            double* v = fm.vec(gx, gy);
            size_t i = 0;
            for (int py = 0; py < patch_size; ++py)
                for (int px = 0; px < patch_size; ++px)
                    for (int c = 0; c < img.channels; ++c)
                        v[i++] = img.at(gx * patch_size + px, gy * patch_size + py, c);
        }
    }
    return fm;
}

// Nearest codebook entry under squared Euclidean distance, ties to the
// lowest index.
inline uint32_t nearest_code(const Codebook& cb, const double* v) {
    uint32_t best = 0;
    double bd = detail::dist2(v, cb.entry(0), cb.dim);
    for (uint32_t c = 1; c < cb.size; ++c) {
        double d = detail::dist2_bounded(v, cb.entry(c), cb.dim, bd);
        if (d < bd) {
            bd = d;
            best = c;
        }
    }
    return best;
}

inline TokenGrid tokenize(const FeatureMap& fm, const Codebook& cb) {
    if (static_cast<uint32_t>(fm.dim) != cb.dim) fail(Err::Dimension, "feature/codebook dim mismatch");
    TokenGrid grid;
    grid.tw = fm.tw;
    grid.th = fm.th;
    grid.tokens.resize(fm.count());
    for (int y = 0; y < fm.th; ++y)
        for (int x = 0; x < fm.tw; ++x) grid.at(x, y) = nearest_code(cb, fm.vec(x, y));
    return grid;
}

namespace detail {

inline void place_patch(Image& img, const double* v, int gx, int gy, int patch, int channels) {
    size_t i = 0;
    for (int py = 0; py < patch; ++py)
        for (int px = 0; px < patch; ++px)
            for (int c = 0; c < channels; ++c)
                img.at(gx * patch + px, gy * patch + py, c) = std::clamp(v[i++], 0.0, 1.0);
}

}  // namespace detail

inline Image detokenize(const TokenGrid& grid, const Codebook& cb) {
    Image img = Image::blank(grid.tw * cb.patch_size, grid.th * cb.patch_size, cb.channels);
    for (int gy = 0; gy < grid.th; ++gy)
        for (int gx = 0; gx < grid.tw; ++gx) {
            uint32_t t = grid.at(gx, gy);
            if (t >= cb.size) fail(Err::Corruption, "token id out of range");
            detail::place_patch(img, cb.entry(t), gx, gy, cb.patch_size, cb.channels);
        }
    return img;
}

// Power-of-two halvings of the full grid, coarsest first. Both dimensions
// shrink by the same factor, so every entry divides the full resolution.
inline std::vector<ScaleRes> default_scale_plan(int tw, int th) {
    std::vector<ScaleRes> plan;
    int f = 1;
    while (tw % (f * 2) == 0 && th % (f * 2) == 0 && tw / (f * 2) >= 1 && th / (f * 2) >= 1) f *= 2;
    for (; f >= 1; f /= 2) plan.push_back({tw / f, th / f});
    return plan;
}

namespace detail {

inline void validate_plan(const std::vector<ScaleRes>& plan, int tw, int th) {
    if (plan.empty()) fail(Err::Usage, "empty scale plan");
    if (plan.back().tw != tw || plan.back().th != th)
        fail(Err::Usage, "final scale must match the full token resolution");
    for (size_t k = 0; k < plan.size(); ++k) {
        const auto& r = plan[k];
        if (r.tw < 1 || r.th < 1 || tw % r.tw != 0 || th % r.th != 0)
            fail(Err::Usage, "scale resolution must divide the full resolution");
        if (tw / r.tw != th / r.th)
            fail(Err::Usage, "scales must shrink both dimensions by the same factor");
        if (k > 0 && (plan[k].tw <= plan[k - 1].tw || plan[k].th <= plan[k - 1].th))
            fail(Err::Usage, "scale resolutions must be strictly increasing");
    }
}

}  // namespace detail

// Residual quantization across scales: at each scale the pooled residual is
// quantized, dequantized, replicated back to full resolution and accumulated.
inline ScalePyramid tokenize_multiscale(const FeatureMap& fm, const Codebook& cb,
                                        const std::vector<ScaleRes>& plan) {
    if (static_cast<uint32_t>(fm.dim) != cb.dim) fail(Err::Dimension, "feature/codebook dim mismatch");
    if (!cb.zero_reserved) fail(Err::Usage, "multi-scale tokenization needs a zero-reserved codebook");
    detail::validate_plan(plan, fm.tw, fm.th);

    const int dim = fm.dim;
    std::vector<double> acc(fm.count() * dim, 0.0);
    std::vector<double> pooled;
    ScalePyramid pyr;
    pyr.scales.reserve(plan.size());

    for (const ScaleRes& res : plan) {
        const int f = fm.tw / res.tw;  // same factor vertically by validation
        TokenGrid grid;
        grid.tw = res.tw;
        grid.th = res.th;
        grid.tokens.resize(static_cast<size_t>(res.tw) * res.th);

        pooled.assign(dim, 0.0);
        const double inv = 1.0 / (static_cast<double>(f) * f);
        for (int sy = 0; sy < res.th; ++sy) {
            for (int sx = 0; sx < res.tw; ++sx) {
                // average-pool the residual over the f x f block
                std::fill(pooled.begin(), pooled.end(), 0.0);
                for (int by = 0; by < f; ++by) {
                    for (int bx = 0; bx < f; ++bx) {
                        const int x = sx * f + bx, y = sy * f + by;
                        const double* feat = fm.vec(x, y);
                        const double* a = acc.data() + (static_cast<size_t>(y) * fm.tw + x) * dim;
                        for (int i = 0; i < dim; ++i) pooled[i] += feat[i] - a[i];
                    }
                }
                for (int i = 0; i < dim; ++i) pooled[i] *= inv;

                uint32_t t = nearest_code(cb, pooled.data());
                grid.at(sx, sy) = t;

                // dequantize + nearest-neighbor upsample into the accumulator
                const double* q = cb.entry(t);
                for (int by = 0; by < f; ++by) {
                    for (int bx = 0; bx < f; ++bx) {
                        const int x = sx * f + bx, y = sy * f + by;
                        double* a = acc.data() + (static_cast<size_t>(y) * fm.tw + x) * dim;
                        for (int i = 0; i < dim; ++i) a[i] += q[i];
                    }
                }
            }
        }
        pyr.scales.push_back(std::move(grid));
    }
    return pyr;
}

// Accumulated reconstruction of a pyramid in feature space (pre-clamp).
inline FeatureMap reconstruct_multiscale(const ScalePyramid& pyr, const Codebook& cb) {
    if (pyr.scales.empty()) fail(Err::Corruption, "empty pyramid");
    const TokenGrid& full = pyr.scales.back();
    std::vector<ScaleRes> plan;
    plan.reserve(pyr.scales.size());
    for (const TokenGrid& g : pyr.scales) plan.push_back({g.tw, g.th});
    detail::validate_plan(plan, full.tw, full.th);

    FeatureMap out;
    out.tw = full.tw;
    out.th = full.th;
    out.dim = static_cast<int>(cb.dim);
    out.data.assign(out.count() * cb.dim, 0.0);

    for (const TokenGrid& g : pyr.scales) {
        const int f = full.tw / g.tw;
        for (int sy = 0; sy < g.th; ++sy) {
            for (int sx = 0; sx < g.tw; ++sx) {
                uint32_t t = g.at(sx, sy);
                if (t >= cb.size) fail(Err::Corruption, "token id out of range");
                const double* q = cb.entry(t);
                for (int by = 0; by < f; ++by) {
                    for (int bx = 0; bx < f; ++bx) {
                        double* a = out.vec(sx * f + bx, sy * f + by);
                        for (uint32_t i = 0; i < cb.dim; ++i) a[i] += q[i];
                    }
                }
            }
        }
    }
    return out;
}

inline Image detokenize_multiscale(const ScalePyramid& pyr, const Codebook& cb) {
    FeatureMap acc = reconstruct_multiscale(pyr, cb);
    Image img = Image::blank(acc.tw * cb.patch_size, acc.th * cb.patch_size, cb.channels);
    for (int gy = 0; gy < acc.th; ++gy)
        for (int gx = 0; gx < acc.tw; ++gx)
            detail::place_patch(img, acc.vec(gx, gy), gx, gy, cb.patch_size, cb.channels);
    return img;
}

}  // namespace aric
