#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "aric/common.hpp"
#include "aric/image.hpp"

namespace aric {

inline constexpr double kPsnrCap = 99.0;

inline double mse(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        fail(Err::Dimension, "image shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        double d = a.pixels[i] - b.pixels[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.pixels.size());
}

// Peak signal-to-noise ratio with MAX = 1.0, capped at 99 dB.
inline double psnr(const Image& a, const Image& b) {
    double m = mse(a, b);
    if (m <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

namespace detail {

inline const std::array<double, 11>& gaussian11() {
    static const std::array<double, 11> kWindow = [] {
        std::array<double, 11> w{};
        double sum = 0.0;
        for (int i = 0; i < 11; ++i) {
            double x = i - 5.0;
            w[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
            sum += w[i];
        }
        for (double& v : w) v /= sum;
        return w;
    }();
    return kWindow;
}

struct Plane {
    int w = 0, h = 0;
    std::vector<double> v;

    double at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
};

inline Plane channel_plane(const Image& img, int c) {
    Plane p;
    p.w = img.width;
    p.h = img.height;
    p.v.resize(static_cast<size_t>(p.w) * p.h);
    for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < p.w; ++x) p.v[static_cast<size_t>(y) * p.w + x] = img.at(x, y, c);
    return p;
}

inline Plane halve(const Plane& p) {
    Plane out;
    out.w = p.w / 2;
    out.h = p.h / 2;
    out.v.resize(static_cast<size_t>(out.w) * out.h);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            out.v[static_cast<size_t>(y) * out.w + x] =
                0.25 * (p.at(2 * x, 2 * y) + p.at(2 * x + 1, 2 * y) + p.at(2 * x, 2 * y + 1) +
                        p.at(2 * x + 1, 2 * y + 1));
    return out;
}

// Separable valid-window convolution with the 11-tap Gaussian.
inline Plane blur11(const Plane& p) {
    const auto& g = gaussian11();
    Plane tmp;
    tmp.w = p.w - 10;
    tmp.h = p.h;
    tmp.v.resize(static_cast<size_t>(tmp.w) * tmp.h);
    for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < tmp.w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 11; ++k) acc += g[k] * p.at(x + k, y);
            tmp.v[static_cast<size_t>(y) * tmp.w + x] = acc;
        }
    Plane out;
    out.w = tmp.w;
    out.h = p.h - 10;
    out.v.resize(static_cast<size_t>(out.w) * out.h);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 11; ++k) acc += g[k] * tmp.at(x, y + k);
            out.v[static_cast<size_t>(y) * out.w + x] = acc;
        }
    return out;
}

struct SsimTerms {
    double luminance = 0.0;
    double contrast_structure = 0.0;
};

inline SsimTerms ssim_pass(const Plane& a, const Plane& b) {
    constexpr double kC1 = 0.01 * 0.01;  // (K1*L)^2, L = 1
    constexpr double kC2 = 0.03 * 0.03;

    Plane mu_a = blur11(a), mu_b = blur11(b);
    Plane aa = a, bb = b, ab = a;
    for (size_t i = 0; i < a.v.size(); ++i) {
        aa.v[i] = a.v[i] * a.v[i];
        bb.v[i] = b.v[i] * b.v[i];
        ab.v[i] = a.v[i] * b.v[i];
    }
    Plane m_aa = blur11(aa), m_bb = blur11(bb), m_ab = blur11(ab);

    double lum = 0.0, cs = 0.0;
    for (size_t i = 0; i < mu_a.v.size(); ++i) {
        double ma = mu_a.v[i], mb = mu_b.v[i];
        double va = m_aa.v[i] - ma * ma;
        double vb = m_bb.v[i] - mb * mb;
        double cov = m_ab.v[i] - ma * mb;
        lum += (2.0 * ma * mb + kC1) / (ma * ma + mb * mb + kC1);
        cs += (2.0 * cov + kC2) / (va + vb + kC2);
    }
    double n = static_cast<double>(mu_a.v.size());
    return {lum / n, cs / n};
}

inline const std::array<double, 5>& msssim_weights() {
    static const std::array<double, 5> kW = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    return kW;
}

}  // namespace detail

// Five-scale MS-SSIM (Gaussian 11x11 sigma 1.5, K1=0.01, K2=0.03, L=1,
// dyadic mean-pool between scales, luminance term at the coarsest scale
// only). Images too small for five scales use as many as fit, with the scale
// weights renormalized. Channels are scored independently and averaged.
inline double ms_ssim(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        fail(Err::Dimension, "image shape mismatch");
    int scales = 0;
    for (int m = 0; m < 5; ++m) {
        if (std::min(a.width, a.height) >> m < 11) break;
        ++scales;
    }
    if (scales == 0) fail(Err::Dimension, "image too small for an 11x11 window");

    const auto& w = detail::msssim_weights();
    double wsum = 0.0;
    for (int m = 0; m < scales; ++m) wsum += w[m];

    double total = 0.0;
    for (int c = 0; c < a.channels; ++c) {
        detail::Plane pa = detail::channel_plane(a, c);
        detail::Plane pb = detail::channel_plane(b, c);
        double score = 1.0;
        for (int m = 0; m < scales; ++m) {
            if (m > 0) {
                pa = detail::halve(pa);
                pb = detail::halve(pb);
            }
            detail::SsimTerms terms = detail::ssim_pass(pa, pb);
            double weight = w[m] / wsum;
            double cs = std::max(terms.contrast_structure, 1e-12);
            score *= std::pow(cs, weight);
            if (m == scales - 1) score *= std::pow(std::max(terms.luminance, 1e-12), weight);
        }
        total += score;
    }
    return total / a.channels;
}

// Rate accounting for one coded image: raw size, token size without entropy
// coding, entropy-coded size, and the multiplicative ratio decomposition
// raw/token * token/payload = raw/payload. Ratios use payload bits only so
// the identity is exact; header overhead shows up in bpp_total.
struct RateReport {
    uint64_t n_tokens = 0;
    uint32_t codebook_size = 0;
    uint64_t raw_bits = 0;
    uint64_t token_raw_bits = 0;
    double ideal_bits = 0.0;
    uint64_t payload_bits = 0;
    uint64_t header_bits = 0;
    double bpp_payload = 0.0;
    double bpp_total = 0.0;
    double tokenizer_ratio = 0.0;
    double ar_ratio = 0.0;
    double overall_ratio = 0.0;
    std::vector<double> per_token_bits;
};

inline RateReport compression_ratios(uint32_t width, uint32_t height, uint32_t channels,
                                     uint64_t n_tokens, uint32_t codebook_size,
                                     uint64_t payload_bits) {
    RateReport r;
    r.n_tokens = n_tokens;
    r.codebook_size = codebook_size;
    r.raw_bits = static_cast<uint64_t>(width) * height * channels * 8;
    r.token_raw_bits = n_tokens * ceil_log2(codebook_size);
    r.payload_bits = payload_bits;
    double pixels = static_cast<double>(width) * height;
    r.bpp_payload = static_cast<double>(payload_bits) / pixels;
    r.bpp_total = r.bpp_payload;  // callers with a header add it separately
    r.tokenizer_ratio = static_cast<double>(r.raw_bits) / static_cast<double>(r.token_raw_bits);
    if (payload_bits > 0) {
        r.ar_ratio = static_cast<double>(r.token_raw_bits) / static_cast<double>(payload_bits);
        r.overall_ratio = static_cast<double>(r.raw_bits) / static_cast<double>(payload_bits);
    }
    return r;
}

}  // namespace aric
