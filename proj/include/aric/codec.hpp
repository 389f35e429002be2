#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "aric/bitstream.hpp"
#include "aric/codebook.hpp"
#include "aric/common.hpp"
#include "aric/image.hpp"
#include "aric/metrics.hpp"
#include "aric/prob_model.hpp"
#include "aric/range_coder.hpp"
#include "aric/tokenizer.hpp"

namespace aric {

struct EncodeResult {
    std::vector<uint8_t> bytes;
    RateReport report;
};

// Optional instrumentation for encoder/decoder symmetry checks.
struct CodingTrace {
    uint64_t predicts = 0;
    uint64_t updates = 0;
    uint64_t model_digest = 0;
};

namespace detail {

// Neighborhood of position (x, y) in scale k, built from already-coded
// tokens only: west and north live in the current grid, the parent in the
// previous (coarser) one. Mode 0 is the k = 0 case with no coarser grid.
inline Context make_context(const std::vector<TokenGrid>& grids, size_t k, int x, int y,
                            uint32_t sentinel) {
    const TokenGrid& g = grids[k];
    Context ctx;
    ctx.scale_index = static_cast<uint32_t>(k);
    ctx.west = x > 0 ? g.at(x - 1, y) : sentinel;
    ctx.north = y > 0 ? g.at(x, y - 1) : sentinel;
    if (k == 0) {
        ctx.parent = sentinel;
    } else {
        const TokenGrid& p = grids[k - 1];
        ctx.parent = p.at(x / (g.tw / p.tw), y / (g.th / p.th));
    }
    return ctx;
}

inline void fill_trace(CodingTrace* trace, const Model& model) {
    if (!trace) return;
    trace->predicts = model.predict_calls();
    trace->updates = model.update_calls();
    trace->model_digest = model.state_digest();
}

inline Image crop_to_patch_multiple(const Image& img, int patch) {
    int cw = (img.width / patch) * patch;
    int ch = (img.height / patch) * patch;
    if (cw == 0 || ch == 0) fail(Err::Dimension, "image smaller than one patch");
    if (cw == img.width && ch == img.height) return img;
    return center_crop(img, cw, ch);
}

}  // namespace detail

// Tokenize, then code every token with the adaptive model: predict ->
// quantize -> range-code -> update, in raster order (mode 0) or scales
// coarse-to-fine with raster order inside each scale (mode 1).
inline EncodeResult encode_image(const Image& img, const Codebook& cb, int mode, int model_id,
                                 CodingTrace* trace = nullptr) {
    if (mode != 0 && mode != 1) fail(Err::Usage, "mode must be 0 or 1");
    if (!valid_model_id(model_id)) fail(Err::Usage, "unknown model id");
    if (img.channels != cb.channels) fail(Err::Dimension, "image/codebook channel mismatch");

    Image cropped = detail::crop_to_patch_multiple(img, cb.patch_size);
    FeatureMap features = extract_features(cropped, cb.patch_size);

    std::vector<TokenGrid> grids;
    Header header;
    header.mode = static_cast<uint8_t>(mode);
    header.width = static_cast<uint32_t>(cropped.width);
    header.height = static_cast<uint32_t>(cropped.height);
    header.patch_size = cb.patch_size;
    header.channels = cb.channels;
    header.model_id = static_cast<uint8_t>(model_id);
    header.codebook_id = cb.id;

    if (mode == 0) {
        grids.push_back(tokenize(features, cb));
    } else {
        if (features.tw > 0xFFFF || features.th > 0xFFFF)
            fail(Err::Dimension, "token grid too large for the scale list");
        std::vector<ScaleRes> plan = default_scale_plan(features.tw, features.th);
        ScalePyramid pyr = tokenize_multiscale(features, cb, plan);
        grids = std::move(pyr.scales);
        for (const TokenGrid& g : grids)
            header.scale_resolutions.emplace_back(static_cast<uint16_t>(g.tw),
                                                  static_cast<uint16_t>(g.th));
    }

    Model model(cb.size, model_id);
    RangeEncoder enc;
    detail::QuantScratch scratch;
    FreqTable table;
    std::vector<double> dist(cb.size);

    RateReport report;
    for (size_t k = 0; k < grids.size(); ++k) {
        const TokenGrid& g = grids[k];
        for (int y = 0; y < g.th; ++y) {
            for (int x = 0; x < g.tw; ++x) {
                Context ctx = detail::make_context(grids, k, x, y, model.sentinel());
                model.predict(ctx, dist);
                quantize_into(dist, table, scratch);
                uint32_t sym = g.at(x, y);
                enc.encode(table, sym);
                report.per_token_bits.push_back(self_info_bits(table, sym));
                model.update(ctx, sym);
            }
        }
    }
    detail::fill_trace(trace, model);

    std::vector<uint8_t> payload = enc.finish();
    std::vector<uint8_t> bytes = write_stream(header, payload);

    double ideal = 0.0;
    for (double b : report.per_token_bits) ideal += b;
    auto per_token = std::move(report.per_token_bits);
    report = compression_ratios(header.width, header.height, header.channels, per_token.size(),
                                cb.size, payload.size() * 8);
    report.per_token_bits = std::move(per_token);
    report.ideal_bits = ideal;
    report.header_bits = (bytes.size() - payload.size()) * 8;
    report.bpp_total = static_cast<double>(report.payload_bits + report.header_bits) /
                       (static_cast<double>(header.width) * header.height);
    return {std::move(bytes), std::move(report)};
}

inline Image decode_image(std::span<const uint8_t> bytes, const Codebook& cb,
                          CodingTrace* trace = nullptr) {
    auto [header, payload] = parse_stream(bytes);
    if (header.codebook_id != cb.id) fail(Err::HashMismatch, "codebook hash mismatch");
    if (header.patch_size != cb.patch_size || header.channels != cb.channels)
        fail(Err::Format, "codebook geometry mismatch");
    const int tw = static_cast<int>(header.width / header.patch_size);
    const int th = static_cast<int>(header.height / header.patch_size);

    std::vector<TokenGrid> grids;
    if (header.mode == 0) {
        grids.push_back({tw, th, std::vector<uint32_t>(static_cast<size_t>(tw) * th, 0)});
    } else {
        if (!cb.zero_reserved) fail(Err::Format, "multi-scale stream needs a zero-reserved codebook");
        for (const auto& [stw, sth] : header.scale_resolutions)
            grids.push_back(
                {stw, sth, std::vector<uint32_t>(static_cast<size_t>(stw) * sth, 0)});
    }

    Model model(cb.size, header.model_id);
    RangeDecoder dec(payload);
    detail::QuantScratch scratch;
    FreqTable table;
    std::vector<double> dist(cb.size);

    for (size_t k = 0; k < grids.size(); ++k) {
        TokenGrid& g = grids[k];
        for (int y = 0; y < g.th; ++y) {
            for (int x = 0; x < g.tw; ++x) {
                Context ctx = detail::make_context(grids, k, x, y, model.sentinel());
                model.predict(ctx, dist);
                quantize_into(dist, table, scratch);
                uint32_t sym = dec.decode(table);
                g.at(x, y) = sym;
                model.update(ctx, sym);
            }
        }
    }
    detail::fill_trace(trace, model);

    if (header.mode == 0) return detokenize(grids[0], cb);
    ScalePyramid pyr;
    pyr.scales = std::move(grids);
    return detokenize_multiscale(pyr, cb);
}

// The coding model run as a generator: tokens are drawn from the tempered
// prediction by inverse CDF on the quantized table, with the same update
// discipline as coding, then detokenized.
inline Image sample_unconditional(const Codebook& cb, int mode, int model_id, int width,
                                  int height, uint64_t seed, double temperature) {
    if (mode != 0 && mode != 1) fail(Err::Usage, "mode must be 0 or 1");
    if (!valid_model_id(model_id)) fail(Err::Usage, "unknown model id");
    if (!(temperature > 0.0)) fail(Err::Usage, "temperature must be positive");
    if (width < 1 || height < 1 || width % cb.patch_size != 0 || height % cb.patch_size != 0)
        fail(Err::Dimension, "sample size must be a positive patch multiple");

    const int tw = width / cb.patch_size;
    const int th = height / cb.patch_size;
    std::vector<TokenGrid> grids;
    if (mode == 0) {
        grids.push_back({tw, th, std::vector<uint32_t>(static_cast<size_t>(tw) * th, 0)});
    } else {
        if (!cb.zero_reserved) fail(Err::Usage, "multi-scale sampling needs a zero-reserved codebook");
        for (const ScaleRes& r : default_scale_plan(tw, th))
            grids.push_back(
                {r.tw, r.th, std::vector<uint32_t>(static_cast<size_t>(r.tw) * r.th, 0)});
    }

    Model model(cb.size, model_id);
    SplitMix64 rng(seed);
    detail::QuantScratch scratch;
    FreqTable table;
    std::vector<double> dist(cb.size), sharpened(cb.size);

    for (size_t k = 0; k < grids.size(); ++k) {
        TokenGrid& g = grids[k];
        for (int y = 0; y < g.th; ++y) {
            for (int x = 0; x < g.tw; ++x) {
                Context ctx = detail::make_context(grids, k, x, y, model.sentinel());
                model.predict(ctx, dist);
                const std::vector<double>* p = &dist;
                if (temperature != 1.0) {
                    double peak = -std::numeric_limits<double>::infinity();
                    for (uint32_t s = 0; s < cb.size; ++s) {
                        sharpened[s] = std::log(dist[s]) / temperature;
                        peak = std::max(peak, sharpened[s]);
                    }
                    double sum = 0.0;
                    for (uint32_t s = 0; s < cb.size; ++s) {
                        sharpened[s] = std::exp(sharpened[s] - peak);
                        sum += sharpened[s];
                    }
                    for (uint32_t s = 0; s < cb.size; ++s) sharpened[s] /= sum;
                    p = &sharpened;
                }
                quantize_into(*p, table, scratch);
                uint32_t target = static_cast<uint32_t>(rng.next() >> (64 - kProbBits));
                auto it = std::upper_bound(table.cum.begin(), table.cum.end(), target);
                uint32_t sym = static_cast<uint32_t>(it - table.cum.begin()) - 1;
                g.at(x, y) = sym;
                model.update(ctx, sym);
            }
        }
    }

    if (mode == 0) return detokenize(grids[0], cb);
    ScalePyramid pyr;
    pyr.scales = std::move(grids);
    return detokenize_multiscale(pyr, cb);
}

}  // namespace aric
