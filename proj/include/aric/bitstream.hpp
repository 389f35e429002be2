#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "aric/common.hpp"

namespace aric {

// Self-describing container for one coded image. The codebook itself travels
// out of band (shared dictionary) and is referenced by its 64-bit hash.
// Layout, little-endian, in field order:
//   magic "ARIC" | version u8 | mode u8 | width u32 | height u32 |
//   patch u8 | channels u8 | model_id u8 | num_scales u8 |
//   num_scales x (tw u16, th u16) | codebook_id u64 | payload_len u32 |
//   payload bytes
struct Header {
    uint8_t version = 1;
    uint8_t mode = 0;  // 0 single-scale, 1 multi-scale
    uint32_t width = 0;
    uint32_t height = 0;
    uint8_t patch_size = 0;
    uint8_t channels = 0;
    uint8_t model_id = 0;
    std::vector<std::pair<uint16_t, uint16_t>> scale_resolutions;  // empty in mode 0
    uint64_t codebook_id = 0;
    uint32_t payload_len = 0;

    size_t byte_size() const { return 30 + 4 * scale_resolutions.size(); }
};

namespace detail {

inline void validate_header(const Header& h) {
    if (h.version != 1) fail(Err::Format, "unsupported bitstream version");
    if (h.mode > 1) fail(Err::Format, "unknown coding mode");
    if (h.width == 0 || h.height == 0) fail(Err::Format, "bad image dimensions");
    if (h.patch_size == 0) fail(Err::Format, "bad patch size");
    if (h.channels != 1 && h.channels != 3) fail(Err::Format, "bad channel count");
    if (h.model_id > 3) fail(Err::Format, "unknown model id");
    if (h.width % h.patch_size != 0 || h.height % h.patch_size != 0)
        fail(Err::Format, "dimensions not divisible by patch size");
    if (h.mode == 0) {
        if (!h.scale_resolutions.empty()) fail(Err::Format, "mode 0 carries no scale list");
    } else {
        if (h.scale_resolutions.empty()) fail(Err::Format, "mode 1 requires at least one scale");
        const uint32_t tw = h.width / h.patch_size, th = h.height / h.patch_size;
        const auto& last = h.scale_resolutions.back();
        if (last.first != tw || last.second != th)
            fail(Err::Format, "final scale must match the token resolution");
        for (size_t k = 0; k < h.scale_resolutions.size(); ++k) {
            const auto& [stw, sth] = h.scale_resolutions[k];
            if (stw == 0 || sth == 0 || tw % stw != 0 || th % sth != 0 || tw / stw != th / sth)
                fail(Err::Format, "invalid scale resolution");
            if (k > 0 && (stw <= h.scale_resolutions[k - 1].first ||
                          sth <= h.scale_resolutions[k - 1].second))
                fail(Err::Format, "scale resolutions must be strictly increasing");
        }
    }
}

}  // namespace detail

inline std::vector<uint8_t> write_stream(const Header& h, std::span<const uint8_t> payload) {
    Header checked = h;
    checked.payload_len = static_cast<uint32_t>(payload.size());
    if (checked.scale_resolutions.size() > 255) fail(Err::Format, "too many scales");
    detail::validate_header(checked);

    ByteWriter w;
    w.u8('A');
    w.u8('R');
    w.u8('I');
    w.u8('C');
    w.u8(checked.version);
    w.u8(checked.mode);
    w.u32(checked.width);
    w.u32(checked.height);
    w.u8(checked.patch_size);
    w.u8(checked.channels);
    w.u8(checked.model_id);
    w.u8(static_cast<uint8_t>(checked.scale_resolutions.size()));
    for (const auto& [tw, th] : checked.scale_resolutions) {
        w.u16(tw);
        w.u16(th);
    }
    w.u64(checked.codebook_id);
    w.u32(checked.payload_len);
    w.bytes(payload);
    return w.take();
}

inline std::pair<Header, std::vector<uint8_t>> parse_stream(std::span<const uint8_t> bytes) {
    if (bytes.size() < 4 || bytes[0] != 'A' || bytes[1] != 'R' || bytes[2] != 'I' ||
        bytes[3] != 'C')
        fail(Err::Format, "bad bitstream magic");
    ByteReader r(bytes);
    r.bytes(4);
    Header h;
    h.version = r.u8();
    if (h.version != 1) fail(Err::Format, "unsupported bitstream version");
    h.mode = r.u8();
    h.width = r.u32();
    h.height = r.u32();
    h.patch_size = r.u8();
    h.channels = r.u8();
    h.model_id = r.u8();
    uint8_t num_scales = r.u8();
    h.scale_resolutions.reserve(num_scales);
    for (int k = 0; k < num_scales; ++k) {
        uint16_t tw = r.u16();
        uint16_t th = r.u16();
        h.scale_resolutions.emplace_back(tw, th);
    }
    h.codebook_id = r.u64();
    h.payload_len = r.u32();
    detail::validate_header(h);
    if (r.remaining() < h.payload_len) fail(Err::Corruption, "truncated payload");
    if (r.remaining() > h.payload_len) fail(Err::Format, "trailing data after payload");
    auto span = r.bytes(h.payload_len);
    return {std::move(h), std::vector<uint8_t>(span.begin(), span.end())};
}

}  // namespace aric
