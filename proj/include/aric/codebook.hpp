#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aric/common.hpp"
#include "aric/image.hpp"
#include "aric/kmeans.hpp"

namespace aric {

inline constexpr uint32_t kMaxCodebookSize = 1u << 18;

// VQ dictionary over patch vectors. Entries are stored as float32 (the file
// representation); `vec` mirrors them widened to double for distance math, so
// a trained codebook and its reloaded copy quantize identically. `id` is
// FNV-1a-64 over the little-endian float payload bytes.
struct Codebook {
    uint32_t size = 0;         // V
    uint32_t dim = 0;          // patch_size^2 * channels
    uint8_t patch_size = 0;
    uint8_t channels = 0;
    bool zero_reserved = false;  // entry 0 pinned to the zero vector (multi-scale mode)
    std::vector<float> storage;  // V * dim
    std::vector<double> vec;     // widened mirror of storage
    uint64_t id = 0;

    const double* entry(uint32_t v) const { return vec.data() + static_cast<size_t>(v) * dim; }

    static Codebook from_vectors(std::vector<float> vectors, uint32_t v, uint32_t d,
                                 uint8_t patch, uint8_t ch, bool zero_res) {
        if (v < 2 || v > kMaxCodebookSize) fail(Err::Format, "codebook size out of range");
        if (d != static_cast<uint32_t>(patch) * patch * ch) fail(Err::Format, "codebook dim mismatch");
        if (vectors.size() != static_cast<size_t>(v) * d) fail(Err::Format, "codebook payload size mismatch");
        for (float f : vectors)
            if (!std::isfinite(f)) fail(Err::Format, "codebook vector not finite");
        if (zero_res)
            for (uint32_t f = 0; f < d; ++f)
                if (vectors[f] != 0.0f) fail(Err::Format, "entry 0 must be the zero vector");
        Codebook cb;
        cb.size = v;
        cb.dim = d;
        cb.patch_size = patch;
        cb.channels = ch;
        cb.zero_reserved = zero_res;
        cb.storage = std::move(vectors);
        cb.vec.assign(cb.storage.begin(), cb.storage.end());
        cb.id = cb.hash_payload();
        return cb;
    }

    uint64_t hash_payload() const {
        ByteWriter w;
        for (float f : storage) w.f32(f);
        return fnv1a64(w.data());
    }

    std::vector<uint8_t> serialize() const {
        ByteWriter w;
        w.u8('A');
        w.u8('R');
        w.u8('C');
        w.u8('B');
        w.u8(0x01);
        w.u32(size);
        w.u32(dim);
        w.u8(patch_size);
        w.u8(channels);
        w.u8(zero_reserved ? 0x01 : 0x00);
        for (float f : storage) w.f32(f);
        return w.take();
    }

    static Codebook deserialize(std::span<const uint8_t> bytes) {
        ByteReader r(bytes);
        if (bytes.size() < 4 || bytes[0] != 'A' || bytes[1] != 'R' || bytes[2] != 'C' ||
            bytes[3] != 'B')
            fail(Err::Format, "bad codebook magic");
        r.bytes(4);
        uint8_t version = r.u8();
        if (version != 0x01) fail(Err::Format, "unsupported codebook version");
        uint32_t v = r.u32();
        uint32_t d = r.u32();
        uint8_t patch = r.u8();
        uint8_t ch = r.u8();
        uint8_t flags = r.u8();
        if (v < 2 || v > kMaxCodebookSize) fail(Err::Format, "codebook size out of range");
        if (r.remaining() != static_cast<size_t>(v) * d * 4)
            fail(Err::Format, "codebook payload size mismatch");
        std::vector<float> vectors(static_cast<size_t>(v) * d);
        for (float& f : vectors) f = r.f32();
        return from_vectors(std::move(vectors), v, d, patch, ch, (flags & 0x01) != 0);
    }

    void save(const std::string& path) const {
        auto bytes = serialize();
        write_file(path, bytes);
    }
    static Codebook load(const std::string& path) { return deserialize(read_file(path)); }
};

// Trains a codebook on patch feature vectors. With zero_reserved, k-means
// fits V-1 centroids and the zero vector is prepended at index 0.
inline Codebook train_codebook(std::span<const double> features, size_t n_vectors, uint32_t v,
                               uint8_t patch, uint8_t ch, uint64_t seed, bool zero_reserved) {
    if (v < 2 || v > kMaxCodebookSize) fail(Err::Usage, "codebook size must be in [2, 2^18]");
    uint32_t d = static_cast<uint32_t>(patch) * patch * ch;
    uint32_t k = zero_reserved ? v - 1 : v;
    KMeansResult km = kmeans(features, n_vectors, d, k, seed);

    std::vector<float> vectors;
    vectors.reserve(static_cast<size_t>(v) * d);
    if (zero_reserved) vectors.insert(vectors.end(), d, 0.0f);
    for (double c : km.centroids) vectors.push_back(static_cast<float>(c));
    return Codebook::from_vectors(std::move(vectors), v, d, patch, ch, zero_reserved);
}

}  // namespace aric
