#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "aric/common.hpp"

namespace aric {

// Registry of context models referenced by the bitstream header.
inline constexpr int kModelUniform = 0;         // fixed 1/V, no adaptation
inline constexpr int kModelRaster = 1;          // orders (north,west) -> (west) -> ()
inline constexpr int kModelScaleParent = 2;     // orders (parent) -> ()
inline constexpr int kModelScaleParentWest = 3; // orders (parent,west) -> (parent) -> ()

inline bool valid_model_id(int id) { return id >= 0 && id <= 3; }

// Neighborhood of the token being coded. Missing neighbors (grid borders,
// scale 1 parents, single-scale parents) carry the sentinel value V, which
// keeps every context key total.
struct Context {
    uint32_t north = 0;
    uint32_t west = 0;
    uint32_t parent = 0;
    uint32_t scale_index = 0;
};

// Adaptive context-mixing model: method-C escape blending over a fixed order
// ladder, no exclusions, full updates at every order. Counts are kept per
// context in symbol-sorted sparse form so prediction sums are reproducible
// bit-for-bit across runs and platforms. Encoder and decoder instances fed
// the same token sequence stay state-identical, which is what makes the
// adaptive coding loop symmetric.
class Model {
  public:
    Model(uint32_t alphabet_size, int model_id) : v_(alphabet_size), id_(model_id) {
        if (!valid_model_id(model_id)) fail(Err::Usage, "unknown model id");
        if (v_ < 2) fail(Err::Usage, "alphabet too small");
        levels_.resize(order_count());
    }

    uint32_t alphabet() const { return v_; }
    uint32_t sentinel() const { return v_; }
    int id() const { return id_; }

    // Blended distribution over the alphabet. Strictly positive, sums to 1
    // within 1e-12: each order contributes count/(n+d) of the escape mass
    // accumulated so far, d/(n+d) flows down, and the leftover lands on the
    // uniform floor.
    void predict(const Context& ctx, std::span<double> out) const {
        std::fill(out.begin(), out.end(), 0.0);
        double escape = 1.0;
        if (id_ != kModelUniform) {
            std::array<uint64_t, 3> keys;
            const int orders = order_keys(ctx, keys);
            for (int o = 0; o < orders; ++o) {
                auto it = levels_[o].find(keys[o]);
                if (it == levels_[o].end() || it->second.total == 0) continue;
                const Stats& st = it->second;
                const double denom = static_cast<double>(st.total) + st.counts.size();
                const double w = escape / denom;
                for (const auto& [sym, cnt] : st.counts) out[sym] += w * cnt;
                escape *= static_cast<double>(st.counts.size()) / denom;
            }
        }
        const double floor = escape / v_;
        for (uint32_t s = 0; s < v_; ++s) out[s] += floor;
        ++predict_calls_;
    }

    std::vector<double> predict(const Context& ctx) const {
        std::vector<double> out(v_);
        predict(ctx, out);
        return out;
    }

    // Count increment at every order; a context whose total exceeds 2^16 has
    // its counts halved (floor) with zeros dropped.
    void update(const Context& ctx, uint32_t symbol) {
        if (symbol >= v_) fail(Err::Corruption, "symbol out of range");
        ++update_calls_;
        if (id_ == kModelUniform) return;
        std::array<uint64_t, 3> keys;
        const int orders = order_keys(ctx, keys);
        for (int o = 0; o < orders; ++o) {
            Stats& st = levels_[o][keys[o]];
            auto it = std::lower_bound(st.counts.begin(), st.counts.end(), symbol,
                                       [](const auto& p, uint32_t s) { return p.first < s; });
            if (it != st.counts.end() && it->first == symbol)
                ++it->second;
            else
                st.counts.insert(it, {symbol, 1});
            ++st.total;
            if (st.total > kRescaleLimit) rescale(st);
        }
    }

    uint64_t predict_calls() const { return predict_calls_; }
    uint64_t update_calls() const { return update_calls_; }

    // Order-independent digest of the full count state; used to check
    // encoder/decoder symmetry.
    uint64_t state_digest() const {
        std::vector<uint64_t> items;
        for (size_t o = 0; o < levels_.size(); ++o)
            for (const auto& [key, st] : levels_[o])
                for (const auto& [sym, cnt] : st.counts)
                    items.push_back((static_cast<uint64_t>(o) << 60) ^ (key * 0x9E3779B97F4A7C15ull) ^
                                    (static_cast<uint64_t>(sym) << 32) ^ cnt);
        std::sort(items.begin(), items.end());
        uint64_t h = kFnvOffset;
        for (uint64_t x : items) {
            for (int i = 0; i < 8; ++i) {
                h ^= static_cast<uint8_t>(x >> (8 * i));
                h *= kFnvPrime;
            }
        }
        return h;
    }

  private:
    static constexpr uint32_t kRescaleLimit = 1u << 16;

    struct Stats {
        std::vector<std::pair<uint32_t, uint32_t>> counts;  // sorted by symbol
        uint32_t total = 0;
    };

    int order_count() const {
        switch (id_) {
            case kModelRaster: return 3;
            case kModelScaleParent: return 2;
            case kModelScaleParentWest: return 3;
            default: return 0;
        }
    }

    // Highest order first; the last key is always the order-0 context ().
    int order_keys(const Context& ctx, std::array<uint64_t, 3>& keys) const {
        const uint64_t base = v_ + 1;  // ids plus sentinel
        switch (id_) {
            case kModelRaster:
                keys[0] = static_cast<uint64_t>(ctx.north) * base + ctx.west;
                keys[1] = ctx.west;
                keys[2] = 0;
                return 3;
            case kModelScaleParent:
                keys[0] = ctx.parent;
                keys[1] = 0;
                return 2;
            case kModelScaleParentWest:
                keys[0] = static_cast<uint64_t>(ctx.parent) * base + ctx.west;
                keys[1] = ctx.parent;
                keys[2] = 0;
                return 3;
            default: return 0;
        }
    }

    static void rescale(Stats& st) {
        uint32_t total = 0;
        size_t w = 0;
        for (size_t i = 0; i < st.counts.size(); ++i) {
            uint32_t c = st.counts[i].second >> 1;
            if (c) {
                st.counts[w] = {st.counts[i].first, c};
                total += c;
                ++w;
            }
        }
        st.counts.resize(w);
        st.total = total;
    }

    uint32_t v_;
    int id_;
    std::vector<std::unordered_map<uint64_t, Stats>> levels_;
    mutable uint64_t predict_calls_ = 0;
    uint64_t update_calls_ = 0;
};

inline Model uniform_model(uint32_t alphabet_size) { return Model(alphabet_size, kModelUniform); }

}  // namespace aric
