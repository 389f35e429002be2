#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "aric/common.hpp"

namespace aric {

// Fixed-point probability scale shared by the quantizer and the coder.
inline constexpr int kProbBits = 22;
inline constexpr uint32_t kProbScale = 1u << kProbBits;  // T
inline constexpr uint32_t kMaxAlphabet = 1u << 18;       // min-freq-1 feasible within T

// Integer frequency table over the alphabet: every symbol keeps at least one
// unit, the total is exactly T, and cum[s] prefixes the frequencies.
struct FreqTable {
    std::vector<uint32_t> freq;  // size V
    std::vector<uint32_t> cum;   // size V+1, cum[V] == kProbScale

    uint32_t alphabet() const { return static_cast<uint32_t>(freq.size()); }
};

namespace detail {

struct QuantScratch {
    std::vector<double> rem;
    std::vector<uint32_t> idx;
};

}  // namespace detail

// Maps a strictly positive distribution onto a FreqTable: f0 = max(1,
// floor(p*T)), then the unit deficit/surplus is settled on the symbols with
// the largest fractional remainders (ties to the lower symbol index).
inline void quantize_into(std::span<const double> dist, FreqTable& out,
                          detail::QuantScratch& scratch) {
    const size_t v = dist.size();
    if (v < 1 || v > kMaxAlphabet) fail(Err::Usage, "alphabet size out of range for quantizer");
    out.freq.resize(v);
    out.cum.resize(v + 1);
    scratch.rem.resize(v);

    const double t = static_cast<double>(kProbScale);
    int64_t sum = 0;
    for (size_t s = 0; s < v; ++s) {
        double scaled = dist[s] * t;
        double fl = std::floor(scaled);
        scratch.rem[s] = scaled - fl;
        uint32_t f = fl < 1.0 ? 1u : static_cast<uint32_t>(fl);
        if (f > kProbScale) f = kProbScale;
        out.freq[s] = f;
        sum += f;
    }

    int64_t delta = static_cast<int64_t>(kProbScale) - sum;
    if (delta != 0) {
        scratch.idx.resize(v);
        std::iota(scratch.idx.begin(), scratch.idx.end(), 0u);
        auto by_remainder = [&](uint32_t a, uint32_t b) {
            if (scratch.rem[a] != scratch.rem[b]) return scratch.rem[a] > scratch.rem[b];
            return a < b;
        };
        if (delta > 0) {
            size_t add = static_cast<size_t>(delta);  // delta < V: each floor loses < 1 unit
            std::nth_element(scratch.idx.begin(), scratch.idx.begin() + add, scratch.idx.end(),
                             by_remainder);
            for (size_t i = 0; i < add; ++i) ++out.freq[scratch.idx[i]];
        } else {
            std::sort(scratch.idx.begin(), scratch.idx.end(), by_remainder);
            while (delta < 0) {
                bool any = false;
                for (size_t i = 0; i < v && delta < 0; ++i) {
                    uint32_t s = scratch.idx[i];
                    if (out.freq[s] > 1) {
                        --out.freq[s];
                        ++delta;
                        any = true;
                    }
                }
                if (!any) fail(Err::Usage, "cannot fit distribution in frequency budget");
            }
        }
    }

    uint32_t c = 0;
    for (size_t s = 0; s < v; ++s) {
        out.cum[s] = c;
        c += out.freq[s];
    }
    out.cum[v] = c;
}

inline FreqTable quantize(std::span<const double> dist) {
    FreqTable t;
    detail::QuantScratch scratch;
    quantize_into(dist, t, scratch);
    return t;
}

// Self-information of a symbol under the quantized table, in bits.
inline double self_info_bits(const FreqTable& t, uint32_t s) {
    return kProbBits - std::log2(static_cast<double>(t.freq[s]));
}

// Byte-wise range coder. A 64-bit range with renormalization at 2^56 keeps
// the per-symbol truncation loss below 2^-34 bits, so the payload stays
// within the 64-bit flush of the ideal code length. Carries propagate
// directly into the pending output buffer. Termination flushes the 8 bytes
// of low; an empty stream is exactly those 8 bytes.
class RangeEncoder {
  public:
    void encode(const FreqTable& t, uint32_t symbol) {
        const uint64_t r = range_ >> kProbBits;
        low_ += static_cast<unsigned __int128>(r) * t.cum[symbol];
        if (static_cast<uint64_t>(low_ >> 64)) {
            propagate_carry();
            low_ &= kMask64;
        }
        range_ = r * t.freq[symbol];
        while (range_ < kRenorm) {
            shift_low();
            range_ <<= 8;
        }
    }

    std::vector<uint8_t> finish() {
        for (int i = 0; i < 8; ++i) shift_low();
        return std::move(out_);
    }

    size_t bytes_pending() const { return out_.size(); }

  private:
    static constexpr uint64_t kRenorm = 1ull << 56;
    static constexpr unsigned __int128 kMask64 = ~static_cast<uint64_t>(0);
    static constexpr uint64_t kMask56 = (1ull << 56) - 1;

    void shift_low() {
        out_.push_back(static_cast<uint8_t>(static_cast<uint64_t>(low_) >> 56));
        low_ = static_cast<unsigned __int128>(static_cast<uint64_t>(low_) & kMask56) << 8;
    }

    void propagate_carry() {
        // ripple +1 back through the buffered bytes; a non-0xFF byte always
        // exists because the coded value cannot exceed the initial interval
        for (size_t i = out_.size(); i-- > 0;) {
            if (++out_[i] != 0) return;
        }
        fail(Err::Corruption, "range coder carry overflow");
    }

    std::vector<uint8_t> out_;
    unsigned __int128 low_ = 0;
    uint64_t range_ = ~0ull;
};

class RangeDecoder {
  public:
    explicit RangeDecoder(std::span<const uint8_t> payload) : payload_(payload) {
        if (payload_.size() < 8) fail(Err::Corruption, "payload exhausted");
        for (int i = 0; i < 8; ++i) code_ = (code_ << 8) | payload_[pos_++];
    }

    uint32_t decode(const FreqTable& t) {
        const uint64_t r = range_ >> kProbBits;
        uint64_t dv = code_ / r;
        if (dv >= kProbScale) dv = kProbScale - 1;  // dead zone only on corrupt input
        const uint32_t target = static_cast<uint32_t>(dv);
        auto it = std::upper_bound(t.cum.begin(), t.cum.end(), target);
        const uint32_t symbol = static_cast<uint32_t>(it - t.cum.begin()) - 1;
        code_ -= r * t.cum[symbol];
        range_ = r * t.freq[symbol];
        while (range_ < kRenorm) {
            if (pos_ >= payload_.size()) fail(Err::Corruption, "payload exhausted");
            code_ = (code_ << 8) | payload_[pos_++];
            range_ <<= 8;
        }
        return symbol;
    }

    size_t bytes_consumed() const { return pos_; }

  private:
    static constexpr uint64_t kRenorm = 1ull << 56;

    std::span<const uint8_t> payload_;
    size_t pos_ = 0;
    uint64_t code_ = 0;
    uint64_t range_ = ~0ull;
};

// Convenience drivers used by tests and harnesses. TableProvider is called
// with the step index and must be a pure function of the symbols coded
// before that step (the adaptive-model contract).
template <typename TableProvider>
inline std::vector<uint8_t> encode_symbols(std::span<const uint32_t> symbols,
                                           TableProvider&& tables) {
    RangeEncoder enc;
    for (size_t i = 0; i < symbols.size(); ++i) enc.encode(tables(i), symbols[i]);
    return enc.finish();
}

template <typename TableProvider>
inline std::vector<uint32_t> decode_symbols(std::span<const uint8_t> payload, size_t n,
                                            TableProvider&& tables) {
    RangeDecoder dec(payload);
    std::vector<uint32_t> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = dec.decode(tables(i));
    return out;
}

template <typename TableProvider>
inline double ideal_bits(std::span<const uint32_t> symbols, TableProvider&& tables) {
    double bits = 0.0;
    for (size_t i = 0; i < symbols.size(); ++i) bits += self_info_bits(tables(i), symbols[i]);
    return bits;
}

}  // namespace aric
