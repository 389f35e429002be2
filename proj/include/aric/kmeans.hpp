#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "aric/common.hpp"

namespace aric {

struct KMeansResult {
    std::vector<double> centroids;    // k * dim, row-major
    std::vector<double> sse_history;  // total squared error at each assignment pass
    std::vector<uint32_t> assignment;
    int iterations = 0;
};

namespace detail {

// Squared Euclidean distance with early abandonment. Abandoning once the
// partial sum reaches `bound` is exact for argmin-with-lowest-index ties:
// a candidate that cannot go strictly below the incumbent never wins.
inline double dist2_bounded(const double* a, const double* b, size_t dim, double bound) {
    double acc = 0.0;
    size_t i = 0;
    for (; i + 4 <= dim; i += 4) {
        double d0 = a[i] - b[i];
        double d1 = a[i + 1] - b[i + 1];
        double d2 = a[i + 2] - b[i + 2];
        double d3 = a[i + 3] - b[i + 3];
        acc += d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3;
        if (acc >= bound) return acc;
    }
    for (; i < dim; ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

inline double dist2(const double* a, const double* b, size_t dim) {
    return dist2_bounded(a, b, dim, std::numeric_limits<double>::infinity());
}

}  // namespace detail

// Lloyd's algorithm, k-means++ init, splitmix64-driven. Stops when the
// relative SSE decrease falls below 1e-4 or after 50 iterations. Empty
// clusters seize the point farthest from its current centroid (ties to the
// lowest point index). Fully deterministic for a given (points, k, seed);
// all accumulation is sequential in point order.
inline KMeansResult kmeans(std::span<const double> points, size_t n, size_t dim, uint32_t k,
                           uint64_t seed) {
    if (k < 1) fail(Err::Training, "k must be at least 1");
    if (n < k) fail(Err::Training, "need at least " + std::to_string(k) + " points, have " +
                                       std::to_string(n));
    if (points.size() != n * dim) fail(Err::Training, "point buffer size mismatch");

    constexpr int kMaxIters = 50;
    constexpr double kRelTol = 1e-4;

    SplitMix64 rng(seed);
    const double* pts = points.data();
    std::vector<double> centroids(static_cast<size_t>(k) * dim);
    auto centroid = [&](uint32_t c) { return centroids.data() + static_cast<size_t>(c) * dim; };
    auto point = [&](size_t p) { return pts + p * dim; };

    // k-means++ seeding with incrementally maintained nearest distances
    std::vector<double> mind2(n);
    {
        size_t first = rng.next_below(n);
        std::copy(point(first), point(first) + dim, centroid(0));
        for (size_t p = 0; p < n; ++p) mind2[p] = detail::dist2(point(p), centroid(0), dim);
        for (uint32_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (size_t p = 0; p < n; ++p) total += mind2[p];
            size_t chosen;
            if (total <= 0.0) {
                chosen = rng.next_below(n);
            } else {
                double r = rng.next_double() * total;
                double acc = 0.0;
                chosen = n - 1;
                for (size_t p = 0; p < n; ++p) {
                    acc += mind2[p];
                    if (acc > r) {
                        chosen = p;
                        break;
                    }
                }
            }
            std::copy(point(chosen), point(chosen) + dim, centroid(c));
            for (size_t p = 0; p < n; ++p) {
                double d = detail::dist2_bounded(point(p), centroid(c), dim, mind2[p]);
                if (d < mind2[p]) mind2[p] = d;
            }
        }
    }

    KMeansResult res;
    std::vector<uint32_t> assign(n, 0);
    std::vector<double> d2(n, 0.0);
    std::vector<uint32_t> counts(k);

    auto assign_pass = [&]() {
        double sse = 0.0;
        for (size_t p = 0; p < n; ++p) {
            uint32_t best = 0;
            double bd = detail::dist2(point(p), centroid(0), dim);
            for (uint32_t c = 1; c < k; ++c) {
                double d = detail::dist2_bounded(point(p), centroid(c), dim, bd);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            assign[p] = best;
            d2[p] = bd;
            sse += bd;
        }
        return sse;
    };

    double prev = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        double sse = assign_pass();
        res.sse_history.push_back(sse);
        res.iterations = iter + 1;
        if (prev != std::numeric_limits<double>::infinity() &&
            (prev == 0.0 || (prev - sse) / prev < kRelTol)) {
            converged = true;  // centroids/assignment/d2 are mutually consistent here
            break;
        }
        prev = sse;

        // empty-cluster repair: seize the farthest-from-home point; points
        // whose home would become empty are not eligible donors
        std::fill(counts.begin(), counts.end(), 0u);
        for (size_t p = 0; p < n; ++p) ++counts[assign[p]];
        for (uint32_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            size_t worst = n;
            double wd = -1.0;
            for (size_t p = 0; p < n; ++p) {
                if (counts[assign[p]] <= 1) continue;
                if (d2[p] > wd) {
                    wd = d2[p];
                    worst = p;
                }
            }
            if (worst == n) continue;  // unreachable for n >= k
            --counts[assign[worst]];
            assign[worst] = c;
            d2[worst] = 0.0;
            counts[c] = 1;
        }

        // recompute means (sequential accumulation in point order)
        std::fill(centroids.begin(), centroids.end(), 0.0);
        for (size_t p = 0; p < n; ++p) {
            double* c = centroid(assign[p]);
            const double* x = point(p);
            for (size_t f = 0; f < dim; ++f) c[f] += x[f];
        }
        for (uint32_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            double inv = 1.0 / counts[c];
            double* cp = centroid(c);
            for (size_t f = 0; f < dim; ++f) cp[f] *= inv;
        }
    }
    if (!converged) res.sse_history.push_back(assign_pass());  // sync after the last update

    res.centroids = std::move(centroids);
    res.assignment = std::move(assign);
    return res;
}

}  // namespace aric
