#pragma once

#include <cstdint>
#include <vector>

#include "tsdp/types.hpp"

namespace tsdp {

/// SplitMix64. Fixed generator so that (n, k, seed) reproduces the same
/// matrix on any platform.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw in (0, 1]: 53 mantissa bits, zero excluded.
    double next_unit() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }
};

/// Queue-like band matrix: row i connects to its k left and k right
/// neighbors (no wraparound, zero diagonal), weights uniform on (0,1],
/// rows normalized. Draws are consumed in row-major order.
inline StochasticMatrix gen_queue_matrix(int n, int k, uint64_t seed) {
    if (k < 1 || k > n - 1) throw BadArity("k must satisfy 1 <= k <= n-1");
    SplitMix64 rng(seed);
    SparseMatrix m(n);
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - k);
        const int hi = std::min(n - 1, i + k);
        auto& row = m.mutable_row(i);
        row.reserve(static_cast<size_t>(hi - lo));
        double sum = 0.0;
        for (int j = lo; j <= hi; ++j) {
            if (j == i) continue;
            const double v = rng.next_unit();
            row.push_back({j, v});
            sum += v;
        }
        for (auto& e : row) e.value /= sum;
        // keep the row sum exactly 1 after rounding
        double s2 = 0.0;
        for (const auto& e : row) s2 += e.value;
        row.back().value += 1.0 - s2;
    }
    return StochasticMatrix(std::move(m));
}

/// One power-iteration step from uniform: mu_hat = G^T 1/n, renormalized.
inline Distribution target_power_step(const StochasticMatrix& g) {
    const int n = g.n();
    std::vector<double> v(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (const auto& e : g.row(i)) v[static_cast<size_t>(e.col)] += e.value / static_cast<double>(n);
    for (double x : v)
        if (!(x > 0.0)) throw NonPositiveTarget("G has an all-zero column");
    return Distribution::normalized(std::move(v));
}

/// mu_hat = (1 - eps) mu + eps 1/n.
inline Distribution target_mix(const Distribution& mu, double eps) {
    if (eps < 0.0 || eps > 1.0) throw OutOfRange("mixing epsilon must lie in [0,1]");
    std::vector<double> v(mu.values());
    const double u = eps / static_cast<double>(mu.n());
    for (double& x : v) x = (1.0 - eps) * x + u;
    return Distribution::normalized(std::move(v));
}

}  // namespace tsdp
