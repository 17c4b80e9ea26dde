#pragma once

#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "tsdp/types.hpp"

namespace tsdp {

/// Tarjan SCC on the sparsity pattern, iterative to cope with long paths.
/// Returns the component id per node; ids are assigned in reverse topological
/// order of discovery.
inline std::vector<int> strongly_connected_components(const SparseMatrix& m, int* num_components) {
    const int n = m.n();
    std::vector<int> index(static_cast<size_t>(n), -1);
    std::vector<int> lowlink(static_cast<size_t>(n), 0);
    std::vector<int> comp(static_cast<size_t>(n), -1);
    std::vector<char> on_stack(static_cast<size_t>(n), 0);
    std::vector<int> stack;
    stack.reserve(static_cast<size_t>(n));

    struct Frame {
        int node;
        size_t edge;
    };
    std::vector<Frame> call;
    int next_index = 0;
    int ncomp = 0;

    for (int root = 0; root < n; ++root) {
        if (index[static_cast<size_t>(root)] != -1) continue;
        call.push_back({root, 0});
        index[static_cast<size_t>(root)] = lowlink[static_cast<size_t>(root)] = next_index++;
        stack.push_back(root);
        on_stack[static_cast<size_t>(root)] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            const auto& row = m.row(f.node);
            if (f.edge < row.size()) {
                const int w = row[f.edge++].col;
                if (index[static_cast<size_t>(w)] == -1) {
                    index[static_cast<size_t>(w)] = lowlink[static_cast<size_t>(w)] = next_index++;
                    stack.push_back(w);
                    on_stack[static_cast<size_t>(w)] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[static_cast<size_t>(w)]) {
                    lowlink[static_cast<size_t>(f.node)] =
                        std::min(lowlink[static_cast<size_t>(f.node)], index[static_cast<size_t>(w)]);
                }
            } else {
                const int v = f.node;
                call.pop_back();
                if (!call.empty()) {
                    const int parent = call.back().node;
                    lowlink[static_cast<size_t>(parent)] =
                        std::min(lowlink[static_cast<size_t>(parent)], lowlink[static_cast<size_t>(v)]);
                }
                if (lowlink[static_cast<size_t>(v)] == index[static_cast<size_t>(v)]) {
                    while (true) {
                        const int w = stack.back();
                        stack.pop_back();
                        on_stack[static_cast<size_t>(w)] = 0;
                        comp[static_cast<size_t>(w)] = ncomp;
                        if (w == v) break;
                    }
                    ++ncomp;
                }
            }
        }
    }
    if (num_components) *num_components = ncomp;
    return comp;
}

/// True iff the directed graph of supp(M) is strongly connected.
inline bool is_irreducible(const SparseMatrix& m) {
    if (m.n() == 0) return false;
    int ncomp = 0;
    strongly_connected_components(m, &ncomp);
    return ncomp == 1;
}

inline bool is_irreducible(const StochasticMatrix& g) { return is_irreducible(g.matrix()); }

struct StationaryOptions {
    int max_iters = 10000;
    double tol = 1e-13;
    int fallback_iters = 100;
};

struct StationaryResult {
    Distribution dist;
    bool converged = true;
    int iterations = 0;
    double residual = 0.0;
};

/// ||mu^T G - mu^T||_1.
inline double verify_stationary(const SparseMatrix& g, const std::vector<double>& mu) {
    if (static_cast<int>(mu.size()) != g.n()) throw DimensionMismatch("vector length differs from matrix");
    std::vector<double> y(mu.size(), 0.0);
    for (int i = 0; i < g.n(); ++i) {
        const double mi = mu[static_cast<size_t>(i)];
        if (mi == 0.0) continue;
        for (const auto& e : g.row(i)) y[static_cast<size_t>(e.col)] += mi * e.value;
    }
    double r = 0.0;
    for (size_t j = 0; j < mu.size(); ++j) r += std::abs(y[j] - mu[j]);
    return r;
}

inline double verify_stationary(const StochasticMatrix& g, const Distribution& mu) {
    return verify_stationary(g.matrix(), mu.values());
}

/// Power iteration on G^T from the uniform vector. Periodic chains make the
/// plain iterate oscillate, so once the residual stalls the iteration switches
/// to the half-step (x + xG)/2, which has the same fixed point.
inline StationaryResult stationary_distribution(const StochasticMatrix& g,
                                                const StationaryOptions& opts = {}) {
    if (!is_irreducible(g)) throw NotIrreducible("matrix is not irreducible");
    const int n = g.n();
    std::vector<double> x(static_cast<size_t>(n), 1.0 / static_cast<double>(n));
    std::vector<double> y(static_cast<size_t>(n), 0.0);

    bool lazy = false;
    double stall_reference = -1.0;
    int stall_check_at = 128;
    double residual = std::numeric_limits<double>::infinity();

    // Multiplies once, measures the residual of the current iterate, and only
    // then advances, so a converged x is returned as measured.
    auto step = [&](int iters_done) {
        std::fill(y.begin(), y.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            const double xi = x[static_cast<size_t>(i)];
            for (const auto& e : g.row(i)) y[static_cast<size_t>(e.col)] += xi * e.value;
        }
        residual = 0.0;
        for (int j = 0; j < n; ++j) residual += std::abs(y[static_cast<size_t>(j)] - x[static_cast<size_t>(j)]);
        if (residual <= opts.tol) return true;
        if (!lazy && iters_done >= stall_check_at) {
            if (stall_reference >= 0.0 && residual > 0.5 * stall_reference) lazy = true;
            stall_reference = residual;
            stall_check_at = iters_done + 128;
        }
        if (lazy)
            for (int j = 0; j < n; ++j)
                y[static_cast<size_t>(j)] = 0.5 * (y[static_cast<size_t>(j)] + x[static_cast<size_t>(j)]);
        double s = 0.0;
        for (double v : y) s += v;
        assert(std::abs(s - 1.0) < 1e-9);
        for (int j = 0; j < n; ++j) {
            x[static_cast<size_t>(j)] = y[static_cast<size_t>(j)] / s;
            // Irreducibility rules out all-zero columns, so the iterate stays positive.
            assert(x[static_cast<size_t>(j)] > 0.0);
        }
        return false;
    };

    StationaryResult res;
    int it = 0;
    bool done = false;
    for (; it < opts.max_iters && !done; ++it) done = step(it);
    if (!done) {
        for (int k = 0; k < opts.fallback_iters && !done; ++k) done = step(it + k);
        if (!done) res.converged = false;
        it += opts.fallback_iters;
    }
    res.iterations = it;
    res.residual = verify_stationary(g.matrix(), x);
    res.dist = Distribution::normalized(std::move(x));
    return res;
}

/// Direct stationary solve by GTH (Grassmann-Taksar-Heyman) state censoring.
/// Uses only additions, multiplications and divisions of nonnegative numbers,
/// so the result is accurate componentwise even for badly conditioned chains
/// where power iteration stalls. Fill-in stays inside the band for banded
/// patterns; general patterns may fill in like unpivoted elimination.
inline StationaryResult stationary_direct(const StochasticMatrix& g) {
    if (!is_irreducible(g)) throw NotIrreducible("matrix is not irreducible");
    const int n = g.n();
    std::vector<std::map<int, double>> rows(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        for (const auto& e : g.row(i))
            if (e.col != i) rows[static_cast<size_t>(i)][e.col] = e.value;
    // in-neighbor sets for column access during back-substitution
    std::vector<std::map<int, double>> cols(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        for (const auto& [j, v] : rows[static_cast<size_t>(i)]) cols[static_cast<size_t>(j)][i] = v;

    std::vector<double> denom(static_cast<size_t>(n), 0.0);
    for (int m = n - 1; m >= 1; --m) {
        auto& row_m = rows[static_cast<size_t>(m)];
        double s = 0.0;
        for (const auto& [j, v] : row_m)
            if (j < m) s += v;
        denom[static_cast<size_t>(m)] = s;
        // censor state m: route its mass through to the remaining states
        for (const auto& [i, vim] : cols[static_cast<size_t>(m)]) {
            if (i >= m) continue;
            const double f = vim / s;
            auto& row_i = rows[static_cast<size_t>(i)];
            for (const auto& [j, vmj] : row_m) {
                if (j >= m || j == i) continue;
                const double add = f * vmj;
                auto [it, inserted] = row_i.emplace(j, add);
                if (!inserted) it->second += add;
                cols[static_cast<size_t>(j)][i] = it->second;
            }
        }
    }

    // back-substitution: mu_m = sum_{i<m} mu_i P_i,m / S_m, mu_0 = 1
    std::vector<double> mu(static_cast<size_t>(n), 0.0);
    mu[0] = 1.0;
    for (int m = 1; m < n; ++m) {
        double acc = 0.0;
        for (const auto& [i, v] : cols[static_cast<size_t>(m)])
            if (i < m) acc += mu[static_cast<size_t>(i)] * v;
        mu[static_cast<size_t>(m)] = acc / denom[static_cast<size_t>(m)];
    }

    StationaryResult res;
    res.converged = true;
    res.iterations = 0;
    res.residual = verify_stationary(g.matrix(), mu) /
                   [&] {
                       double s = 0.0;
                       for (double v : mu) s += v;
                       return s;
                   }();
    res.dist = Distribution::normalized(std::move(mu));
    return res;
}

/// Power iteration first (the cheap path), direct GTH solve when it fails to
/// converge.
inline StationaryResult stationary_auto(const StochasticMatrix& g,
                                        const StationaryOptions& opts = {}) {
    StationaryResult res = stationary_distribution(g, opts);
    if (!res.converged) {
        StationaryResult direct = stationary_direct(g);
        direct.iterations = res.iterations;
        return direct;
    }
    return res;
}

}  // namespace tsdp
