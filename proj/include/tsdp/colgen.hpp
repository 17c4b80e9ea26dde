#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>
#include <vector>

#include "tsdp/closed_form.hpp"
#include "tsdp/lp.hpp"
#include "tsdp/markov.hpp"
#include "tsdp/simplex.hpp"
#include "tsdp/types.hpp"

namespace tsdp {

struct ColGenOptions {
    /// Stop when the objective decrease between two rounds drops to
    /// delta * ||G||_1. With delta = 0 the loop runs until the pricing
    /// certificate (no positive reduced-cost entries) is obtained.
    double delta = 1e-4;
    /// Subset size m of the large-n pricing heuristic.
    int pricing_subset = 200;
    /// Exhaustive pricing for n <= this; the heuristic above it.
    int heuristic_threshold = 200;
    /// Exhaustive fallback bound when the heuristic comes back empty at delta=0.
    int exhaustive_fallback_limit = 10000;
    int max_rounds = 100;
    BackendOptions backend;
    StationaryOptions stationary;
};

enum class ColGenStatus {
    Optimal,           // pricing certificate: no candidate improves
    HeuristicOptimal,  // heuristic found nothing, n too large to verify exhaustively
    DeltaConverged,    // relative decrease fell below delta
    MaxRounds,
    InitialZero,       // mu_hat already stationary, nothing to do
};

struct ColGenRound {
    int round = 0;
    size_t omega_size = 0;
    double objective = 0.0;
    size_t added = 0;
    long pivots = 0;
    double time_ms = 0.0;
};

struct ColGenTrace {
    std::vector<ColGenRound> rounds;
    ColGenStatus status = ColGenStatus::Optimal;
    double obj0 = 0.0;  // ||Delta(alpha*)||_1, the warm objective
};

/// Entries (i,j) of R = y0 1^T + mu_hat (ymu)^T - 1 restricted to
/// Omega \ Omega_i: up to n_plus largest strictly positive ones. Exhaustive
/// scan for n <= opts.heuristic_threshold, otherwise the top-index heuristic
/// on the m largest y0 / mu_hat rows and 2m largest ymu columns.
inline std::vector<std::pair<int, int>> price_entries(const std::vector<double>& y0,
                                                      const std::vector<double>& ymu,
                                                      const Distribution& mu_hat,
                                                      const SupportSet& omega,
                                                      const SupportSet& omega_i, size_t n_plus,
                                                      const ColGenOptions& opts,
                                                      bool force_exhaustive = false) {
    const int n = mu_hat.n();
    const double tol = opts.backend.opt_tol;

    struct Cand {
        double r;
        int i, j;
    };
    // Min-heap on (r, then reversed index order) keeps the n_plus best.
    auto worse = [](const Cand& a, const Cand& b) {
        if (a.r != b.r) return a.r > b.r;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    };
    std::vector<Cand> heap;
    heap.reserve(n_plus + 1);
    auto offer = [&](double r, int i, int j) {
        if (heap.size() < n_plus) {
            heap.push_back({r, i, j});
            std::push_heap(heap.begin(), heap.end(), worse);
        } else if (worse({r, i, j}, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), worse);
            heap.back() = {r, i, j};
            std::push_heap(heap.begin(), heap.end(), worse);
        }
    };

    const bool exhaustive = force_exhaustive || n <= opts.heuristic_threshold;
    if (exhaustive) {
        double ymu_max = -std::numeric_limits<double>::infinity();
        for (double v : ymu) ymu_max = std::max(ymu_max, v);
        for (int i = 0; i < n; ++i) {
            // Row-wise upper bound on R prunes most rows.
            if (y0[static_cast<size_t>(i)] + mu_hat[i] * ymu_max - 1.0 <= tol) continue;
            auto visit = [&](int j) {
                const double r = y0[static_cast<size_t>(i)] + mu_hat[i] * ymu[static_cast<size_t>(j)] - 1.0;
                if (r > tol && !omega_i.contains(i, j)) offer(r, i, j);
            };
            if (omega.kind() == SupportKind::Full)
                for (int j = 0; j < n; ++j) visit(j);
            else
                for (int j : omega.row(i)) visit(j);
        }
    } else {
        const int msub = std::min(opts.pricing_subset, n);
        auto top_indices = [n](const std::vector<double>& v, int count) {
            std::vector<int> idx(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
            count = std::min(count, n);
            std::partial_sort(idx.begin(), idx.begin() + count, idx.end(), [&](int a, int b) {
                if (v[static_cast<size_t>(a)] != v[static_cast<size_t>(b)]) return v[static_cast<size_t>(a)] > v[static_cast<size_t>(b)];
                return a < b;
            });
            idx.resize(static_cast<size_t>(count));
            return idx;
        };
        std::vector<int> rows = top_indices(y0, msub);
        {
            std::vector<int> more = top_indices(mu_hat.values(), msub);
            rows.insert(rows.end(), more.begin(), more.end());
            std::sort(rows.begin(), rows.end());
            rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        }
        const std::vector<int> cols = top_indices(ymu, 2 * msub);
        for (int i : rows) {
            for (int j : cols) {
                if (!omega.contains(i, j)) continue;
                const double r = y0[static_cast<size_t>(i)] + mu_hat[i] * ymu[static_cast<size_t>(j)] - 1.0;
                if (r > tol && !omega_i.contains(i, j)) offer(r, i, j);
            }
        }
    }

    std::sort(heap.begin(), heap.end(), [&](const Cand& a, const Cand& b) { return worse(b, a); });
    std::vector<std::pair<int, int>> out;
    out.reserve(heap.size());
    for (const auto& c : heap) out.emplace_back(c.i, c.j);
    return out;
}

/// Batched column generation for the TSDP LP over a large support set.
/// Starts from Omega^1 = supp(G+I) intersect Omega, prices entries via the
/// rank-two reduced-cost matrix, warm-starts every LP from the previous
/// basis, and stops on the relative-decrease rule (or the optimality
/// certificate when delta = 0).
inline std::pair<Perturbation, ColGenTrace> column_generate(const StochasticMatrix& g,
                                                            const Distribution& mu_hat,
                                                            const SupportSet& omega,
                                                            const ColGenOptions& opts = {},
                                                            const Distribution* mu_known = nullptr) {
    using clock = std::chrono::steady_clock;
    if (mu_hat.n() != g.n()) throw DimensionMismatch("distribution length differs from matrix");
    const int n = g.n();

    Distribution mu;
    if (mu_known) {
        mu = *mu_known;
    } else {
        mu = stationary_auto(g, opts.stationary).dist;
    }

    ColGenTrace trace;
    const RatioBounds bounds = ratio_bounds(mu, mu_hat);
    const std::vector<double> alpha = alpha_of_c(bounds, bounds.c_star);
    SparseMatrix delta0 = diagonal_scaling_delta(g, alpha);
    trace.obj0 = l1_norm(delta0);

    if (trace.obj0 == 0.0) {
        trace.status = ColGenStatus::InitialZero;
        return {Perturbation::zero(n), std::move(trace)};
    }

    // Omega^1 = supp(G+I) intersect Omega.
    std::vector<std::pair<int, int>> pairs;
    {
        const SupportSet gpi = support(g.matrix(), true);
        gpi.for_each([&](int i, int j) {
            if (omega.contains(i, j)) pairs.emplace_back(i, j);
        });
    }
    if (pairs.empty()) throw Infeasible("Omega does not intersect supp(G+I)");
    const size_t n_plus = pairs.size();
    const double g_norm = l1_norm(g.matrix());

    SupportSet omega_i = SupportSet::explicit_pairs(n, pairs);
    Basis basis;
    bool have_basis = false;
    double obj_prev2 = std::numeric_limits<double>::infinity();
    double obj_prev1 = trace.obj0;

    Perturbation result = Perturbation::zero(n);
    trace.status = ColGenStatus::MaxRounds;

    for (int round = 1; round <= opts.max_rounds; ++round) {
        const bool decrease_ok =
            opts.delta == 0.0 ? true : (obj_prev2 - obj_prev1 > opts.delta * g_norm);
        if (!decrease_ok) {
            trace.status = ColGenStatus::DeltaConverged;
            break;
        }

        const auto t0 = clock::now();
        const LpProblem problem = build_lp(g, mu_hat, omega_i);
        SimplexSolver solver(problem, opts.backend);
        LpSolution sol = solver.solve(have_basis ? &basis : nullptr);
        basis = solver.basis_snapshot();
        have_basis = true;
        result = perturbation_from_solution(problem, sol);

        std::vector<std::pair<int, int>> added =
            price_entries(sol.y0, sol.ymu, mu_hat, omega, omega_i, n_plus, opts);
        bool certified = n <= opts.heuristic_threshold;
        if (added.empty() && !certified && opts.delta == 0.0 &&
            n <= opts.exhaustive_fallback_limit) {
            added = price_entries(sol.y0, sol.ymu, mu_hat, omega, omega_i, n_plus, opts, true);
            certified = true;
        }

        const auto t1 = clock::now();
        trace.rounds.push_back(
            {round, omega_i.size(), sol.objective, added.size(), sol.pivots,
             std::chrono::duration<double, std::milli>(t1 - t0).count()});

        obj_prev2 = obj_prev1;
        obj_prev1 = sol.objective;

        if (added.empty()) {
            trace.status = certified ? ColGenStatus::Optimal : ColGenStatus::HeuristicOptimal;
            break;
        }

        std::vector<std::pair<int, int>> merged;
        merged.reserve(omega_i.size() + added.size());
        omega_i.for_each([&](int i, int j) { merged.emplace_back(i, j); });
        for (const auto& pr : added) merged.push_back(pr);
        omega_i = SupportSet::explicit_pairs(n, merged);
    }
    return {std::move(result), std::move(trace)};
}

}  // namespace tsdp
