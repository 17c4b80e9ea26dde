#pragma once

#include <cmath>
#include <vector>

#include "tsdp/markov.hpp"
#include "tsdp/types.hpp"

namespace tsdp {

/// Component-wise ratios r = mu ./ mu_hat and their extrema. c_star = 1/r_hi
/// is the largest admissible mixing parameter.
struct RatioBounds {
    std::vector<double> r;
    double r_lo = 0.0;
    double r_hi = 0.0;
    double c_star = 0.0;
};

inline RatioBounds ratio_bounds(const Distribution& mu, const Distribution& mu_hat) {
    if (mu.n() != mu_hat.n()) throw DimensionMismatch("distribution lengths differ");
    RatioBounds b;
    b.r.resize(static_cast<size_t>(mu.n()));
    b.r_lo = std::numeric_limits<double>::infinity();
    b.r_hi = 0.0;
    for (int i = 0; i < mu.n(); ++i) {
        const double ri = mu[i] / mu_hat[i];
        b.r[static_cast<size_t>(i)] = ri;
        b.r_lo = std::min(b.r_lo, ri);
        b.r_hi = std::max(b.r_hi, ri);
    }
    b.c_star = 1.0 / b.r_hi;
    return b;
}

/// Per-row mixing weights alpha(c) = 1 - c*r. Valid for 0 < c <= c_star; the
/// result satisfies 0 <= alpha_i < 1, with alpha_i = 0 exactly where r_i
/// attains r_hi at c = c_star.
inline std::vector<double> alpha_of_c(const RatioBounds& bounds, double c) {
    if (!(c > 0.0) || c > bounds.c_star)
        throw OutOfRange("mixing parameter c must lie in (0, c_star]");
    std::vector<double> alpha(bounds.r.size());
    const bool extremal = c == bounds.c_star;
    // Keep alpha strictly below 1: ratio spreads beyond 1/eps would otherwise
    // round alpha_i to exactly 1 and make state i absorbing.
    constexpr double kAlphaMax = 1.0 - 1e-12;
    for (size_t i = 0; i < bounds.r.size(); ++i) {
        // At c = c_star evaluate 1 - r_i/r_hi so rows attaining r_hi get an
        // exact zero instead of rounding noise from c*r_i.
        double a = extremal ? 1.0 - bounds.r[i] / bounds.r_hi : 1.0 - c * bounds.r[i];
        if (a < 0.0) a = 0.0;
        if (a > kAlphaMax) a = kAlphaMax;
        alpha[i] = a;
    }
    return alpha;
}

/// Delta = D(alpha) (I - G): row i is alpha_i * (e_i - G(i,:)).
inline SparseMatrix diagonal_scaling_delta(const StochasticMatrix& g,
                                           const std::vector<double>& alpha) {
    const int n = g.n();
    SparseMatrix delta(n);
    for (int i = 0; i < n; ++i) {
        const double a = alpha[static_cast<size_t>(i)];
        if (a == 0.0) continue;
        auto& out = delta.mutable_row(i);
        const auto& row = g.row(i);
        out.reserve(row.size() + 1);
        bool diag_done = false;
        for (const auto& e : row) {
            if (e.col == i) {
                const double v = a * (1.0 - e.value);
                if (v != 0.0) out.push_back({i, v});
                diag_done = true;
            } else {
                if (!diag_done && e.col > i) {
                    out.push_back({i, a});
                    diag_done = true;
                }
                out.push_back({e.col, -a * e.value});
            }
        }
        if (!diag_done) out.push_back({i, a});
    }
    return delta;
}

/// Closed-form feasible solution Delta(alpha*) = D(alpha(c_star)) (I - G).
/// Requires mu to be the stationary distribution of G.
inline Perturbation diagonal_solution(const StochasticMatrix& g, const Distribution& mu,
                                      const Distribution& mu_hat) {
    if (mu.n() != g.n() || mu_hat.n() != g.n())
        throw DimensionMismatch("distribution length differs from matrix dimension");
    if (verify_stationary(g, mu) > 1e-8)
        throw NotStationary("mu is not stationary for G");
    const RatioBounds b = ratio_bounds(mu, mu_hat);
    const std::vector<double> alpha = alpha_of_c(b, b.c_star);
    return Perturbation{diagonal_scaling_delta(g, alpha), std::nullopt};
}

/// z = mu_hat^T (I - G), the stationarity defect of mu_hat.
inline std::vector<double> stationarity_defect(const StochasticMatrix& g,
                                               const Distribution& mu_hat) {
    const int n = g.n();
    std::vector<double> z(mu_hat.values());
    for (int i = 0; i < n; ++i) {
        const double mi = mu_hat[i];
        for (const auto& e : g.row(i)) z[static_cast<size_t>(e.col)] -= mi * e.value;
    }
    return z;
}

/// ||mu_hat^T (I - G)||_1 / ||mu_hat||_inf, a lower bound on ||Delta||_1 for
/// any Delta with mu_hat^T (G + Delta) = mu_hat^T.
inline double lower_bound_l1(const StochasticMatrix& g, const Distribution& mu_hat) {
    const std::vector<double> z = stationarity_defect(g, mu_hat);
    double znorm = 0.0;
    for (double v : z) znorm += std::abs(v);
    double mmax = 0.0;
    for (double v : mu_hat.values()) mmax = std::max(mmax, v);
    return znorm / mmax;
}

inline double identity_minus_l1(const StochasticMatrix& g) {
    double s = 0.0;
    for (int i = 0; i < g.n(); ++i) {
        double diag = 0.0;
        for (const auto& e : g.row(i))
            if (e.col == i) diag = e.value;
        // off-diagonal row sum of G equals 1 - diag for a stochastic row
        s += std::abs(1.0 - diag) + (1.0 - diag);
    }
    return s;
}

/// ((r_hi - r_lo) / r_hi) * ||I - G||_1, an upper bound on ||Delta(alpha*)||_1.
inline double upper_bound_l1(const StochasticMatrix& g, const RatioBounds& bounds) {
    return (bounds.r_hi - bounds.r_lo) / bounds.r_hi * identity_minus_l1(g);
}

/// Target that boosts state j: (mu + lambda e_j) / (1 + lambda).
inline Distribution rank_one_target(const Distribution& mu, int j, double lambda) {
    if (j < 0 || j >= mu.n()) throw OutOfRange("state index out of range");
    if (!(lambda > 0.0)) throw OutOfRange("lambda must be positive");
    std::vector<double> v(mu.values());
    v[static_cast<size_t>(j)] += lambda;
    for (double& x : v) x /= 1.0 + lambda;
    return Distribution::normalized(std::move(v));
}

struct RankOneSolution {
    Perturbation perturbation;
    double alpha_j = 0.0;
    /// Set when lambda >= max_i mu_i - mu_j, which certifies global optimality.
    bool certified_optimal = false;
};

/// Single-row solution Delta = alpha_j e_j e_j^T (I - G) with
/// alpha_j = lambda / (mu_j + lambda), for the target rank_one_target(mu, j, lambda).
inline RankOneSolution rank_one_solution(const StochasticMatrix& g, const Distribution& mu,
                                         int j, double lambda) {
    if (j < 0 || j >= g.n()) throw OutOfRange("state index out of range");
    if (!(lambda > 0.0)) throw OutOfRange("lambda must be positive");
    if (verify_stationary(g, mu) > 1e-8)
        throw NotStationary("mu is not stationary for G");
    RankOneSolution sol;
    sol.alpha_j = lambda / (mu[j] + lambda);
    double mu_max = 0.0;
    for (double v : mu.values()) mu_max = std::max(mu_max, v);
    sol.certified_optimal = lambda >= mu_max - mu[j];
    std::vector<double> alpha(static_cast<size_t>(g.n()), 0.0);
    alpha[static_cast<size_t>(j)] = sol.alpha_j;
    sol.perturbation = Perturbation{diagonal_scaling_delta(g, alpha), std::nullopt};
    return sol;
}

struct UnconstrainedRankOne {
    Perturbation perturbation;
    /// G + Delta >= 0 may fail; the perturbation is only sum- and
    /// stationarity-feasible in general.
    bool nonnegative_feasible = false;
    int pivot_index = 0;
};

/// Minimum-l1 rank-one solution ignoring nonnegativity:
/// Delta = (1/mu_hat_i) e_i mu_hat^T (I - G) with i = argmax mu_hat
/// (smallest index on ties). Its l1 norm equals lower_bound_l1 exactly.
inline UnconstrainedRankOne unconstrained_rank_one_l1(const StochasticMatrix& g,
                                                      const Distribution& mu_hat) {
    if (mu_hat.n() != g.n()) throw DimensionMismatch("distribution length differs from matrix");
    const std::vector<double> z = stationarity_defect(g, mu_hat);
    int imax = 0;
    for (int i = 1; i < mu_hat.n(); ++i)
        if (mu_hat[i] > mu_hat[imax]) imax = i;
    UnconstrainedRankOne out;
    out.pivot_index = imax;
    SparseMatrix delta(g.n());
    auto& row = delta.mutable_row(imax);
    for (int j = 0; j < g.n(); ++j) {
        const double v = z[static_cast<size_t>(j)] / mu_hat[imax];
        if (v != 0.0) row.push_back({j, v});
    }
    out.nonnegative_feasible = true;
    for (const auto& e : row)
        if (g.at(imax, e.col) + e.value < -kTolFeas) out.nonnegative_feasible = false;
    out.perturbation = Perturbation{std::move(delta), std::nullopt};
    return out;
}

struct RatioInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Ratio interval of the given pairing and of the pairing in which both
/// vectors are independently sorted non-decreasingly. The sorted interval is
/// contained in the original one.
inline std::pair<RatioInterval, RatioInterval> coherent_interval_check(const Distribution& mu,
                                                                       const Distribution& mu_hat) {
    if (mu.n() != mu_hat.n()) throw DimensionMismatch("distribution lengths differ");
    const RatioBounds orig = ratio_bounds(mu, mu_hat);
    std::vector<double> a(mu.values());
    std::vector<double> b(mu_hat.values());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    RatioInterval sorted{std::numeric_limits<double>::infinity(), 0.0};
    for (size_t i = 0; i < a.size(); ++i) {
        const double r = a[i] / b[i];
        sorted.lo = std::min(sorted.lo, r);
        sorted.hi = std::max(sorted.hi, r);
    }
    return {RatioInterval{orig.r_lo, orig.r_hi}, sorted};
}

}  // namespace tsdp
