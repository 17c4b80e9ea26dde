#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tsdp/types.hpp"

namespace tsdp {

enum class VarKind : uint8_t { Zero, Plus, Minus, Artificial };

/// Stable identity of an LP variable across column-generation rounds.
struct VarId {
    VarKind kind;
    int i;
    int j;

    bool operator==(const VarId& o) const { return kind == o.kind && i == o.i && j == o.j; }
};

struct VarIdHash {
    size_t operator()(const VarId& v) const {
        uint64_t h = static_cast<uint64_t>(v.kind);
        h = h * 0x9e3779b97f4a7c15ULL + static_cast<uint64_t>(static_cast<uint32_t>(v.i));
        h = h * 0x9e3779b97f4a7c15ULL + static_cast<uint64_t>(static_cast<uint32_t>(v.j));
        return static_cast<size_t>(h ^ (h >> 32));
    }
};

/// One LP variable: an entry of Delta^0, Delta^+ or Delta^- at position (i,j).
/// Minus variables carry the finite upper bound G_ij.
struct VariableDescriptor {
    VarKind kind;
    int i;
    int j;
    double upper;  // +inf for Zero/Plus, G_ij for Minus

    VarId id() const { return VarId{kind, i, j}; }
};

enum class VarStatus : uint8_t { AtLower, AtUpper, Basic };

/// min 1^T x  s.t.  A x = b, 0 <= x, x_minus <= g. Row block 0..n-1 holds the
/// zero-row-sum equalities, rows n..2n-1 the stationarity equalities with
/// right-hand side z = mu_hat^T (I - G). Every structural column has exactly
/// two nonzeros: +-1 in its row constraint and +-mu_hat_i in its column
/// constraint.
struct LpProblem {
    int n = 0;  // matrix dimension; the LP has 2n rows
    std::vector<VariableDescriptor> vars;
    std::vector<double> rhs;     // length 2n, [0_n ; z]
    std::vector<double> mu_hat;  // row coefficients

    int num_rows() const { return 2 * n; }
    int num_vars() const { return static_cast<int>(vars.size()); }
};

struct LpSolution {
    std::vector<double> primal;      // per structural variable
    std::vector<VarStatus> status;   // per structural variable
    std::vector<double> y0;          // duals of the row-sum block
    std::vector<double> ymu;         // duals of the stationarity block
    double objective = 0.0;
    long pivots = 0;
    bool used_phase1 = false;
    double primal_residual = 0.0;    // ||Ax - b||_inf at the returned point
};

inline std::pair<std::vector<double>, std::vector<double>> extract_duals(const LpSolution& sol) {
    return {sol.y0, sol.ymu};
}

/// Splits Omega into (Omega^0, Omega^+-): pairs off and on supp(G).
inline std::pair<SupportSet, SupportSet> partition_support(const SupportSet& omega,
                                                           const StochasticMatrix& g) {
    std::vector<std::pair<int, int>> zero_pairs, pm_pairs;
    omega.for_each([&](int i, int j) {
        if (g.matrix().has(i, j))
            pm_pairs.emplace_back(i, j);
        else
            zero_pairs.emplace_back(i, j);
    });
    return {SupportSet::explicit_pairs(omega.n(), zero_pairs),
            SupportSet::explicit_pairs(omega.n(), pm_pairs)};
}

/// min(|Omega|, |supp(G) intersect Omega| + 2n): upper bound on |supp(Delta*)|
/// at a vertex optimum.
inline size_t sparsity_bound(const StochasticMatrix& g, const SupportSet& omega) {
    size_t on_support = 0;
    if (omega.kind() == SupportKind::Full) {
        on_support = g.nnz();
    } else {
        for (int i = 0; i < g.n(); ++i)
            for (const auto& e : g.row(i))
                if (omega.contains(i, e.col)) ++on_support;
    }
    return std::min(omega.size(), on_support + 2 * static_cast<size_t>(g.n()));
}

/// z = mu_hat^T (I - G) without zero-snapping; tiny entries are kept so the
/// equalities stay exactly consistent.
inline std::vector<double> lp_rhs_defect(const StochasticMatrix& g, const Distribution& mu_hat) {
    std::vector<double> z(mu_hat.values());
    for (int i = 0; i < g.n(); ++i) {
        const double mi = mu_hat[i];
        for (const auto& e : g.row(i)) z[static_cast<size_t>(e.col)] -= mi * e.value;
    }
    return z;
}

inline LpProblem build_lp(const StochasticMatrix& g, const Distribution& mu_hat,
                          const SupportSet& omega) {
    if (mu_hat.n() != g.n()) throw DimensionMismatch("distribution length differs from matrix");
    if (omega.n() != g.n()) throw DimensionMismatch("support dimension differs from matrix");
    if (omega.empty()) throw EmptySupport("support set is empty");
    LpProblem p;
    p.n = g.n();
    p.mu_hat = mu_hat.values();
    p.rhs.assign(static_cast<size_t>(2 * g.n()), 0.0);
    const std::vector<double> z = lp_rhs_defect(g, mu_hat);
    for (int j = 0; j < g.n(); ++j) p.rhs[static_cast<size_t>(g.n() + j)] = z[static_cast<size_t>(j)];

    const double inf = std::numeric_limits<double>::infinity();
    p.vars.reserve(omega.size());
    omega.for_each([&](int i, int j) {
        const double gij = g.at(i, j);
        if (gij > 0.0) {
            p.vars.push_back({VarKind::Plus, i, j, inf});
            p.vars.push_back({VarKind::Minus, i, j, gij});
        } else {
            p.vars.push_back({VarKind::Zero, i, j, inf});
        }
    });
    return p;
}

/// Reads the primal values back into a sparse perturbation with its
/// (Delta^0, Delta^+, Delta^-) split. Values at or below the structural-zero
/// threshold are dropped.
inline Perturbation perturbation_from_solution(const LpProblem& p, const LpSolution& sol,
                                               double zero_tol = 1e-9) {
    std::vector<Triplet> d0, dp, dm, all;
    for (size_t k = 0; k < p.vars.size(); ++k) {
        const double v = sol.primal[k];
        if (v <= zero_tol) continue;
        const auto& d = p.vars[k];
        switch (d.kind) {
            case VarKind::Zero:
                d0.push_back({d.i, d.j, v});
                all.push_back({d.i, d.j, v});
                break;
            case VarKind::Plus:
                dp.push_back({d.i, d.j, v});
                all.push_back({d.i, d.j, v});
                break;
            case VarKind::Minus:
                dm.push_back({d.i, d.j, v});
                all.push_back({d.i, d.j, -v});
                break;
            case VarKind::Artificial:
                break;
        }
    }
    Perturbation out;
    out.delta = SparseMatrix::from_triplets(p.n, std::move(all));
    PerturbationSplit split{SparseMatrix::from_triplets(p.n, std::move(d0)),
                            SparseMatrix::from_triplets(p.n, std::move(dp)),
                            SparseMatrix::from_triplets(p.n, std::move(dm))};
    // An optimal vertex never carries both Delta^+ and Delta^- at one position.
    for (int i = 0; i < p.n; ++i)
        for (const auto& e : split.minus.row(i))
            if (split.plus.has(i, e.col))
                throw TsdpError("backend returned overlapping Delta^+ and Delta^- supports");
    out.split = std::move(split);
    return out;
}

}  // namespace tsdp
