#pragma once

#include <cmath>
#include <vector>

#include "tsdp/markov.hpp"
#include "tsdp/types.hpp"

namespace tsdp {

struct MhDiagnostics {
    /// max_{i != j} |mu_hat_i Ghat_ij - mu_hat_j Ghat_ji|
    double reversibility_residual = 0.0;
    bool irreducible = false;
    /// supp(Ghat) subset of supp(I) union (supp(G) intersect supp(G^T))
    bool support_contained = true;
};

struct MhResult {
    Perturbation perturbation;
    StochasticMatrix g_hat;
    MhDiagnostics diagnostics;
};

/// Metropolis-Hastings construction:
///   Ghat(i,j) = min(G(i,j), (mu_hat_j / mu_hat_i) G(j,i))   for i != j,
/// diagonal filled to restore unit row sums. The result is mu_hat-reversible
/// but may be reducible when supp(G) is asymmetric; that is reported, not
/// raised. Runs in O(nnz(G)).
inline MhResult metropolis_hastings(const StochasticMatrix& g, const Distribution& mu_hat) {
    if (mu_hat.n() != g.n()) throw DimensionMismatch("distribution length differs from matrix");
    const int n = g.n();
    const SparseMatrix gt = g.matrix().transpose();

    SparseMatrix ghat(n);
    for (int i = 0; i < n; ++i) {
        const auto& row = g.row(i);
        const auto& trow = gt.row(i);  // trow holds G(j,i) for j in column order
        auto& out = ghat.mutable_row(i);
        out.reserve(row.size() + 1);
        double offdiag = 0.0, comp = 0.0;
        size_t pt = 0;
        for (const auto& e : row) {
            if (e.col == i) continue;
            while (pt < trow.size() && trow[pt].col < e.col) ++pt;
            const double gji = (pt < trow.size() && trow[pt].col == e.col) ? trow[pt].value : 0.0;
            const double v = std::min(e.value, mu_hat[e.col] / mu_hat[i] * gji);
            if (v > 0.0) {
                out.push_back({e.col, v});
                const double t = offdiag + v;
                comp += (offdiag >= v) ? (offdiag - t) + v : (v - t) + offdiag;
                offdiag = t;
            }
        }
        const double diag = 1.0 - (offdiag + comp);
        if (diag > 0.0) {
            auto it = std::lower_bound(out.begin(), out.end(), i,
                                       [](const Entry& e, int col) { return e.col < col; });
            out.insert(it, Entry{i, diag});
        }
    }

    MhResult res;
    res.diagnostics.irreducible = is_irreducible(ghat);
    for (int i = 0; i < n; ++i) {
        for (const auto& e : ghat.row(i)) {
            if (e.col == i) continue;
            const double detail = mu_hat[i] * e.value - mu_hat[e.col] * ghat.at(e.col, i);
            res.diagnostics.reversibility_residual =
                std::max(res.diagnostics.reversibility_residual, std::abs(detail));
            if (!g.matrix().has(i, e.col) || !g.matrix().has(e.col, i))
                res.diagnostics.support_contained = false;
        }
    }
    res.perturbation = Perturbation{ghat.add(g.matrix().negated()), std::nullopt};
    res.g_hat = StochasticMatrix(std::move(ghat));
    return res;
}

}  // namespace tsdp
