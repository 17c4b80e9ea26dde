// Test-only oracles, deliberately independent of the library's solve paths:
// a dense two-phase tableau simplex over the naive |Delta| linearization, a
// dense Gaussian-elimination stationary solve, and brute-force helpers.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "tsdp/generate.hpp"
#include "tsdp/markov.hpp"
#include "tsdp/types.hpp"

namespace oracle {

// Dense standard-form LP: min c^T x s.t. A x = b, x >= 0, solved by a
// two-phase full-tableau simplex with Bland's rule throughout (slow, cannot
// cycle). Returns the optimal objective; throws on infeasible.
class DenseLp {
public:
    DenseLp(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> c)
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {}

    double solve() {
        const int m = static_cast<int>(a_.size());
        const int n = static_cast<int>(c_.size());
        // Orient rows so b >= 0, then append one artificial per row.
        for (int r = 0; r < m; ++r) {
            if (b_[r] < 0.0) {
                b_[r] = -b_[r];
                for (int j = 0; j < n; ++j) a_[r][j] = -a_[r][j];
            }
        }
        const int total = n + m;
        // tableau rows: m constraint rows + objective row; columns: total + rhs
        std::vector<std::vector<double>> t(m + 1, std::vector<double>(total + 1, 0.0));
        std::vector<int> basis(m);
        for (int r = 0; r < m; ++r) {
            for (int j = 0; j < n; ++j) t[r][j] = a_[r][j];
            t[r][n + r] = 1.0;
            t[r][total] = b_[r];
            basis[r] = n + r;
        }
        // Phase 1: minimize sum of artificials.
        for (int j = 0; j < total + 1; ++j) {
            double s = 0.0;
            for (int r = 0; r < m; ++r) s += t[r][j];
            t[m][j] = (j >= n && j < total) ? s - 1.0 : s;  // reduced costs of -obj
        }
        run(t, basis, n, total, true);
        double phase1 = t[m][total];
        if (phase1 > 1e-7) throw tsdp::Infeasible("oracle: phase-1 optimum positive");

        // Drive zero-level artificials out of the basis where possible; rows
        // that stay artificial-basic are redundant (all-zero) and inert.
        for (int r = 0; r < m; ++r) {
            if (basis[r] < n) continue;
            int jmax = -1;
            for (int j = 0; j < n; ++j)
                if (std::abs(t[r][j]) > 1e-9 && (jmax < 0 || std::abs(t[r][j]) > std::abs(t[r][jmax])))
                    jmax = j;
            if (jmax >= 0) pivot(t, basis, r, jmax);
        }

        // Phase 2 objective row.
        for (int j = 0; j <= total; ++j) {
            double red = j < n ? -c_[j] : 0.0;
            for (int r = 0; r < m; ++r)
                if (basis[r] < n) red += c_[basis[r]] * t[r][j];
            t[m][j] = red;
        }
        run(t, basis, n, total, false);
        return t[m][total];
    }

private:
    // Bland pivoting on the tableau; in phase 1 artificials may leave but
    // never re-enter, and in phase 2 artificial columns are skipped.
    void run(std::vector<std::vector<double>>& t, std::vector<int>& basis, int n, int total,
             bool phase1) {
        const int m = static_cast<int>(basis.size());
        std::vector<char> banned(static_cast<size_t>(total), 0);
        while (true) {
            int enter = -1;
            for (int j = 0; j < total; ++j) {
                if (banned[static_cast<size_t>(j)]) continue;
                if (!phase1 && j >= n) continue;
                if (t[m][j] > 1e-9) {
                    enter = j;
                    break;  // Bland: first improving column
                }
            }
            if (enter < 0) return;
            int leave = -1;
            double best = 0.0;
            for (int r = 0; r < m; ++r) {
                if (t[r][enter] <= 1e-11) continue;
                const double ratio = t[r][total] / t[r][enter];
                if (leave < 0 || ratio < best - 1e-12 ||
                    (ratio < best + 1e-12 && basis[r] < basis[leave])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave < 0) throw tsdp::Unbounded("oracle: unbounded");
            if (phase1 && basis[leave] >= n) banned[static_cast<size_t>(basis[leave])] = 1;
            pivot(t, basis, leave, enter);
        }
    }

    void pivot(std::vector<std::vector<double>>& t, std::vector<int>& basis, int leave,
               int enter) {
        const int m = static_cast<int>(basis.size());
        const int width = static_cast<int>(t[0].size());
        const double piv = t[leave][enter];
        for (int j = 0; j < width; ++j) t[leave][j] /= piv;
        for (int r = 0; r <= m; ++r) {
            if (r == leave) continue;
            const double f = t[r][enter];
            if (f == 0.0) continue;
            for (int j = 0; j < width; ++j) t[r][j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }

    std::vector<std::vector<double>> a_;
    std::vector<double> b_;
    std::vector<double> c_;
};

// ||Delta||_1 optimum of the TSDP via the naive linearization: free entries
// d_ij = d+ - d- on Omega, t_ij >= |d_ij| via two inequalities, G + d >= 0.
// Completely separate from the production Delta^0/Delta^+/Delta^- split.
inline double tsdp_l1_optimum(const tsdp::StochasticMatrix& g, const tsdp::Distribution& mu_hat,
                              const tsdp::SupportSet& omega) {
    const int n = g.n();
    std::vector<std::pair<int, int>> pairs;
    omega.for_each([&](int i, int j) { pairs.emplace_back(i, j); });
    const int p = static_cast<int>(pairs.size());

    // columns: [d+ 0..p) [d- p..2p) [t 2p..3p) [s1 3p..4p) [s2 4p..5p) [s3 5p..6p)
    const int ncol = 6 * p;
    const int nrow = 2 * n + 3 * p;
    std::vector<std::vector<double>> a(static_cast<size_t>(nrow),
                                       std::vector<double>(static_cast<size_t>(ncol), 0.0));
    std::vector<double> b(static_cast<size_t>(nrow), 0.0);
    std::vector<double> c(static_cast<size_t>(ncol), 0.0);

    std::vector<double> z(mu_hat.values());
    for (int i = 0; i < n; ++i)
        for (const auto& e : g.row(i)) z[static_cast<size_t>(e.col)] -= mu_hat[i] * e.value;

    for (int q = 0; q < p; ++q) {
        const auto [i, j] = pairs[static_cast<size_t>(q)];
        a[static_cast<size_t>(i)][static_cast<size_t>(q)] = 1.0;
        a[static_cast<size_t>(i)][static_cast<size_t>(p + q)] = -1.0;
        a[static_cast<size_t>(n + j)][static_cast<size_t>(q)] = mu_hat[i];
        a[static_cast<size_t>(n + j)][static_cast<size_t>(p + q)] = -mu_hat[i];
        // t - d+ + d- - s1 = 0
        auto& r1 = a[static_cast<size_t>(2 * n + q)];
        r1[static_cast<size_t>(2 * p + q)] = 1.0;
        r1[static_cast<size_t>(q)] = -1.0;
        r1[static_cast<size_t>(p + q)] = 1.0;
        r1[static_cast<size_t>(3 * p + q)] = -1.0;
        // t + d+ - d- - s2 = 0
        auto& r2 = a[static_cast<size_t>(2 * n + p + q)];
        r2[static_cast<size_t>(2 * p + q)] = 1.0;
        r2[static_cast<size_t>(q)] = 1.0;
        r2[static_cast<size_t>(p + q)] = -1.0;
        r2[static_cast<size_t>(4 * p + q)] = -1.0;
        // -d+ + d- + s3 = G_ij
        auto& r3 = a[static_cast<size_t>(2 * n + 2 * p + q)];
        r3[static_cast<size_t>(q)] = -1.0;
        r3[static_cast<size_t>(p + q)] = 1.0;
        r3[static_cast<size_t>(5 * p + q)] = 1.0;
        b[static_cast<size_t>(2 * n + 2 * p + q)] = g.at(i, j);
        c[static_cast<size_t>(2 * p + q)] = 1.0;
    }
    for (int j = 0; j < n; ++j) b[static_cast<size_t>(n + j)] = z[static_cast<size_t>(j)];

    return DenseLp(std::move(a), std::move(b), std::move(c)).solve();
}

// Dense stationary distribution: Gaussian elimination on (I - G^T) with the
// last row replaced by the normalization.
inline std::vector<double> stationary_dense(const tsdp::StochasticMatrix& g) {
    const int n = g.n();
    std::vector<std::vector<double>> a(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(n + 1), 0.0));
    for (int j = 0; j < n; ++j) a[static_cast<size_t>(j)][static_cast<size_t>(j)] = 1.0;
    for (int i = 0; i < n; ++i)
        for (const auto& e : g.row(i)) a[static_cast<size_t>(e.col)][static_cast<size_t>(i)] -= e.value;
    for (int j = 0; j < n; ++j) a[static_cast<size_t>(n - 1)][static_cast<size_t>(j)] = 1.0;
    a[static_cast<size_t>(n - 1)][static_cast<size_t>(n)] = 1.0;

    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<size_t>(r)][static_cast<size_t>(col)]) >
                std::abs(a[static_cast<size_t>(piv)][static_cast<size_t>(col)]))
                piv = r;
        std::swap(a[static_cast<size_t>(col)], a[static_cast<size_t>(piv)]);
        if (std::abs(a[static_cast<size_t>(col)][static_cast<size_t>(col)]) < 1e-14)
            throw std::runtime_error("oracle: singular system");
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[static_cast<size_t>(r)][static_cast<size_t>(col)] /
                             a[static_cast<size_t>(col)][static_cast<size_t>(col)];
            if (f == 0.0) continue;
            for (int j = col; j <= n; ++j)
                a[static_cast<size_t>(r)][static_cast<size_t>(j)] -= f * a[static_cast<size_t>(col)][static_cast<size_t>(j)];
        }
    }
    std::vector<double> mu(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j)
        mu[static_cast<size_t>(j)] = a[static_cast<size_t>(j)][static_cast<size_t>(n)] /
                                     a[static_cast<size_t>(j)][static_cast<size_t>(j)];
    return mu;
}

// Random small irreducible stochastic matrix with some zero pattern.
inline tsdp::StochasticMatrix random_dense_stochastic(int n, uint64_t seed,
                                                      double density = 0.7) {
    tsdp::SplitMix64 rng(seed);
    for (int attempt = 0; attempt < 256; ++attempt) {
        std::vector<tsdp::Triplet> trips;
        for (int i = 0; i < n; ++i) {
            int kept = 0;
            for (int j = 0; j < n; ++j) {
                if (rng.next_unit() <= density) {
                    trips.push_back({i, j, rng.next_unit()});
                    ++kept;
                }
            }
            if (kept == 0) trips.push_back({i, (i + 1) % n, rng.next_unit()});
        }
        // normalize rows
        std::vector<double> sums(static_cast<size_t>(n), 0.0);
        for (const auto& t : trips) sums[static_cast<size_t>(t.row)] += t.value;
        for (auto& t : trips) t.value /= sums[static_cast<size_t>(t.row)];
        tsdp::SparseMatrix m = tsdp::SparseMatrix::from_triplets(n, trips);
        for (int i = 0; i < n; ++i) {
            double s = m.row_sum(i);
            auto& row = m.mutable_row(i);
            for (auto& e : row) e.value /= s;
        }
        if (tsdp::is_irreducible(m)) return tsdp::StochasticMatrix(std::move(m));
    }
    throw std::runtime_error("could not draw an irreducible matrix");
}

// Random positive distribution.
inline tsdp::Distribution random_distribution(int n, uint64_t seed) {
    tsdp::SplitMix64 rng(seed);
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) x = 0.05 + rng.next_unit();
    return tsdp::Distribution::normalized(std::move(v));
}

}  // namespace oracle
