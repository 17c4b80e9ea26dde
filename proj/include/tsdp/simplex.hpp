#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "tsdp/lp.hpp"
#include "tsdp/sparse_lu.hpp"
#include "tsdp/types.hpp"

namespace tsdp {

struct BackendOptions {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    long max_pivots = 0;  // 0: use 50*n + 10000
    int refactor_interval = 100;
};

/// Vertex basis for warm starts: the 2n basic variable ids plus the nonbasic
/// variables sitting at their upper bound. Everything else is at lower.
struct Basis {
    std::vector<VarId> basic;
    std::vector<VarId> at_upper;
};

/// Bounded-variable primal revised simplex for the TSDP LP shape: 2n equality
/// rows, two structural nonzeros per column. Phase 1 uses artificial columns
/// with unit costs; pricing is Dantzig with Bland's rule engaged after 10n
/// degenerate pivots. A solver instance is single-use.
class SimplexSolver {
public:
    explicit SimplexSolver(const LpProblem& problem, BackendOptions opts = {})
        : p_(problem), opts_(opts) {
        m_ = p_.num_rows();
        nstruct_ = p_.num_vars();
        ntotal_ = nstruct_ + m_;
        if (opts_.max_pivots <= 0) opts_.max_pivots = 50L * p_.n + 10000;

        r1_.resize(static_cast<size_t>(ntotal_));
        r2_.resize(static_cast<size_t>(ntotal_));
        c1_.resize(static_cast<size_t>(ntotal_));
        c2_.resize(static_cast<size_t>(ntotal_));
        lower_.assign(static_cast<size_t>(ntotal_), 0.0);
        upper_.resize(static_cast<size_t>(ntotal_));
        for (int k = 0; k < nstruct_; ++k) {
            const auto& v = p_.vars[static_cast<size_t>(k)];
            const double s = v.kind == VarKind::Minus ? -1.0 : 1.0;
            r1_[static_cast<size_t>(k)] = v.i;
            c1_[static_cast<size_t>(k)] = s;
            r2_[static_cast<size_t>(k)] = p_.n + v.j;
            c2_[static_cast<size_t>(k)] = s * p_.mu_hat[static_cast<size_t>(v.i)];
            upper_[static_cast<size_t>(k)] = v.upper;
        }
        for (int r = 0; r < m_; ++r) {
            const int k = nstruct_ + r;
            r1_[static_cast<size_t>(k)] = r;
            c1_[static_cast<size_t>(k)] = 1.0;  // sign fixed at solve start
            r2_[static_cast<size_t>(k)] = r;
            c2_[static_cast<size_t>(k)] = 0.0;
            upper_[static_cast<size_t>(k)] = std::numeric_limits<double>::infinity();
        }
    }

    LpSolution solve(const Basis* warm = nullptr) {
        init_start(warm);

        const bool need_phase1 = phase1_objective() > opts_.feas_tol;
        if (need_phase1) {
            run_phase(1);
            if (phase1_objective() > opts_.feas_tol)
                throw Infeasible("phase-1 optimum is " + std::to_string(phase1_objective()));
        }
        // Pin artificials to zero for phase 2.
        for (int r = 0; r < m_; ++r) {
            const int k = nstruct_ + r;
            upper_[static_cast<size_t>(k)] = 0.0;
            fixed_[static_cast<size_t>(k)] = 1;
        }
        run_phase(2);
        return finalize(need_phase1);
    }

    long pivots() const { return pivots_; }

private:
    double cost(int k, int phase) const {
        if (phase == 1) return k >= nstruct_ ? 1.0 : 0.0;
        return k >= nstruct_ ? 0.0 : 1.0;
    }

    void init_start(const Basis* warm) {
        status_.assign(static_cast<size_t>(ntotal_), VarStatus::AtLower);
        fixed_.assign(static_cast<size_t>(ntotal_), 0);
        basic_.clear();
        if (warm && try_warm_start(*warm)) return;
        cold_start();
    }

    bool try_warm_start(const Basis& warm) {
        if (static_cast<int>(warm.basic.size()) != m_) return false;
        std::unordered_map<VarId, int, VarIdHash> index;
        index.reserve(p_.vars.size());
        for (int k = 0; k < nstruct_; ++k) index.emplace(p_.vars[static_cast<size_t>(k)].id(), k);
        auto lookup = [&](const VarId& id) -> int {
            if (id.kind == VarKind::Artificial)
                return id.i >= 0 && id.i < m_ ? nstruct_ + id.i : -1;
            auto it = index.find(id);
            return it == index.end() ? -1 : it->second;
        };

        std::vector<int> basic;
        basic.reserve(static_cast<size_t>(m_));
        for (const VarId& id : warm.basic) {
            const int k = lookup(id);
            if (k < 0) return false;
            basic.push_back(k);
        }
        std::vector<VarStatus> status(static_cast<size_t>(ntotal_), VarStatus::AtLower);
        for (const VarId& id : warm.at_upper) {
            const int k = lookup(id);
            if (k < 0) return false;
            if (!std::isfinite(upper_[static_cast<size_t>(k)])) return false;
            status[static_cast<size_t>(k)] = VarStatus::AtUpper;
        }
        for (int k : basic) status[static_cast<size_t>(k)] = VarStatus::Basic;

        basic_ = std::move(basic);
        status_ = std::move(status);
        if (!refactorize()) {
            basic_.clear();
            return false;
        }
        compute_basic_values();
        for (int r = 0; r < m_; ++r) {
            const int k = basic_[static_cast<size_t>(r)];
            if (x_basic_[static_cast<size_t>(r)] < lower_[static_cast<size_t>(k)] - opts_.feas_tol ||
                x_basic_[static_cast<size_t>(r)] > upper_[static_cast<size_t>(k)] + opts_.feas_tol) {
                basic_.clear();
                return false;  // warm basis no longer primal feasible
            }
        }
        return true;
    }

    void cold_start() {
        status_.assign(static_cast<size_t>(ntotal_), VarStatus::AtLower);
        // All structural variables start at their lower bound (zero), so the
        // initial residual is just b. Rows 0..n-1 have b = 0; crash one
        // structural column into each of them (the row-block part of the
        // basis is then diagonal, so independence is automatic) and cover the
        // remaining rows with artificials.
        std::vector<double> r(p_.rhs);
        basic_.assign(static_cast<size_t>(m_), -1);
        x_basic_.assign(static_cast<size_t>(m_), 0.0);
        std::vector<char> row_crashed(static_cast<size_t>(p_.n), 0);
        for (int k = 0; k < nstruct_; ++k) {
            const int row = r1_[static_cast<size_t>(k)];
            if (row < p_.n && !row_crashed[static_cast<size_t>(row)] &&
                p_.vars[static_cast<size_t>(k)].kind != VarKind::Minus) {
                row_crashed[static_cast<size_t>(row)] = 1;
                basic_[static_cast<size_t>(row)] = k;
                status_[static_cast<size_t>(k)] = VarStatus::Basic;
            }
        }
        for (int row = 0; row < m_; ++row) {
            if (basic_[static_cast<size_t>(row)] >= 0) continue;
            const int k = nstruct_ + row;
            c1_[static_cast<size_t>(k)] = r[static_cast<size_t>(row)] >= 0.0 ? 1.0 : -1.0;
            basic_[static_cast<size_t>(row)] = k;
            status_[static_cast<size_t>(k)] = VarStatus::Basic;
        }
        // Unused artificials never need to enter.
        for (int row = 0; row < m_; ++row) {
            const int k = nstruct_ + row;
            if (status_[static_cast<size_t>(k)] != VarStatus::Basic) {
                upper_[static_cast<size_t>(k)] = 0.0;
                fixed_[static_cast<size_t>(k)] = 1;
            }
        }
        if (!refactorize()) throw TsdpError("start basis failed to factorize");
        // Crashed variables solve to zero (their rows have b = 0) and each
        // artificial to |z_j|, so the start is feasible.
        compute_basic_values();
    }

    double phase1_objective() const {
        double s = 0.0;
        for (int r = 0; r < m_; ++r)
            if (basic_[static_cast<size_t>(r)] >= nstruct_) s += x_basic_[static_cast<size_t>(r)];
        return s;
    }

    bool refactorize() {
        std::vector<SparseLu::Col> cols(static_cast<size_t>(m_));
        for (int r = 0; r < m_; ++r) {
            const int k = basic_[static_cast<size_t>(r)];
            auto& col = cols[static_cast<size_t>(r)];
            col.push_back({r1_[static_cast<size_t>(k)], c1_[static_cast<size_t>(k)]});
            if (c2_[static_cast<size_t>(k)] != 0.0) col.push_back({r2_[static_cast<size_t>(k)], c2_[static_cast<size_t>(k)]});
        }
        etas_.clear();
        return lu_.factorize(m_, cols);
    }

    void compute_basic_values() {
        std::vector<double> r(p_.rhs);
        for (int k = 0; k < ntotal_; ++k) {
            if (status_[static_cast<size_t>(k)] != VarStatus::AtUpper) continue;
            const double v = upper_[static_cast<size_t>(k)];
            if (v == 0.0) continue;
            r[static_cast<size_t>(r1_[static_cast<size_t>(k)])] -= c1_[static_cast<size_t>(k)] * v;
            if (c2_[static_cast<size_t>(k)] != 0.0) r[static_cast<size_t>(r2_[static_cast<size_t>(k)])] -= c2_[static_cast<size_t>(k)] * v;
        }
        ftran(r);
        x_basic_ = std::move(r);
    }

    void ftran(std::vector<double>& v) const {
        lu_.ftran(v);
        for (const auto& eta : etas_) {
            const double xr = v[static_cast<size_t>(eta.pivot_pos)] / eta.pivot_value;
            v[static_cast<size_t>(eta.pivot_pos)] = xr;
            if (xr == 0.0) continue;
            for (const auto& [pos, val] : eta.entries) v[static_cast<size_t>(pos)] -= val * xr;
        }
    }

    void btran(std::vector<double>& v) const {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = v[static_cast<size_t>(it->pivot_pos)];
            for (const auto& [pos, val] : it->entries) s -= val * v[static_cast<size_t>(pos)];
            v[static_cast<size_t>(it->pivot_pos)] = s / it->pivot_value;
        }
        lu_.btran(v);
    }

    std::vector<double> duals(int phase) const {
        std::vector<double> cb(static_cast<size_t>(m_));
        for (int r = 0; r < m_; ++r) cb[static_cast<size_t>(r)] = cost(basic_[static_cast<size_t>(r)], phase);
        btran(cb);
        return cb;
    }

    // Dantzig pricing; Bland's rule (first violating index) once the solve has
    // accumulated too many degenerate pivots.
    int price(const std::vector<double>& y, int phase, bool bland) const {
        int best = -1;
        double best_viol = opts_.opt_tol;
        const double struct_cost = phase == 2 ? 1.0 : 0.0;
        const double* yd = y.data();
        for (int k = 0; k < nstruct_; ++k) {
            const VarStatus st = status_[static_cast<size_t>(k)];
            if (st == VarStatus::Basic || fixed_[static_cast<size_t>(k)]) continue;
            const double d = struct_cost - c1_[static_cast<size_t>(k)] * yd[r1_[static_cast<size_t>(k)]] -
                             c2_[static_cast<size_t>(k)] * yd[r2_[static_cast<size_t>(k)]];
            const double viol = st == VarStatus::AtLower ? -d : d;
            if (viol > best_viol) {
                if (bland) return k;
                best_viol = viol;
                best = k;
            }
        }
        if (phase == 1) {
            for (int k = nstruct_; k < ntotal_; ++k) {
                const VarStatus st = status_[static_cast<size_t>(k)];
                if (st == VarStatus::Basic || fixed_[static_cast<size_t>(k)]) continue;
                const double d = 1.0 - c1_[static_cast<size_t>(k)] * yd[r1_[static_cast<size_t>(k)]];
                const double viol = st == VarStatus::AtLower ? -d : d;
                if (viol > best_viol) {
                    if (bland) return k;
                    best_viol = viol;
                    best = k;
                }
            }
        }
        return best;
    }

    void run_phase(int phase) {
        long degenerate = 0;
        const long bland_after = 10L * p_.n;
        while (true) {
            if (phase == 1 && phase1_objective() <= 1e-12) return;
            if (pivots_ >= opts_.max_pivots)
                throw PivotLimit("pivot limit " + std::to_string(opts_.max_pivots) + " exceeded");

            const bool bland = degenerate > bland_after;
            const std::vector<double> y = duals(phase);
            const int q = price(y, phase, bland);
            if (q < 0) return;  // optimal for this phase

            // Direction of the entering variable and the basic response.
            const double sigma = status_[static_cast<size_t>(q)] == VarStatus::AtLower ? 1.0 : -1.0;
            std::vector<double>& w = direction_;
            w.assign(static_cast<size_t>(m_), 0.0);
            w[static_cast<size_t>(r1_[static_cast<size_t>(q)])] = c1_[static_cast<size_t>(q)];
            if (c2_[static_cast<size_t>(q)] != 0.0) w[static_cast<size_t>(r2_[static_cast<size_t>(q)])] += c2_[static_cast<size_t>(q)];
            ftran(w);
            pattern_.clear();
            for (int r = 0; r < m_; ++r)
                if (w[static_cast<size_t>(r)] != 0.0) pattern_.push_back(r);

            const double range = upper_[static_cast<size_t>(q)] - lower_[static_cast<size_t>(q)];
            double t = range;
            int leave = -1;
            bool leave_at_upper = false;
            double leave_pivot = 0.0;
            for (int r : pattern_) {
                const double wr = w[static_cast<size_t>(r)];
                if (std::abs(wr) <= 1e-9) continue;
                const int bk = basic_[static_cast<size_t>(r)];
                const double delta = -sigma * wr;
                double cap;
                bool to_upper;
                if (delta > 0.0) {
                    const double u = upper_[static_cast<size_t>(bk)];
                    if (!std::isfinite(u)) continue;
                    cap = (u - x_basic_[static_cast<size_t>(r)]) / delta;
                    to_upper = true;
                } else {
                    cap = (x_basic_[static_cast<size_t>(r)] - lower_[static_cast<size_t>(bk)]) / (-delta);
                    to_upper = false;
                }
                if (cap < 0.0) cap = 0.0;
                const bool better =
                    cap < t - 1e-12 ||
                    (cap < t + 1e-12 && leave >= 0 &&
                     (bland ? bk < basic_[static_cast<size_t>(leave)]
                            : std::abs(wr) > std::abs(leave_pivot)));
                if (better) {
                    t = cap;
                    leave = r;
                    leave_at_upper = to_upper;
                    leave_pivot = wr;
                }
            }

            if (!std::isfinite(t))
                throw Unbounded("LP is unbounded; the TSDP polytope should be bounded");

            if (t <= 1e-12)
                ++degenerate;
            else
                degenerate = 0;

            // Apply the step.
            if (t != 0.0)
                for (int r : pattern_) x_basic_[static_cast<size_t>(r)] -= sigma * t * w[static_cast<size_t>(r)];

            if (leave < 0) {
                // Bound flip: the entering variable traverses its whole range.
                status_[static_cast<size_t>(q)] = status_[static_cast<size_t>(q)] == VarStatus::AtLower
                                                      ? VarStatus::AtUpper
                                                      : VarStatus::AtLower;
            } else {
                const int old = basic_[static_cast<size_t>(leave)];
                status_[static_cast<size_t>(old)] = leave_at_upper ? VarStatus::AtUpper : VarStatus::AtLower;
                if (old >= nstruct_) {
                    // Artificials never re-enter once they leave the basis.
                    upper_[static_cast<size_t>(old)] = 0.0;
                    fixed_[static_cast<size_t>(old)] = 1;
                    status_[static_cast<size_t>(old)] = VarStatus::AtLower;
                }
                const double enter_from = status_[static_cast<size_t>(q)] == VarStatus::AtLower
                                              ? lower_[static_cast<size_t>(q)]
                                              : upper_[static_cast<size_t>(q)];
                basic_[static_cast<size_t>(leave)] = q;
                status_[static_cast<size_t>(q)] = VarStatus::Basic;
                x_basic_[static_cast<size_t>(leave)] = enter_from + sigma * t;

                etas_.push_back(Eta{leave, w[static_cast<size_t>(leave)], {}});
                auto& entries = etas_.back().entries;
                entries.reserve(pattern_.size());
                for (int r : pattern_)
                    if (r != leave && w[static_cast<size_t>(r)] != 0.0) entries.push_back({r, w[static_cast<size_t>(r)]});

                if (static_cast<int>(etas_.size()) >= opts_.refactor_interval) {
                    if (!refactorize()) throw PivotLimit("basis became numerically singular");
                    compute_basic_values();
                }
            }
            ++pivots_;
        }
    }

    LpSolution finalize(bool used_phase1) {
        if (!refactorize()) throw PivotLimit("final basis failed to factorize");
        compute_basic_values();

        LpSolution sol;
        sol.pivots = pivots_;
        sol.used_phase1 = used_phase1;
        sol.primal.assign(static_cast<size_t>(nstruct_), 0.0);
        sol.status.assign(static_cast<size_t>(nstruct_), VarStatus::AtLower);
        for (int k = 0; k < nstruct_; ++k) {
            sol.status[static_cast<size_t>(k)] = status_[static_cast<size_t>(k)];
            if (status_[static_cast<size_t>(k)] == VarStatus::AtUpper) sol.primal[static_cast<size_t>(k)] = upper_[static_cast<size_t>(k)];
        }
        for (int r = 0; r < m_; ++r) {
            const int k = basic_[static_cast<size_t>(r)];
            if (k < nstruct_) sol.primal[static_cast<size_t>(k)] = x_basic_[static_cast<size_t>(r)];
        }
        double obj = 0.0, comp = 0.0;
        for (int k = 0; k < nstruct_; ++k) {
            const double v = sol.primal[static_cast<size_t>(k)];
            const double t = obj + v;
            comp += (obj >= v) ? (obj - t) + v : (v - t) + obj;
            obj = t;
        }
        sol.objective = obj + comp;

        std::vector<double> y = duals(2);
        sol.y0.assign(y.begin(), y.begin() + p_.n);
        sol.ymu.assign(y.begin() + p_.n, y.end());

        // ||Ax - b||_inf for the returned point.
        std::vector<double> res(p_.rhs);
        for (int k = 0; k < ntotal_; ++k) {
            double v;
            if (status_[static_cast<size_t>(k)] == VarStatus::Basic)
                continue;
            else if (status_[static_cast<size_t>(k)] == VarStatus::AtUpper)
                v = upper_[static_cast<size_t>(k)];
            else
                v = lower_[static_cast<size_t>(k)];
            if (v == 0.0) continue;
            res[static_cast<size_t>(r1_[static_cast<size_t>(k)])] -= c1_[static_cast<size_t>(k)] * v;
            if (c2_[static_cast<size_t>(k)] != 0.0) res[static_cast<size_t>(r2_[static_cast<size_t>(k)])] -= c2_[static_cast<size_t>(k)] * v;
        }
        for (int r = 0; r < m_; ++r) {
            const int k = basic_[static_cast<size_t>(r)];
            const double v = x_basic_[static_cast<size_t>(r)];
            if (v == 0.0) continue;
            res[static_cast<size_t>(r1_[static_cast<size_t>(k)])] -= c1_[static_cast<size_t>(k)] * v;
            if (c2_[static_cast<size_t>(k)] != 0.0) res[static_cast<size_t>(r2_[static_cast<size_t>(k)])] -= c2_[static_cast<size_t>(k)] * v;
        }
        for (double v : res) sol.primal_residual = std::max(sol.primal_residual, std::abs(v));
        return sol;
    }

public:
    /// Basis snapshot of the final vertex, usable to warm start a later solve.
    Basis basis_snapshot() const {
        Basis b;
        b.basic.reserve(static_cast<size_t>(m_));
        for (int r = 0; r < m_; ++r) {
            const int k = basic_[static_cast<size_t>(r)];
            b.basic.push_back(k < nstruct_ ? p_.vars[static_cast<size_t>(k)].id()
                                           : VarId{VarKind::Artificial, k - nstruct_, -1});
        }
        for (int k = 0; k < nstruct_; ++k)
            if (status_[static_cast<size_t>(k)] == VarStatus::AtUpper)
                b.at_upper.push_back(p_.vars[static_cast<size_t>(k)].id());
        return b;
    }

private:
    struct Eta {
        int pivot_pos;
        double pivot_value;
        std::vector<std::pair<int, double>> entries;
    };

    LpProblem p_;
    BackendOptions opts_;
    int m_ = 0;
    int nstruct_ = 0;
    int ntotal_ = 0;

    std::vector<int> r1_, r2_;
    std::vector<double> c1_, c2_;
    std::vector<double> lower_, upper_;
    std::vector<VarStatus> status_;
    std::vector<char> fixed_;  // pinned variables the pricing loop skips
    std::vector<int> basic_;
    std::vector<double> x_basic_;
    std::vector<double> direction_;
    std::vector<int> pattern_;

    SparseLu lu_;
    std::vector<Eta> etas_;
    long pivots_ = 0;
};

/// Solves the TSDP LP on the given support and maps the optimum back to a
/// perturbation. Returns the perturbation, the LP solution and (optionally)
/// the final basis for warm starting.
inline std::pair<Perturbation, LpSolution> solve_tsdp_lp(const StochasticMatrix& g,
                                                         const Distribution& mu_hat,
                                                         const SupportSet& omega,
                                                         const BackendOptions& opts = {},
                                                         const Basis* warm = nullptr,
                                                         Basis* basis_out = nullptr) {
    const LpProblem problem = build_lp(g, mu_hat, omega);
    SimplexSolver solver(problem, opts);
    LpSolution sol = solver.solve(warm);
    if (basis_out) *basis_out = solver.basis_snapshot();
    Perturbation delta = perturbation_from_solution(problem, sol);
    return {std::move(delta), std::move(sol)};
}

}  // namespace tsdp
