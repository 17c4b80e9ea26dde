#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace tsdp {

/// Sparse LU of a square basis matrix, left-looking with partial pivoting
/// (Gilbert-Peierls). Columns are factorized in the order given, producing
/// P B = L U with an implicit unit diagonal in L. Solves are in-place on
/// dense vectors; entries of L and U are stored in pivot-position space.
class SparseLu {
public:
    using Col = std::vector<std::pair<int, double>>;

    /// Returns false when the matrix is numerically singular.
    bool factorize(int m, const std::vector<Col>& cols) {
        m_ = m;
        pinv_.assign(static_cast<size_t>(m), -1);
        porder_.assign(static_cast<size_t>(m), -1);
        Lp_.assign(1, 0);
        Li_.clear();
        Lx_.clear();
        Up_.assign(1, 0);
        Ui_.clear();
        Ux_.clear();
        Udiag_.assign(static_cast<size_t>(m), 0.0);

        work_.assign(static_cast<size_t>(m), 0.0);
        mark_.assign(static_cast<size_t>(m), 0);
        generation_ = 0;
        topo_.resize(static_cast<size_t>(m));
        dfs_stack_.resize(static_cast<size_t>(m));
        dfs_edge_.resize(static_cast<size_t>(m));

        for (int k = 0; k < m; ++k) {
            const Col& b = cols[static_cast<size_t>(k)];
            ++generation_;
            int top = m;

            // Pattern of L^{-1} b restricted to existing columns.
            for (const auto& [row, val] : b) {
                (void)val;
                if (mark_[static_cast<size_t>(row)] == generation_) continue;
                top = dfs(row, top);
            }
            for (const auto& [row, val] : b) work_[static_cast<size_t>(row)] += val;

            // Numeric sweep in topological order.
            for (int p = top; p < m; ++p) {
                const int i = topo_[static_cast<size_t>(p)];
                const int col = pinv_[static_cast<size_t>(i)];
                if (col < 0) continue;
                const double xi = work_[static_cast<size_t>(i)];
                if (xi == 0.0) continue;
                for (int q = Lp_[static_cast<size_t>(col)]; q < Lp_[static_cast<size_t>(col) + 1]; ++q)
                    work_[static_cast<size_t>(Li_[static_cast<size_t>(q)])] -= Lx_[static_cast<size_t>(q)] * xi;
            }

            // Pick the largest remaining entry as pivot.
            int piv = -1;
            double pmax = 0.0;
            for (int p = top; p < m; ++p) {
                const int i = topo_[static_cast<size_t>(p)];
                if (pinv_[static_cast<size_t>(i)] >= 0) continue;
                const double a = std::abs(work_[static_cast<size_t>(i)]);
                if (a > pmax) {
                    pmax = a;
                    piv = i;
                }
            }
            if (piv < 0 || pmax < 1e-13) {
                clear_work(top);
                return false;
            }

            const double d = work_[static_cast<size_t>(piv)];
            Udiag_[static_cast<size_t>(k)] = d;
            pinv_[static_cast<size_t>(piv)] = k;
            porder_[static_cast<size_t>(k)] = piv;
            for (int p = top; p < m; ++p) {
                const int i = topo_[static_cast<size_t>(p)];
                const double v = work_[static_cast<size_t>(i)];
                if (v != 0.0 && i != piv) {
                    const int pos = pinv_[static_cast<size_t>(i)];
                    if (pos >= 0 && pos < k) {
                        Ui_.push_back(pos);
                        Ux_.push_back(v);
                    } else if (pos < 0) {
                        Li_.push_back(i);  // original row; remapped after the loop
                        Lx_.push_back(v / d);
                    }
                }
                work_[static_cast<size_t>(i)] = 0.0;
            }
            Lp_.push_back(static_cast<int>(Li_.size()));
            Up_.push_back(static_cast<int>(Ui_.size()));
        }

        for (auto& i : Li_) i = pinv_[static_cast<size_t>(i)];
        return true;
    }

    int size() const { return m_; }

    /// Solves B x = v. Input indexed by constraint row, output by basis column.
    void ftran(std::vector<double>& x) const {
        perm_buffer_.assign(static_cast<size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) perm_buffer_[static_cast<size_t>(pinv_[static_cast<size_t>(i)])] = x[static_cast<size_t>(i)];
        std::vector<double>& w = perm_buffer_;
        for (int k = 0; k < m_; ++k) {
            const double wk = w[static_cast<size_t>(k)];
            if (wk == 0.0) continue;
            for (int q = Lp_[static_cast<size_t>(k)]; q < Lp_[static_cast<size_t>(k) + 1]; ++q)
                w[static_cast<size_t>(Li_[static_cast<size_t>(q)])] -= Lx_[static_cast<size_t>(q)] * wk;
        }
        for (int k = m_ - 1; k >= 0; --k) {
            double wk = w[static_cast<size_t>(k)];
            if (wk == 0.0) continue;
            wk /= Udiag_[static_cast<size_t>(k)];
            w[static_cast<size_t>(k)] = wk;
            for (int q = Up_[static_cast<size_t>(k)]; q < Up_[static_cast<size_t>(k) + 1]; ++q)
                w[static_cast<size_t>(Ui_[static_cast<size_t>(q)])] -= Ux_[static_cast<size_t>(q)] * wk;
        }
        x = w;
    }

    /// Solves B^T y = c. Input indexed by basis column, output by constraint row.
    void btran(std::vector<double>& x) const {
        std::vector<double>& w = x;
        for (int k = 0; k < m_; ++k) {
            double s = w[static_cast<size_t>(k)];
            for (int q = Up_[static_cast<size_t>(k)]; q < Up_[static_cast<size_t>(k) + 1]; ++q)
                s -= Ux_[static_cast<size_t>(q)] * w[static_cast<size_t>(Ui_[static_cast<size_t>(q)])];
            w[static_cast<size_t>(k)] = s / Udiag_[static_cast<size_t>(k)];
        }
        for (int k = m_ - 1; k >= 0; --k) {
            double s = w[static_cast<size_t>(k)];
            for (int q = Lp_[static_cast<size_t>(k)]; q < Lp_[static_cast<size_t>(k) + 1]; ++q)
                s -= Lx_[static_cast<size_t>(q)] * w[static_cast<size_t>(Li_[static_cast<size_t>(q)])];
            w[static_cast<size_t>(k)] = s;
        }
        perm_buffer_.assign(static_cast<size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) perm_buffer_[static_cast<size_t>(i)] = w[static_cast<size_t>(pinv_[static_cast<size_t>(i)])];
        x = perm_buffer_;
    }

private:
    // Iterative DFS through the partial L graph; fills topo_[top..m) with a
    // topological order and returns the new top.
    int dfs(int start, int top) {
        int head = 0;
        dfs_stack_[0] = start;
        dfs_edge_[0] = -1;
        mark_[static_cast<size_t>(start)] = generation_;
        while (head >= 0) {
            const int v = dfs_stack_[static_cast<size_t>(head)];
            const int col = pinv_[static_cast<size_t>(v)];
            bool descended = false;
            if (col >= 0) {
                int& q = dfs_edge_[static_cast<size_t>(head)];
                if (q < 0) q = Lp_[static_cast<size_t>(col)];
                for (; q < Lp_[static_cast<size_t>(col) + 1]; ++q) {
                    const int child = Li_[static_cast<size_t>(q)];
                    if (mark_[static_cast<size_t>(child)] == generation_) continue;
                    mark_[static_cast<size_t>(child)] = generation_;
                    ++q;  // resume past this edge
                    ++head;
                    dfs_stack_[static_cast<size_t>(head)] = child;
                    dfs_edge_[static_cast<size_t>(head)] = -1;
                    descended = true;
                    break;
                }
            }
            if (!descended) {
                topo_[static_cast<size_t>(--top)] = v;
                --head;
            }
        }
        return top;
    }

    void clear_work(int top) {
        for (int p = top; p < m_; ++p) work_[static_cast<size_t>(topo_[static_cast<size_t>(p)])] = 0.0;
    }

    int m_ = 0;
    std::vector<int> Lp_, Li_;
    std::vector<double> Lx_;
    std::vector<int> Up_, Ui_;
    std::vector<double> Ux_;
    std::vector<double> Udiag_;
    std::vector<int> pinv_;
    std::vector<int> porder_;

    std::vector<double> work_;
    std::vector<uint64_t> mark_;
    uint64_t generation_ = 0;
    std::vector<int> topo_;
    std::vector<int> dfs_stack_;
    std::vector<int> dfs_edge_;
    mutable std::vector<double> perm_buffer_;
};

}  // namespace tsdp
