#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tsdp {

// Row sums of a stochastic matrix must match 1 to this absolute tolerance.
inline constexpr double kTolStoch = 1e-12;
// Feasibility tolerance for perturbations (zero row sums, nonnegativity of G+Delta).
inline constexpr double kTolFeas = 1e-10;

struct TsdpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : TsdpError { using TsdpError::TsdpError; };
struct NotIrreducible : TsdpError { using TsdpError::TsdpError; };
struct NotStationary : TsdpError { using TsdpError::TsdpError; };
struct OutOfRange : TsdpError { using TsdpError::TsdpError; };
struct NegativeEntry : TsdpError { using TsdpError::TsdpError; };
struct RowSumViolation : TsdpError { using TsdpError::TsdpError; };
struct EmptySupport : TsdpError { using TsdpError::TsdpError; };
struct Infeasible : TsdpError { using TsdpError::TsdpError; };
struct Unbounded : TsdpError { using TsdpError::TsdpError; };
struct PivotLimit : TsdpError { using TsdpError::TsdpError; };
struct BadArity : TsdpError { using TsdpError::TsdpError; };
struct NonPositiveTarget : TsdpError { using TsdpError::TsdpError; };
struct EmptyRow : TsdpError { using TsdpError::TsdpError; };
struct Reducible : TsdpError { using TsdpError::TsdpError; };

struct ParseError : TsdpError {
    ParseError(const std::string& what, long line)
        : TsdpError(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
    long line_number;
};

/// One stored entry of a sparse row: column index and value.
struct Entry {
    int col;
    double value;
};

struct Triplet {
    int row;
    int col;
    double value;
};

/// Row-oriented sparse square matrix. Within each row, entries are sorted by
/// column and exact zeros are never stored.
class SparseMatrix {
public:
    SparseMatrix() : n_(0) {}
    explicit SparseMatrix(int n) : n_(n), rows_(static_cast<size_t>(n)) {}

    /// Builds from (row, col, value) triplets; duplicates are summed, entries
    /// that sum to exactly zero are dropped.
    static SparseMatrix from_triplets(int n, std::vector<Triplet> triplets) {
        SparseMatrix m(n);
        std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        for (size_t p = 0; p < triplets.size();) {
            const int i = triplets[p].row;
            const int j = triplets[p].col;
            if (i < 0 || i >= n || j < 0 || j >= n)
                throw OutOfRange("triplet index out of range");
            double v = 0.0;
            while (p < triplets.size() && triplets[p].row == i && triplets[p].col == j)
                v += triplets[p++].value;
            if (v != 0.0) m.rows_[static_cast<size_t>(i)].push_back({j, v});
        }
        return m;
    }

    static SparseMatrix identity(int n) {
        SparseMatrix m(n);
        for (int i = 0; i < n; ++i) m.rows_[static_cast<size_t>(i)].push_back({i, 1.0});
        return m;
    }

    int n() const { return n_; }

    size_t nnz() const {
        size_t c = 0;
        for (const auto& r : rows_) c += r.size();
        return c;
    }

    const std::vector<Entry>& row(int i) const { return rows_[static_cast<size_t>(i)]; }

    /// Value at (i, j); zero if not stored.
    double at(int i, int j) const {
        const auto& r = rows_[static_cast<size_t>(i)];
        auto it = std::lower_bound(r.begin(), r.end(), j,
                                   [](const Entry& e, int col) { return e.col < col; });
        return (it != r.end() && it->col == j) ? it->value : 0.0;
    }

    bool has(int i, int j) const {
        const auto& r = rows_[static_cast<size_t>(i)];
        auto it = std::lower_bound(r.begin(), r.end(), j,
                                   [](const Entry& e, int col) { return e.col < col; });
        return it != r.end() && it->col == j;
    }

    SparseMatrix transpose() const {
        std::vector<int> counts(static_cast<size_t>(n_), 0);
        for (const auto& r : rows_)
            for (const auto& e : r) ++counts[static_cast<size_t>(e.col)];
        SparseMatrix t(n_);
        for (int j = 0; j < n_; ++j) t.rows_[static_cast<size_t>(j)].reserve(static_cast<size_t>(counts[static_cast<size_t>(j)]));
        for (int i = 0; i < n_; ++i)
            for (const auto& e : rows_[static_cast<size_t>(i)])
                t.rows_[static_cast<size_t>(e.col)].push_back({i, e.value});
        return t;
    }

    /// this + other, dropping entries that cancel exactly.
    SparseMatrix add(const SparseMatrix& other) const {
        if (other.n_ != n_) throw DimensionMismatch("matrix dimensions differ");
        SparseMatrix s(n_);
        for (int i = 0; i < n_; ++i) {
            const auto& a = rows_[static_cast<size_t>(i)];
            const auto& b = other.rows_[static_cast<size_t>(i)];
            auto& out = s.rows_[static_cast<size_t>(i)];
            out.reserve(a.size() + b.size());
            size_t pa = 0, pb = 0;
            while (pa < a.size() || pb < b.size()) {
                if (pb == b.size() || (pa < a.size() && a[pa].col < b[pb].col)) {
                    out.push_back(a[pa++]);
                } else if (pa == a.size() || b[pb].col < a[pa].col) {
                    out.push_back(b[pb++]);
                } else {
                    const double v = a[pa].value + b[pb].value;
                    if (v != 0.0) out.push_back({a[pa].col, v});
                    ++pa;
                    ++pb;
                }
            }
        }
        return s;
    }

    SparseMatrix scaled(double c) const {
        SparseMatrix s = *this;
        if (c == 0.0) {
            for (auto& r : s.rows_) r.clear();
            return s;
        }
        for (auto& r : s.rows_)
            for (auto& e : r) e.value *= c;
        return s;
    }

    SparseMatrix negated() const { return scaled(-1.0); }

    double row_sum(int i) const {
        // Neumaier-compensated sum; row sums feed tolerance checks.
        double s = 0.0, comp = 0.0;
        for (const auto& e : rows_[static_cast<size_t>(i)]) {
            const double t = s + e.value;
            comp += (std::abs(s) >= std::abs(e.value)) ? (s - t) + e.value : (e.value - t) + s;
            s = t;
        }
        return s + comp;
    }

    std::vector<Triplet> to_triplets() const {
        std::vector<Triplet> out;
        out.reserve(nnz());
        for (int i = 0; i < n_; ++i)
            for (const auto& e : rows_[static_cast<size_t>(i)]) out.push_back({i, e.col, e.value});
        return out;
    }

    // Mutable access for builders that construct rows directly. Rows must be
    // left sorted by column with no zeros.
    std::vector<Entry>& mutable_row(int i) { return rows_[static_cast<size_t>(i)]; }

private:
    int n_;
    std::vector<std::vector<Entry>> rows_;
};

/// Component-wise l1 norm: sum of absolute values of all stored entries.
inline double l1_norm(const SparseMatrix& m) {
    double s = 0.0, comp = 0.0;
    for (int i = 0; i < m.n(); ++i) {
        for (const auto& e : m.row(i)) {
            const double v = std::abs(e.value);
            const double t = s + v;
            comp += (s >= v) ? (s - t) + v : (v - t) + s;
            s = t;
        }
    }
    return s + comp;
}

struct RowIssue {
    int row;
    double sum_deviation;
};

struct ValidationReport {
    bool ok = true;
    std::vector<RowIssue> row_sum_violations;     // |sum - 1| > kTolStoch
    std::vector<Triplet> negative_entries;        // stored value < 0
    std::vector<Triplet> explicit_zeros;          // stored value == 0
    std::vector<Triplet> out_of_order;            // unsorted or out-of-range columns
    double max_row_sum_deviation = 0.0;
};

/// Diagnostic check of the stochastic-matrix invariants: nonnegative stored
/// values, no explicit zeros, sorted column indices, unit row sums.
inline ValidationReport validate_stochastic(const SparseMatrix& m) {
    ValidationReport rep;
    for (int i = 0; i < m.n(); ++i) {
        const auto& r = m.row(i);
        int prev = -1;
        for (const auto& e : r) {
            if (e.col <= prev || e.col >= m.n()) rep.out_of_order.push_back({i, e.col, e.value});
            prev = e.col;
            if (e.value < 0.0) rep.negative_entries.push_back({i, e.col, e.value});
            if (e.value == 0.0) rep.explicit_zeros.push_back({i, e.col, e.value});
        }
        const double dev = m.row_sum(i) - 1.0;
        rep.max_row_sum_deviation = std::max(rep.max_row_sum_deviation, std::abs(dev));
        if (std::abs(dev) > kTolStoch) rep.row_sum_violations.push_back({i, dev});
    }
    rep.ok = rep.row_sum_violations.empty() && rep.negative_entries.empty() &&
             rep.explicit_zeros.empty() && rep.out_of_order.empty();
    return rep;
}

/// Sparse row-stochastic matrix. Construction validates the invariants.
class StochasticMatrix {
public:
    StochasticMatrix() = default;

    explicit StochasticMatrix(SparseMatrix m) : m_(std::move(m)) {
        const ValidationReport rep = validate_stochastic(m_);
        if (!rep.ok) {
            if (!rep.negative_entries.empty())
                throw NegativeEntry("stochastic matrix has a negative entry at row " +
                                    std::to_string(rep.negative_entries.front().row));
            throw RowSumViolation("row sums deviate from 1 by up to " +
                                  std::to_string(rep.max_row_sum_deviation));
        }
    }

    static StochasticMatrix from_triplets(int n, std::vector<Triplet> t) {
        return StochasticMatrix(SparseMatrix::from_triplets(n, std::move(t)));
    }

    const SparseMatrix& matrix() const { return m_; }
    int n() const { return m_.n(); }
    size_t nnz() const { return m_.nnz(); }
    const std::vector<Entry>& row(int i) const { return m_.row(i); }
    double at(int i, int j) const { return m_.at(i, j); }

private:
    SparseMatrix m_;
};

/// Strictly positive probability vector summing to one.
class Distribution {
public:
    Distribution() = default;

    explicit Distribution(std::vector<double> values) : v_(std::move(values)) {
        double s = 0.0;
        for (double x : v_) {
            if (!(x > 0.0)) throw NonPositiveTarget("distribution entries must be positive");
            s += x;
        }
        if (std::abs(s - 1.0) > kTolStoch)
            throw RowSumViolation("distribution sums to " + std::to_string(s));
    }

    /// Normalizes a positive vector to unit sum.
    static Distribution normalized(std::vector<double> values) {
        double s = 0.0;
        for (double x : values) {
            if (!(x > 0.0)) throw NonPositiveTarget("distribution entries must be positive");
            s += x;
        }
        for (double& x : values) x /= s;
        // Nudge the largest entry so the sum is exactly 1 in double arithmetic.
        double s2 = 0.0;
        for (double x : values) s2 += x;
        auto it = std::max_element(values.begin(), values.end());
        *it += 1.0 - s2;
        return Distribution(std::move(values));
    }

    static Distribution uniform(int n) {
        return normalized(std::vector<double>(static_cast<size_t>(n), 1.0));
    }

    int n() const { return static_cast<int>(v_.size()); }
    double operator[](int i) const { return v_[static_cast<size_t>(i)]; }
    const std::vector<double>& values() const { return v_; }

private:
    std::vector<double> v_;
};

enum class SupportKind { Full, GPlusI, Explicit };

/// Set of index pairs constraining where a perturbation may be non-zero.
/// kind == Full represents all n^2 pairs without materializing them.
class SupportSet {
public:
    SupportSet() : kind_(SupportKind::Explicit), n_(0), size_(0) {}

    static SupportSet full(int n) {
        SupportSet s;
        s.kind_ = SupportKind::Full;
        s.n_ = n;
        s.size_ = static_cast<size_t>(n) * static_cast<size_t>(n);
        return s;
    }

    static SupportSet explicit_pairs(int n, const std::vector<std::pair<int, int>>& pairs) {
        SupportSet s;
        s.kind_ = SupportKind::Explicit;
        s.n_ = n;
        s.rows_.assign(static_cast<size_t>(n), {});
        for (const auto& [i, j] : pairs) {
            if (i < 0 || i >= n || j < 0 || j >= n) throw OutOfRange("support pair out of range");
            s.rows_[static_cast<size_t>(i)].push_back(j);
        }
        s.finalize_rows();
        return s;
    }

    SupportKind kind() const { return kind_; }
    int n() const { return n_; }
    size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    bool contains(int i, int j) const {
        if (i < 0 || i >= n_ || j < 0 || j >= n_) return false;
        if (kind_ == SupportKind::Full) return true;
        const auto& r = rows_[static_cast<size_t>(i)];
        return std::binary_search(r.begin(), r.end(), j);
    }

    /// Visits every pair in row-major order. Full sets are enumerated lazily.
    template <typename F>
    void for_each(F&& f) const {
        if (kind_ == SupportKind::Full) {
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) f(i, j);
            return;
        }
        for (int i = 0; i < n_; ++i)
            for (int j : rows_[static_cast<size_t>(i)]) f(i, j);
    }

    /// Columns present in row i (explicit kinds only).
    const std::vector<int>& row(int i) const {
        if (kind_ == SupportKind::Full)
            throw OutOfRange("row access on a Full support set");
        return rows_[static_cast<size_t>(i)];
    }

    friend SupportSet support(const SparseMatrix&, bool);

private:
    void finalize_rows() {
        size_ = 0;
        for (auto& r : rows_) {
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
            size_ += r.size();
        }
    }

    SupportKind kind_;
    int n_;
    size_t size_;
    std::vector<std::vector<int>> rows_;
};

/// supp(M), or supp(M + I) when include_diagonal is set.
inline SupportSet support(const SparseMatrix& m, bool include_diagonal) {
    SupportSet s;
    s.kind_ = include_diagonal ? SupportKind::GPlusI : SupportKind::Explicit;
    s.n_ = m.n();
    s.rows_.assign(static_cast<size_t>(m.n()), {});
    for (int i = 0; i < m.n(); ++i) {
        auto& r = s.rows_[static_cast<size_t>(i)];
        r.reserve(m.row(i).size() + (include_diagonal ? 1 : 0));
        for (const auto& e : m.row(i)) r.push_back(e.col);
        if (include_diagonal) r.push_back(i);
    }
    s.finalize_rows();
    return s;
}

inline SupportSet support(const StochasticMatrix& m, bool include_diagonal) {
    return support(m.matrix(), include_diagonal);
}

/// Nonnegative split of a perturbation: Delta = delta0 + plus - minus, with
/// delta0 supported outside supp(G) and plus/minus inside supp(G).
struct PerturbationSplit {
    SparseMatrix delta0;
    SparseMatrix plus;
    SparseMatrix minus;
};

/// Sparse signed perturbation with zero row sums.
struct Perturbation {
    SparseMatrix delta;
    std::optional<PerturbationSplit> split;

    int n() const { return delta.n(); }

    static Perturbation zero(int n) { return Perturbation{SparseMatrix(n), std::nullopt}; }

    double max_row_sum_deviation() const {
        double d = 0.0;
        for (int i = 0; i < delta.n(); ++i) d = std::max(d, std::abs(delta.row_sum(i)));
        return d;
    }
};

/// G + Delta with tiny entries clamped to zero and rows renormalized; the
/// renormalization may only absorb a deviation within kTolStoch.
inline StochasticMatrix apply_perturbation(const StochasticMatrix& g, const Perturbation& d) {
    if (d.n() != g.n()) throw DimensionMismatch("perturbation dimension differs from matrix");
    if (d.max_row_sum_deviation() > kTolFeas)
        throw RowSumViolation("perturbation row sums deviate from 0 beyond tolerance");
    SparseMatrix sum = g.matrix().add(d.delta);
    const int n = sum.n();
    for (int i = 0; i < n; ++i) {
        auto& row = sum.mutable_row(i);
        for (const auto& e : row)
            if (e.value < -kTolFeas)
                throw NegativeEntry("entry (" + std::to_string(i + 1) + "," +
                                    std::to_string(e.col + 1) + ") = " + std::to_string(e.value));
        row.erase(std::remove_if(row.begin(), row.end(),
                                 [](const Entry& e) { return std::abs(e.value) <= kTolFeas; }),
                  row.end());
        const double s = sum.row_sum(i);
        if (std::abs(s - 1.0) > kTolStoch)
            throw RowSumViolation("row " + std::to_string(i + 1) + " sums to " + std::to_string(s));
        if (s != 1.0)
            for (auto& e : row) e.value /= s;
    }
    return StochasticMatrix(std::move(sum));
}

}  // namespace tsdp
