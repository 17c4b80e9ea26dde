#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tsdp/markov.hpp"
#include "tsdp/types.hpp"

namespace tsdp {

namespace detail {

inline bool is_blank(const std::string& s) {
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace detail

/// Reads a coordinate-format real general Matrix Market file (1-based on
/// disk). Duplicate entries are summed per the format convention.
inline SparseMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    std::string line;
    long lineno = 0;

    if (!std::getline(in, line)) throw ParseError("empty file", 0);
    ++lineno;
    {
        std::istringstream hs(line);
        std::string banner, object, format, field, symmetry;
        hs >> banner >> object >> format >> field >> symmetry;
        if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate" ||
            field != "real" || symmetry != "general")
            throw ParseError("expected '%%MatrixMarket matrix coordinate real general'", lineno);
    }

    long rows = -1, cols = -1, entries = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        if (detail::is_blank(line)) continue;
        std::istringstream ls(line);
        if (!(ls >> rows >> cols >> entries)) throw ParseError("bad size line", lineno);
        break;
    }
    if (rows < 0) throw ParseError("missing size line", lineno);
    if (rows != cols) throw DimensionMismatch("matrix in '" + path + "' is not square");

    std::vector<Triplet> trips;
    trips.reserve(static_cast<size_t>(entries));
    long seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        if (detail::is_blank(line)) continue;
        std::istringstream ls(line);
        long i, j;
        double v;
        if (!(ls >> i >> j >> v)) throw ParseError("bad entry line", lineno);
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw ParseError("index out of range", lineno);
        trips.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v});
        ++seen;
    }
    if (seen != entries)
        throw ParseError("entry count mismatch: header says " + std::to_string(entries) +
                             ", file has " + std::to_string(seen),
                         lineno);
    return SparseMatrix::from_triplets(static_cast<int>(rows), std::move(trips));
}

inline void write_matrix_market(const std::string& path, const SparseMatrix& m) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing", 0);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.n() << " " << m.n() << " " << m.nnz() << "\n";
    char buf[64];
    for (int i = 0; i < m.n(); ++i) {
        for (const auto& e : m.row(i)) {
            std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i + 1, e.col + 1, e.value);
            out << buf;
        }
    }
    if (!out) throw ParseError("write to '" + path + "' failed", 0);
}

/// Plain vector file: whitespace-separated values, '%' comment lines.
inline std::vector<double> read_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    std::vector<double> v;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        std::istringstream ls(line);
        double x;
        while (ls >> x) v.push_back(x);
        if (!ls.eof()) throw ParseError("bad value", lineno);
    }
    return v;
}

inline void write_vector(const std::string& path, const std::vector<double>& v) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing", 0);
    char buf[32];
    for (double x : v) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", x);
        out << buf;
    }
}

struct EdgeListOptions {
    bool weighted = false;
    bool symmetrize = false;
    /// Restrict to the largest strongly connected component instead of
    /// raising Reducible.
    bool largest_scc = false;
};

struct EdgeListResult {
    StochasticMatrix matrix;
    /// Original node ids (1-based) kept after an SCC restriction.
    std::vector<long> kept_nodes;
};

/// Reads a 1-based "i j [w]" edge list ('%' comments), accumulates duplicate
/// edges, drops self-loops, row-normalizes. Errors on empty rows; reducible
/// graphs error unless largest_scc is set.
inline EdgeListResult read_edge_list(const std::string& path, const EdgeListOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    struct RawEdge {
        long u, v;
        double w;
    };
    std::vector<RawEdge> edges;
    long nmax = 0;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && (line[0] == '%' || line[0] == '#')) continue;
        if (detail::is_blank(line)) continue;
        std::istringstream ls(line);
        long u, v;
        double w = 1.0;
        if (!(ls >> u >> v)) throw ParseError("bad edge line", lineno);
        if (opts.weighted && !(ls >> w)) throw ParseError("missing weight", lineno);
        if (u < 1 || v < 1) throw ParseError("node ids are 1-based", lineno);
        nmax = std::max({nmax, u, v});
        if (u == v) continue;
        edges.push_back({u, v, w});
        if (opts.symmetrize) edges.push_back({v, u, w});
    }
    if (nmax == 0) throw ParseError("no edges", lineno);

    const int n = static_cast<int>(nmax);
    std::vector<Triplet> trips;
    trips.reserve(edges.size());
    for (const auto& e : edges)
        trips.push_back({static_cast<int>(e.u - 1), static_cast<int>(e.v - 1), e.w});
    SparseMatrix adj = SparseMatrix::from_triplets(n, std::move(trips));

    std::vector<long> kept;
    int ncomp = 0;
    std::vector<int> comp = strongly_connected_components(adj, &ncomp);
    if (ncomp > 1) {
        if (!opts.largest_scc) {
            for (int i = 0; i < n; ++i)
                if (adj.row(i).empty())
                    throw EmptyRow("node " + std::to_string(i + 1) + " has no outgoing edges");
            throw Reducible("graph has " + std::to_string(ncomp) + " strongly connected components");
        }
        std::vector<long> sizes(static_cast<size_t>(ncomp), 0);
        for (int i = 0; i < n; ++i) ++sizes[static_cast<size_t>(comp[static_cast<size_t>(i)])];
        int big = 0;
        for (int c = 1; c < ncomp; ++c)
            if (sizes[static_cast<size_t>(c)] > sizes[static_cast<size_t>(big)]) big = c;
        std::vector<int> remap(static_cast<size_t>(n), -1);
        int nn = 0;
        for (int i = 0; i < n; ++i)
            if (comp[static_cast<size_t>(i)] == big) {
                remap[static_cast<size_t>(i)] = nn++;
                kept.push_back(i + 1);
            }
        std::vector<Triplet> sub;
        for (int i = 0; i < n; ++i) {
            if (remap[static_cast<size_t>(i)] < 0) continue;
            for (const auto& e : adj.row(i))
                if (remap[static_cast<size_t>(e.col)] >= 0)
                    sub.push_back({remap[static_cast<size_t>(i)], remap[static_cast<size_t>(e.col)], e.value});
        }
        adj = SparseMatrix::from_triplets(nn, std::move(sub));
    } else {
        for (int i = 0; i < n; ++i) kept.push_back(i + 1);
    }

    for (int i = 0; i < adj.n(); ++i) {
        auto& row = adj.mutable_row(i);
        if (row.empty())
            throw EmptyRow("node " + std::to_string(kept[static_cast<size_t>(i)]) +
                           " has no outgoing edges");
        double s = 0.0;
        for (const auto& e : row) s += e.value;
        for (auto& e : row) e.value /= s;
        double s2 = 0.0;
        for (const auto& e : row) s2 += e.value;
        row.back().value += 1.0 - s2;
    }
    return EdgeListResult{StochasticMatrix(std::move(adj)), std::move(kept)};
}

/// Reads a support set as 1-based "i j" pairs ('%' comments).
inline SupportSet read_support(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    std::vector<std::pair<int, int>> pairs;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        if (detail::is_blank(line)) continue;
        std::istringstream ls(line);
        long i, j;
        if (!(ls >> i >> j)) throw ParseError("bad pair line", lineno);
        if (i < 1 || i > n || j < 1 || j > n) throw ParseError("pair out of range", lineno);
        pairs.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
    }
    return SupportSet::explicit_pairs(n, pairs);
}

struct QualityReport {
    int n = 0;
    long nnz_g = 0;
    std::string method;
    double obj = 0.0;      // ||Delta||_1 / ||G||_1
    double spars = 0.0;    // |supp(Delta)| / |supp(G+I)|
    double residual_rowsum = 0.0;        // ||Delta 1||_inf
    double residual_stationarity = 0.0;  // ||mu_hat^T (G+Delta) - mu_hat^T||_inf
    double min_entry = 0.0;              // min of G + Delta over touched entries
    double time_ms = 0.0;
    std::optional<int> rounds;
};

/// Relative objective, relative sparsity and feasibility residuals of a
/// perturbation. ||G||_1 = n for a stochastic matrix.
inline QualityReport quality_report(const StochasticMatrix& g, const Perturbation& delta,
                                    const Distribution& mu_hat) {
    QualityReport q;
    q.n = g.n();
    q.nnz_g = static_cast<long>(g.nnz());
    const double gnorm = l1_norm(g.matrix());
    if (std::abs(gnorm - static_cast<double>(g.n())) > 1e-6 * static_cast<double>(g.n()))
        throw RowSumViolation("||G||_1 != n: matrix is not stochastic");
    q.obj = l1_norm(delta.delta) / static_cast<double>(g.n());
    q.spars = static_cast<double>(delta.delta.nnz()) /
              static_cast<double>(support(g.matrix(), true).size());
    for (int i = 0; i < g.n(); ++i)
        q.residual_rowsum = std::max(q.residual_rowsum, std::abs(delta.delta.row_sum(i)));

    // mu_hat^T (G + Delta) - mu_hat^T, accumulated sparsely
    std::vector<double> r(static_cast<size_t>(g.n()), 0.0);
    for (int i = 0; i < g.n(); ++i) {
        const double mi = mu_hat[i];
        for (const auto& e : g.row(i)) r[static_cast<size_t>(e.col)] += mi * e.value;
        for (const auto& e : delta.delta.row(i)) r[static_cast<size_t>(e.col)] += mi * e.value;
    }
    for (int j = 0; j < g.n(); ++j)
        q.residual_stationarity = std::max(q.residual_stationarity, std::abs(r[static_cast<size_t>(j)] - mu_hat[j]));

    double mn = 0.0;
    const SparseMatrix sum = g.matrix().add(delta.delta);
    for (int i = 0; i < sum.n(); ++i)
        for (const auto& e : sum.row(i)) mn = std::min(mn, e.value);
    q.min_entry = mn;
    return q;
}

}  // namespace tsdp
