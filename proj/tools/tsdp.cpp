// Command-line front end: generate queue matrices, solve TSDP instances with
// the closed-form / Metropolis-Hastings / LP / column-generation methods,
// verify perturbation files, and run benchmark grids.
//
// Exit codes: 0 success, 1 domain error, 2 usage, 3 infeasible,
// 4 verification failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsdp/tsdp.hpp"

using json = nlohmann::ordered_json;
using clock_type = std::chrono::steady_clock;

namespace {

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

struct MuHatSpec {
    std::string raw;

    bool needs_mu() const {
        return raw.rfind("mix:", 0) == 0 || raw.rfind("rankone:", 0) == 0;
    }

    tsdp::Distribution build(const tsdp::StochasticMatrix& g,
                             const tsdp::Distribution* mu) const {
        using namespace tsdp;
        if (raw == "power-step") return target_power_step(g);
        if (raw.rfind("mix:", 0) == 0) {
            const double eps = std::stod(raw.substr(4));
            return target_mix(*mu, eps);
        }
        if (raw.rfind("rankone:", 0) == 0) {
            const std::string body = raw.substr(8);
            const auto comma = body.find(',');
            if (comma == std::string::npos)
                throw OutOfRange("rankone builder expects rankone:j,lambda");
            const int j = std::stoi(body.substr(0, comma));
            const double lambda = std::stod(body.substr(comma + 1));
            if (j < 1 || j > g.n()) throw OutOfRange("rankone state index out of range");
            return rank_one_target(*mu, j - 1, lambda);
        }
        std::vector<double> v = read_vector(raw);
        if (static_cast<int>(v.size()) != g.n())
            throw DimensionMismatch("target vector length " + std::to_string(v.size()) +
                                    " != n = " + std::to_string(g.n()));
        return Distribution::normalized(std::move(v));
    }
};

tsdp::StochasticMatrix load_matrix(const std::string& path, bool edge_list, bool weighted,
                                   bool symmetrize, bool largest_scc) {
    using namespace tsdp;
    if (edge_list) {
        EdgeListOptions o;
        o.weighted = weighted;
        o.symmetrize = symmetrize;
        o.largest_scc = largest_scc;
        return read_edge_list(path, o).matrix;
    }
    SparseMatrix m = read_matrix_market(path);
    const ValidationReport rep = validate_stochastic(m);
    if (!rep.ok)
        throw RowSumViolation("'" + path + "' is not row-stochastic (max row-sum deviation " +
                              std::to_string(rep.max_row_sum_deviation) + ")");
    return StochasticMatrix(std::move(m));
}

json report_to_json(const tsdp::QualityReport& q) {
    json j;
    j["n"] = q.n;
    j["nnz_g"] = q.nnz_g;
    j["method"] = q.method;
    j["obj"] = q.obj;
    j["spars"] = q.spars;
    j["residual_rowsum"] = q.residual_rowsum;
    j["residual_stationarity"] = q.residual_stationarity;
    j["min_entry"] = q.min_entry;
    j["time_ms"] = q.time_ms;
    if (q.rounds) j["rounds"] = *q.rounds;
    return j;
}

int cmd_gen(int n, int k, uint64_t seed, const std::string& out) {
    using namespace tsdp;
    const auto t0 = clock_type::now();
    StochasticMatrix g = gen_queue_matrix(n, k, seed);
    write_matrix_market(out, g.matrix());
    json j;
    j["n"] = n;
    j["k"] = k;
    j["seed"] = seed;
    j["nnz"] = g.nnz();
    j["out"] = out;
    j["time_ms"] = ms_since(t0);
    std::cout << j.dump(2) << "\n";
    return 0;
}

struct SolveArgs {
    std::string g_path;
    MuHatSpec mu_hat;
    std::string method;
    std::string omega = "gplusi";
    double delta = 1e-4;
    std::string out;
    std::string report_path;
    bool edge_list = false;
    bool weighted = false;
    bool symmetrize = false;
    bool largest_scc = false;
    long max_power_iters = 200000;
};

tsdp::SupportSet parse_omega(const std::string& spec, const tsdp::StochasticMatrix& g) {
    using namespace tsdp;
    if (spec == "gplusi") return support(g.matrix(), true);
    if (spec == "full") return SupportSet::full(g.n());
    if (spec.rfind("file:", 0) == 0) return read_support(spec.substr(5), g.n());
    throw OutOfRange("unknown omega spec '" + spec + "'");
}

int cmd_solve(const SolveArgs& a) {
    using namespace tsdp;
    StochasticMatrix g =
        load_matrix(a.g_path, a.edge_list, a.weighted, a.symmetrize, a.largest_scc);
    if (!is_irreducible(g)) throw NotIrreducible("input matrix is not irreducible");

    StationaryOptions sopts;
    sopts.max_iters = static_cast<int>(a.max_power_iters);
    std::optional<StationaryResult> mu;
    auto need_mu = [&]() -> const Distribution& {
        if (!mu) mu = stationary_auto(g, sopts);
        return mu->dist;
    };

    Distribution mu_hat = a.mu_hat.needs_mu() ? a.mu_hat.build(g, &need_mu())
                                              : a.mu_hat.build(g, nullptr);

    Perturbation delta;
    json extras;
    std::vector<std::string> warnings;
    std::optional<int> rounds;
    std::string effective_omega = a.omega;
    const auto t0 = clock_type::now();

    if (a.method == "mh") {
        MhResult r = metropolis_hastings(g, mu_hat);
        delta = std::move(r.perturbation);
        extras["reversibility_residual"] = r.diagnostics.reversibility_residual;
        extras["result_irreducible"] = r.diagnostics.irreducible;
        if (!r.diagnostics.irreducible)
            warnings.push_back("metropolis-hastings result is reducible");
    } else if (a.method == "diag") {
        delta = diagonal_solution(g, need_mu(), mu_hat);
        if (!mu->converged)
            warnings.push_back("stationary distribution did not reach tolerance; "
                               "closed-form solution is approximate");
    } else if (a.method == "lp") {
        const SupportSet omega = parse_omega(a.omega, g);
        auto [d, sol] = solve_tsdp_lp(g, mu_hat, omega);
        delta = std::move(d);
        extras["lp_objective"] = sol.objective;
        extras["lp_pivots"] = sol.pivots;
        extras["sparsity_bound"] = sparsity_bound(g, omega);
    } else if (a.method == "cg") {
        // cg without an explicit --omega works over the full index set
        if (a.omega == "gplusi") effective_omega = "full";
        const SupportSet omega = parse_omega(effective_omega, g);
        ColGenOptions copts;
        copts.delta = a.delta;
        copts.stationary = sopts;
        auto [d, trace] = column_generate(g, mu_hat, omega, copts,
                                          mu ? &mu->dist : nullptr);
        delta = std::move(d);
        rounds = static_cast<int>(trace.rounds.size());
        json jr = json::array();
        for (const auto& r : trace.rounds) {
            jr.push_back({{"round", r.round},
                          {"omega_size", r.omega_size},
                          {"objective", r.objective},
                          {"added", r.added},
                          {"pivots", r.pivots},
                          {"time_ms", r.time_ms}});
        }
        extras["trace"] = std::move(jr);
        extras["warm_objective"] = trace.obj0;
        switch (trace.status) {
            case ColGenStatus::Optimal: extras["status"] = "optimal"; break;
            case ColGenStatus::HeuristicOptimal: extras["status"] = "heuristic-optimal"; break;
            case ColGenStatus::DeltaConverged: extras["status"] = "delta-converged"; break;
            case ColGenStatus::MaxRounds: extras["status"] = "max-rounds"; break;
            case ColGenStatus::InitialZero: extras["status"] = "initial-zero"; break;
        }
    } else {
        throw OutOfRange("unknown method '" + a.method + "'");
    }
    const double elapsed = ms_since(t0);

    QualityReport q = quality_report(g, delta, mu_hat);
    q.method = a.method;
    q.time_ms = elapsed;
    q.rounds = rounds;

    write_matrix_market(a.out, delta.delta);

    json j = report_to_json(q);
    j["lower_bound"] = lower_bound_l1(g, mu_hat);
    j["delta_l1"] = l1_norm(delta.delta);
    j["out"] = a.out;
    j["flags"] = {{"g", a.g_path},       {"mu_hat", a.mu_hat.raw},
                  {"method", a.method},  {"omega", effective_omega},
                  {"delta", a.delta},    {"edge_list", a.edge_list},
                  {"weighted", a.weighted}, {"symmetrize", a.symmetrize},
                  {"largest_scc", a.largest_scc}};
    for (auto& [key, value] : extras.items()) j[key] = value;
    if (!warnings.empty()) j["warnings"] = warnings;
    std::cout << j.dump(2) << "\n";
    if (!a.report_path.empty()) {
        std::ofstream rf(a.report_path);
        rf << j.dump(2) << "\n";
    }
    return 0;
}

struct CheckArgs {
    std::string g_path;
    std::string delta_path;
    MuHatSpec mu_hat;
    long max_power_iters = 200000;
};

int cmd_check(const CheckArgs& a) {
    using namespace tsdp;
    StochasticMatrix g = load_matrix(a.g_path, false, false, false, false);
    if (!is_irreducible(g)) throw NotIrreducible("input matrix is not irreducible");
    SparseMatrix delta_m = read_matrix_market(a.delta_path);
    if (delta_m.n() != g.n()) throw DimensionMismatch("delta dimension differs from G");
    Perturbation delta{std::move(delta_m), std::nullopt};

    StationaryOptions sopts;
    sopts.max_iters = static_cast<int>(a.max_power_iters);
    const StationaryResult mu = stationary_auto(g, sopts);
    const Distribution mu_hat = a.mu_hat.build(g, &mu.dist);

    QualityReport q = quality_report(g, delta, mu_hat);
    const double delta_l1 = l1_norm(delta.delta);
    const double lo = lower_bound_l1(g, mu_hat);
    const RatioBounds rb = ratio_bounds(mu.dist, mu_hat);
    const double hi = upper_bound_l1(g, rb);
    const size_t bound = sparsity_bound(g, SupportSet::full(g.n()));

    bool ok = true;
    json checks;
    auto record = [&](const std::string& name, bool pass, double value, double limit) {
        checks[name] = {{"pass", pass}, {"value", value}, {"limit", limit}};
        ok = ok && pass;
    };
    record("rowsum_residual", q.residual_rowsum <= kTolFeas, q.residual_rowsum, kTolFeas);
    record("stationarity_residual", q.residual_stationarity <= 1e-9, q.residual_stationarity,
           1e-9);
    record("nonnegativity", q.min_entry >= -kTolFeas, q.min_entry, -kTolFeas);
    record("sparsity_bound", delta.delta.nnz() <= bound,
           static_cast<double>(delta.delta.nnz()), static_cast<double>(bound));
    record("lower_bound", delta_l1 >= lo - 1e-9, delta_l1, lo);

    json j;
    j["n"] = g.n();
    j["delta_l1"] = delta_l1;
    j["bound_interval"] = {{"lower", lo}, {"upper", hi}};
    j["checks"] = std::move(checks);
    j["pass"] = ok;
    j["flags"] = {{"g", a.g_path}, {"delta_file", a.delta_path}, {"mu_hat", a.mu_hat.raw}};
    std::cout << j.dump(2) << "\n";
    return ok ? 0 : 4;
}

struct BenchArgs {
    int n = 1000;
    std::vector<int> k_list;
    int trials = 5;
    std::vector<std::string> methods;
    std::optional<double> epsilon;
    std::string target = "power-step";
    uint64_t seed = 1;
    std::string out;
};

int cmd_bench(const BenchArgs& a) {
    using namespace tsdp;
    json cells = json::array();
    struct Cell {
        std::string method;
        int k;
        double obj = 0, spars = 0, time = 0;
        int ok = 0, fail = 0;
    };
    std::vector<Cell> table;

    for (int k : a.k_list) {
        std::vector<Cell> row_cells;
        for (const auto& method : a.methods) row_cells.push_back(Cell{method, k});
        for (int trial = 0; trial < a.trials; ++trial) {
            StochasticMatrix g;
            Distribution mu_hat;
            std::optional<StationaryResult> mu;
            try {
                g = gen_queue_matrix(a.n, k, a.seed + static_cast<uint64_t>(trial));
                if (a.epsilon) {
                    mu = stationary_auto(g, {200000, 1e-13, 100});
                    mu_hat = target_mix(mu->dist, *a.epsilon);
                } else {
                    MuHatSpec spec{a.target};
                    if (spec.needs_mu()) mu = stationary_auto(g, {200000, 1e-13, 100});
                    mu_hat = spec.build(g, mu ? &mu->dist : nullptr);
                }
            } catch (const std::exception& e) {
                for (auto& c : row_cells) ++c.fail;
                continue;
            }
            for (auto& cell : row_cells) {
                try {
                    const auto t0 = clock_type::now();
                    Perturbation delta;
                    if (cell.method == "mh") {
                        delta = metropolis_hastings(g, mu_hat).perturbation;
                    } else if (cell.method == "diag") {
                        if (!mu) mu = stationary_auto(g, {200000, 1e-13, 100});
                        delta = diagonal_solution(g, mu->dist, mu_hat);
                    } else if (cell.method == "lp-gplusi" || cell.method == "s") {
                        delta = solve_tsdp_lp(g, mu_hat, support(g.matrix(), true)).first;
                    } else if (cell.method == "lp-full" || cell.method == "gs") {
                        delta = solve_tsdp_lp(g, mu_hat, SupportSet::full(g.n())).first;
                    } else if (cell.method.rfind("cg", 0) == 0) {
                        ColGenOptions copts;
                        if (cell.method.size() > 3 && cell.method[2] == ':')
                            copts.delta = std::stod(cell.method.substr(3));
                        if (!mu) mu = stationary_auto(g, {200000, 1e-13, 100});
                        delta = column_generate(g, mu_hat, SupportSet::full(g.n()), copts,
                                                &mu->dist)
                                    .first;
                    } else {
                        throw OutOfRange("unknown method '" + cell.method + "'");
                    }
                    const double elapsed = ms_since(t0);
                    QualityReport q = quality_report(g, delta, mu_hat);
                    cell.obj += q.obj;
                    cell.spars += q.spars;
                    cell.time += elapsed;
                    ++cell.ok;
                } catch (const std::exception& e) {
                    ++cell.fail;
                    std::cerr << "cell (" << cell.method << ", k=" << k << ", trial " << trial
                              << ") failed: " << e.what() << "\n";
                }
            }
        }
        for (auto& c : row_cells) table.push_back(c);
    }

    for (const auto& c : table) {
        json jc;
        jc["method"] = c.method;
        jc["k"] = c.k;
        jc["trials_ok"] = c.ok;
        jc["trials_failed"] = c.fail;
        if (c.ok > 0) {
            jc["obj"] = c.obj / c.ok;
            jc["spars"] = c.spars / c.ok;
            jc["time_ms"] = c.time / c.ok;
        }
        cells.push_back(std::move(jc));
    }
    json j;
    j["n"] = a.n;
    j["trials"] = a.trials;
    j["seed"] = a.seed;
    j["target"] = a.epsilon ? ("mix:" + std::to_string(*a.epsilon)) : a.target;
    j["k_list"] = a.k_list;
    j["methods"] = a.methods;
    j["cells"] = std::move(cells);

    // Aligned text table: one block per k, one column per method.
    std::printf("%-6s %-10s", "k", "measure");
    for (const auto& mname : a.methods) std::printf(" %12s", mname.c_str());
    std::printf("\n");
    size_t idx = 0;
    for (int k : a.k_list) {
        const char* rows[3] = {"obj(%)", "spars(%)", "time(ms)"};
        for (int rrow = 0; rrow < 3; ++rrow) {
            std::printf("%-6d %-10s", k, rows[rrow]);
            for (size_t mcol = 0; mcol < a.methods.size(); ++mcol) {
                const auto& c = table[idx + mcol];
                if (c.ok == 0) {
                    std::printf(" %12s", "-");
                    continue;
                }
                const double v = rrow == 0   ? 100.0 * c.obj / c.ok
                                 : rrow == 1 ? 100.0 * c.spars / c.ok
                                             : c.time / c.ok;
                std::printf(" %12.4f", v);
            }
            std::printf("\n");
        }
        idx += a.methods.size();
    }

    if (!a.out.empty()) {
        std::ofstream f(a.out);
        f << j.dump(2) << "\n";
    } else {
        std::cout << j.dump(2) << "\n";
    }
    return 0;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Target stationary distribution solvers for sparse stochastic matrices"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a queue-like stochastic matrix");
    int gen_n = 0, gen_k = 0;
    uint64_t gen_seed = 1;
    std::string gen_out;
    gen->add_option("--n", gen_n, "dimension")->required();
    gen->add_option("--k", gen_k, "neighbors on each side")->required();
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output Matrix Market path")->required();

    // solve
    auto* solve = app.add_subcommand("solve", "Solve a TSDP instance");
    SolveArgs sa;
    solve->add_option("--g", sa.g_path, "stochastic matrix (Matrix Market)")->required();
    solve->add_option("--mu-hat", sa.mu_hat.raw,
                      "target: file path, power-step, mix:EPS or rankone:J,LAMBDA")
        ->required();
    solve->add_option("--method", sa.method, "mh | diag | lp | cg")
        ->required()
        ->check(CLI::IsMember({"mh", "diag", "lp", "cg"}));
    solve->add_option("--omega", sa.omega, "gplusi | full | file:PATH (lp; cg defaults to full)")
        ->check([](const std::string& v) -> std::string {
            if (v == "gplusi" || v == "full" || v.rfind("file:", 0) == 0) return {};
            return "expected gplusi, full or file:PATH";
        });
    solve->add_option("--delta", sa.delta, "column-generation stopping threshold");
    solve->add_option("--out", sa.out, "output path for Delta (Matrix Market)")->required();
    solve->add_option("--report", sa.report_path, "also write the JSON report here");
    solve->add_flag("--edge-list", sa.edge_list, "read --g as a 1-based edge list");
    solve->add_flag("--weighted", sa.weighted, "edge list rows are 'i j w'");
    solve->add_flag("--symmetrize", sa.symmetrize, "add reverse edges");
    solve->add_flag("--largest-scc", sa.largest_scc, "restrict to the largest SCC");
    solve->add_option("--max-power-iters", sa.max_power_iters, "power iteration cap");

    // check
    auto* check = app.add_subcommand("check", "Verify a perturbation file");
    CheckArgs ca;
    check->add_option("--g", ca.g_path, "stochastic matrix (Matrix Market)")->required();
    check->add_option("--delta-file", ca.delta_path, "perturbation (Matrix Market)")->required();
    check->add_option("--mu-hat", ca.mu_hat.raw, "target spec")->required();
    check->add_option("--max-power-iters", ca.max_power_iters, "power iteration cap");

    // bench
    auto* bench = app.add_subcommand("bench", "Run a benchmark grid");
    BenchArgs ba;
    std::string k_list_csv = "1,2,5", methods_csv = "mh,diag,lp-gplusi,cg:1e-4";
    double bench_eps = -1.0;
    bench->add_option("--n", ba.n, "dimension");
    bench->add_option("--k-list", k_list_csv, "comma-separated k values");
    bench->add_option("--trials", ba.trials, "instances per cell");
    bench->add_option("--methods", methods_csv,
                      "comma-separated: mh,diag,lp-gplusi,lp-full,cg:DELTA");
    bench->add_option("--epsilon", bench_eps, "target mix epsilon (overrides --target)");
    bench->add_option("--target", ba.target, "target spec (default power-step)");
    bench->add_option("--seed", ba.seed, "base seed");
    bench->add_option("--out", ba.out, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_n, gen_k, gen_seed, gen_out);
        if (solve->parsed()) return cmd_solve(sa);
        if (check->parsed()) return cmd_check(ca);
        if (bench->parsed()) {
            for (const auto& t : split_csv(k_list_csv)) ba.k_list.push_back(std::stoi(t));
            ba.methods = split_csv(methods_csv);
            if (bench_eps >= 0.0) ba.epsilon = bench_eps;
            return cmd_bench(ba);
        }
    } catch (const tsdp::Infeasible& e) {
        json err;
        err["error"] = "infeasible";
        err["detail"] = e.what();
        std::cout << err.dump(2) << "\n";
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        json err;
        err["error"] = "domain";
        err["detail"] = e.what();
        std::cout << err.dump(2) << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
