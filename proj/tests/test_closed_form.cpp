#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "tsdp/closed_form.hpp"
#include "tsdp/generate.hpp"

using namespace tsdp;
using fixtures::cycle3;
using fixtures::ring4;
using fixtures::ring4_boosted;
using fixtures::ring4_boosted_mu;
using fixtures::ring4_target;

TEST_CASE("ratio bounds of the worked examples") {
    const Distribution uniform = Distribution::uniform(4);

    const RatioBounds a = ratio_bounds(uniform, ring4_target());
    CHECK(a.r == std::vector<double>{2.0, 2.0, 1.0, 0.5});
    CHECK(a.r_lo == 0.5);
    CHECK(a.r_hi == 2.0);
    CHECK(a.c_star == 0.5);

    const RatioBounds b = ratio_bounds(uniform, uniform);
    CHECK(b.r_lo == 1.0);
    CHECK(b.r_hi == 1.0);
    CHECK(b.c_star == 1.0);

    const RatioBounds c = ratio_bounds(uniform, ring4_boosted_mu());
    CHECK(c.r[0] == Catch::Approx(0.625).margin(1e-15));
    CHECK(c.r_hi == Catch::Approx(1.25).margin(1e-15));
    CHECK(c.c_star == Catch::Approx(0.8).margin(1e-15));
}

TEST_CASE("alpha at the extremal parameter") {
    const Distribution uniform = Distribution::uniform(4);
    const RatioBounds b = ratio_bounds(uniform, ring4_target());
    const std::vector<double> alpha = alpha_of_c(b, b.c_star);
    CHECK(alpha == std::vector<double>{0.0, 0.0, 0.5, 0.75});

    const RatioBounds b25 = ratio_bounds(uniform, ring4_boosted_mu());
    const std::vector<double> a25 = alpha_of_c(b25, b25.c_star);
    CHECK(a25[0] == Catch::Approx(0.5).margin(1e-15));
    CHECK(a25[1] == 0.0);
    CHECK(a25[2] == 0.0);
    CHECK(a25[3] == 0.0);

    const RatioBounds eq = ratio_bounds(uniform, uniform);
    for (double a : alpha_of_c(eq, 1.0)) CHECK(a == 0.0);

    CHECK_THROWS_AS(alpha_of_c(b, 0.0), OutOfRange);
    CHECK_THROWS_AS(alpha_of_c(b, b.c_star + 1e-9), OutOfRange);
}

TEST_CASE("diagonal solution reproduces the printed Delta(alpha*)") {
    const Distribution mu = Distribution::uniform(4);
    const Perturbation d = diagonal_solution(ring4(), mu, ring4_target());
    CHECK(d.delta.row(0).empty());
    CHECK(d.delta.row(1).empty());
    CHECK(d.delta.at(2, 1) == Catch::Approx(-0.125).margin(1e-15));
    CHECK(d.delta.at(2, 2) == Catch::Approx(0.25).margin(1e-15));
    CHECK(d.delta.at(2, 3) == Catch::Approx(-0.125).margin(1e-15));
    CHECK(d.delta.at(3, 0) == Catch::Approx(-3.0 / 16).margin(1e-15));
    CHECK(d.delta.at(3, 2) == Catch::Approx(-3.0 / 16).margin(1e-15));
    CHECK(d.delta.at(3, 3) == Catch::Approx(3.0 / 8).margin(1e-15));
    CHECK(l1_norm(d.delta) == Catch::Approx(10.0 / 8).margin(1e-15));
}

TEST_CASE("diagonal solution of the rank-one example") {
    const Distribution mu = Distribution::uniform(4);
    const Perturbation d = diagonal_solution(ring4(), mu, ring4_boosted_mu());
    CHECK(d.delta.at(0, 0) == Catch::Approx(0.25).margin(1e-15));
    CHECK(d.delta.at(0, 1) == Catch::Approx(-0.125).margin(1e-15));
    CHECK(d.delta.at(0, 3) == Catch::Approx(-0.125).margin(1e-15));
    for (int i = 1; i < 4; ++i) CHECK(d.delta.row(i).empty());
}

TEST_CASE("diagonal solution vanishes when the target is already stationary") {
    const Distribution mu = Distribution::uniform(4);
    const Perturbation d = diagonal_solution(ring4(), mu, mu);
    CHECK(d.delta.nnz() == 0);
}

TEST_CASE("diagonal solution rejects a non-stationary mu") {
    CHECK_THROWS_AS(diagonal_solution(ring4(), ring4_target(), ring4_target()), NotStationary);
}

TEST_CASE("feasibility of the closed-form solution on random instances") {
    for (auto [n, k, seed] : {std::tuple<int, int, uint64_t>{20, 2, 1},
                              {50, 1, 2},
                              {120, 4, 3},
                              {200, 3, 4}}) {
        const StochasticMatrix g = gen_queue_matrix(n, k, seed);
        StationaryOptions sopts;
        sopts.max_iters = 2000000;
        sopts.tol = 1e-14;
        const Distribution mu = stationary_distribution(g, sopts).dist;
        const Distribution mu_hat = oracle::random_distribution(n, seed * 31 + 1);
        const Perturbation d = diagonal_solution(g, mu, mu_hat);
        const StochasticMatrix ghat = apply_perturbation(g, d);
        CHECK(validate_stochastic(ghat.matrix()).ok);
        CHECK(is_irreducible(ghat));
        CHECK(verify_stationary(ghat, mu_hat) <= 1e-9);
    }
}

TEST_CASE("support law of Delta(alpha*)") {
    const StochasticMatrix g = gen_queue_matrix(40, 2, 9);
    StationaryOptions sopts;
    sopts.max_iters = 1000000;
    const Distribution mu = stationary_distribution(g, sopts).dist;
    const Distribution mu_hat = oracle::random_distribution(40, 77);
    const RatioBounds rb = ratio_bounds(mu, mu_hat);
    const Perturbation d = diagonal_solution(g, mu, mu_hat);
    for (int i = 0; i < 40; ++i) {
        const bool maximal = rb.r[static_cast<size_t>(i)] == rb.r_hi;
        if (maximal) {
            CHECK(d.delta.row(i).empty());
        } else {
            // same support as row i of G + I
            std::vector<int> expected;
            for (const auto& e : g.row(i)) expected.push_back(e.col);
            expected.push_back(i);
            std::sort(expected.begin(), expected.end());
            expected.erase(std::unique(expected.begin(), expected.end()), expected.end());
            std::vector<int> got;
            for (const auto& e : d.delta.row(i)) got.push_back(e.col);
            CHECK(got == expected);
        }
    }
}

TEST_CASE("family norm is minimized at c_star") {
    const StochasticMatrix g = gen_queue_matrix(30, 2, 13);
    StationaryOptions sopts;
    sopts.max_iters = 1000000;
    const Distribution mu = stationary_distribution(g, sopts).dist;
    const Distribution mu_hat = oracle::random_distribution(30, 14);
    const RatioBounds rb = ratio_bounds(mu, mu_hat);
    const double best = l1_norm(diagonal_scaling_delta(g, alpha_of_c(rb, rb.c_star)));
    SplitMix64 rng(15);
    for (int t = 0; t < 20; ++t) {
        const double c = rb.c_star * (0.01 + 0.98 * rng.next_unit());
        const double norm_c = l1_norm(diagonal_scaling_delta(g, alpha_of_c(rb, c)));
        CHECK(norm_c >= best - 1e-12);
    }
}

TEST_CASE("lower bound examples") {
    CHECK(lower_bound_l1(ring4(), Distribution::uniform(4)) <= 1e-15);
    CHECK(lower_bound_l1(ring4(), ring4_target()) <= 6.0 / 8 + 1e-12);
    CHECK(lower_bound_l1(cycle3(), fixtures::cycle3_target()) ==
          Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("upper bound examples") {
    const Distribution uniform = Distribution::uniform(4);
    CHECK(upper_bound_l1(ring4(), ratio_bounds(uniform, uniform)) == 0.0);
    CHECK(upper_bound_l1(ring4(), ratio_bounds(uniform, ring4_target())) ==
          Catch::Approx(3.0).margin(1e-12));
    CHECK(upper_bound_l1(ring4(), ratio_bounds(uniform, ring4_boosted_mu())) ==
          Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("sandwich: lower bound <= ||Delta(alpha*)||_1 <= upper bound") {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        const StochasticMatrix g = gen_queue_matrix(25, 2, seed);
        StationaryOptions sopts;
        sopts.max_iters = 1000000;
        const Distribution mu = stationary_distribution(g, sopts).dist;
        const Distribution mu_hat = oracle::random_distribution(25, seed + 100);
        const RatioBounds rb = ratio_bounds(mu, mu_hat);
        const double norm = l1_norm(diagonal_solution(g, mu, mu_hat).delta);
        CHECK(lower_bound_l1(g, mu_hat) <= norm + 1e-10);
        CHECK(norm <= upper_bound_l1(g, rb) + 1e-10);
    }
}

TEST_CASE("rank-one target construction") {
    const Distribution mu = ring4_boosted_mu();
    const Distribution t = rank_one_target(mu, 1, 0.1);
    CHECK(t[0] == Catch::Approx(4.0 / 11).margin(1e-15));
    CHECK(t[1] == Catch::Approx(3.0 / 11).margin(1e-15));
    CHECK(t[2] == Catch::Approx(2.0 / 11).margin(1e-15));
    CHECK(t[3] == Catch::Approx(2.0 / 11).margin(1e-15));

    const Distribution u = rank_one_target(Distribution::uniform(4), 0, 1.0);
    CHECK(u[0] == Catch::Approx(0.625).margin(1e-15));
    CHECK(u[1] == Catch::Approx(0.125).margin(1e-15));

    const Distribution arbitrary = rank_one_target(mu, 2, 0.37);
    double s = 0.0;
    for (double v : arbitrary.values()) s += v;
    CHECK(s == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("rank-one solution: certified case of the rank-one example") {
    const RankOneSolution sol = rank_one_solution(ring4(), Distribution::uniform(4), 0, 0.25);
    CHECK(sol.certified_optimal);
    CHECK(sol.alpha_j == Catch::Approx(0.5).margin(1e-15));
    CHECK(sol.perturbation.delta.at(0, 0) == Catch::Approx(0.25).margin(1e-15));
    // matches diagonal_solution for the induced target
    const Distribution target = rank_one_target(Distribution::uniform(4), 0, 0.25);
    CHECK(target[0] == Catch::Approx(0.4).margin(1e-15));
}

TEST_CASE("rank-one solution: uncertified case keeps feasibility") {
    const RankOneSolution sol = rank_one_solution(ring4_boosted(), ring4_boosted_mu(), 1, 0.1);
    CHECK_FALSE(sol.certified_optimal);  // lambda = 1/10 < max_i mu_i - mu_2 = 1/5
    CHECK(l1_norm(sol.perturbation.delta) == Catch::Approx(1.0 / 3).margin(1e-15));
    const Distribution target = rank_one_target(ring4_boosted_mu(), 1, 0.1);
    const StochasticMatrix ghat = apply_perturbation(ring4_boosted(), sol.perturbation);
    CHECK(verify_stationary(ghat, target) <= 1e-12);
}

TEST_CASE("rank-one solution rejects lambda <= 0") {
    CHECK_THROWS_AS(rank_one_solution(ring4(), Distribution::uniform(4), 0, 0.0), OutOfRange);
}

TEST_CASE("unconstrained rank-one solution of the boosted example") {
    const Distribution target = rank_one_target(ring4_boosted_mu(), 1, 0.1);
    const UnconstrainedRankOne sol = unconstrained_rank_one_l1(ring4_boosted(), target);
    CHECK_FALSE(sol.nonnegative_feasible);
    CHECK(sol.pivot_index == 0);
    // The formula (1/mu_hat_1) e_1 mu_hat^T (I - G) gives row [-1/16, 1/8, -1/16, 0]
    // with norm 1/4, attaining the lower bound exactly.
    CHECK(sol.perturbation.delta.at(0, 0) == Catch::Approx(-1.0 / 16).margin(1e-14));
    CHECK(sol.perturbation.delta.at(0, 1) == Catch::Approx(1.0 / 8).margin(1e-14));
    CHECK(sol.perturbation.delta.at(0, 2) == Catch::Approx(-1.0 / 16).margin(1e-14));
    CHECK(l1_norm(sol.perturbation.delta) ==
          Catch::Approx(lower_bound_l1(ring4_boosted(), target)).margin(1e-15));
}

TEST_CASE("unconstrained rank-one solution is zero at the stationary target") {
    const UnconstrainedRankOne sol = unconstrained_rank_one_l1(ring4(), Distribution::uniform(4));
    CHECK(sol.nonnegative_feasible);
    CHECK(l1_norm(sol.perturbation.delta) <= 1e-15);
}

TEST_CASE("unconstrained rank-one solution on the cycle is feasible and optimal") {
    const UnconstrainedRankOne sol = unconstrained_rank_one_l1(cycle3(), fixtures::cycle3_target());
    CHECK(sol.pivot_index == 0);
    CHECK(sol.nonnegative_feasible);
    CHECK(sol.perturbation.delta.at(0, 0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(sol.perturbation.delta.at(0, 1) == Catch::Approx(-0.5).margin(1e-15));
    CHECK(l1_norm(sol.perturbation.delta) ==
          Catch::Approx(lower_bound_l1(cycle3(), fixtures::cycle3_target())).margin(1e-15));
}

TEST_CASE("unconstrained rank-one attains the lower bound on random instances") {
    for (uint64_t seed = 1; seed <= 40; ++seed) {
        const StochasticMatrix g = gen_queue_matrix(15 + static_cast<int>(seed % 20), 2, seed);
        const Distribution mu_hat = oracle::random_distribution(g.n(), seed + 500);
        const UnconstrainedRankOne sol = unconstrained_rank_one_l1(g, mu_hat);
        const double lo = lower_bound_l1(g, mu_hat);
        CHECK(l1_norm(sol.perturbation.delta) == Catch::Approx(lo).margin(1e-12));
        // row sums vanish and the target is stationary for G + Delta
        CHECK(sol.perturbation.max_row_sum_deviation() <= 1e-12);
        SparseMatrix sum = g.matrix().add(sol.perturbation.delta);
        CHECK(verify_stationary(sum, mu_hat.values()) <= 1e-10);
    }
}

TEST_CASE("coherent interval of the worked pairs") {
    const auto [orig1, sorted1] =
        coherent_interval_check(Distribution::uniform(4), ring4_target());
    CHECK(orig1.lo == 0.5);
    CHECK(orig1.hi == 2.0);
    CHECK(sorted1.lo == 0.5);  // mu constant: sorting changes nothing
    CHECK(sorted1.hi == 2.0);

    const auto [orig2, sorted2] =
        coherent_interval_check(Distribution({0.1, 0.9}), Distribution({0.9, 0.1}));
    CHECK(orig2.lo == Catch::Approx(1.0 / 9).margin(1e-15));
    CHECK(orig2.hi == Catch::Approx(9.0).margin(1e-12));
    CHECK(sorted2.lo == 1.0);
    CHECK(sorted2.hi == 1.0);
}

TEST_CASE("sorted interval contained in the original; exhaustive for n <= 5") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.next() % 4);  // 2..5
        const Distribution mu = oracle::random_distribution(n, rng.next());
        const Distribution mu_hat = oracle::random_distribution(n, rng.next());
        const auto [orig, sorted] = coherent_interval_check(mu, mu_hat);
        CHECK(sorted.lo >= orig.lo - 1e-12);
        CHECK(sorted.hi <= orig.hi + 1e-12);

        // the sorted pairing is innermost across all pairings
        std::vector<double> b(mu_hat.values());
        std::sort(b.begin(), b.end());
        do {
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (int i = 0; i < n; ++i) {
                const double r = mu[i] / b[static_cast<size_t>(i)];
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
            CHECK(sorted.lo >= lo - 1e-12);
            CHECK(sorted.hi <= hi + 1e-12);
        } while (std::next_permutation(b.begin(), b.end()));
    }
}
