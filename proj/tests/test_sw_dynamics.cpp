#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "swmf/errors.hpp"
#include "swmf/sw_dynamics.hpp"

using namespace swmf;

namespace {

double tv(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return 0.5 * s;
}

}  // namespace

TEST_CASE("spin config validation")
{
    const SpinConfig zero_spin{{1, 0, -1}};
    const SpinConfig big_color{{1, 4}};
    const SpinConfig ok_color{{1, 3}};
    const SpinConfig mixed{{1, -1, 1, 1}};
    CHECK_THROWS_AS(zero_spin.validate_ising(), ParameterError);
    CHECK_THROWS_AS(big_color.validate_potts(3), ParameterError);
    CHECK_NOTHROW(ok_color.validate_potts(3));
    CHECK(mixed.magnetization() == 2);
    auto s = make_stream(1, 0);
    CHECK_THROWS_AS(sw_step_complete(SpinConfig::all_plus(3), 4.0, s), ParameterError);
}

TEST_CASE("state indexing round trip")
{
    for (std::size_t i = 0; i < 32; ++i) CHECK(ising_state_index(ising_state(5, i)) == i);
    CHECK(ising_state(3, 1).spins == std::vector<int>{1, -1, -1});
}

TEST_CASE("sw step with c = 0 resamples every spin")
{
    auto s = make_stream(2, 0);
    const int trials = 100000;
    int extreme = 0;
    for (int i = 0; i < trials; ++i) {
        const auto out = sw_step_complete(SpinConfig{{1, -1, 1}}, 0.0, s);
        extreme += std::abs(out.magnetization()) == 3;
    }
    CHECK(std::fabs(extreme / double(trials) - 0.25) < 0.005);
}

TEST_CASE("sw step with p = 1 keeps a single cluster")
{
    auto s = make_stream(3, 0);
    int plus = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto out = sw_step_complete(SpinConfig{{1, 1}}, 2.0, s);
        REQUIRE(out.spins[0] == out.spins[1]);
        plus += out.spins[0] == 1;
    }
    CHECK(plus > 850);
    CHECK(plus < 1150);
}

TEST_CASE("exact matrix small cases")
{
    const auto one = exact_transition_matrix(1, 0.7);
    for (const auto& row : one)
        for (double x : row) CHECK(x == doctest::Approx(0.5));
    const auto indep = exact_transition_matrix(2, 0.0);
    for (const auto& row : indep)
        for (double x : row) CHECK(x == doctest::Approx(0.25));
    CHECK_THROWS_AS(exact_transition_matrix(6, 0.5), CapacityError);
}

TEST_CASE("exact matrix rows sum to one and commute with the global flip")
{
    for (int n = 1; n <= 5; ++n)
        for (double p : {0.0, 0.2, 0.5, 0.8, 1.0}) {
            const auto m = exact_transition_matrix(n, p);
            const std::size_t states = m.size();
            const std::size_t flip = states - 1;
            for (std::size_t i = 0; i < states; ++i) {
                double row = 0;
                for (std::size_t j = 0; j < states; ++j) {
                    row += m[i][j];
                    CHECK(std::fabs(m[i][j] - m[i ^ flip][j ^ flip]) <= 1e-12);
                }
                CHECK(std::fabs(row - 1.0) <= 1e-12);
            }
        }
}

TEST_CASE("gibbs vector")
{
    const auto flat = gibbs_vector(2, 0.0);
    for (double x : flat) CHECK(x == doctest::Approx(0.25));
    const double beta = 0.7;
    const auto g = gibbs_vector(2, beta);
    CHECK(g[3] == doctest::Approx(std::exp(beta) / (2 * std::exp(beta) + 2 * std::exp(-beta))).epsilon(1e-14));
    const auto g3 = gibbs_vector(3, 0.5);
    double total = 0;
    for (std::size_t i = 0; i < g3.size(); ++i) {
        total += g3[i];
        CHECK(g3[i] == doctest::Approx(g3[7 - i]).epsilon(1e-15));
    }
    CHECK(std::fabs(total - 1.0) <= 1e-14);
}

TEST_CASE("gibbs measure is stationary for the exact matrix")
{
    for (int n = 1; n <= 5; ++n)
        for (double p : {0.2, 0.4, 0.5, 0.8}) {
            const auto pi = gibbs_vector(n, ising_beta(p));
            const auto next = left_multiply(pi, exact_transition_matrix(n, p));
            for (std::size_t i = 0; i < pi.size(); ++i) CHECK(std::fabs(next[i] - pi[i]) <= 1e-10);
        }
}

TEST_CASE("sampled sw step matches exact transition rows")
{
    const int n = 4;
    const double c = 1.0;
    const auto exact = exact_transition_matrix(n, c / n);
    auto s = make_stream(4, 0);
    std::vector<std::vector<double>> counts(16, std::vector<double>(16, 0));
    std::vector<double> visits(16, 0);
    auto sigma = SpinConfig::all_plus(n);
    for (int step = 0; step < 1000000; ++step) {
        const auto from = ising_state_index(sigma);
        sigma = sw_step_complete(sigma, c, s);
        counts[from][ising_state_index(sigma)] += 1;
        visits[from] += 1;
    }
    for (std::size_t i = 0; i < 16; ++i) {
        REQUIRE(visits[i] > 10000);
        for (auto& x : counts[i]) x /= visits[i];
        CHECK(tv(counts[i], exact[i]) <= 0.01);
    }
}

TEST_CASE("matrix csv export")
{
    std::ostringstream os;
    write_matrix_csv(os, {{0.5, 0.5}, {0.25, 0.75}});
    CHECK(os.str() == "0.5,0.5\n0.25,0.75\n");
}

TEST_CASE("tree construction")
{
    const auto path = path_tree(5, 0.5, 2);
    CHECK(path.edge_count() == 4);
    CHECK(path.parent[4] == 3);
    TreeSpec bad;
    bad.parent = {-1, 2, 1};
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad.parent = {-1, 0, 5};
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad.parent = {0, 0};
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    auto s = make_stream(5, 0);
    const auto rt = random_recursive_tree(200, 0.3, 3, s);
    CHECK_NOTHROW(rt.validate());
    for (std::int64_t v = 1; v < rt.n(); ++v) CHECK(rt.parent[static_cast<std::size_t>(v)] < v);
}

TEST_CASE("edge-dual chain")
{
    auto s = make_stream(6, 0);
    SUBCASE("p = 1 keeps open edges")
    {
        const auto tree = path_tree(50, 1.0, 2);
        EdgeConfig ones{std::vector<std::uint8_t>(49, 1)};
        for (int i = 0; i < 20; ++i) ones = potts_edge_step(ones, tree, s);
        for (auto b : ones.bits) CHECK(b == 1);
    }
    SUBCASE("stationary frequency")
    {
        const auto tree = path_tree(2, 0.5, 2);
        EdgeConfig e{{0}};
        double ones = 0;
        const int steps = 1000000;
        for (int i = 0; i < steps; ++i) {
            e = potts_edge_step(e, tree, s);
            ones += e.bits[0];
        }
        CHECK(edge_stationary_one(0.5, 2) == doctest::Approx(1.0 / 3));
        CHECK(std::fabs(ones / steps - 1.0 / 3) < 0.003);
    }
    SUBCASE("one step from all zero")
    {
        const auto tree = path_tree(100001, 0.3, 3);
        EdgeConfig zero{std::vector<std::uint8_t>(100000, 0)};
        const auto next = potts_edge_step(zero, tree, s);
        double ones = 0;
        for (auto b : next.bits) ones += b;
        CHECK(std::fabs(ones / 100000 - 0.1) < 0.003);
    }
    const EdgeConfig short_config{{0}};
    CHECK_THROWS_AS(potts_edge_step(short_config, path_tree(5, 0.5, 2), s), ParameterError);
}

TEST_CASE("potts sw step extremes")
{
    auto s = make_stream(7, 0);
    const auto free_tree = path_tree(5, 0.0, 3);
    std::vector<double> freq(3, 0);
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) freq[static_cast<std::size_t>(potts_tree_sw_step(SpinConfig::constant(5, 2), free_tree, s).spins.spins[2] - 1)] += 1;
    for (double f : freq) CHECK(std::fabs(f / trials - 1.0 / 3) < 0.005);

    const auto solid = path_tree(30, 1.0, 4);
    for (int i = 0; i < 100; ++i) {
        const auto out = potts_tree_sw_step(SpinConfig::constant(30, 3), solid, s);
        for (int c : out.spins.spins) CHECK(c == out.spins.spins[0]);
        for (auto b : out.retained.bits) CHECK(b == 1);
    }
}

TEST_CASE("potts chain converges to the exact tree measure")
{
    const auto tree = path_tree(3, 0.5, 2);
    const auto exact = potts_tree_measure(tree);
    double total = 0;
    for (double x : exact) total += x;
    CHECK(total == doctest::Approx(1.0));
    auto s = make_stream(8, 0);
    const int trials = 100000;
    std::vector<double> freq(exact.size(), 0);
    for (int i = 0; i < trials; ++i) {
        auto sigma = SpinConfig::constant(3, 1);
        for (int t = 0; t < 50; ++t) sigma = potts_tree_sw_step(sigma, tree, s).spins;
        freq[potts_state_index(sigma, 2)] += 1.0 / trials;
    }
    CHECK(tv(freq, exact) <= 0.01);
}

TEST_CASE("retained edges follow the edge-dual transition law")
{
    auto s = make_stream(9, 0);
    for (auto [p, q] : {std::pair{0.5, 2}, std::pair{0.3, 3}}) {
        const auto tree = path_tree(21, p, q);
        auto step = potts_tree_sw_step(SpinConfig::constant(21, 1), tree, s);
        double from0 = 0, from0to1 = 0, from1 = 0, from1to1 = 0;
        for (int i = 0; i < 5000; ++i) {
            const auto next = potts_tree_sw_step(step.spins, tree, s);
            for (std::size_t e = 0; e < next.retained.bits.size(); ++e) {
                if (step.retained.bits[e]) {
                    from1 += 1;
                    from1to1 += next.retained.bits[e];
                } else {
                    from0 += 1;
                    from0to1 += next.retained.bits[e];
                }
            }
            step = next;
        }
        CHECK(std::fabs(from1to1 / from1 - p) < 0.005 + 3 * std::sqrt(p * (1 - p) / from1));
        CHECK(std::fabs(from0to1 / from0 - p / q) < 0.005);
    }
}

TEST_CASE("tree mixing bound")
{
    CHECK(tree_mix_bound(1000, 0.5, 2) == 6);
    CHECK(tree_mix_bound(4, 1e-9, 2) == 1);
    std::int64_t prev = 0;
    for (std::int64_t n = 1; n < 5000; n = n * 3 + 1) {
        const auto b = tree_mix_bound(n, 0.3, 3);
        CHECK(b >= prev);
        prev = b;
    }
    CHECK_THROWS_AS(tree_mix_bound(10, 0.0, 2), ParameterError);
    CHECK_THROWS_AS(tree_mix_bound(10, 0.5, 1), ParameterError);
}
