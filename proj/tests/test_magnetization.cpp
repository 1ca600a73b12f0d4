#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "swmf/errors.hpp"
#include "swmf/magnetization.hpp"
#include "swmf/sw_dynamics.hpp"

using namespace swmf;

namespace {

// Two-sample Kolmogorov-Smirnov distance for integer samples.
double ks_two_sample(std::vector<std::int64_t> a, std::vector<std::int64_t> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double worst = 0;
    while (i < a.size() || j < b.size()) {
        std::int64_t v;
        if (j == b.size() || (i < a.size() && a[i] <= b[j]))
            v = a[i];
        else
            v = b[j];
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        worst = std::max(worst, std::fabs(double(i) / a.size() - double(j) / b.size()));
    }
    return worst;
}

double ks_critical_001(std::size_t na, std::size_t nb)
{
    return 1.628 * std::sqrt(double(na + nb) / (double(na) * double(nb)));
}

}  // namespace

TEST_CASE("lattice helpers")
{
    CHECK(on_lattice(10, 4));
    CHECK_FALSE(on_lattice(10, 5));
    CHECK_FALSE(on_lattice(10, 12));
    CHECK(on_lattice(9, -9));
    CHECK(lattice_toward_zero(10, 5.7) == 4);
    CHECK(lattice_toward_zero(10, -5.7) == -4);
    CHECK(lattice_toward_zero(9, 5.7) == 5);
    CHECK(lattice_toward_zero(9, 4.2) == 3);
    CHECK(lattice_toward_zero(9, 40.0) == 9);
    CHECK_THROWS_AS(require_lattice(10, 3), ParameterError);
}

TEST_CASE("params validation")
{
    CHECK_THROWS_AS(ChainParams({1, 1.0}).validate(), ParameterError);
    CHECK_THROWS_AS(ChainParams({10, 11.0}).validate(), ParameterError);
    CHECK_THROWS_AS(ChainParams({10, 1.0, Variant::modified_delta, 1.5}).validate(), ParameterError);
    CHECK(parse_variant("modified_largest") == Variant::modified_largest);
    CHECK(to_string(Variant::two_dim) == "two_dim");
    CHECK_THROWS_AS(parse_variant("other"), ParameterError);
    auto s = make_stream(1, 0);
    CHECK_THROWS_AS(step_standard({3}, ChainParams{10, 1.0}, s), ParameterError);
    CHECK_THROWS_AS(step_standard({-2}, ChainParams{10, 1.0}, s), ParameterError);
}

TEST_CASE("lattice closure of every variant")
{
    auto s = make_stream(2, 0);
    for (std::int64_t n : {2, 7, 64, 301})
        for (double c : {0.0, 1.0, 2.0, 3.0}) {
            if (c > double(n)) continue;
            ChainStepper standard({n, c, Variant::standard});
            ChainStepper largest({n, c, Variant::modified_largest});
            ChainStepper probe({n, c, Variant::modified_delta, 0.5});
            std::int64_t a = n, b = -n, d = n;
            for (int t = 0; t < 2000; ++t) {
                a = standard.standard(a, s);
                b = largest.modified_largest(b, s);
                REQUIRE(on_lattice(n, a));
                REQUIRE(a >= 0);
                REQUIRE(on_lattice(n, b));
                if (probe.probe_time(d) >= 1) {
                    d = probe.modified_delta(d, s).x;
                    REQUIRE(on_lattice(n, d));
                } else {
                    d = n;
                }
            }
        }
}

TEST_CASE("standard chain with c = 0 sums independent signs")
{
    auto s = make_stream(3, 0);
    ChainStepper stepper({10, 0.0});
    const int trials = 100000;
    int zero = 0;
    for (int i = 0; i < trials; ++i) zero += stepper.standard(10, s) == 0;
    CHECK(std::fabs(zero / double(trials) - 252.0 / 1024.0) < 0.004);
}

TEST_CASE("modified chain with c = 0 has exactly one forced plus")
{
    auto s = make_stream(4, 0);
    ChainStepper stepper({1000, 0.0, Variant::modified_largest});
    const int trials = 100000;
    double sum = 0;
    for (int i = 0; i < trials; ++i) sum += static_cast<double>(stepper.modified_largest(200, s));
    // A +-0.02 band would need about 2.5e6 draws (variance 999); use 3 sigma.
    CHECK(std::fabs(sum / trials - 1.0) < 3 * std::sqrt(999.0 / trials));
}

TEST_CASE("absolute value of the modified chain matches the standard chain")
{
    auto s = make_stream(5, 0);
    const ChainParams std_params{2048, 2.0, Variant::standard};
    ChainStepper standard(std_params);
    ChainStepper largest({2048, 2.0, Variant::modified_largest});
    const int trials = 30000;
    std::vector<std::int64_t> a, b;
    for (int i = 0; i < trials; ++i) {
        a.push_back(standard.standard(512, s));
        b.push_back(std::abs(largest.modified_largest(512, s)));
    }
    CHECK(ks_two_sample(a, b) < ks_critical_001(a.size(), b.size()));
}

TEST_CASE("standard chain from zero is symmetric before the absolute value")
{
    // With x = 0 both classes are G(n/2, c/n). Check the second and fourth
    // moments are those of a nondegenerate symmetric mixture.
    auto s = make_stream(6, 0);
    ChainStepper standard({400, 1.5});
    const int trials = 100000;
    double m2 = 0, m4 = 0;
    for (int i = 0; i < trials; ++i) {
        const double x = static_cast<double>(standard.standard(0, s));
        m2 += x * x;
        m4 += x * x * x * x;
    }
    // E S^2 = E sum |C|^2 over both halves: positive and finite.
    CHECK(m2 / trials > 400.0);
    CHECK(m4 / trials > 3 * (m2 / trials) * (m2 / trials) * 0.5);
}

TEST_CASE("modified_delta chain")
{
    auto s = make_stream(7, 0);
    ChainStepper stepper({100, 2.0, Variant::modified_delta, 0.1});
    CHECK_THROWS_AS(stepper.modified_delta(0, s), ParameterError);
    CHECK_THROWS_AS(stepper.modified_delta(6, s), ParameterError);
    CHECK_NOTHROW(stepper.modified_delta(10, s));
}

TEST_CASE("modified_delta probe rounding")
{
    ChainStepper stepper({100, 2.0, Variant::modified_delta, 0.1});
    CHECK(stepper.probe_time(10) == 1);  // 0.1 * 0.1 * 55 = 0.55
    CHECK(stepper.probe_time(6) == 0);   // 0.1 * 0.06 * 53 = 0.318
    CHECK(stepper.probe_time(100) == 10);
    auto s = make_stream(8, 0);
    for (int i = 0; i < 100; ++i) {
        const auto st = stepper.modified_delta(10, s);
        CHECK(on_lattice(100, st.x));
        CHECK(st.forced_size <= st.largest_size);
    }
}

TEST_CASE("probed component is usually the largest")
{
    // At x = n^{3/4} the probe time 55 is comparable to the time the giant
    // needs to be reached (about eps^-2), so agreement is only partial; it
    // approaches one as eps^3 m grows.
    auto s = make_stream(9, 0);
    const std::int64_t n = 10000;
    ChainStepper stepper({n, 2.0, Variant::modified_delta, 0.1});
    const int trials = 2000;
    auto agreement = [&](std::int64_t x) {
        int agree = 0;
        for (int i = 0; i < trials; ++i) {
            const auto st = stepper.modified_delta(x, s);
            agree += st.forced_size == st.largest_size;
        }
        return agree / double(trials);
    };
    const double near = agreement(lattice_toward_zero(n, std::pow(double(n), 0.75)));
    const double far = agreement(lattice_toward_zero(n, 0.4 * n));
    CHECK(near >= 0.5);
    CHECK(far >= 0.95);
    CHECK(far > near);
}

TEST_CASE("allocation draws without replacement")
{
    auto s = make_stream(10, 0);
    std::vector<AllocatedComponent> out;
    allocate_components({3, 2, 1}, 4, 2, s, out);
    std::int64_t g1 = 0;
    for (const auto& c : out) {
        CHECK(c.in_g1 >= 0);
        CHECK(c.in_g1 <= c.size);
        g1 += c.in_g1;
    }
    CHECK(g1 == 4);
    CHECK_THROWS_AS(allocate_components({5}, 2, 2, s, out), ParameterError);

    // Size-2 component from (3, 3): P(both in G1) = 3/6 * 2/5 = 0.2.
    const int trials = 100000;
    int both = 0;
    for (int i = 0; i < trials; ++i) {
        allocate_components({2, 4}, 3, 3, s, out);
        both += out[0].in_g1 == 2;
    }
    CHECK(std::fabs(both / double(trials) - 0.2) < 4 * std::sqrt(0.16 / trials));
}

TEST_CASE("two-dimensional chain")
{
    auto s = make_stream(11, 0);
    SUBCASE("c = 0 halves each block")
    {
        const TwoDimState start{30, 20, 30, 20};
        const int trials = 100000;
        double y = 0, z = 0;
        for (int i = 0; i < trials; ++i) {
            const auto next = step_two_dim(start, 0.0, s);
            REQUIRE_NOTHROW(next.validate());
            y += static_cast<double>(next.y);
            z += static_cast<double>(next.z);
        }
        CHECK(std::fabs(y / trials - 15.0) < 4 * std::sqrt(30 * 0.25 / trials));
        CHECK(std::fabs(z / trials - 10.0) < 4 * std::sqrt(20 * 0.25 / trials));
    }
    SUBCASE("positive count matches the full spin chain")
    {
        const std::int64_t n = 128;
        const TwoDimState start{40, 30, 64, 64};
        SpinConfig sigma{std::vector<int>(n, -1)};
        for (int v = 0; v < 40; ++v) sigma.spins[static_cast<std::size_t>(v)] = 1;
        for (int v = 64; v < 94; ++v) sigma.spins[static_cast<std::size_t>(v)] = 1;
        const int trials = 20000;
        std::vector<std::int64_t> a, b;
        for (int i = 0; i < trials; ++i) {
            a.push_back(step_two_dim(start, 1.0, s).positives());
            b.push_back((sw_step_complete(sigma, 1.0, s).magnetization() + n) / 2);
        }
        CHECK(ks_two_sample(a, b) < ks_critical_001(a.size(), b.size()));

        // Block split of the full chain: positives among vertices 0..63.
        std::vector<std::int64_t> ya, yb;
        for (int i = 0; i < trials; ++i) {
            ya.push_back(step_two_dim(start, 1.0, s).y);
            const auto out = sw_step_complete(sigma, 1.0, s);
            yb.push_back(std::count(out.spins.begin(), out.spins.begin() + 64, 1));
        }
        CHECK(ks_two_sample(ya, yb) < ks_critical_001(ya.size(), yb.size()));
    }
    SUBCASE("empty positive class")
    {
        const TwoDimState start{0, 0, 50, 50};
        const int trials = 20000;
        std::vector<std::int64_t> a, b;
        ChainStepper single({100, 1.0});
        for (int i = 0; i < trials; ++i) {
            a.push_back(std::abs(step_two_dim(start, 1.0, s).magnetization()));
            b.push_back(single.standard(100, s));
        }
        CHECK(ks_two_sample(a, b) < ks_critical_001(a.size(), b.size()));
    }
    CHECK_THROWS_AS(step_two_dim(TwoDimState{5, 0, 4, 4}, 1.0, s), ParameterError);
}

TEST_CASE("trajectory csv")
{
    std::ostringstream a, b;
    write_trajectory_csv(a, std::vector<std::int64_t>{4, 2});
    write_trajectory_csv(b, std::vector<TwoDimState>{{1, 2, 3, 3}});
    CHECK(a.str() == "t,x\n0,4\n1,2\n");
    CHECK(b.str() == "t,y,z\n0,1,2\n");
}
