#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace swmf {

struct FixedPointResult {
    double value = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/// Positive root of 1 - exp(-theta x) = x (fraction of vertices in the giant
/// component of G(m, theta/m)). Bisection on [1e-9, 1]; theta <= 1 throws
/// DomainError.
FixedPointResult giant_fraction(double theta);

/// One-step mean map x -> beta(c(1+x)/2) (1+x)/2 of the supercritical
/// magnetization fraction. Requires c(1+x)/2 > 1.
double one_step_mean(double x, double c);

/// Fixed point of one_step_mean(., c) in (1 - 2/c, 1); c <= 2 throws.
FixedPointResult equilibrium_magnetization(double c);

/// Normalizer of the density exp(-u^4/12) on [0, inf), by quadrature.
double limit_normalizer();

/// Closed form Gamma(5/4) 12^{1/4} of the same integral.
double limit_normalizer_closed_form();

/// CDF of the density proportional to exp(-u^4/12) on [0, inf).
double limit_cdf(double x);

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

/// sup_x |F_n(x) - F(x)| for a sorted sample against a continuous CDF.
/// Needs at least 100 samples.
double ks_statistic(const std::vector<double>& sorted_samples, const std::function<double(double)>& cdf);

/// sup_x |G(x) - F(x)| between a discrete law (sorted support points with
/// masses) and a continuous CDF.
double ks_distance_discrete(const std::vector<double>& support, const std::vector<double>& mass,
                            const std::function<double(double)>& cdf);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares on (ln n, ln t). At least 3 points, all coordinates positive.
LinearFit power_law_fit(const std::vector<std::pair<double, double>>& points);

/// Least squares of t on ln n. At least 3 points with positive n.
LinearFit semilog_fit(const std::vector<std::pair<double, double>>& points);

// ---------------------------------------------------------------------------
// Component-size moment battery

enum class Comparison { two_sided, at_most, at_least };

struct MomentRecord {
    std::string name;
    std::string anchor;  // statement being checked
    double empirical = 0.0;
    double prediction = 0.0;
    double tolerance = 0.0;
    Comparison comparison = Comparison::two_sided;
    bool skipped = false;
    bool pass = false;
    std::string note;
};

/// pass as a pure function of (empirical, prediction, tolerance, comparison).
bool record_passes(double empirical, double prediction, double tolerance, Comparison comparison);

struct MomentReport {
    std::int64_t m = 0;
    double epsilon = 0.0;
    std::int64_t trials = 0;
    std::vector<MomentRecord> records;

    bool all_pass() const;  // skipped records do not count as failures
    const MomentRecord* find(const std::string& name) const;
};

struct MomentOptions {
    double probe_delta = 0.1;        // probe time fraction for the probed component
    double small_delta = 0.5;        // small components: |C| <= small_delta sqrt(m)
    double small_k = 0.05;           // small-mass threshold K m^{5/4}
    double small_freq_floor = 0.2;   // required frequency of the small-mass event
    double window_delta = 0.5;       // giant window half-width window_delta m^{5/8}
    double window_freq_floor = 0.05; // required window hit rate
    double deviation_cap = 0.05;     // A = 4 deviation frequency cap
    double sub_ratio_low = 0.5;      // subcritical second moment / (m / eps)
    double sub_ratio_high = 2.0;
    double lower_constant_cap = 5.0; // resolved C of the giant mean lower bound
};

MomentReport moment_battery(std::int64_t m, double epsilon, std::int64_t trials, std::uint64_t seed,
                            unsigned threads = 1, const MomentOptions& options = {});

void to_json(nlohmann::json& j, const MomentRecord& r);
void to_json(nlohmann::json& j, const MomentReport& r);

}  // namespace swmf
