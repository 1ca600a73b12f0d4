#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swmf/magnetization.hpp"
#include "swmf/stochastic.hpp"

namespace swmf {

/// Law of the magnetization S = sum of spins under the mean-field Ising
/// measure at inverse temperature beta. Atom k (0 <= k <= n) sits at
/// s = 2k - n with weight C(n, k) exp(beta (s^2 - n) / 2).
class StationaryLaw {
  public:
    static StationaryLaw from_beta(std::int64_t n, double beta);

    std::int64_t n() const { return n_; }
    double beta() const { return beta_; }

    const std::vector<double>& atoms() const { return atoms_; }
    static std::int64_t value_of(std::int64_t n, std::size_t k) { return 2 * static_cast<std::int64_t>(k) - n; }

    /// Mass at s; zero off the lattice.
    double mass(std::int64_t s) const;

    /// Law of |S|: slot j holds P(|S| = value), values n, n-2, ... in
    /// ascending order starting at n mod 2.
    const std::vector<double>& folded() const { return folded_; }
    std::int64_t folded_value(std::size_t j) const { return static_cast<std::int64_t>(n_ % 2) + 2 * static_cast<std::int64_t>(j); }

    /// Exact inverse-CDF draws.
    std::int64_t sample(RandomStream& stream) const;
    std::int64_t sample_abs(RandomStream& stream) const;

  private:
    std::int64_t n_ = 0;
    double beta_ = 0.0;
    std::vector<double> atoms_;
    std::vector<double> cumulative_;
    std::vector<double> folded_;
    std::vector<double> folded_cumulative_;
};

/// Stationary law for percolation parameter p = c / n, i.e.
/// beta = -log(1 - c/n) / 2. Requires 0 <= c < n.
StationaryLaw exact_stationary(std::int64_t n, double c);

/// Plug-in total variation between the empirical law of `samples` and the
/// law, summed over every lattice atom. Off-lattice samples throw DataError.
double tv_to_stationary(const std::vector<std::int64_t>& samples, const StationaryLaw& law);

/// Same on absolute values, against the folded law.
double tv_abs(const std::vector<std::int64_t>& samples, const StationaryLaw& law);

/// Expected plug-in TV of `trials` exact draws from a law with the given
/// atom masses: (1/2) sum_k E|Bin(N, pi_k) - N pi_k| / N, evaluated with
/// the closed form for the binomial mean absolute deviation.
double expected_plugin_tv(const std::vector<double>& masses, std::int64_t trials);

/// sqrt(#atoms / N) / 2 for the atoms with positive mass.
double heuristic_tv_allowance(const std::vector<double>& masses, std::int64_t trials);

// ---------------------------------------------------------------------------
// Mixing time

struct TvPoint {
    std::int64_t t = 0;
    double tv = 0.0;
    double allowance = 0.0;
};

struct MixingOptions {
    double threshold = 0.25;
    std::int64_t trials = 20000;
    std::int64_t horizon = 500;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::optional<std::int64_t> start;  // defaults to X_0 = n
};

struct MixingResult {
    std::int64_t time = 0;             // first t with tv <= threshold + allowance
    double interpolated_time = 0.0;    // linear interpolation of tv - allowance
    std::int64_t band_low = 0;         // first t with tv - band <= threshold + allowance
    std::int64_t band_high = 0;        // first t with tv + band <= threshold + allowance
    double band = 0.0;                 // 95% McDiarmid half-width sqrt(ln 40 / (2N))
    double allowance = 0.0;
    double heuristic_allowance = 0.0;
    std::vector<TvPoint> curve;
};

struct HorizonError : std::runtime_error {
    HorizonError(const std::string& what, std::vector<TvPoint> partial)
        : std::runtime_error(what), curve(std::move(partial)) {}
    std::vector<TvPoint> curve;
};

/// Runs `trials` independent chains from the start state and records the TV
/// of |X_t| to the folded stationary law until the upper band end crosses.
/// Throws HorizonError (carrying the curve so far) if the point estimate
/// has not crossed by options.horizon.
MixingResult mixing_time(const ChainParams& params, const MixingOptions& options);

/// CSV with header t,tv,tv_bias_allowance.
void write_tv_curve_csv(std::ostream& out, const std::vector<TvPoint>& curve);

// ---------------------------------------------------------------------------
// Maximal coupling of integer laws

struct IntLaw {
    std::int64_t lo = 0;
    std::vector<double> mass;  // mass[i] = P(value = lo + i)

    double at(std::int64_t v) const;
    std::int64_t hi() const { return lo + static_cast<std::int64_t>(mass.size()) - 1; }
};

/// Law of shift + (2 Bin(k, 1/2) - k).
IntLaw sign_sum_law(std::int64_t shift, std::int64_t k);

/// Law of |V| for V with the given law.
IntLaw fold(const IntLaw& law);

double total_variation(const IntLaw& a, const IntLaw& b);

/// Draws (A, B) with the given marginals and P(A = B) = 1 - TV(a, b):
/// with probability sum_v min(a, b) both take a value from the overlap,
/// otherwise each is drawn from its own normalized residual.
std::pair<std::int64_t, std::int64_t> maximal_coupling(const IntLaw& a, const IntLaw& b, RandomStream& stream);

// ---------------------------------------------------------------------------
// One-step couplings

struct CouplingOutcome {
    bool met = false;
    std::int64_t steps_used = 0;
    std::map<std::string, double> diagnostics;
};

struct CouplingOptions {
    // Both chains draw from identical copies of the stream.
    bool synchronized = false;
    // Unassigned isolated vertices; 0 selects ceil(n / (3 e^c)).
    std::int64_t reserve = 0;
};

std::int64_t supercritical_reserve(std::int64_t n, double c);

/// Couples |xbar + R| and |ybar + R'| where R, R' are sums of `reserve`
/// independent signs. Returns the pair of outputs.
std::pair<std::int64_t, std::int64_t> couple_sign_sums(std::int64_t xbar, std::int64_t ybar, std::int64_t reserve,
                                                       RandomStream& stream);

/// One coupled step of two standard chains: each chain percolates its
/// classes independently, signs components by descending size until
/// `reserve` isolated vertices are left, and the two remaining sign sums are
/// maximally coupled. Requires c > 2. Diagnostics: x_next, y_next, xbar,
/// ybar, isolated_x, isolated_y, reserve, shortfall, overlap.
CouplingOutcome couple_supercritical(MagState x, MagState y, std::int64_t n, double c, RandomStream& stream,
                                     const CouplingOptions& options = {});

/// One coupled step of two-dimensional chains with the same block sizes.
/// Isolated vertices forming pure single-block components stay unsigned in
/// each block; the per-block sign sums of everything else are completed by
/// two independent maximal couplings. Requires c < 2. Diagnostics include
/// the next states (y_a, z_a, y_b, z_b), isolated counts per block and
/// chain, and the per-block overlaps.
CouplingOutcome couple_two_dim(const TwoDimState& a, const TwoDimState& b, double c, RandomStream& stream,
                               const CouplingOptions& options = {});

// ---------------------------------------------------------------------------
// Crossing experiment

struct CrossingRecord {
    std::int64_t x0 = 0;
    std::int64_t y0 = 0;
    std::int64_t tau = 0;         // horizon when censored
    std::int64_t x_before = 0;
    std::int64_t y_before = 0;
    std::int64_t gap_before = 0;  // J_{tau-1} = X_{tau-1} - Y_{tau-1}
    bool censored = false;
};

struct CrossingOptions {
    std::int64_t n = 4096;
    double c = 2.0;
    std::int64_t x0 = 4096;
    double horizon_factor = 20.0;  // horizon K n^{1/4}
    std::int64_t trials = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::optional<std::int64_t> y0;  // fixed Y_0 instead of a draw from the law
};

std::int64_t crossing_horizon(std::int64_t n, double horizon_factor);

/// Runs two independent modified chains (largest component forced +) from
/// X_0 = x0 and Y_0 = |S|, S drawn from the law, up to the first t with
/// sign(J_t) != sign(J_0). A draw with Y_0 = x0 is redrawn; a fixed y0 equal
/// to x0 throws ParameterError. When `gaps` is given it receives J_0..J_tau.
CrossingRecord crossing_trial(std::int64_t x0, std::int64_t y0, std::int64_t n, double c, std::int64_t horizon,
                              RandomStream& stream, std::vector<std::int64_t>* gaps = nullptr);

std::vector<CrossingRecord> crossing_experiment(const StationaryLaw& y0_law, const CrossingOptions& options);

struct CrossingSummary {
    std::int64_t trials = 0;
    std::int64_t censored = 0;
    std::int64_t event_count = 0;  // tau <= K n^{1/4}, both states in the window, gap bounded
    double event_frequency = 0.0;
    double median_scaled_gap = 0.0;  // median |J_{tau-1}| / n^{5/8} over uncensored trials
    double mean_tau = 0.0;           // over uncensored trials
};

/// Window [n^{3/4} / window, window n^{3/4}] for both states and
/// |J_{tau-1}| <= gap_factor n^{5/8}.
CrossingSummary summarize_crossings(const std::vector<CrossingRecord>& records, std::int64_t n,
                                    double horizon_factor, double window, double gap_factor);

// ---------------------------------------------------------------------------
// Hitting experiments

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.96);

enum class HittingKind { tau_a, pushdown, pushup, window_stay, local_clt };

std::string to_string(HittingKind kind);
HittingKind parse_hitting_kind(const std::string& name);

struct HittingConfig {
    HittingKind kind = HittingKind::tau_a;
    std::int64_t n = 4096;
    double c = 2.0;
    std::int64_t trials = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::optional<std::int64_t> start;  // kind-specific default when absent
    double a = 1.0;       // tau_a level a n^{3/4}; pushup target level
    double b = 24.0;      // tau_a time scale b n^{1/4}
    double A = 10.0;      // window I = [-A n^{2/3}, A n^{2/3}]
    double K = 4.0;       // pushdown / pushup time scale K n^{1/4}
    double b1 = 1.0;      // window_stay start window [b1, b2] n^{3/4}
    double b2 = 2.0;
    double delta = 0.2;   // window_stay time delta n^{1/4}
    double h = 0.5;       // local_clt target radius h n^{5/8}
    std::int64_t k = 0;   // local_clt step count; 0 picks it by a pilot run
    std::int64_t k_max = 4;
    double floor = 0.01;  // local_clt floor on min P(X_k = x) n^{5/8}
    double cap = 10.0;    // window_stay cap on the resolved constant

    void validate() const;
};

struct HittingSummary {
    HittingKind kind = HittingKind::tau_a;
    std::int64_t start = 0;
    std::int64_t steps = 0;      // time horizon (or k for local_clt)
    std::int64_t successes = 0;  // trials where the measured event occurred
    std::int64_t trials = 0;
    double frequency = 0.0;
    double standard_error = 0.0;
    Interval ci;
    double bound = 0.0;              // the value the frequency is compared with
    double resolved_constant = 0.0;  // constant implied by the measurement
    bool pass = false;
    std::string event;
    std::map<std::string, double> extra;
};

/// Standard chain experiments. Events measured per kind:
///   tau_a: no X_t <= a n^{3/4} for t <= b n^{1/4} (compare with sqrt(6/(ab)) + 3 SE)
///   pushdown: X_t outside I for all t <= K n^{1/4} (resolved c = 2|X_0|/(freq t sqrt n))
///   pushup: X_t >= a n^{3/4} for some t <= K n^{1/4} from X_0 in I (resolved q)
///   window_stay: exit from [b1/2, b2 + b1/2] n^{3/4} by delta n^{1/4} (resolved C = freq / delta^2 <= cap)
///   local_clt: min over lattice x with |x - x_0| <= h n^{5/8} of P(X_k = x) n^{5/8} (>= floor)
HittingSummary hitting_experiment(const HittingConfig& config);

}  // namespace swmf
