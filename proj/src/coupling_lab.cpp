#include "swmf/coupling_lab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>

#include "swmf/errors.hpp"
#include "swmf/parallel.hpp"
#include "swmf/random_graph.hpp"

namespace swmf {

namespace {

long double log_choose(std::int64_t n, std::int64_t k)
{
    return std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
           std::lgamma(static_cast<long double>(n - k) + 1);
}

std::size_t draw_index(const std::vector<double>& cumulative, double u)
{
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u * cumulative.back());
    const auto idx = static_cast<std::size_t>(it - cumulative.begin());
    return std::min(idx, cumulative.size() - 1);
}

std::vector<double> prefix_sums(const std::vector<double>& v)
{
    std::vector<double> out(v.size());
    std::partial_sum(v.begin(), v.end(), out.begin());
    return out;
}

double pow_n(std::int64_t n, double e) { return std::pow(static_cast<double>(n), e); }

}  // namespace

// ---------------------------------------------------------------------------
// Stationary law

StationaryLaw StationaryLaw::from_beta(std::int64_t n, double beta)
{
    if (n < 1) throw ParameterError("StationaryLaw: n must be positive");
    if (!std::isfinite(beta)) throw ParameterError("StationaryLaw: beta must be finite");
    StationaryLaw law;
    law.n_ = n;
    law.beta_ = beta;
    std::vector<long double> logw(static_cast<std::size_t>(n + 1));
    long double top = -std::numeric_limits<long double>::infinity();
    for (std::int64_t k = 0; k <= n; ++k) {
        const auto s = static_cast<long double>(value_of(n, static_cast<std::size_t>(k)));
        const long double w = log_choose(n, k) + static_cast<long double>(beta) * (s * s - n) / 2;
        logw[static_cast<std::size_t>(k)] = w;
        top = std::max(top, w);
    }
    long double total = 0;
    for (auto& w : logw) {
        w = std::exp(w - top);
        total += w;
    }
    law.atoms_.resize(logw.size());
    for (std::size_t k = 0; k < logw.size(); ++k) law.atoms_[k] = static_cast<double>(logw[k] / total);
    // Exact symmetry: average mirrored atoms.
    for (std::size_t k = 0, j = law.atoms_.size() - 1; k < j; ++k, --j) {
        const double avg = 0.5 * (law.atoms_[k] + law.atoms_[j]);
        law.atoms_[k] = law.atoms_[j] = avg;
    }
    law.cumulative_ = prefix_sums(law.atoms_);

    law.folded_.assign(static_cast<std::size_t>(n / 2 + 1), 0.0);
    for (std::size_t k = 0; k < law.atoms_.size(); ++k) {
        const std::int64_t s = value_of(n, k);
        law.folded_[static_cast<std::size_t>((s < 0 ? -s : s) / 2)] += law.atoms_[k];
    }
    law.folded_cumulative_ = prefix_sums(law.folded_);
    return law;
}

double StationaryLaw::mass(std::int64_t s) const
{
    if (!on_lattice(n_, s)) return 0.0;
    return atoms_[static_cast<std::size_t>((s + n_) / 2)];
}

std::int64_t StationaryLaw::sample(RandomStream& stream) const
{
    return value_of(n_, draw_index(cumulative_, stream.uniform()));
}

std::int64_t StationaryLaw::sample_abs(RandomStream& stream) const
{
    return folded_value(draw_index(folded_cumulative_, stream.uniform()));
}

StationaryLaw exact_stationary(std::int64_t n, double c)
{
    if (n < 1) throw ParameterError("exact_stationary: n must be positive");
    if (!(c >= 0.0)) throw ParameterError("exact_stationary: c must be nonnegative");
    if (c >= static_cast<double>(n)) throw ParameterError("exact_stationary: requires c < n (p = c/n < 1)");
    const double beta = -0.5 * std::log1p(-static_cast<double>(static_cast<long double>(c) / n));
    return StationaryLaw::from_beta(n, beta);
}

double tv_to_stationary(const std::vector<std::int64_t>& samples, const StationaryLaw& law)
{
    if (samples.empty()) throw DataError("tv_to_stationary: no samples");
    const std::int64_t n = law.n();
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n + 1), 0);
    for (auto s : samples) {
        if (!on_lattice(n, s)) throw DataError("tv_to_stationary: sample " + std::to_string(s) + " is off the lattice");
        ++counts[static_cast<std::size_t>((s + n) / 2)];
    }
    const double inv = 1.0 / static_cast<double>(samples.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) sum += std::abs(static_cast<double>(counts[k]) * inv - law.atoms()[k]);
    return std::min(1.0, 0.5 * sum);
}

double tv_abs(const std::vector<std::int64_t>& samples, const StationaryLaw& law)
{
    if (samples.empty()) throw DataError("tv_abs: no samples");
    const std::int64_t n = law.n();
    const auto& folded = law.folded();
    std::vector<std::int64_t> counts(folded.size(), 0);
    for (auto s : samples) {
        if (!on_lattice(n, s)) throw DataError("tv_abs: sample " + std::to_string(s) + " is off the lattice");
        ++counts[static_cast<std::size_t>((s < 0 ? -s : s) / 2)];
    }
    const double inv = 1.0 / static_cast<double>(samples.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) sum += std::abs(static_cast<double>(counts[j]) * inv - folded[j]);
    return std::min(1.0, 0.5 * sum);
}

double expected_plugin_tv(const std::vector<double>& masses, std::int64_t trials)
{
    if (trials < 1) throw ParameterError("expected_plugin_tv: trials must be positive");
    const auto N = static_cast<long double>(trials);
    long double total = 0;
    for (double pi : masses) {
        if (!(pi > 0.0) || !(pi < 1.0)) continue;
        // de Moivre: E|Bin(N, p) - N p| = 2 k C(N, k) p^k (1-p)^(N-k+1), k = floor(N p) + 1.
        const auto k = static_cast<std::int64_t>(std::floor(N * pi)) + 1;
        if (k > trials) continue;
        const long double log_mad = std::log(2.0L * k) + log_choose(trials, k) + k * std::log(static_cast<long double>(pi)) +
                                    (N - k + 1) * std::log1p(-static_cast<long double>(pi));
        total += std::exp(log_mad);
    }
    return static_cast<double>(0.5L * total / N);
}

double heuristic_tv_allowance(const std::vector<double>& masses, std::int64_t trials)
{
    if (trials < 1) throw ParameterError("heuristic_tv_allowance: trials must be positive");
    const auto atoms = std::count_if(masses.begin(), masses.end(), [](double m) { return m > 0.0; });
    return 0.5 * std::sqrt(static_cast<double>(atoms) / static_cast<double>(trials));
}

// ---------------------------------------------------------------------------
// Mixing time

MixingResult mixing_time(const ChainParams& params, const MixingOptions& options)
{
    params.validate();
    if (params.variant != Variant::standard && params.variant != Variant::modified_largest)
        throw ParameterError("mixing_time: variant must be standard or modified_largest");
    if (options.trials < 1) throw ParameterError("mixing_time: trials must be positive");
    if (options.horizon < 1) throw ParameterError("mixing_time: horizon must be positive");
    if (!(options.threshold > 0.0 && options.threshold < 1.0)) throw ParameterError("mixing_time: threshold must lie in (0, 1)");
    const std::int64_t n = params.n;
    const std::int64_t start = options.start.value_or(n);
    require_lattice(n, start);
    if (params.variant == Variant::standard && start < 0) throw ParameterError("mixing_time: standard chain needs X_0 >= 0");

    const StationaryLaw law = exact_stationary(n, params.c);
    MixingResult result;
    result.allowance = expected_plugin_tv(law.folded(), options.trials);
    result.heuristic_allowance = heuristic_tv_allowance(law.folded(), options.trials);
    result.band = std::sqrt(std::log(40.0) / (2.0 * static_cast<double>(options.trials)));
    const double level = options.threshold + result.allowance;

    const auto trials = static_cast<std::size_t>(options.trials);
    std::vector<std::int64_t> states(trials, start);
    std::vector<RandomStream> streams;
    streams.reserve(trials);
    for (std::size_t i = 0; i < trials; ++i) streams.push_back(make_stream(options.seed, i));

    const unsigned threads = std::max(1u, options.threads);
    const std::int64_t chunks = std::min<std::int64_t>(options.trials, static_cast<std::int64_t>(threads) * 4);
    std::optional<std::int64_t> crossed, low, high;
    for (std::int64_t t = 0;; ++t) {
        if (t > 0) {
            parallel_for(chunks, threads, [&](std::int64_t chunk) {
                ChainStepper stepper(params);
                const std::size_t begin = trials * static_cast<std::size_t>(chunk) / static_cast<std::size_t>(chunks);
                const std::size_t end = trials * static_cast<std::size_t>(chunk + 1) / static_cast<std::size_t>(chunks);
                for (std::size_t i = begin; i < end; ++i) states[i] = stepper.step(states[i], streams[i]);
            });
        }
        const double tv = tv_abs(states, law);
        result.curve.push_back({t, tv, result.allowance});
        if (!low && tv - result.band <= level) low = t;
        if (!crossed && tv <= level) crossed = t;
        if (!high && tv + result.band <= level) high = t;
        if (high) break;
        if (t >= options.horizon) {
            if (!crossed)
                throw HorizonError("mixing_time: TV did not reach " + std::to_string(level) + " within " +
                                       std::to_string(options.horizon) + " steps",
                                   result.curve);
            break;
        }
    }

    result.time = *crossed;
    result.band_low = *low;
    result.band_high = high.value_or(options.horizon);
    if (result.time == 0) {
        result.interpolated_time = 0.0;
    } else {
        const double before = result.curve[static_cast<std::size_t>(result.time - 1)].tv - result.allowance;
        const double after = result.curve[static_cast<std::size_t>(result.time)].tv - result.allowance;
        const double frac = before > after ? (before - options.threshold) / (before - after) : 1.0;
        result.interpolated_time = static_cast<double>(result.time - 1) + std::clamp(frac, 0.0, 1.0);
    }
    return result;
}

void write_tv_curve_csv(std::ostream& out, const std::vector<TvPoint>& curve)
{
    out << "t,tv,tv_bias_allowance\n";
    out.precision(10);
    for (const auto& p : curve) out << p.t << ',' << p.tv << ',' << p.allowance << '\n';
}

// ---------------------------------------------------------------------------
// Maximal coupling

double IntLaw::at(std::int64_t v) const
{
    if (v < lo || v > hi()) return 0.0;
    return mass[static_cast<std::size_t>(v - lo)];
}

IntLaw sign_sum_law(std::int64_t shift, std::int64_t k)
{
    if (k < 0) throw ParameterError("sign_sum_law: k must be nonnegative");
    IntLaw law;
    law.lo = shift - k;
    law.mass.assign(static_cast<std::size_t>(2 * k + 1), 0.0);
    // Start at the mode and walk outward with C(k, j+1) / C(k, j) = (k-j) / (j+1).
    const std::int64_t mode = k / 2;
    const long double peak = std::exp(log_choose(k, mode) - static_cast<long double>(k) * std::log(2.0L));
    long double w = peak;
    for (std::int64_t j = mode; j <= k; ++j) {
        law.mass[static_cast<std::size_t>(2 * j)] = static_cast<double>(w);
        w *= static_cast<long double>(k - j) / static_cast<long double>(j + 1);
    }
    w = peak;
    for (std::int64_t j = mode; j > 0; --j) {
        w *= static_cast<long double>(j) / static_cast<long double>(k - j + 1);
        law.mass[static_cast<std::size_t>(2 * (j - 1))] = static_cast<double>(w);
    }
    return law;
}

IntLaw fold(const IntLaw& law)
{
    std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = 0;
    for (std::size_t i = 0; i < law.mass.size(); ++i) {
        if (law.mass[i] <= 0.0) continue;
        const std::int64_t v = std::abs(law.lo + static_cast<std::int64_t>(i));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    IntLaw out;
    if (lo > hi) return out;
    out.lo = lo;
    out.mass.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (std::size_t i = 0; i < law.mass.size(); ++i) {
        if (law.mass[i] <= 0.0) continue;
        const std::int64_t v = std::abs(law.lo + static_cast<std::int64_t>(i));
        out.mass[static_cast<std::size_t>(v - lo)] += law.mass[i];
    }
    return out;
}

namespace {

struct Aligned {
    std::int64_t lo = 0;
    std::vector<double> a, b;
};

Aligned align(const IntLaw& a, const IntLaw& b)
{
    Aligned out;
    if (a.mass.empty() && b.mass.empty()) return out;
    const std::int64_t lo = a.mass.empty() ? b.lo : b.mass.empty() ? a.lo : std::min(a.lo, b.lo);
    const std::int64_t hi = a.mass.empty() ? b.hi() : b.mass.empty() ? a.hi() : std::max(a.hi(), b.hi());
    out.lo = lo;
    out.a.resize(static_cast<std::size_t>(hi - lo + 1));
    out.b.resize(out.a.size());
    for (std::int64_t v = lo; v <= hi; ++v) {
        out.a[static_cast<std::size_t>(v - lo)] = a.at(v);
        out.b[static_cast<std::size_t>(v - lo)] = b.at(v);
    }
    return out;
}

std::size_t draw_weighted(const std::vector<double>& w, double total, RandomStream& stream)
{
    double u = stream.uniform() * total;
    std::size_t last = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        last = i;
        if (u < w[i]) return i;
        u -= w[i];
    }
    return last;
}

}  // namespace

double total_variation(const IntLaw& a, const IntLaw& b)
{
    const Aligned al = align(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < al.a.size(); ++i) sum += std::abs(al.a[i] - al.b[i]);
    return std::min(1.0, 0.5 * sum);
}

namespace {

struct CoupledDraw {
    std::int64_t a = 0;
    std::int64_t b = 0;
    double overlap = 0.0;
};

CoupledDraw coupled_draw(const IntLaw& a, const IntLaw& b, RandomStream& stream)
{
    if (a.mass.empty() || b.mass.empty()) throw ParameterError("maximal_coupling: empty law");
    const Aligned al = align(a, b);
    const std::size_t size = al.a.size();
    std::vector<double> common(size), ra(size), rb(size);
    double overlap = 0.0, total_a = 0.0, total_b = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        common[i] = std::min(al.a[i], al.b[i]);
        ra[i] = al.a[i] - common[i];
        rb[i] = al.b[i] - common[i];
        overlap += common[i];
        total_a += ra[i];
        total_b += rb[i];
    }
    CoupledDraw out;
    out.overlap = std::min(1.0, overlap);
    const double mass_a = overlap + total_a;
    const bool share = total_a <= 0.0 || total_b <= 0.0 || stream.uniform() * mass_a < overlap;
    if (share) {
        const auto i = static_cast<std::int64_t>(draw_weighted(common, overlap, stream));
        out.a = out.b = al.lo + i;
        return out;
    }
    out.a = al.lo + static_cast<std::int64_t>(draw_weighted(ra, total_a, stream));
    out.b = al.lo + static_cast<std::int64_t>(draw_weighted(rb, total_b, stream));
    return out;
}

}  // namespace

std::pair<std::int64_t, std::int64_t> maximal_coupling(const IntLaw& a, const IntLaw& b, RandomStream& stream)
{
    const CoupledDraw d = coupled_draw(a, b, stream);
    return {d.a, d.b};
}

// ---------------------------------------------------------------------------
// Couplings

std::int64_t supercritical_reserve(std::int64_t n, double c)
{
    return static_cast<std::int64_t>(std::ceil(static_cast<double>(n) / (3.0 * std::exp(c))));
}

std::pair<std::int64_t, std::int64_t> couple_sign_sums(std::int64_t xbar, std::int64_t ybar, std::int64_t reserve,
                                                       RandomStream& stream)
{
    return maximal_coupling(fold(sign_sum_law(xbar, reserve)), fold(sign_sum_law(ybar, reserve)), stream);
}

namespace {

struct PartialSum {
    std::int64_t sum = 0;        // signed sum of every assigned component
    std::int64_t isolated = 0;   // isolated vertices before reserving
    std::int64_t unassigned = 0; // isolated vertices left unsigned
    bool shortfall = false;
};

// Signs components in descending size order, leaving `reserve` isolated
// vertices unsigned when there are enough of them.
PartialSum sign_all_but_reserve(std::int64_t n, std::int64_t x, const BinomialSampler& sampler, std::int64_t reserve,
                                RandomStream& stream)
{
    std::vector<std::int64_t> sizes, minus;
    sample_discovery_sizes((n + x) / 2, sampler, stream, sizes);
    sample_discovery_sizes((n - x) / 2, sampler, stream, minus);
    sizes.insert(sizes.end(), minus.begin(), minus.end());
    std::stable_sort(sizes.begin(), sizes.end(), std::greater<>());

    PartialSum out;
    out.isolated = std::count(sizes.begin(), sizes.end(), std::int64_t{1});
    out.shortfall = out.isolated < reserve;
    const std::int64_t keep = out.shortfall ? 0 : reserve;
    const std::size_t signed_count = sizes.size() - static_cast<std::size_t>(keep);
    for (std::size_t i = 0; i < signed_count; ++i) out.sum += rademacher(stream) * sizes[i];
    out.unassigned = keep;
    return out;
}

}  // namespace

CouplingOutcome couple_supercritical(MagState x, MagState y, std::int64_t n, double c, RandomStream& stream,
                                     const CouplingOptions& options)
{
    if (n < 2) throw ParameterError("couple_supercritical: n must be at least 2");
    if (!(c > 2.0) || c >= static_cast<double>(n)) throw ParameterError("couple_supercritical: requires 2 < c < n");
    require_lattice(n, x.x);
    require_lattice(n, y.x);
    if (x.x < 0 || y.x < 0) throw ParameterError("couple_supercritical: magnetizations must be nonnegative");
    if (options.reserve < 0) throw ParameterError("couple_supercritical: reserve must be nonnegative");
    const std::int64_t reserve = options.reserve > 0 ? options.reserve : supercritical_reserve(n, c);
    const BinomialSampler sampler(edge_probability(c, n));

    const std::uint64_t kx = stream();
    const std::uint64_t ky = options.synchronized ? kx : stream();
    RandomStream sx = stream.split(kx);
    RandomStream sy = stream.split(ky);
    const PartialSum px = sign_all_but_reserve(n, x.x, sampler, reserve, sx);
    const PartialSum py = sign_all_but_reserve(n, y.x, sampler, reserve, sy);

    CouplingOutcome out;
    out.steps_used = 1;
    auto& d = out.diagnostics;
    d["reserve"] = static_cast<double>(reserve);
    d["isolated_x"] = static_cast<double>(px.isolated);
    d["isolated_y"] = static_cast<double>(py.isolated);
    d["xbar"] = static_cast<double>(px.sum);
    d["ybar"] = static_cast<double>(py.sum);
    const bool shortfall = px.shortfall || py.shortfall;
    d["shortfall"] = shortfall ? 1.0 : 0.0;

    const IntLaw lx = fold(sign_sum_law(px.sum, px.unassigned));
    const IntLaw ly = fold(sign_sum_law(py.sum, py.unassigned));
    d["overlap"] = 0.0;
    std::int64_t xn = 0, yn = 0;
    if (shortfall) {
        // Every component was signed already; the chains just move on.
        xn = std::abs(px.sum);
        yn = std::abs(py.sum);
        out.met = false;
    } else {
        const CoupledDraw draw = coupled_draw(lx, ly, stream);
        xn = draw.a;
        yn = draw.b;
        d["overlap"] = draw.overlap;
        out.met = xn == yn;
    }
    d["x_next"] = static_cast<double>(xn);
    d["y_next"] = static_cast<double>(yn);
    return out;
}

namespace {

struct BlockSums {
    std::int64_t s1 = 0;  // spin sum over assigned vertices of G1
    std::int64_t s2 = 0;
    std::int64_t iso1 = 0;  // isolated vertices left unsigned in G1
    std::int64_t iso2 = 0;
};

BlockSums two_dim_partial(const TwoDimState& st, const BinomialSampler& sampler, RandomStream& stream)
{
    BlockSums out;
    std::vector<std::int64_t> sizes;
    std::vector<AllocatedComponent> comps;
    const std::int64_t class_g1[2] = {st.y, st.g1 - st.y};
    const std::int64_t class_g2[2] = {st.z, st.g2 - st.z};
    for (int cls = 0; cls < 2; ++cls) {
        sample_discovery_sizes(class_g1[cls] + class_g2[cls], sampler, stream, sizes);
        std::stable_sort(sizes.begin(), sizes.end(), std::greater<>());
        allocate_components(sizes, class_g1[cls], class_g2[cls], stream, comps);
        for (const auto& comp : comps) {
            if (comp.size == 1) {
                ++(comp.in_g1 == 1 ? out.iso1 : out.iso2);
                continue;
            }
            const int sign = rademacher(stream);
            out.s1 += sign * comp.in_g1;
            out.s2 += sign * (comp.size - comp.in_g1);
        }
    }
    return out;
}

}  // namespace

CouplingOutcome couple_two_dim(const TwoDimState& a, const TwoDimState& b, double c, RandomStream& stream,
                               const CouplingOptions& options)
{
    a.validate();
    b.validate();
    if (a.g1 != b.g1 || a.g2 != b.g2) throw ParameterError("couple_two_dim: block sizes differ between the chains");
    if (!(c >= 0.0) || c >= 2.0) throw ParameterError("couple_two_dim: requires 0 <= c < 2");
    const std::int64_t n = a.n();
    const BinomialSampler sampler(edge_probability(c, n));
    const auto need = [&](std::int64_t g) {
        return options.reserve > 0 ? options.reserve : static_cast<std::int64_t>(std::ceil(static_cast<double>(g) / (3.0 * std::exp(c))));
    };
    const std::int64_t need1 = need(a.g1), need2 = need(a.g2);

    const std::uint64_t ka = stream();
    const std::uint64_t kb = options.synchronized ? ka : stream();
    RandomStream sa = stream.split(ka);
    RandomStream sb = stream.split(kb);
    const BlockSums pa = two_dim_partial(a, sampler, sa);
    const BlockSums pb = two_dim_partial(b, sampler, sb);

    CouplingOutcome out;
    out.steps_used = 1;
    auto& d = out.diagnostics;
    d["isolated_g1_a"] = static_cast<double>(pa.iso1);
    d["isolated_g2_a"] = static_cast<double>(pa.iso2);
    d["isolated_g1_b"] = static_cast<double>(pb.iso1);
    d["isolated_g2_b"] = static_cast<double>(pb.iso2);
    d["required_g1"] = static_cast<double>(need1);
    d["required_g2"] = static_cast<double>(need2);
    const bool shortfall = pa.iso1 < need1 || pa.iso2 < need2 || pb.iso1 < need1 || pb.iso2 < need2;
    d["shortfall"] = shortfall ? 1.0 : 0.0;

    const IntLaw a1 = sign_sum_law(pa.s1, pa.iso1), b1 = sign_sum_law(pb.s1, pb.iso1);
    const IntLaw a2 = sign_sum_law(pa.s2, pa.iso2), b2 = sign_sum_law(pb.s2, pb.iso2);
    std::int64_t ta1 = 0, tb1 = 0, ta2 = 0, tb2 = 0;
    if (shortfall) {
        ta1 = pa.s1 + 2 * binomial(sa, pa.iso1, 0.5) - pa.iso1;
        ta2 = pa.s2 + 2 * binomial(sa, pa.iso2, 0.5) - pa.iso2;
        tb1 = pb.s1 + 2 * binomial(sb, pb.iso1, 0.5) - pb.iso1;
        tb2 = pb.s2 + 2 * binomial(sb, pb.iso2, 0.5) - pb.iso2;
        d["overlap_g1"] = d["overlap_g2"] = 0.0;
        out.met = false;
    } else {
        const CoupledDraw g1 = coupled_draw(a1, b1, stream);
        const CoupledDraw g2 = coupled_draw(a2, b2, stream);
        ta1 = g1.a;
        tb1 = g1.b;
        ta2 = g2.a;
        tb2 = g2.b;
        d["overlap_g1"] = g1.overlap;
        d["overlap_g2"] = g2.overlap;
        out.met = ta1 == tb1 && ta2 == tb2;
    }
    d["y_a"] = static_cast<double>((ta1 + a.g1) / 2);
    d["z_a"] = static_cast<double>((ta2 + a.g2) / 2);
    d["y_b"] = static_cast<double>((tb1 + b.g1) / 2);
    d["z_b"] = static_cast<double>((tb2 + b.g2) / 2);
    return out;
}

// ---------------------------------------------------------------------------
// Crossing experiment

std::int64_t crossing_horizon(std::int64_t n, double horizon_factor)
{
    if (!(horizon_factor > 0.0)) throw ParameterError("crossing: horizon factor must be positive");
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(horizon_factor * pow_n(n, 0.25))));
}

namespace {

int sign_of(std::int64_t v) { return (v > 0) - (v < 0); }

CrossingRecord run_crossing(ChainStepper& stepper, std::int64_t x0, std::int64_t y0, std::int64_t horizon,
                            RandomStream& stream, std::vector<std::int64_t>* gaps)
{
    CrossingRecord rec;
    rec.x0 = x0;
    rec.y0 = y0;
    const int s0 = sign_of(x0 - y0);
    if (gaps) {
        gaps->clear();
        gaps->push_back(x0 - y0);
    }
    std::int64_t x = x0, y = y0;
    for (std::int64_t t = 1; t <= horizon; ++t) {
        const std::int64_t xn = stepper.modified_largest(x, stream);
        const std::int64_t yn = stepper.modified_largest(y, stream);
        if (gaps) gaps->push_back(xn - yn);
        if (sign_of(xn - yn) != s0) {
            rec.tau = t;
            rec.x_before = x;
            rec.y_before = y;
            rec.gap_before = x - y;
            return rec;
        }
        x = xn;
        y = yn;
    }
    rec.censored = true;
    rec.tau = horizon;
    rec.x_before = x;
    rec.y_before = y;
    rec.gap_before = x - y;
    return rec;
}

}  // namespace

CrossingRecord crossing_trial(std::int64_t x0, std::int64_t y0, std::int64_t n, double c, std::int64_t horizon,
                              RandomStream& stream, std::vector<std::int64_t>* gaps)
{
    require_lattice(n, x0);
    require_lattice(n, y0);
    if (x0 == y0) throw ParameterError("crossing: X_0 = Y_0 leaves the crossing time undefined");
    if (horizon < 1) throw ParameterError("crossing: horizon must be positive");
    ChainStepper stepper(ChainParams{n, c, Variant::modified_largest, kDefaultDelta});
    return run_crossing(stepper, x0, y0, horizon, stream, gaps);
}

std::vector<CrossingRecord> crossing_experiment(const StationaryLaw& y0_law, const CrossingOptions& options)
{
    const std::int64_t n = options.n;
    const ChainParams params{n, options.c, Variant::modified_largest, kDefaultDelta};
    params.validate();
    if (y0_law.n() != n) throw ParameterError("crossing_experiment: law and chain sizes differ");
    require_lattice(n, options.x0);
    if (static_cast<double>(options.x0) < pow_n(n, 0.75))
        throw ParameterError("crossing_experiment: requires x0 >= n^{3/4}");
    if (options.trials < 1) throw ParameterError("crossing_experiment: trials must be positive");
    if (options.y0) {
        require_lattice(n, *options.y0);
        if (*options.y0 == options.x0) throw ParameterError("crossing_experiment: X_0 = Y_0 leaves the crossing time undefined");
    }
    const std::int64_t horizon = crossing_horizon(n, options.horizon_factor);

    std::vector<CrossingRecord> records(static_cast<std::size_t>(options.trials));
    const unsigned threads = std::max(1u, options.threads);
    const std::int64_t chunks = std::min<std::int64_t>(options.trials, static_cast<std::int64_t>(threads) * 4);
    parallel_for(chunks, threads, [&](std::int64_t chunk) {
        ChainStepper stepper(params);
        const auto total = static_cast<std::int64_t>(records.size());
        for (std::int64_t i = total * chunk / chunks; i < total * (chunk + 1) / chunks; ++i) {
            RandomStream stream = make_stream(options.seed, static_cast<std::uint64_t>(i));
            std::int64_t y0 = 0;
            if (options.y0) {
                y0 = *options.y0;
            } else {
                do {
                    y0 = y0_law.sample_abs(stream);
                } while (y0 == options.x0);
            }
            records[static_cast<std::size_t>(i)] = run_crossing(stepper, options.x0, y0, horizon, stream, nullptr);
        }
    });
    return records;
}

CrossingSummary summarize_crossings(const std::vector<CrossingRecord>& records, std::int64_t n, double horizon_factor,
                                    double window, double gap_factor)
{
    if (!(window >= 1.0) || !(gap_factor > 0.0)) throw ParameterError("summarize_crossings: invalid window constants");
    CrossingSummary s;
    s.trials = static_cast<std::int64_t>(records.size());
    const double scale = pow_n(n, 0.75);
    const double lo = scale / window, hi = scale * window;
    const double gap_scale = pow_n(n, 0.625);
    const double time_cap = horizon_factor * pow_n(n, 0.25);
    std::vector<double> scaled;
    double tau_sum = 0.0;
    for (const auto& r : records) {
        if (r.censored) {
            ++s.censored;
            continue;
        }
        const auto in = [&](std::int64_t v) { return static_cast<double>(v) >= lo && static_cast<double>(v) <= hi; };
        const double gap = std::abs(static_cast<double>(r.gap_before));
        if (static_cast<double>(r.tau) <= time_cap && in(r.x_before) && in(r.y_before) && gap <= gap_factor * gap_scale)
            ++s.event_count;
        scaled.push_back(gap / gap_scale);
        tau_sum += static_cast<double>(r.tau);
    }
    if (s.trials > 0) s.event_frequency = static_cast<double>(s.event_count) / static_cast<double>(s.trials);
    if (!scaled.empty()) {
        std::sort(scaled.begin(), scaled.end());
        const std::size_t mid = scaled.size() / 2;
        s.median_scaled_gap = scaled.size() % 2 ? scaled[mid] : 0.5 * (scaled[mid - 1] + scaled[mid]);
        s.mean_tau = tau_sum / static_cast<double>(scaled.size());
    }
    return s;
}

// ---------------------------------------------------------------------------
// Hitting experiments

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z)
{
    if (trials < 1 || successes < 0 || successes > trials) throw ParameterError("wilson_interval: invalid counts");
    const double nn = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::string to_string(HittingKind kind)
{
    switch (kind) {
    case HittingKind::tau_a: return "tau_a";
    case HittingKind::pushdown: return "pushdown";
    case HittingKind::pushup: return "pushup";
    case HittingKind::window_stay: return "window_stay";
    case HittingKind::local_clt: return "local_clt";
    }
    return "unknown";
}

HittingKind parse_hitting_kind(const std::string& name)
{
    for (auto k : {HittingKind::tau_a, HittingKind::pushdown, HittingKind::pushup, HittingKind::window_stay,
                   HittingKind::local_clt})
        if (to_string(k) == name) return k;
    throw ParameterError("unknown hitting experiment '" + name +
                         "' (expected tau_a, pushdown, pushup, window_stay or local_clt)");
}

void HittingConfig::validate() const
{
    ChainParams{n, c, Variant::standard, kDefaultDelta}.validate();
    if (trials < 1) throw ParameterError("hitting: trials must be positive");
    if (!(a > 0.0) || !(b > 0.0) || !(A > 0.0) || !(K > 0.0) || !(delta > 0.0) || !(h > 0.0))
        throw ParameterError("hitting: constants a, b, A, K, delta, h must be positive");
    if (!(b1 > 0.0) || !(b2 > b1)) throw ParameterError("hitting: window needs 0 < b1 < b2");
    if (k < 0 || k_max < 1) throw ParameterError("hitting: k must be nonnegative and k_max positive");
    if (!(floor >= 0.0) || !(cap > 0.0)) throw ParameterError("hitting: floor must be nonnegative and cap positive");
    if (start) {
        require_lattice(n, *start);
        if (*start < 0) throw ParameterError("hitting: the standard chain needs a nonnegative start");
    }
}

namespace {

// Runs fn(stepper, stream, trial) for every trial with a per-trial stream.
template <class Fn>
void for_each_trial(const HittingConfig& cfg, std::uint64_t salt, Fn&& fn)
{
    const ChainParams params{cfg.n, cfg.c, Variant::standard, kDefaultDelta};
    const unsigned threads = std::max(1u, cfg.threads);
    const std::int64_t chunks = std::min<std::int64_t>(cfg.trials, static_cast<std::int64_t>(threads) * 4);
    parallel_for(chunks, threads, [&](std::int64_t chunk) {
        ChainStepper stepper(params);
        for (std::int64_t i = cfg.trials * chunk / chunks; i < cfg.trials * (chunk + 1) / chunks; ++i) {
            RandomStream stream = make_stream(cfg.seed, static_cast<std::uint64_t>(i));
            if (salt != 0) stream = stream.split(salt);
            fn(stepper, stream, i);
        }
    });
}

void fill_frequency(HittingSummary& s, std::int64_t successes, std::int64_t trials)
{
    s.successes = successes;
    s.trials = trials;
    s.frequency = static_cast<double>(successes) / static_cast<double>(trials);
    s.standard_error = std::sqrt(s.frequency * (1.0 - s.frequency) / static_cast<double>(trials));
    s.ci = wilson_interval(successes, trials);
}

std::int64_t count_events(const HittingConfig& cfg, const std::function<bool(ChainStepper&, RandomStream&)>& trial)
{
    std::vector<char> hit(static_cast<std::size_t>(cfg.trials), 0);
    for_each_trial(cfg, 0, [&](ChainStepper& stepper, RandomStream& stream, std::int64_t i) {
        hit[static_cast<std::size_t>(i)] = trial(stepper, stream) ? 1 : 0;
    });
    return std::count(hit.begin(), hit.end(), 1);
}

// Minimum over targets of the empirical P(X_k = x) n^{5/8}, per k = 1..k_max,
// with the count at the minimizing target.
struct LocalProbe {
    std::vector<double> scaled_min;
    std::vector<std::int64_t> min_count;
};

LocalProbe local_probe(const HittingConfig& cfg, std::int64_t x0, const std::vector<std::int64_t>& targets,
                       std::int64_t k_max, std::uint64_t salt)
{
    const auto km = static_cast<std::size_t>(k_max);
    std::vector<std::int64_t> path(static_cast<std::size_t>(cfg.trials) * km);
    for_each_trial(cfg, salt, [&](ChainStepper& stepper, RandomStream& stream, std::int64_t i) {
        std::int64_t x = x0;
        for (std::size_t k = 0; k < km; ++k) {
            x = stepper.standard(x, stream);
            path[static_cast<std::size_t>(i) * km + k] = x;
        }
    });
    LocalProbe out;
    const double scale = pow_n(cfg.n, 0.625);
    const std::int64_t lo = targets.front();
    for (std::size_t k = 0; k < km; ++k) {
        std::vector<std::int64_t> counts(targets.size(), 0);
        for (std::int64_t i = 0; i < cfg.trials; ++i) {
            const std::int64_t x = path[static_cast<std::size_t>(i) * km + k];
            const std::int64_t idx = (x - lo) / 2;
            if (x >= lo && idx < static_cast<std::int64_t>(targets.size()) && (x - lo) % 2 == 0)
                ++counts[static_cast<std::size_t>(idx)];
        }
        const auto it = std::min_element(counts.begin(), counts.end());
        out.min_count.push_back(*it);
        out.scaled_min.push_back(static_cast<double>(*it) / static_cast<double>(cfg.trials) * scale);
    }
    return out;
}

}  // namespace

HittingSummary hitting_experiment(const HittingConfig& cfg)
{
    cfg.validate();
    const std::int64_t n = cfg.n;
    const double n34 = pow_n(n, 0.75), n14 = pow_n(n, 0.25), n23 = pow_n(n, 2.0 / 3.0), n58 = pow_n(n, 0.625);
    HittingSummary s;
    s.kind = cfg.kind;

    switch (cfg.kind) {
    case HittingKind::tau_a: {
        const double level = cfg.a * n34;
        s.start = cfg.start.value_or(lattice_toward_zero(n, 3.0 * n34));
        if (static_cast<double>(s.start) <= level) throw ParameterError("tau_a: start must exceed a n^{3/4}");
        s.steps = static_cast<std::int64_t>(std::floor(cfg.b * n14));
        const std::int64_t start = s.start, steps = s.steps;
        const std::int64_t events = count_events(cfg, [&](ChainStepper& st, RandomStream& rs) {
            std::int64_t x = start;
            for (std::int64_t t = 1; t <= steps; ++t) {
                x = st.standard(x, rs);
                if (static_cast<double>(x) <= level) return false;
            }
            return true;
        });
        fill_frequency(s, events, cfg.trials);
        s.event = "tau_a > b n^{1/4}";
        s.bound = std::sqrt(6.0 / (cfg.a * cfg.b));
        s.resolved_constant = s.frequency * s.frequency * cfg.a * cfg.b;
        s.pass = s.frequency <= s.bound + 3.0 * s.standard_error;
        break;
    }
    case HittingKind::pushdown: {
        const double half = cfg.A * n23;
        s.start = cfg.start.value_or(lattice_toward_zero(n, std::min(static_cast<double>(n), 2.0 * half)));
        s.steps = static_cast<std::int64_t>(std::ceil(cfg.K * n14));
        const std::int64_t start = s.start, steps = s.steps;
        const std::int64_t events = count_events(cfg, [&](ChainStepper& st, RandomStream& rs) {
            std::int64_t x = start;
            if (static_cast<double>(x) <= half) return false;
            for (std::int64_t t = 1; t <= steps; ++t) {
                x = st.standard(x, rs);
                if (static_cast<double>(x) <= half) return false;
            }
            return true;
        });
        fill_frequency(s, events, cfg.trials);
        s.event = "X_t outside I for all t <= K n^{1/4}";
        s.bound = 1.0;
        s.resolved_constant = s.frequency > 0.0
                                  ? 2.0 * static_cast<double>(s.start) / (s.frequency * static_cast<double>(s.steps) * std::sqrt(static_cast<double>(n)))
                                  : std::numeric_limits<double>::infinity();
        s.pass = s.ci.hi < 1.0;
        s.extra["A"] = cfg.A;
        break;
    }
    case HittingKind::pushup: {
        const double half = cfg.A * n23;
        const double level = cfg.a * n34;
        s.start = cfg.start.value_or(n % 2);
        if (static_cast<double>(s.start) > half) throw ParameterError("pushup: start must lie in I");
        s.steps = static_cast<std::int64_t>(std::ceil(cfg.K * n14));
        const std::int64_t start = s.start, steps = s.steps;
        const std::int64_t events = count_events(cfg, [&](ChainStepper& st, RandomStream& rs) {
            std::int64_t x = start;
            for (std::int64_t t = 1; t <= steps; ++t) {
                x = st.standard(x, rs);
                if (static_cast<double>(x) >= level) return true;
            }
            return false;
        });
        fill_frequency(s, events, cfg.trials);
        s.event = "X_t >= a n^{3/4} for some t <= K n^{1/4}";
        s.bound = 0.0;
        s.resolved_constant = s.frequency;
        s.pass = s.ci.lo > 0.0;
        s.extra["A"] = cfg.A;
        break;
    }
    case HittingKind::window_stay: {
        const double lo = cfg.b1 / 2.0 * n34, hi = (cfg.b2 + cfg.b1 / 2.0) * n34;
        s.start = cfg.start.value_or(lattice_toward_zero(n, (cfg.b1 + cfg.b2) / 2.0 * n34));
        const double sx = static_cast<double>(s.start);
        if (sx < cfg.b1 * n34 || sx > cfg.b2 * n34) throw ParameterError("window_stay: start must lie in [b1, b2] n^{3/4}");
        s.steps = static_cast<std::int64_t>(std::floor(cfg.delta * n14));
        if (s.steps < 1) throw ParameterError("window_stay: delta n^{1/4} is below one step");
        const std::int64_t start = s.start, steps = s.steps;
        const std::int64_t events = count_events(cfg, [&](ChainStepper& st, RandomStream& rs) {
            std::int64_t x = start;
            for (std::int64_t t = 1; t <= steps; ++t) {
                x = st.standard(x, rs);
                const auto v = static_cast<double>(x);
                if (v < lo || v > hi) return true;
            }
            return false;
        });
        fill_frequency(s, events, cfg.trials);
        s.event = "exit by delta n^{1/4}";
        s.bound = cfg.cap * cfg.delta * cfg.delta;
        s.resolved_constant = s.frequency / (cfg.delta * cfg.delta);
        s.pass = s.resolved_constant <= cfg.cap;
        break;
    }
    case HittingKind::local_clt: {
        s.start = cfg.start.value_or(lattice_toward_zero(n, n34));
        const double radius = cfg.h * n58;
        std::vector<std::int64_t> targets;
        for (std::int64_t x = s.start - 2 * static_cast<std::int64_t>(radius / 2.0); x <= s.start + radius; x += 2)
            if (x >= 0 && x <= n && std::abs(static_cast<double>(x - s.start)) <= radius) targets.push_back(x);
        if (targets.empty()) throw ParameterError("local_clt: no lattice targets in range");
        std::int64_t k = cfg.k;
        if (k == 0) {
            HittingConfig pilot = cfg;
            pilot.trials = std::max<std::int64_t>(1000, cfg.trials / 4);
            const LocalProbe probe = local_probe(pilot, s.start, targets, cfg.k_max, 0x70696c6f74ULL);
            k = 1 + static_cast<std::int64_t>(std::max_element(probe.scaled_min.begin(), probe.scaled_min.end()) -
                                              probe.scaled_min.begin());
            for (std::size_t j = 0; j < probe.scaled_min.size(); ++j)
                s.extra["pilot_k" + std::to_string(j + 1)] = probe.scaled_min[j];
        }
        const LocalProbe probe = local_probe(cfg, s.start, targets, k, 0);
        s.steps = k;
        fill_frequency(s, probe.min_count.back(), cfg.trials);
        s.event = "min_x P(X_k = x) n^{5/8}";
        s.resolved_constant = probe.scaled_min.back();
        s.bound = cfg.floor;
        s.pass = s.resolved_constant >= cfg.floor;
        s.extra["targets"] = static_cast<double>(targets.size());
        break;
    }
    }
    return s;
}

}  // namespace swmf
