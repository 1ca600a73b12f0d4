#include "swmf/magnetization.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "swmf/errors.hpp"
#include "swmf/random_graph.hpp"

namespace swmf {

std::string to_string(Variant v)
{
    switch (v) {
    case Variant::standard: return "standard";
    case Variant::modified_largest: return "modified_largest";
    case Variant::modified_delta: return "modified_delta";
    case Variant::two_dim: return "two_dim";
    }
    return "unknown";
}

Variant parse_variant(const std::string& name)
{
    if (name == "standard") return Variant::standard;
    if (name == "modified_largest" || name == "modified") return Variant::modified_largest;
    if (name == "modified_delta") return Variant::modified_delta;
    if (name == "two_dim") return Variant::two_dim;
    throw ParameterError("unknown chain variant '" + name + "'");
}

void ChainParams::validate() const
{
    if (n < 2) throw ParameterError("ChainParams: n must be at least 2");
    if (!(c >= 0.0)) throw ParameterError("ChainParams: c must be nonnegative");
    if (c > static_cast<double>(n)) throw ParameterError("ChainParams: c / n must not exceed 1");
    if (variant == Variant::modified_delta && !(delta > 0.0 && delta < 1.0))
        throw ParameterError("ChainParams: delta must lie in (0, 1)");
}

double ChainParams::p() const { return edge_probability(c, n); }

void TwoDimState::validate() const
{
    if (g1 < 0 || g2 < 0 || g1 + g2 < 1) throw ParameterError("TwoDimState: block sizes must be nonnegative with positive total");
    if (y < 0 || y > g1) throw ParameterError("TwoDimState: y must lie in [0, g1]");
    if (z < 0 || z > g2) throw ParameterError("TwoDimState: z must lie in [0, g2]");
}

bool on_lattice(std::int64_t n, std::int64_t x)
{
    return x >= -n && x <= n && ((x - n) % 2 == 0);
}

void require_lattice(std::int64_t n, std::int64_t x)
{
    if (!on_lattice(n, x))
        throw ParameterError("magnetization " + std::to_string(x) + " is not in {-n, -n+2, ..., n} for n = " +
                             std::to_string(n));
}

std::int64_t lattice_toward_zero(std::int64_t n, double x)
{
    const double clamped = std::clamp(x, -static_cast<double>(n), static_cast<double>(n));
    auto v = static_cast<std::int64_t>(std::trunc(clamped));
    if ((v - n) % 2 != 0) v += v > 0 ? -1 : 1;
    return v;
}

// ---------------------------------------------------------------------------

ChainStepper::ChainStepper(const ChainParams& params) : params_(params), sampler_((params.validate(), params.p()))
{
    histogram_.assign(static_cast<std::size_t>(params_.n + 1), 0);
}

std::int64_t ChainStepper::step(std::int64_t x, RandomStream& stream)
{
    switch (params_.variant) {
    case Variant::standard: return standard(x, stream);
    case Variant::modified_largest: return modified_largest(x, stream);
    case Variant::modified_delta: return modified_delta(x, stream).x;
    case Variant::two_dim: break;
    }
    throw ParameterError("ChainStepper: the two-dimensional chain has its own state type");
}

void ChainStepper::add_to_histogram(const std::vector<std::int64_t>& sizes, std::size_t skip_index)
{
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (i == skip_index) continue;
        auto& slot = histogram_[static_cast<std::size_t>(sizes[i])];
        if (slot == 0) touched_.push_back(sizes[i]);
        ++slot;
    }
}

std::int64_t ChainStepper::signed_sum(RandomStream& stream)
{
    // Components of equal size are exchangeable, so the signs of the k
    // components of size s add up to s (2 Bin(k, 1/2) - k).
    std::sort(touched_.begin(), touched_.end(), std::greater<>());
    std::int64_t total = 0;
    for (auto s : touched_) {
        auto& k = histogram_[static_cast<std::size_t>(s)];
        total += s * (2 * binomial(stream, k, 0.5) - k);
        k = 0;
    }
    touched_.clear();
    return total;
}

std::int64_t ChainStepper::standard(std::int64_t x, RandomStream& stream)
{
    require_lattice(params_.n, x);
    if (x < 0) throw ParameterError("standard chain: magnetization must be nonnegative");
    sample_discovery_sizes((params_.n + x) / 2, sampler_, stream, plus_sizes_);
    sample_discovery_sizes((params_.n - x) / 2, sampler_, stream, minus_sizes_);
    add_to_histogram(plus_sizes_, plus_sizes_.size());
    add_to_histogram(minus_sizes_, minus_sizes_.size());
    const std::int64_t s = signed_sum(stream);
    return s < 0 ? -s : s;
}

std::int64_t ChainStepper::modified_largest(std::int64_t x, RandomStream& stream)
{
    require_lattice(params_.n, x);
    const std::int64_t ax = x < 0 ? -x : x;
    sample_discovery_sizes((params_.n + ax) / 2, sampler_, stream, plus_sizes_);
    sample_discovery_sizes((params_.n - ax) / 2, sampler_, stream, minus_sizes_);
    const auto largest_of = [](const std::vector<std::int64_t>& v) {
        return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    };
    const std::size_t ip = largest_of(plus_sizes_);
    const std::size_t im = largest_of(minus_sizes_);
    const std::int64_t lp = ip < plus_sizes_.size() ? plus_sizes_[ip] : 0;
    const std::int64_t lm = im < minus_sizes_.size() ? minus_sizes_[im] : 0;
    // The larger of the two class-largest components is forced positive; the
    // smaller one is signed like every other component.
    std::int64_t forced = 0;
    if (lp >= lm) {
        forced = lp;
        add_to_histogram(plus_sizes_, ip);
        add_to_histogram(minus_sizes_, minus_sizes_.size());
    } else {
        forced = lm;
        add_to_histogram(plus_sizes_, plus_sizes_.size());
        add_to_histogram(minus_sizes_, im);
    }
    return forced + signed_sum(stream);
}

std::int64_t ChainStepper::probe_time(std::int64_t x) const
{
    const std::int64_t ax = x < 0 ? -x : x;
    const std::int64_t m = (params_.n + ax) / 2;
    const double eps = static_cast<double>(ax) / static_cast<double>(params_.n);
    return std::llround(params_.delta * eps * static_cast<double>(m));
}

ProbeStep ChainStepper::modified_delta(std::int64_t x, RandomStream& stream)
{
    require_lattice(params_.n, x);
    const std::int64_t t = probe_time(x);
    if (t < 1)
        throw ParameterError("modified_delta chain: probe time delta * eps * m rounds to 0 at x = " +
                             std::to_string(x) + "; use the modified_largest chain here");
    const std::int64_t ax = x < 0 ? -x : x;
    const std::int64_t m = (params_.n + ax) / 2;
    auto probed = sample_sizes_with_probe(m, sampler_, std::min(t, m), stream);
    plus_sizes_.swap(probed.sizes);
    sample_discovery_sizes((params_.n - ax) / 2, sampler_, stream, minus_sizes_);

    ProbeStep out;
    out.forced_size = plus_sizes_[probed.probe_index];
    out.largest_size = *std::max_element(plus_sizes_.begin(), plus_sizes_.end());
    add_to_histogram(plus_sizes_, probed.probe_index);
    add_to_histogram(minus_sizes_, minus_sizes_.size());
    out.x = out.forced_size + signed_sum(stream);
    return out;
}

MagState step_standard(MagState x, const ChainParams& params, RandomStream& stream)
{
    ChainStepper stepper(params);
    return {stepper.standard(x.x, stream)};
}

MagState step_modified(MagState x, const ChainParams& params, RandomStream& stream)
{
    ChainStepper stepper(params);
    return {stepper.modified_largest(x.x, stream)};
}

MagState step_modified_delta(MagState x, const ChainParams& params, RandomStream& stream)
{
    ChainParams p = params;
    p.variant = Variant::modified_delta;
    ChainStepper stepper(p);
    return {stepper.modified_delta(x.x, stream).x};
}

// ---------------------------------------------------------------------------

void allocate_components(const std::vector<std::int64_t>& sizes, std::int64_t r1, std::int64_t r2,
                         RandomStream& stream, std::vector<AllocatedComponent>& out)
{
    out.clear();
    out.reserve(sizes.size());
    for (auto s : sizes) {
        if (s > r1 + r2) throw ParameterError("allocate_components: sizes exceed the class population");
        AllocatedComponent comp{s, 0};
        for (std::int64_t k = 0; k < s; ++k) {
            if (r2 == 0 || (r1 > 0 && stream.below(static_cast<std::uint64_t>(r1 + r2)) < static_cast<std::uint64_t>(r1))) {
                ++comp.in_g1;
                --r1;
            } else {
                --r2;
            }
        }
        out.push_back(comp);
    }
}

TwoDimState step_two_dim(const TwoDimState& state, double c, RandomStream& stream)
{
    state.validate();
    const std::int64_t n = state.n();
    if (!(c >= 0.0) || c > static_cast<double>(n)) throw ParameterError("step_two_dim: c must lie in [0, n]");
    const BinomialSampler sampler(edge_probability(c, n));

    std::vector<std::int64_t> sizes;
    std::vector<AllocatedComponent> comps;
    TwoDimState out{0, 0, state.g1, state.g2};
    const std::int64_t class_g1[2] = {state.y, state.g1 - state.y};
    const std::int64_t class_g2[2] = {state.z, state.g2 - state.z};
    for (int cls = 0; cls < 2; ++cls) {
        const std::int64_t r1 = class_g1[cls], r2 = class_g2[cls];
        sample_discovery_sizes(r1 + r2, sampler, stream, sizes);
        std::stable_sort(sizes.begin(), sizes.end(), std::greater<>());
        allocate_components(sizes, r1, r2, stream, comps);
        for (const auto& comp : comps) {
            if (rademacher(stream) > 0) {
                out.y += comp.in_g1;
                out.z += comp.size - comp.in_g1;
            }
        }
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<std::int64_t>& xs)
{
    out << "t,x\n";
    for (std::size_t t = 0; t < xs.size(); ++t) out << t << ',' << xs[t] << '\n';
}

void write_trajectory_csv(std::ostream& out, const std::vector<TwoDimState>& states)
{
    out << "t,y,z\n";
    for (std::size_t t = 0; t < states.size(); ++t) out << t << ',' << states[t].y << ',' << states[t].z << '\n';
}

}  // namespace swmf
