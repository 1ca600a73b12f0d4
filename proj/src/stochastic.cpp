#include "swmf/stochastic.hpp"

#include <cmath>

#include <boost/random/binomial_distribution.hpp>

#include "swmf/errors.hpp"

namespace swmf {

namespace {

std::uint64_t splitmix64(std::uint64_t& x)
{
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Inversion by sequential search; valid for p <= 1/2 and small trials * p.
std::int64_t binomial_inversion(RandomStream& stream, std::int64_t trials, double p)
{
    const double q = 1.0 - p;
    const double ratio = p / q;
    const double f0 = std::exp(static_cast<double>(trials) * std::log1p(-p));
    for (;;) {
        double u = stream.uniform();
        double f = f0;
        std::int64_t k = 0;
        while (u > f) {
            u -= f;
            ++k;
            if (k > trials) break;
            f *= ratio * static_cast<double>(trials - k + 1) / static_cast<double>(k);
        }
        // Rounding can leave a sliver of mass beyond `trials`; redraw.
        if (k <= trials) return k;
    }
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id)
{
    std::uint64_t key = seed;
    std::uint64_t mixed = splitmix64(key);
    std::uint64_t id_key = stream_id ^ 0x6a09e667f3bcc909ULL;
    mixed ^= splitmix64(id_key) * 0xd1342543de82ef95ULL;
    for (auto& word : s_) word = splitmix64(mixed);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

RandomStream::result_type RandomStream::operator()()
{
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RandomStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::uint64_t RandomStream::below(std::uint64_t bound)
{
    if (bound == 0) throw ParameterError("below: bound must be positive");
    // Lemire's nearly divisionless method.
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = -bound % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>((*this)()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

RandomStream RandomStream::split(std::uint64_t sub_id) const
{
    std::uint64_t k = stream_id_ * 0x9e3779b97f4a7c15ULL + sub_id + 1;
    return RandomStream(seed_ ^ splitmix64(k), stream_id_ ^ rotl(sub_id + 0x2545f4914f6cdd1dULL, 23));
}

RandomStream make_stream(std::uint64_t seed, std::uint64_t stream_id)
{
    return RandomStream(seed, stream_id);
}

std::int64_t binomial(RandomStream& stream, std::int64_t trials, double p)
{
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("binomial: p must lie in [0, 1]");
    if (trials < 0) throw ParameterError("binomial: trials must be nonnegative");
    if (trials == 0 || p == 0.0) return 0;
    if (p == 1.0) return trials;
    if (p > 0.5) return trials - binomial(stream, trials, 1.0 - p);
    if (static_cast<double>(trials) * p < 30.0) return binomial_inversion(stream, trials, p);
    boost::random::binomial_distribution<std::int64_t, double> dist(trials, p);
    return dist(stream);
}

BinomialSampler::BinomialSampler(double p) : p_(p)
{
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("binomial: p must lie in [0, 1]");
    flipped_ = p > 0.5;
    small_p_ = flipped_ ? 1.0 - p : p;
    log_q_ = std::log1p(-small_p_);
    ratio_ = small_p_ < 1.0 ? small_p_ / (1.0 - small_p_) : 0.0;
}

std::int64_t BinomialSampler::operator()(RandomStream& stream, std::int64_t trials) const
{
    if (trials < 0) throw ParameterError("binomial: trials must be nonnegative");
    if (trials == 0 || p_ == 0.0) return 0;
    if (p_ == 1.0) return trials;
    if (static_cast<double>(trials) * small_p_ >= 30.0) return binomial(stream, trials, p_);
    const double f0 = std::exp(static_cast<double>(trials) * log_q_);
    std::int64_t k = 0;
    for (;;) {
        double u = stream.uniform();
        double f = f0;
        k = 0;
        while (u > f) {
            u -= f;
            ++k;
            if (k > trials) break;
            f *= ratio_ * static_cast<double>(trials - k + 1) / static_cast<double>(k);
        }
        if (k <= trials) break;
    }
    return flipped_ ? trials - k : k;
}

int rademacher(RandomStream& stream) { return (stream() >> 63) ? 1 : -1; }

bool bernoulli(RandomStream& stream, double p) { return stream.uniform() < p; }

double edge_probability(double c, std::int64_t n)
{
    if (n <= 0) throw ParameterError("edge_probability: n must be positive");
    return static_cast<double>(static_cast<long double>(c) / static_cast<long double>(n));
}

}  // namespace swmf
