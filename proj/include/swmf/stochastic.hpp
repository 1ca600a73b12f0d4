#pragma once

#include <cstdint>
#include <limits>

namespace swmf {

/// Seeded random stream. The (seed, stream_id) pair fully determines the
/// draw sequence; distinct stream ids give independent sequences. One
/// stream is owned by one thread at a time.
///
/// The generator is xoshiro256** with its state expanded from a SplitMix64
/// hash of (seed, stream_id), so a stream can be re-created from its key at
/// any point without replaying other streams.
class RandomStream {
  public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream_id);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Independent child stream keyed by (seed, stream_id, sub_id).
    RandomStream split(std::uint64_t sub_id) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t s_[4];
};

RandomStream make_stream(std::uint64_t seed, std::uint64_t stream_id);

/// Exact Binomial(trials, p) draw. Inversion when trials * min(p, 1-p) < 30,
/// BTRD otherwise. Throws ParameterError when p is outside [0, 1].
std::int64_t binomial(RandomStream& stream, std::int64_t trials, double p);

/// +1 or -1 with probability 1/2 each.
int rademacher(RandomStream& stream);

bool bernoulli(RandomStream& stream, double p);

/// Binomial sampler with a fixed success probability, for hot loops that draw
/// many variates with varying trial counts (exploration processes).
class BinomialSampler {
  public:
    explicit BinomialSampler(double p);

    std::int64_t operator()(RandomStream& stream, std::int64_t trials) const;

    double p() const { return p_; }

  private:
    double p_;
    double small_p_;  // min(p, 1 - p)
    double log_q_;    // log(1 - small_p)
    double ratio_;    // small_p / (1 - small_p)
    bool flipped_;
};

/// Edge probability c / n evaluated in extended precision.
double edge_probability(double c, std::int64_t n);

}  // namespace swmf
