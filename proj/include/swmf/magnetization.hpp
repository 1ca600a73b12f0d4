#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "swmf/stochastic.hpp"

namespace swmf {

enum class Variant { standard, modified_largest, modified_delta, two_dim };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

constexpr double kDefaultDelta = 0.1;

/// Chain on K_n with percolation parameter p = c / n.
struct ChainParams {
    std::int64_t n = 2;
    double c = 1.0;
    Variant variant = Variant::standard;
    double delta = kDefaultDelta;  // probe fraction, modified_delta only

    void validate() const;
    double p() const;
};

struct MagState {
    std::int64_t x = 0;
};

/// Positive counts inside the two fixed blocks G1 (size g1) and G2 (size g2).
struct TwoDimState {
    std::int64_t y = 0;
    std::int64_t z = 0;
    std::int64_t g1 = 0;
    std::int64_t g2 = 0;

    void validate() const;
    std::int64_t n() const { return g1 + g2; }
    std::int64_t positives() const { return y + z; }
    std::int64_t magnetization() const { return 2 * (y + z) - n(); }
    bool operator==(const TwoDimState&) const = default;
};

/// True when x lies in {-n, -n+2, ..., n}.
bool on_lattice(std::int64_t n, std::int64_t x);

/// Throws ParameterError unless on_lattice(n, x).
void require_lattice(std::int64_t n, std::int64_t x);

/// Nearest lattice point to x in the direction of zero (clamped to [-n, n]).
std::int64_t lattice_toward_zero(std::int64_t n, double x);

/// Outcome of a modified_delta step with the sizes needed for diagnostics.
struct ProbeStep {
    std::int64_t x = 0;
    std::int64_t forced_size = 0;   // component given the + sign
    std::int64_t largest_size = 0;  // largest component of the supercritical side
};

/// Stateful stepper that caches the binomial sampler and scratch buffers so
/// ensembles can step millions of times without reallocating. Not thread
/// safe; use one per thread.
class ChainStepper {
  public:
    explicit ChainStepper(const ChainParams& params);

    const ChainParams& params() const { return params_; }

    /// Dispatches on params().variant (two_dim is rejected).
    std::int64_t step(std::int64_t x, RandomStream& stream);

    std::int64_t standard(std::int64_t x, RandomStream& stream);
    std::int64_t modified_largest(std::int64_t x, RandomStream& stream);
    ProbeStep modified_delta(std::int64_t x, RandomStream& stream);

    /// Probe time round(delta * eps * m) for the supercritical side, where
    /// eps = |x| / n and m = (n + |x|) / 2.
    std::int64_t probe_time(std::int64_t x) const;

  private:
    ChainParams params_;
    BinomialSampler sampler_;
    std::vector<std::int64_t> plus_sizes_;
    std::vector<std::int64_t> minus_sizes_;
    std::vector<std::int64_t> histogram_;
    std::vector<std::int64_t> touched_;

    // Sum of independent signs attached to the given component sizes,
    // consumed in descending size order.
    std::int64_t signed_sum(RandomStream& stream);
    void add_to_histogram(const std::vector<std::int64_t>& sizes, std::size_t skip_index);
};

MagState step_standard(MagState x, const ChainParams& params, RandomStream& stream);
MagState step_modified(MagState x, const ChainParams& params, RandomStream& stream);
MagState step_modified_delta(MagState x, const ChainParams& params, RandomStream& stream);

/// One component split between the blocks.
struct AllocatedComponent {
    std::int64_t size = 0;
    std::int64_t in_g1 = 0;
};

/// Splits each component of a spin class between G1 and G2 by drawing its
/// vertices without replacement from the class's remaining block counts
/// (r1 in G1, r2 in G2). Sizes must sum to r1 + r2.
void allocate_components(const std::vector<std::int64_t>& sizes, std::int64_t r1, std::int64_t r2,
                         RandomStream& stream, std::vector<AllocatedComponent>& out);

TwoDimState step_two_dim(const TwoDimState& state, double c, RandomStream& stream);

void write_trajectory_csv(std::ostream& out, const std::vector<std::int64_t>& xs);
void write_trajectory_csv(std::ostream& out, const std::vector<TwoDimState>& states);

}  // namespace swmf
