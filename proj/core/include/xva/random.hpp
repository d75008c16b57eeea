#pragma once

#include "xva/types.hpp"

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace xva {

enum class Scrambling { None, PerDimensionPermutation };

/// Every random or quasi-random stream in the library is derived from one of
/// these; identical policies give bit-identical results.
struct RngPolicy {
    std::uint64_t seed = 20230427;
    std::size_t halton_skip = 50;
    Scrambling scrambling = Scrambling::None;

    /// Default policy: skip 50, digit-permutation scrambling when d > 6.
    static RngPolicy for_dimension(std::size_t dim, std::uint64_t seed = 20230427);
};

/// Counter-based generator (SplitMix64 finaliser applied to key + counter).
/// Draw k of a stream depends only on (key, k), so any substream can be
/// consumed from any thread without coordination.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t bits(std::uint64_t counter) const noexcept;
    /// Uniform in the open interval (0, 1).
    double uniform(std::uint64_t counter) const noexcept;
    double normal(std::uint64_t counter) const noexcept;

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
};

/// Hash a seed and a list of stream identifiers into an independent key.
std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) noexcept;

/// The first `count` primes.
std::vector<unsigned> first_primes(std::size_t count);

/// Halton points h_{skip+1}, ..., h_{skip+count} in bases 2, 3, 5, ...; one per row.
PointSet halton_points(std::size_t count, std::size_t dim, const RngPolicy& policy);

/// Standard normal quantile. Throws DomainError outside (0, 1).
double inverse_normal_cdf(double u);

/// Elementwise inverse normal CDF of a matrix of uniforms.
PointSet gaussian_from_uniform(const PointSet& uniforms);

double normal_cdf(double x);

} // namespace xva
