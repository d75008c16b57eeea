#include "xva/random.hpp"

#include "xva/error.hpp"

#include <cmath>
#include <numeric>

namespace xva {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Acklam's rational approximation, |rel err| < 1.15e-9, refined below.
double acklam(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;
    if (p < low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - low) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double refined_quantile(double p) {
    double x = acklam(p);
    // One Halley step on Phi(x) - p. The tail branch uses the complementary
    // probability to keep relative accuracy.
    const double e = p < 0.5 ? 0.5 * std::erfc(-x * M_SQRT1_2) - p
                             : (1.0 - p) - 0.5 * std::erfc(x * M_SQRT1_2);
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

} // namespace

RngPolicy RngPolicy::for_dimension(std::size_t dim, std::uint64_t seed) {
    RngPolicy policy;
    policy.seed = seed;
    policy.halton_skip = 50;
    policy.scrambling = dim > 6 ? Scrambling::PerDimensionPermutation : Scrambling::None;
    return policy;
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * kGolden);
}

double CounterRng::uniform(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const noexcept {
    return refined_quantile(uniform(counter));
}

std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) noexcept {
    std::uint64_t key = mix64(seed ^ 0x6A09E667F3BCC909ULL);
    for (std::uint64_t id : ids) key = mix64(key ^ mix64(id + kGolden));
    return key;
}

std::vector<unsigned> first_primes(std::size_t count) {
    std::vector<unsigned> primes;
    primes.reserve(count);
    for (unsigned candidate = 2; primes.size() < count; ++candidate) {
        bool prime = true;
        for (unsigned p : primes) {
            if (p * p > candidate) break;
            if (candidate % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) primes.push_back(candidate);
    }
    return primes;
}

PointSet halton_points(std::size_t count, std::size_t dim, const RngPolicy& policy) {
    if (count == 0 || dim == 0) {
        throw InvalidParameter("stochastic-engine", "halton_points needs count >= 1 and dim >= 1");
    }
    const std::vector<unsigned> bases = first_primes(dim);
    PointSet points(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));

    for (std::size_t j = 0; j < dim; ++j) {
        const unsigned base = bases[j];
        // Digit permutation with 0 fixed so finite expansions stay finite.
        std::vector<unsigned> perm(base);
        std::iota(perm.begin(), perm.end(), 0u);
        if (policy.scrambling == Scrambling::PerDimensionPermutation && base > 2) {
            const CounterRng rng(derive_stream(policy.seed, {0x4A17u, j}));
            for (unsigned k = base - 1; k > 1; --k) {
                const unsigned pick = 1 + static_cast<unsigned>(rng.bits(k) % k);
                std::swap(perm[k], perm[pick]);
            }
        }
        const double inv_base = 1.0 / base;
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t index = policy.halton_skip + i + 1;
            double value = 0.0;
            double scale = inv_base;
            while (index > 0) {
                value += perm[index % base] * scale;
                index /= base;
                scale *= inv_base;
            }
            points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
        }
    }
    return points;
}

double inverse_normal_cdf(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("stochastic-engine", "inverse normal CDF needs u in (0, 1)");
    }
    return refined_quantile(u);
}

PointSet gaussian_from_uniform(const PointSet& uniforms) {
    PointSet out(uniforms.rows(), uniforms.cols());
    for (Eigen::Index i = 0; i < uniforms.size(); ++i) {
        out.data()[i] = inverse_normal_cdf(uniforms.data()[i]);
    }
    return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

} // namespace xva
