#include "doctest.h"

#include "xva/error.hpp"
#include "xva/random.hpp"

#include <cmath>
#include <set>

using namespace xva;

namespace {

// Phi^-1 by bisection on the erfc-based CDF.
double quantile_by_bisection(double u) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("halton radical inverse without skip") {
    RngPolicy policy;
    policy.halton_skip = 0;
    const PointSet h = halton_points(3, 2, policy);
    CHECK(h(0, 0) == 0.5);
    CHECK(h(0, 1) == doctest::Approx(1.0 / 3));
    CHECK(h(1, 0) == 0.25);
    CHECK(h(1, 1) == doctest::Approx(2.0 / 3));
    CHECK(h(2, 0) == 0.75);
    CHECK(h(2, 1) == doctest::Approx(1.0 / 9));
    CHECK(halton_points(1, 1, policy)(0, 0) == 0.5);
}

TEST_CASE("halton points are reproducible and inside the unit cube") {
    for (auto scrambling : {Scrambling::None, Scrambling::PerDimensionPermutation}) {
        RngPolicy policy = RngPolicy::for_dimension(12, 99);
        policy.scrambling = scrambling;
        const PointSet a = halton_points(500, 12, policy);
        const PointSet b = halton_points(500, 12, policy);
        CHECK(a == b);
        CHECK(a.minCoeff() > 0.0);
        CHECK(a.maxCoeff() < 1.0);
    }
    CHECK(RngPolicy::for_dimension(6).scrambling == Scrambling::None);
    CHECK(RngPolicy::for_dimension(7).scrambling == Scrambling::PerDimensionPermutation);
}

TEST_CASE("scrambled coordinates keep the low-discrepancy marginal") {
    RngPolicy policy = RngPolicy::for_dimension(10);
    const PointSet h = halton_points(1024, 10, policy);
    for (int k = 0; k < 10; ++k) CHECK(h.col(k).mean() == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("first primes") {
    const auto p = first_primes(10);
    CHECK(p == std::vector<unsigned>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29});
}

TEST_CASE("normal quantile") {
    CHECK(inverse_normal_cdf(0.5) == 0.0);
    CHECK(inverse_normal_cdf(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(inverse_normal_cdf(0.0), DomainError);
    CHECK_THROWS_AS(inverse_normal_cdf(1.0), DomainError);
    CHECK_THROWS_AS(inverse_normal_cdf(-0.1), DomainError);

    // Upper tail only down to 1e-7: closer to 1 the doubles are too coarse for
    // the bisection reference to resolve the quantile.
    double worst = 0.0;
    for (double e = -15.0; e < -0.31; e += 0.05) {
        const double u = std::pow(10.0, e);
        worst = std::max(worst, std::abs(inverse_normal_cdf(u) - quantile_by_bisection(u)));
        if (e > -7.0) worst = std::max(worst, std::abs(inverse_normal_cdf(1.0 - u) - quantile_by_bisection(1.0 - u)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("gaussian transform of uniforms") {
    PointSet u = PointSet::Constant(3, 4, 0.5);
    CHECK(gaussian_from_uniform(u).cwiseAbs().maxCoeff() == 0.0);
    u(1, 2) = 0.8413447460685429;
    CHECK(gaussian_from_uniform(u)(1, 2) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("counter generator") {
    const CounterRng rng(derive_stream(1, {2, 3}));
    CHECK(rng.bits(17) == CounterRng(derive_stream(1, {2, 3})).bits(17));
    CHECK(derive_stream(1, {2, 3}) != derive_stream(1, {3, 2}));
    CHECK(derive_stream(1, {2}) != derive_stream(2, {2}));

    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    std::set<std::uint64_t> seen;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform(i);
        CHECK_MESSAGE((u > 0.0 && u < 1.0), "uniform out of range");
        const double z = rng.normal(i);
        sum += z;
        sum2 += z * z;
        if (i < 1000) seen.insert(rng.bits(i));
    }
    CHECK(seen.size() == 1000);
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}
