#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// None of these call the library routine they are used to check.

#include "xva/gpr.hpp"
#include "xva/market.hpp"
#include "xva/risky.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace oracle {

// f(z) = max(E + (1/2)(a z^+ + b z^-), H) with a = dt c_p, b = dt c_m.
inline double fixed_point_map(double z, double e, double h, double a, double b) {
    const double g = z > 0.0 ? a * z : b * z;
    return std::max(e + 0.5 * g, h);
}

// Root of the strictly increasing F(z) = z - f(z).
inline double bisect_fixed_point(double e, double h, double a, double b) {
    auto F = [&](double z) { return z - fixed_point_map(z, e, h, a, b); };
    double width = 1.0 + std::abs(e) + std::abs(h);
    double lo = std::min(e, h) - width, hi = std::max(e, h) + width;
    while (F(lo) > 0.0) lo -= (width *= 2.0);
    while (F(hi) < 0.0) hi += (width *= 2.0);
    for (int i = 0; i < 400 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (F(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Gauss-Hermite rule for weight exp(-x^2) by the Golub-Welsch eigenproblem.
struct HermiteRule {
    std::vector<double> nodes, weights;
};

inline HermiteRule hermite_rule(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    HermiteRule rule;
    for (int i = 0; i < n; ++i) {
        rule.nodes.push_back(eig.eigenvalues()(i));
        const double v = eig.eigenvectors()(0, i);
        rule.weights.push_back(std::sqrt(std::numbers::pi) * v * v);
    }
    return rule;
}

// E[f(Z)], Z ~ N(0, C), by the tensor Gauss-Hermite rule in whitened coordinates.
inline double gauss_hermite_expectation(const std::function<double(std::span<const double>)>& f,
                                        const Eigen::MatrixXd& cov, int n) {
    const int d = static_cast<int>(cov.rows());
    const Eigen::MatrixXd L = cov.llt().matrixL();
    const HermiteRule rule = hermite_rule(n);
    std::vector<int> idx(d, 0);
    Eigen::VectorXd xi(d), z(d);
    double total = 0.0;
    while (true) {
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            xi(k) = std::sqrt(2.0) * rule.nodes[idx[k]];
            w *= rule.weights[idx[k]] / std::sqrt(std::numbers::pi);
        }
        z = L * xi;
        total += w * f({z.data(), static_cast<std::size_t>(d)});
        int k = 0;
        while (k < d && ++idx[k] == n) idx[k++] = 0;
        if (k == d) break;
    }
    return total;
}

struct SmallModelCase {
    xva::TrainedGPR model;
    Eigen::MatrixXd covariance;
};

// d <= 3, P <= 10, positive weights, covariance and length of comparable scale.
inline SmallModelCase random_small_model(std::mt19937_64& gen) {
    std::uniform_int_distribution<int> dims(1, 3), sizes(1, 10);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal;
    const int d = dims(gen), p = sizes(gen);

    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = 0.3 * normal(gen);
    Eigen::MatrixXd cov = a * a.transpose() + 0.05 * Eigen::MatrixXd::Identity(d, d);
    const double spread = std::sqrt(cov.trace() / d);

    xva::PointSet x(p, d);
    for (int i = 0; i < p; ++i)
        for (int k = 0; k < d; ++k) x(i, k) = spread * normal(gen);
    Eigen::VectorXd w(p);
    for (int i = 0; i < p; ++i) w(i) = 0.1 + unit(gen);

    xva::SEKernelParams params;
    params.sigma_f = 0.5 + unit(gen);
    params.length = spread * (0.5 + 1.5 * unit(gen));
    const double mean = 2.0 * unit(gen) - 1.0;
    return {xva::TrainedGPR::from_weights(std::move(x), std::move(w), params, mean), cov};
}

struct DeterministicValues {
    double riskless = 0.0;
    double risky = 0.0;
};

// Backward induction along the deterministic forward path (zero volatility).
inline DeterministicValues deterministic_dp(const std::function<double(double)>& payoff_at,
                                            const xva::MarketParams& m, const xva::DerivedConstants& dc,
                                            xva::MtmConvention conv) {
    const int N = m.num_steps;
    const double dt = m.dt();
    auto g = [&](double v) { return v > 0.0 ? dc.c_plus * v : dc.c_minus * v; };
    double v = payoff_at(m.maturity), vhat = v;
    for (int n = N - 1; n >= 0; --n) {
        const double h = payoff_at(n * dt);
        const double v_next = v;
        v = std::max(std::exp(-m.rate * dt) * v_next, h);
        const double mark_next = conv == xva::MtmConvention::RisklessMark ? v_next : vhat;
        const double e = std::exp(-dc.r0 * dt) * (0.5 * dt * g(mark_next) + vhat);
        if (conv == xva::MtmConvention::RisklessMark) {
            vhat = std::max(e + 0.5 * dt * g(v), h);
        } else {
            vhat = bisect_fixed_point(e, h, dt * dc.c_plus, dt * dc.c_minus);
        }
    }
    return {v, vhat};
}

inline double black_scholes_put(double s, double k, double r, double q, double vol, double t) {
    const double sd = vol * std::sqrt(t);
    const double d1 = (std::log(s / k) + (r - q) * t) / sd + 0.5 * sd;
    const double d2 = d1 - sd;
    auto N = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    return k * std::exp(-r * t) * N(-d2) - s * std::exp(-q * t) * N(-d1);
}

} // namespace oracle
