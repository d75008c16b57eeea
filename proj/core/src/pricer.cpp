#include "xva/pricer.hpp"

#include "xva/error.hpp"
#include "xva/parallel.hpp"

#include <chrono>
#include <cmath>
#include <optional>

namespace xva {

namespace {

constexpr const char* kModule = "bermudan-pricer";

// Step covariance of the log-prices: dt * Pi, Pi_ij = rho_ij sigma_i sigma_j.
Matrix step_covariance(const MarketParams& market) {
    const auto d = static_cast<Eigen::Index>(market.dim());
    Matrix c(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            c(i, j) = market.correlation(i, j) * market.vols[static_cast<std::size_t>(i)] *
                      market.vols[static_cast<std::size_t>(j)] * market.dt();
        }
    }
    return c;
}

std::vector<double> payoff_on(const Payoff& payoff, const PointSet& points) {
    std::vector<double> out(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index p = 0; p < points.rows(); ++p) out[static_cast<std::size_t>(p)] = payoff(row_span(points, p));
    return out;
}

} // namespace

const char* to_string(Method method) noexcept { return method == Method::GprMc ? "gpr-mc" : "gpr-ei"; }

struct ContinuationEstimator::Impl {
    MarketParams market;
    Method method;
    Budgets budgets;
    RngPolicy policy;
    Matrix covariance;
    LogNormalStep step;
    std::vector<std::optional<SEKernelParams>> warm;

    Impl(const MarketParams& m, Method meth, const Budgets& b, const RngPolicy& pol)
        : market(m), method(meth), budgets(b), policy(pol), covariance(step_covariance(m)),
          step(m, factor_correlation(m.correlation), m.dt()) {}
};

ContinuationEstimator::ContinuationEstimator(const MarketParams& market, Method method, const Budgets& budgets,
                                             const RngPolicy& policy) {
    market.validate();
    if (method == Method::GprMc && budgets.inner_paths == 0) {
        throw InvalidParameter(kModule, "GPR-MC needs at least one inner path");
    }
    impl_ = std::make_unique<Impl>(market, method, budgets, policy);
}

ContinuationEstimator::~ContinuationEstimator() = default;
ContinuationEstimator::ContinuationEstimator(ContinuationEstimator&&) noexcept = default;
ContinuationEstimator& ContinuationEstimator::operator=(ContinuationEstimator&&) noexcept = default;

Method ContinuationEstimator::method() const noexcept { return impl_->method; }

std::vector<std::vector<double>> ContinuationEstimator::expectations(const StateCloud& current,
                                                                     const StateCloud& next,
                                                                     std::span<const std::vector<double>> targets,
                                                                     std::vector<TrainedGPR>* fits) {
    Impl& s = *impl_;
    const std::size_t d = s.market.dim();
    if (static_cast<std::size_t>(current.points.cols()) != d || static_cast<std::size_t>(next.points.cols()) != d) {
        throw DimensionMismatch(kModule, "cloud dimension differs from the market");
    }
    for (const auto& t : targets) {
        if (t.size() != next.size()) throw DimensionMismatch(kModule, "target length differs from the cloud size");
    }
    if (s.warm.size() < targets.size()) s.warm.resize(targets.size());

    // GPR-EI works on log-displacements; GPR-MC on prices standardised per dimension.
    PointSet inputs;
    Eigen::RowVectorXd centre = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(d));
    Eigen::RowVectorXd inv_scale = Eigen::RowVectorXd::Ones(static_cast<Eigen::Index>(d));
    if (s.method == Method::GprEi) {
        inputs = next.log_displacement;
    } else {
        centre = next.points.colwise().mean();
        for (Eigen::Index i = 0; i < centre.size(); ++i) {
            const double var = (next.points.col(i).array() - centre(i)).square().mean();
            if (var > 0.0) inv_scale(i) = 1.0 / std::sqrt(var);
        }
        inputs = (next.points.rowwise() - centre).array().rowwise() * inv_scale.array();
    }

    std::vector<TrainedGPR> models(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) {
        GprFitOptions options = s.budgets.gpr;
        SEKernelParams init;
        if (s.warm[k]) {
            init = *s.warm[k];
            options.multistart = false;
        } else {
            init = default_kernel_params(inputs, targets[k]);
        }
        models[k] = fit(inputs, targets[k], init, options);
        if (!models[k].is_constant()) s.warm[k] = models[k].params();
    }

    const std::size_t count = current.size();
    std::vector<std::vector<double>> out(targets.size(), std::vector<double>(count));
    if (s.method == Method::GprEi) {
        for (std::size_t k = 0; k < models.size(); ++k) {
            const GaussianIntegrator integrate(models[k], s.covariance);
            parallel_for(count, s.budgets.threads, [&](std::size_t p) {
                out[k][p] = integrate(row_span(current.log_displacement, static_cast<Eigen::Index>(p)));
            });
        }
    } else {
        std::vector<const TrainedGPR*> ptrs;
        for (const auto& m : models) ptrs.push_back(&m);
        const auto n = static_cast<std::uint64_t>(current.time_index);
        parallel_for(count, s.budgets.threads, [&](std::size_t p) {
            const CounterRng rng(derive_stream(s.policy.seed, {0x3Cu, n, static_cast<std::uint64_t>(p)}));
            PointSet inner = s.step.sample(row_span(current.points, static_cast<Eigen::Index>(p)),
                                           s.budgets.inner_paths, rng);
            inner = (inner.rowwise() - centre).array().rowwise() * inv_scale.array();
            const std::vector<double> means = mean_predictions(ptrs, inner);
            for (std::size_t k = 0; k < means.size(); ++k) out[k][p] = means[k];
        });
    }
    if (fits) *fits = std::move(models);
    return out;
}

namespace {

struct Induction {
    double v0 = 0.0;
    double vhat0 = 0.0;
    McEstimate european0;
    std::vector<StateCloud> clouds;
    std::vector<StepDiagnostics> steps;
};

Induction run_induction(const MarketParams& market, const Payoff& payoff, Method method, const Budgets& budgets,
                        const RngPolicy& policy, const DerivedConstants* dc, MtmConvention convention) {
    market.validate();
    if (payoff.dim() != market.dim()) throw DimensionMismatch(kModule, "payoff and market dimensions differ");
    if (budgets.points == 0) throw InvalidParameter(kModule, "cloud size must be positive");
    if (budgets.control_variate && (budgets.european_pairs == 0 || budgets.root_european_pairs == 0)) {
        throw InvalidParameter(kModule, "control variate needs a positive European path budget");
    }

    const bool risky = dc != nullptr;
    const bool cv = budgets.control_variate;
    const int steps = market.num_steps;
    const double dt = market.dt();
    const double disc = std::exp(-market.rate * dt);
    const double disc_risky = risky ? std::exp(-dc->r0 * dt) : 0.0;
    const double disc_intensity = risky ? std::exp(-dc->intensity_sum * dt) : 0.0;
    const Matrix factor = factor_correlation(market.correlation);

    Induction out;
    out.clouds = build_state_clouds(market, budgets.points, policy);
    ContinuationEstimator estimator(market, method, budgets, policy);

    StateCloud& last = out.clouds.back();
    std::vector<double> v_next = payoff_on(payoff, last.points);
    std::vector<double> vhat_next = v_next;
    std::vector<double> veu_next = v_next;
    last.values_riskless = v_next;
    if (risky) last.values_risky = vhat_next;

    for (int n = steps - 1; n >= 0; --n) {
        const auto started = std::chrono::steady_clock::now();
        StateCloud& cur = out.clouds[static_cast<std::size_t>(n)];
        const StateCloud& nxt = out.clouds[static_cast<std::size_t>(n + 1)];
        const std::size_t count = cur.size();
        const std::size_t next_count = nxt.size();
        const std::vector<double> h = payoff_on(payoff, cur.points);

        std::vector<double> veu(count, 0.0);
        if (cv) {
            if (n == 0) {
                out.european0 = european_price_mc_antithetic(market, payoff, 0.0, row_span(cur.points, 0),
                                                             budgets.root_european_pairs, policy);
                veu[0] = out.european0.price;
            } else {
                const EuropeanMonteCarlo euro(market, factor, payoff, market.maturity - cur.time,
                                              budgets.european_pairs,
                                              derive_stream(policy.seed, {0xE1u, static_cast<std::uint64_t>(n)}));
                parallel_for(count, budgets.threads, [&](std::size_t p) {
                    veu[p] = euro.price(row_span(cur.points, static_cast<Eigen::Index>(p))).price;
                });
            }
        }

        std::vector<std::vector<double>> targets(risky ? 2 : 1, std::vector<double>(next_count));
        for (std::size_t p = 0; p < next_count; ++p) {
            targets[0][p] = cv ? v_next[p] - veu_next[p] : v_next[p];
            if (risky) {
                const double mark = convention == MtmConvention::RisklessMark ? v_next[p] : vhat_next[p];
                const double bracket = 0.5 * dt * source_g(mark, *dc) + vhat_next[p];
                targets[1][p] = cv ? bracket - v_next[p] : bracket;
            }
        }

        std::vector<TrainedGPR> fits;
        const auto expect = estimator.expectations(cur, nxt, targets, &fits);

        std::vector<double> v(count);
        std::vector<double> continuation(count);
        for (std::size_t p = 0; p < count; ++p) {
            continuation[p] = disc * expect[0][p] + (cv ? veu[p] : 0.0);
            v[p] = std::max(continuation[p], h[p]);
        }
        std::vector<double> vhat;
        if (risky) {
            vhat.resize(count);
            for (std::size_t p = 0; p < count; ++p) {
                // With the control variate, E[V_{n+1} | x] = e^{r dt} C_n is added back.
                const double bracket = cv ? disc_risky * expect[1][p] + disc_intensity * continuation[p]
                                          : disc_risky * expect[1][p];
                vhat[p] = convention == MtmConvention::RisklessMark
                              ? risky_update_mark_riskless(bracket, v[p], h[p], *dc, dt, true)
                              : risky_update_mark_risky(bracket, h[p], *dc, dt, true);
            }
        }

        StepDiagnostics diag;
        diag.step = n;
        diag.cloud_size = next_count;
        diag.lml_riskless = fits[0].log_marginal_likelihood();
        diag.kernel_riskless = fits[0].params();
        if (risky) {
            diag.lml_risky = fits[1].log_marginal_likelihood();
            diag.kernel_risky = fits[1].params();
        }
        diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        out.steps.push_back(diag);

        cur.values_riskless = v;
        if (risky) cur.values_risky = vhat;
        v_next = std::move(v);
        veu_next = std::move(veu);
        if (risky) vhat_next = std::move(vhat);
    }
    out.v0 = v_next[0];
    out.vhat0 = risky ? vhat_next[0] : out.v0;
    return out;
}

RisklessResult to_riskless(Induction&& run) {
    RisklessResult r;
    r.v0 = run.v0;
    r.european0 = run.european0;
    r.clouds = std::move(run.clouds);
    r.steps = std::move(run.steps);
    return r;
}

} // namespace

RisklessResult price_riskless(const MarketParams& market, const Payoff& payoff, Method method,
                              const Budgets& budgets, const RngPolicy& policy) {
    return to_riskless(run_induction(market, payoff, method, budgets, policy, nullptr, MtmConvention::RisklessMark));
}

RisklessResult price_riskless_gpr_mc(const MarketParams& market, const Payoff& payoff, const Budgets& budgets,
                                     const RngPolicy& policy) {
    return price_riskless(market, payoff, Method::GprMc, budgets, policy);
}

RisklessResult price_riskless_gpr_ei(const MarketParams& market, const Payoff& payoff, const Budgets& budgets,
                                     const RngPolicy& policy) {
    return price_riskless(market, payoff, Method::GprEi, budgets, policy);
}

std::vector<double> risky_step_mark_riskless(const StateCloud& current, const StateCloud& next,
                                             std::span<const double> riskless_n,
                                             std::span<const double> riskless_next,
                                             std::span<const double> risky_next, const Payoff& payoff,
                                             const DerivedConstants& dc, double dt,
                                             ContinuationEstimator& estimator) {
    if (riskless_n.size() != current.size() || riskless_next.size() != next.size() ||
        risky_next.size() != next.size()) {
        throw DimensionMismatch("xva-pricer", "value vectors do not match the clouds");
    }
    std::vector<std::vector<double>> target(1, std::vector<double>(next.size()));
    for (std::size_t p = 0; p < next.size(); ++p) {
        target[0][p] = 0.5 * dt * source_g(riskless_next[p], dc) + risky_next[p];
    }
    const auto expect = estimator.expectations(current, next, target);
    const double disc = std::exp(-dc.r0 * dt);
    const std::vector<double> h = payoff_on(payoff, current.points);
    std::vector<double> out(current.size());
    for (std::size_t p = 0; p < out.size(); ++p) {
        out[p] = risky_update_mark_riskless(disc * expect[0][p], riskless_n[p], h[p], dc, dt, true);
    }
    return out;
}

std::vector<double> risky_step_mark_risky(const StateCloud& current, const StateCloud& next,
                                          std::span<const double> risky_next, const Payoff& payoff,
                                          const DerivedConstants& dc, double dt,
                                          ContinuationEstimator& estimator) {
    if (risky_next.size() != next.size()) throw DimensionMismatch("xva-pricer", "value vector does not match the cloud");
    std::vector<std::vector<double>> target(1, std::vector<double>(next.size()));
    for (std::size_t p = 0; p < next.size(); ++p) {
        target[0][p] = 0.5 * dt * source_g(risky_next[p], dc) + risky_next[p];
    }
    const auto expect = estimator.expectations(current, next, target);
    const double disc = std::exp(-dc.r0 * dt);
    const std::vector<double> h = payoff_on(payoff, current.points);
    std::vector<double> out(current.size());
    for (std::size_t p = 0; p < out.size(); ++p) {
        out[p] = risky_update_mark_risky(disc * expect[0][p], h[p], dc, dt, true);
    }
    return out;
}

PricingResult compute_xva(const MarketParams& market, const CreditParams& credit, const Payoff& payoff,
                          MtmConvention convention, Method method, const Budgets& budgets,
                          const RngPolicy& policy) {
    const auto started = std::chrono::steady_clock::now();
    market.validate();
    const DerivedConstants dc = derive_constants(market, credit);
    Induction run = run_induction(market, payoff, method, budgets, policy, &dc, convention);
    PricingResult r;
    r.method = method;
    r.convention = convention;
    r.riskless_v0 = run.v0;
    r.risky_v0 = run.vhat0;
    r.xva = r.riskless_v0 - r.risky_v0;
    r.european0 = run.european0;
    r.steps = std::move(run.steps);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return r;
}

} // namespace xva
