#pragma once

#include "xva/gpr.hpp"
#include "xva/market.hpp"
#include "xva/random.hpp"
#include "xva/risky.hpp"
#include "xva/stochastic.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace xva {

enum class Method {
    GprMc, ///< one-step inner Monte Carlo averaged through the GPR surrogate
    GprEi, ///< closed-form integration of the GPR surrogate
};

const char* to_string(Method method) noexcept;

struct Budgets {
    std::size_t points = 2000;              ///< P, cloud size
    std::size_t inner_paths = 10000;        ///< M, inner paths per cloud point (GPR-MC)
    std::size_t european_pairs = 10000;     ///< antithetic pairs per cloud point for V^EU
    std::size_t root_european_pairs = 1000000; ///< antithetic pairs for V^EU(0, S0)
    bool control_variate = true;
    unsigned threads = 0;                   ///< 0 = default_thread_count()
    GprFitOptions gpr;
};

struct StepDiagnostics {
    int step = 0;
    std::size_t cloud_size = 0;
    double lml_riskless = 0.0;
    double lml_risky = 0.0;
    SEKernelParams kernel_riskless;
    SEKernelParams kernel_risky;
    double seconds = 0.0;
};

struct RisklessResult {
    double v0 = 0.0;
    McEstimate european0;                   ///< zero when the control variate is off
    std::vector<StateCloud> clouds;         ///< values_riskless filled at every step
    std::vector<StepDiagnostics> steps;
};

struct PricingResult {
    Method method = Method::GprEi;
    MtmConvention convention = MtmConvention::RisklessMark;
    double riskless_v0 = 0.0;
    double risky_v0 = 0.0;
    double xva = 0.0;                       ///< riskless_v0 - risky_v0
    McEstimate european0;
    std::vector<StepDiagnostics> steps;     ///< ordered from step N-1 down to 0
    double wall_time_s = 0.0;
};

/// Conditional expectations E[f(S_{t_{n+1}}) | S_{t_n} = x] for functions f
/// known only on the points of cloud n+1. Each target is replaced by its GPR
/// surrogate, which is then averaged over inner Monte Carlo paths (GPR-MC) or
/// integrated exactly against the one-step Gaussian law (GPR-EI).
///
/// Keeps one warm-start slot per target index, so the targets passed on
/// successive calls should keep their order.
class ContinuationEstimator {
public:
    ContinuationEstimator(const MarketParams& market, Method method, const Budgets& budgets,
                          const RngPolicy& policy);
    ~ContinuationEstimator();
    ContinuationEstimator(ContinuationEstimator&&) noexcept;
    ContinuationEstimator& operator=(ContinuationEstimator&&) noexcept;

    /// One vector per target, each with one entry per point of `current`.
    /// `fits`, if given, receives the fitted models.
    std::vector<std::vector<double>> expectations(const StateCloud& current, const StateCloud& next,
                                                  std::span<const std::vector<double>> targets,
                                                  std::vector<TrainedGPR>* fits = nullptr);

    Method method() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Riskless Bermudan value by backward induction over the state clouds.
RisklessResult price_riskless_gpr_mc(const MarketParams& market, const Payoff& payoff, const Budgets& budgets,
                                     const RngPolicy& policy);
RisklessResult price_riskless_gpr_ei(const MarketParams& market, const Payoff& payoff, const Budgets& budgets,
                                     const RngPolicy& policy);
RisklessResult price_riskless(const MarketParams& market, const Payoff& payoff, Method method,
                              const Budgets& budgets, const RngPolicy& policy);

/// One M = V step without control variates: V-hat at the points of `current`
/// given V at steps n and n+1 and V-hat at step n+1.
std::vector<double> risky_step_mark_riskless(const StateCloud& current, const StateCloud& next,
                                             std::span<const double> riskless_n,
                                             std::span<const double> riskless_next,
                                             std::span<const double> risky_next, const Payoff& payoff,
                                             const DerivedConstants& dc, double dt,
                                             ContinuationEstimator& estimator);

/// One M = V-hat step without control variates.
std::vector<double> risky_step_mark_risky(const StateCloud& current, const StateCloud& next,
                                          std::span<const double> risky_next, const Payoff& payoff,
                                          const DerivedConstants& dc, double dt,
                                          ContinuationEstimator& estimator);

/// Riskless and risky induction run side by side; xva = V(0) - V-hat(0).
PricingResult compute_xva(const MarketParams& market, const CreditParams& credit, const Payoff& payoff,
                          MtmConvention convention, Method method, const Budgets& budgets,
                          const RngPolicy& policy);

} // namespace xva
