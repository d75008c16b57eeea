#pragma once

#include "xva/types.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace xva {

/// Isotropic squared-exponential kernel
///   k(z, z') = sigma_f^2 exp(-|z - z'|^2 / (2 length^2))
/// plus i.i.d. observation noise of standard deviation `noise`.
struct SEKernelParams {
    double sigma_f = 1.0;
    double length = 1.0;
    double noise = 0.0;
};

struct GprFitOptions {
    bool optimize = true;
    /// Start the likelihood search from a 5 x 5 grid of (length, noise ratio).
    /// When false, the search is a local refinement around `init`.
    bool multistart = true;
    int max_iterations = 50;
    /// Hyperparameters are searched on at most this many evenly strided
    /// training rows (0 = use all rows). The final fit always uses all rows.
    std::size_t optimize_subsample = 400;
    /// Lower bound on the noise, relative to the target standard deviation.
    /// Near-interpolating fits ring around kinks of the value function.
    double noise_floor = 1e-3;
};

/// Posterior mean of a GP with zero prior mean fitted to centred targets:
///   u(z) = mean + sum_p k(z^p, z) w_p,  (K + noise^2 I) w = y - mean.
class TrainedGPR {
public:
    TrainedGPR() = default;

    /// Model with prescribed dual weights, prediction mean + sigma_f^2 sum_p w_p exp(...).
    static TrainedGPR from_weights(PointSet inputs, Vector weights, const SEKernelParams& params,
                                   double mean = 0.0);

    const PointSet& inputs() const noexcept { return *inputs_; }
    const Vector& weights() const noexcept { return weights_; }
    const SEKernelParams& params() const noexcept { return params_; }
    double mean() const noexcept { return mean_; }
    double log_marginal_likelihood() const noexcept { return log_likelihood_; }
    /// Diagonal jitter (absolute variance) added on top of noise^2, if any.
    double jitter() const noexcept { return jitter_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(inputs_->rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(inputs_->cols()); }
    /// True when the targets were constant: the model is just mean().
    bool is_constant() const noexcept { return constant_; }

    double predict(std::span<const double> z) const;
    std::vector<double> predict(const PointSet& query) const;

    /// Shared input storage, so models fitted on one cloud can be recognised.
    const std::shared_ptr<const PointSet>& shared_inputs() const noexcept { return inputs_; }

private:
    friend TrainedGPR fit(const PointSet&, std::span<const double>, const SEKernelParams&,
                          const GprFitOptions&);
    friend TrainedGPR fit_shared(std::shared_ptr<const PointSet>, std::span<const double>,
                                 const SEKernelParams&, const GprFitOptions&);

    std::shared_ptr<const PointSet> inputs_ = std::make_shared<const PointSet>();
    Vector weights_;
    SEKernelParams params_;
    double mean_ = 0.0;
    double log_likelihood_ = 0.0;
    double jitter_ = 0.0;
    bool constant_ = true;
};

/// Fits a GPR to (inputs, targets). Duplicate input rows are collapsed by
/// averaging their targets. Throws SingularKernel if the kernel system
/// cannot be factorised even after jitter.
TrainedGPR fit(const PointSet& inputs, std::span<const double> targets, const SEKernelParams& init,
               const GprFitOptions& options = {});

/// As fit(), but several models trained on the same (duplicate-free) input
/// set share storage. The caller guarantees there are no duplicate rows.
TrainedGPR fit_shared(std::shared_ptr<const PointSet> inputs, std::span<const double> targets,
                      const SEKernelParams& init, const GprFitOptions& options = {});

/// Data-driven starting point: sigma_f = target std, length = RMS input std.
SEKernelParams default_kernel_params(const PointSet& inputs, std::span<const double> targets);

std::vector<double> predict(const TrainedGPR& model, const PointSet& query);

/// Log marginal likelihood of centred targets; -infinity when the kernel
/// matrix is numerically not positive definite.
double log_marginal_likelihood(const PointSet& inputs, std::span<const double> centred_targets,
                               const SEKernelParams& params);

/// Exact integral of the fitted surrogate against N(0, C):
///   mean + sum_p w_p sigma_f^2 l^d exp(-z_p^T (C + l^2 I)^{-1} z_p / 2) / sqrt(det(C + l^2 I)).
double integrate_against_gaussian(const TrainedGPR& model, const Matrix& covariance);

/// E[u(m + Z)], Z ~ N(0, C), for many centres m with one factorisation of C + l^2 I.
class GaussianIntegrator {
public:
    GaussianIntegrator(const TrainedGPR& model, const Matrix& covariance);

    double operator()(std::span<const double> centre) const;
    std::vector<double> evaluate(const PointSet& centres) const;

private:
    const TrainedGPR* model_;
    Eigen::LLT<Matrix> factor_;
    Matrix whitened_inputs_; ///< L^{-1} z_p, one column per training point
    Vector whitened_norms_;
    double scale_ = 0.0;     ///< sigma_f^2 l^d / sqrt(det(C + l^2 I))
};

/// Average prediction of each model over the rows of `query`. Models whose
/// training inputs coincide share the pairwise distance computation.
std::vector<double> mean_predictions(std::span<const TrainedGPR* const> models, const PointSet& query);

} // namespace xva
