#include "xva/gpr.hpp"

#include "xva/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace xva {

namespace {

constexpr const char* kModule = "gpr";
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Matrix squared_distances(const PointSet& z) {
    const Eigen::Index n = z.rows();
    const Eigen::Index d = z.cols();
    Matrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out(j, j) = 0.0;
        const double* zj = z.data() + j * d;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double* zi = z.data() + i * d;
            double s = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) {
                const double diff = zi[k] - zj[k];
                s += diff * diff;
            }
            out(i, j) = s;
            out(j, i) = s;
        }
    }
    return out;
}

// Kernel correlation exp(-D / (2 l^2)) with `ridge` on the diagonal.
Matrix correlation_matrix(const Matrix& dist, double length, double ridge) {
    Matrix r = (dist.array() * (-0.5 / (length * length))).exp().matrix();
    r.diagonal().array() += ridge;
    return r;
}

double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

bool llt_ok(const Eigen::LLT<Matrix>& llt) {
    if (llt.info() != Eigen::Success) return false;
    const auto diag = llt.matrixLLT().diagonal().array();
    return (diag > 0.0).all() && diag.isFinite().all();
}

// Profile likelihood with sigma_f^2 eliminated: ratio = noise^2 / sigma_f^2.
double profiled_lml(const Matrix& dist, const Vector& y, double length, double ratio,
                    double* sigma2 = nullptr) {
    const Eigen::LLT<Matrix> llt(correlation_matrix(dist, length, ratio));
    if (!llt_ok(llt)) return kNegInf;
    const double n = static_cast<double>(y.size());
    const double s2 = y.dot(llt.solve(y)) / n;
    if (!(s2 > 0.0) || !std::isfinite(s2)) return kNegInf;
    if (sigma2) *sigma2 = s2;
    return -0.5 * n * std::log(s2) - 0.5 * log_det_from_llt(llt) - 0.5 * n * (1.0 + kLog2Pi);
}

double explicit_lml(const Matrix& dist, const Vector& y, const SEKernelParams& p) {
    Matrix k = correlation_matrix(dist, p.length, 0.0) * (p.sigma_f * p.sigma_f);
    k.diagonal().array() += p.noise * p.noise;
    const Eigen::LLT<Matrix> llt(k);
    if (!llt_ok(llt)) return kNegInf;
    const double n = static_cast<double>(y.size());
    return -0.5 * y.dot(llt.solve(y)) - 0.5 * log_det_from_llt(llt) - 0.5 * n * kLog2Pi;
}

void validate_params(const SEKernelParams& p) {
    if (!(p.sigma_f > 0.0) || !std::isfinite(p.sigma_f)) {
        throw InvalidParameter(kModule, "sigma_f must be positive and finite");
    }
    if (!(p.length > 0.0) || !std::isfinite(p.length)) {
        throw InvalidParameter(kModule, "length scale must be positive and finite");
    }
    if (!(p.noise >= 0.0) || !std::isfinite(p.noise)) {
        throw InvalidParameter(kModule, "noise must be nonnegative and finite");
    }
}

double input_scale(const PointSet& z) {
    if (z.rows() < 2) return 0.0;
    const Eigen::RowVectorXd mean = z.colwise().mean();
    const double var = (z.rowwise() - mean).array().square().sum() / static_cast<double>(z.rows() * z.cols());
    return std::sqrt(var);
}

struct Search {
    double log_length;
    double log_ratio;
    double value;
};

// Bounded compass search in (log length, log noise ratio).
Search pattern_search(const Matrix& dist, const Vector& y, Search start, double step,
                      const std::array<double, 4>& bounds, int max_iterations) {
    auto eval = [&](double ll, double lr) { return profiled_lml(dist, y, std::exp(ll), std::exp(lr)); };
    Search best = start;
    if (!std::isfinite(best.value)) best.value = eval(best.log_length, best.log_ratio);
    for (int it = 0; it < max_iterations && step > 1e-2; ++it) {
        Search candidate = best;
        const std::array<std::pair<double, double>, 4> moves{
            {{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}}};
        for (const auto& [dl, dr] : moves) {
            const double ll = std::clamp(best.log_length + dl, bounds[0], bounds[1]);
            const double lr = std::clamp(best.log_ratio + dr, bounds[2], bounds[3]);
            if (ll == best.log_length && lr == best.log_ratio) continue;
            const double v = eval(ll, lr);
            if (v > candidate.value) candidate = {ll, lr, v};
        }
        if (candidate.value > best.value) {
            best = candidate;
        } else {
            step *= 0.5;
        }
    }
    return best;
}

struct Factorised {
    Vector weights;
    double lml = kNegInf;
    double jitter = 0.0;
};

// Solves (sigma_f^2 R + noise^2 I) w = y, escalating diagonal jitter on failure.
Factorised factorise(const Matrix& dist, const Vector& y, const SEKernelParams& p) {
    const double s2 = p.sigma_f * p.sigma_f;
    const std::array<double, 5> jitters{0.0, 1e-12, 1e-10, 1e-8, 1e-6};
    for (const double j : jitters) {
        Matrix k = correlation_matrix(dist, p.length, 0.0) * s2;
        k.diagonal().array() += p.noise * p.noise + j * s2;
        const Eigen::LLT<Matrix> llt(k);
        if (!llt_ok(llt)) continue;
        Factorised out;
        out.weights = llt.solve(y);
        if (!out.weights.allFinite()) continue;
        const double n = static_cast<double>(y.size());
        out.lml = -0.5 * y.dot(out.weights) - 0.5 * log_det_from_llt(llt) - 0.5 * n * kLog2Pi;
        out.jitter = j * s2;
        return out;
    }
    throw SingularKernel(kModule, "kernel matrix is singular even after jitter");
}

} // namespace

TrainedGPR TrainedGPR::from_weights(PointSet inputs, Vector weights, const SEKernelParams& params, double mean) {
    if (weights.size() != inputs.rows()) throw DimensionMismatch(kModule, "one weight per input row required");
    if (!(params.sigma_f > 0.0) || !(params.length > 0.0)) {
        throw InvalidParameter(kModule, "sigma_f and length must be positive");
    }
    TrainedGPR model;
    model.inputs_ = std::make_shared<const PointSet>(std::move(inputs));
    model.weights_ = std::move(weights);
    model.params_ = params;
    model.mean_ = mean;
    model.constant_ = model.weights_.size() == 0;
    return model;
}

double TrainedGPR::predict(std::span<const double> z) const {
    if (z.size() != dim()) throw DimensionMismatch(kModule, "query has the wrong dimension");
    if (constant_) return mean_;
    const PointSet& x = *inputs_;
    const Eigen::Index d = x.cols();
    const double c = -0.5 / (params_.length * params_.length);
    double s = 0.0;
    for (Eigen::Index p = 0; p < x.rows(); ++p) {
        const double* row = x.data() + p * d;
        double r2 = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
            const double diff = row[k] - z[static_cast<std::size_t>(k)];
            r2 += diff * diff;
        }
        s += weights_(p) * std::exp(c * r2);
    }
    return mean_ + params_.sigma_f * params_.sigma_f * s;
}

std::vector<double> TrainedGPR::predict(const PointSet& query) const {
    if (static_cast<std::size_t>(query.cols()) != dim()) {
        throw DimensionMismatch(kModule, "query has the wrong dimension");
    }
    std::vector<double> out(static_cast<std::size_t>(query.rows()));
    for (Eigen::Index q = 0; q < query.rows(); ++q) out[static_cast<std::size_t>(q)] = predict(row_span(query, q));
    return out;
}

std::vector<double> predict(const TrainedGPR& model, const PointSet& query) { return model.predict(query); }

TrainedGPR fit_shared(std::shared_ptr<const PointSet> inputs_ptr, std::span<const double> targets,
                      const SEKernelParams& init, const GprFitOptions& options) {
    if (!inputs_ptr) throw InvalidParameter(kModule, "missing inputs");
    const PointSet& inputs = *inputs_ptr;
    const Eigen::Index n = inputs.rows();
    if (n == 0) throw InvalidParameter(kModule, "need at least one training point");
    if (static_cast<std::size_t>(n) != targets.size()) {
        throw DimensionMismatch(kModule, "inputs and targets have different lengths");
    }
    if (!inputs.allFinite()) throw InvalidParameter(kModule, "inputs must be finite");
    validate_params(init);

    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = targets[static_cast<std::size_t>(i)];
        if (!std::isfinite(y(i))) throw InvalidParameter(kModule, "targets must be finite");
    }
    const double mean = y.mean();
    y.array() -= mean;
    const double sd = std::sqrt(y.squaredNorm() / static_cast<double>(n));

    TrainedGPR model;
    model.inputs_ = std::move(inputs_ptr);
    model.mean_ = mean;
    model.params_ = init;
    if (n == 1 || sd == 0.0 || sd <= 1e-13 * std::abs(mean)) {
        model.constant_ = true;
        model.weights_ = Vector::Zero(n);
        model.log_likelihood_ = 0.0;
        return model;
    }
    model.constant_ = false;
    const double noise_min = options.noise_floor * sd;

    const Matrix dist = squared_distances(inputs);
    SEKernelParams chosen = init;
    if (options.optimize) chosen.noise = std::max(init.noise, noise_min);

    if (options.optimize) {
        // Evenly strided subsample for the search.
        const std::size_t limit = options.optimize_subsample == 0 ? static_cast<std::size_t>(n)
                                                                  : options.optimize_subsample;
        Matrix sub_dist;
        Vector sub_y;
        const Matrix* search_dist = &dist;
        const Vector* search_y = &y;
        if (static_cast<std::size_t>(n) > limit) {
            const auto m = static_cast<Eigen::Index>(limit);
            std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
            for (Eigen::Index k = 0; k < m; ++k) idx[static_cast<std::size_t>(k)] = (k * n) / m;
            sub_dist.resize(m, m);
            sub_y.resize(m);
            for (Eigen::Index a = 0; a < m; ++a) {
                sub_y(a) = y(idx[static_cast<std::size_t>(a)]);
                for (Eigen::Index b = 0; b < m; ++b) {
                    sub_dist(a, b) = dist(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
                }
            }
            search_dist = &sub_dist;
            search_y = &sub_y;
        }

        double scale = input_scale(inputs);
        if (!(scale > 0.0)) scale = init.length;
        const double floor_ratio = std::max(options.noise_floor * options.noise_floor, 1e-16);
        const std::array<double, 4> bounds{std::log(scale * 1e-2), std::log(scale * 1e2),
                                           std::log(floor_ratio), 0.0};
        const double init_ratio = std::clamp(
            std::pow(chosen.noise / init.sigma_f, 2.0), floor_ratio, 1.0);
        Search best{std::clamp(std::log(init.length), bounds[0], bounds[1]), std::log(init_ratio), kNegInf};
        best.value = profiled_lml(*search_dist, *search_y, std::exp(best.log_length), init_ratio);
        double step = 0.25;
        if (options.multistart) {
            const std::array<double, 5> length_mult{0.1, 0.3162, 1.0, 3.162, 10.0};
            for (const double lm : length_mult) {
                for (int k = 0; k < 5; ++k) {
                    // Noise ratio grid log-spaced from the floor up to 0.1.
                    const double ll = std::log(scale * lm);
                    const double lr = bounds[2] + (std::log(0.1) - bounds[2]) * k / 4.0;
                    const double v = profiled_lml(*search_dist, *search_y, std::exp(ll), std::exp(lr));
                    if (v > best.value) best = {ll, lr, v};
                }
            }
            step = 0.5;
        }
        best = pattern_search(*search_dist, *search_y, best, step, bounds, options.max_iterations);
        if (std::isfinite(best.value)) {
            // Re-profile sigma_f on the full data at the selected (length, ratio).
            const double length = std::exp(best.log_length);
            const double ratio = std::exp(best.log_ratio);
            double s2 = 0.0;
            const double profiled = profiled_lml(dist, y, length, ratio, &s2);
            if (std::isfinite(profiled)) {
                SEKernelParams found{std::sqrt(s2), length, std::sqrt(ratio * s2)};
                double found_lml = profiled;
                if (found.noise < noise_min) {
                    found.noise = noise_min;
                    found_lml = explicit_lml(dist, y, found);
                }
                const double init_lml = explicit_lml(dist, y, chosen);
                if (found_lml >= init_lml) chosen = found;
            }
        }
    }

    const Factorised f = factorise(dist, y, chosen);
    model.params_ = chosen;
    model.weights_ = f.weights;
    model.log_likelihood_ = f.lml;
    model.jitter_ = f.jitter;
    return model;
}

TrainedGPR fit(const PointSet& inputs, std::span<const double> targets, const SEKernelParams& init,
               const GprFitOptions& options) {
    const Eigen::Index n = inputs.rows();
    if (n == 0) throw InvalidParameter(kModule, "need at least one training point");
    if (static_cast<std::size_t>(n) != targets.size()) {
        throw DimensionMismatch(kModule, "inputs and targets have different lengths");
    }
    const Eigen::Index d = inputs.cols();

    // Lexicographic order makes the fit independent of row order and puts
    // duplicates next to each other.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto row_less = [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index k = 0; k < d; ++k) {
            if (inputs(a, k) != inputs(b, k)) return inputs(a, k) < inputs(b, k);
        }
        return false;
    };
    std::stable_sort(order.begin(), order.end(), row_less);

    std::vector<Eigen::Index> group_start;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || row_less(order[i - 1], order[i])) group_start.push_back(static_cast<Eigen::Index>(i));
    }
    const auto unique = static_cast<Eigen::Index>(group_start.size());
    auto unique_inputs = std::make_shared<PointSet>(unique, d);
    std::vector<double> unique_targets(static_cast<std::size_t>(unique));
    for (Eigen::Index g = 0; g < unique; ++g) {
        const auto begin = static_cast<std::size_t>(group_start[static_cast<std::size_t>(g)]);
        const std::size_t end = g + 1 < unique ? static_cast<std::size_t>(group_start[static_cast<std::size_t>(g + 1)])
                                               : order.size();
        unique_inputs->row(g) = inputs.row(order[begin]);
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += targets[static_cast<std::size_t>(order[i])];
        unique_targets[static_cast<std::size_t>(g)] = s / static_cast<double>(end - begin);
    }
    return fit_shared(std::move(unique_inputs), unique_targets, init, options);
}

SEKernelParams default_kernel_params(const PointSet& inputs, std::span<const double> targets) {
    SEKernelParams p;
    if (!targets.empty()) {
        const double n = static_cast<double>(targets.size());
        const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / n;
        double var = 0.0;
        for (const double t : targets) var += (t - mean) * (t - mean);
        const double sd = std::sqrt(var / n);
        if (sd > 0.0 && std::isfinite(sd)) p.sigma_f = sd;
    }
    const double scale = input_scale(inputs);
    if (scale > 0.0 && std::isfinite(scale)) p.length = scale;
    p.noise = 1e-4 * p.sigma_f;
    return p;
}

double log_marginal_likelihood(const PointSet& inputs, std::span<const double> centred_targets,
                               const SEKernelParams& params) {
    validate_params(params);
    if (static_cast<std::size_t>(inputs.rows()) != centred_targets.size()) {
        throw DimensionMismatch(kModule, "inputs and targets have different lengths");
    }
    const Vector y = Eigen::Map<const Vector>(centred_targets.data(), inputs.rows());
    return explicit_lml(squared_distances(inputs), y, params);
}

GaussianIntegrator::GaussianIntegrator(const TrainedGPR& model, const Matrix& covariance) : model_(&model) {
    const auto d = static_cast<Eigen::Index>(model.dim());
    if (covariance.rows() != d || covariance.cols() != d) {
        throw DimensionMismatch(kModule, "covariance does not match the model dimension");
    }
    if (model.is_constant()) return;
    const double l2 = model.params().length * model.params().length;
    Matrix a = covariance;
    a.diagonal().array() += l2;
    factor_.compute(a);
    if (!llt_ok(factor_)) throw NotPositiveDefinite(kModule, "C + l^2 I is not positive definite");
    whitened_inputs_ = factor_.matrixL().solve(model.inputs().transpose());
    whitened_norms_ = whitened_inputs_.colwise().squaredNorm().transpose();
    const double half_log_det = factor_.matrixLLT().diagonal().array().log().sum();
    const double sf2 = model.params().sigma_f * model.params().sigma_f;
    scale_ = sf2 * std::exp(static_cast<double>(d) * std::log(model.params().length) - half_log_det);
}

double GaussianIntegrator::operator()(std::span<const double> centre) const {
    if (centre.size() != model_->dim()) throw DimensionMismatch(kModule, "centre has the wrong dimension");
    if (model_->is_constant()) return model_->mean();
    const auto d = static_cast<Eigen::Index>(centre.size());
    const Vector y = factor_.matrixL().solve(Eigen::Map<const Vector>(centre.data(), d));
    const Vector& w = model_->weights();
    double s = 0.0;
    for (Eigen::Index p = 0; p < whitened_inputs_.cols(); ++p) {
        const double* col = whitened_inputs_.data() + p * d;
        double r2 = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
            const double diff = col[k] - y(k);
            r2 += diff * diff;
        }
        s += w(p) * std::exp(-0.5 * r2);
    }
    return model_->mean() + scale_ * s;
}

std::vector<double> GaussianIntegrator::evaluate(const PointSet& centres) const {
    if (static_cast<std::size_t>(centres.cols()) != model_->dim()) {
        throw DimensionMismatch(kModule, "centres have the wrong dimension");
    }
    std::vector<double> out(static_cast<std::size_t>(centres.rows()));
    for (Eigen::Index q = 0; q < centres.rows(); ++q) {
        out[static_cast<std::size_t>(q)] = (*this)(row_span(centres, q));
    }
    return out;
}

double integrate_against_gaussian(const TrainedGPR& model, const Matrix& covariance) {
    const std::vector<double> origin(model.dim(), 0.0);
    return GaussianIntegrator(model, covariance)(origin);
}

std::vector<double> mean_predictions(std::span<const TrainedGPR* const> models, const PointSet& query) {
    std::vector<double> out(models.size(), 0.0);
    const Eigen::Index q_rows = query.rows();
    if (q_rows == 0) throw InvalidParameter(kModule, "empty query set");

    // Group models by identical training inputs.
    std::vector<int> group(models.size(), -1);
    std::vector<std::size_t> leaders;
    for (std::size_t k = 0; k < models.size(); ++k) {
        const TrainedGPR& m = *models[k];
        if (static_cast<std::size_t>(query.cols()) != m.dim()) {
            throw DimensionMismatch(kModule, "query has the wrong dimension");
        }
        if (m.is_constant()) {
            out[k] = m.mean();
            continue;
        }
        for (std::size_t g = 0; g < leaders.size(); ++g) {
            const TrainedGPR& lead = *models[leaders[g]];
            if (lead.shared_inputs() == m.shared_inputs() ||
                (lead.inputs().rows() == m.inputs().rows() && lead.inputs() == m.inputs())) {
                group[k] = static_cast<int>(g);
                break;
            }
        }
        if (group[k] < 0) {
            group[k] = static_cast<int>(leaders.size());
            leaders.push_back(k);
        }
    }

    constexpr Eigen::Index kBlock = 256;
    const Eigen::Index d = query.cols();
    std::vector<double> sums(models.size(), 0.0);
    Matrix block(kBlock, d);
    Matrix dist(kBlock, 1);
    Matrix scaled(kBlock, 1);
    for (std::size_t g = 0; g < leaders.size(); ++g) {
        const PointSet& x = models[leaders[g]]->inputs();
        const Eigen::Index p_rows = x.rows();
        dist.resize(kBlock, p_rows);
        scaled.resize(kBlock, p_rows);
        for (Eigen::Index start = 0; start < q_rows; start += kBlock) {
            const Eigen::Index b = std::min(kBlock, q_rows - start);
            block.topRows(b) = query.middleRows(start, b);
            // Column p holds |q_i - x_p|^2 for the rows of this block.
            for (Eigen::Index p = 0; p < p_rows; ++p) {
                auto col = dist.col(p).head(b);
                col.setZero();
                for (Eigen::Index k = 0; k < d; ++k) {
                    col.array() += (block.col(k).head(b).array() - x(p, k)).square();
                }
            }
            for (std::size_t k = 0; k < models.size(); ++k) {
                if (group[k] != static_cast<int>(g)) continue;
                const TrainedGPR& m = *models[k];
                const double c = -0.5 / (m.params().length * m.params().length);
                scaled.topRows(b) = (dist.topRows(b).array() * c).exp().matrix();
                sums[k] += (scaled.topRows(b) * m.weights()).sum();
            }
        }
    }
    for (std::size_t k = 0; k < models.size(); ++k) {
        if (group[k] < 0) continue;
        const TrainedGPR& m = *models[k];
        out[k] = m.mean() + m.params().sigma_f * m.params().sigma_f * sums[k] / static_cast<double>(q_rows);
    }
    return out;
}

} // namespace xva
