#include "morphevo/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "morphevo/parallel.hpp"

namespace morphevo {

namespace {

const double kSqrt5 = std::sqrt(5.0);

double matern52_of_distance(double r, const KernelConfig& k) {
    const double s = kSqrt5 * r / k.length_scale;
    return k.signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

}  // namespace

double matern52(std::span<const double> x, std::span<const double> y, const KernelConfig& k) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("matern52: dimension mismatch");
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
    }
    return matern52_of_distance(std::sqrt(d2), k);
}

// GaussianProcess ----------------------------------------------------------------

GaussianProcess::GaussianProcess(std::size_t dim, KernelConfig kernel)
    : dim_(dim), kernel_(kernel), jitter_(kernel.observation_noise), inputs_(dim, 0) {
    if (!(kernel.length_scale > 0.0) || !(kernel.signal_variance > 0.0) ||
        !(kernel.observation_noise >= 0.0)) {
        throw std::invalid_argument("KernelConfig: length_scale and signal_variance must be > 0, noise >= 0");
    }
}

double GaussianProcess::k(const double* a, const double* b) const {
    double d2 = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return matern52_of_distance(std::sqrt(d2), kernel_);
}

void GaussianProcess::add(std::span<const double> x, double y) {
    if (x.size() != dim_) {
        throw std::invalid_argument("GaussianProcess::add: dimension mismatch");
    }
    const Eigen::Index n = inputs_.cols();
    inputs_.conservativeResize(Eigen::NoChange, n + 1);
    for (std::size_t i = 0; i < dim_; ++i) {
        inputs_(static_cast<Eigen::Index>(i), n) = x[i];
    }
    y_.conservativeResize(n + 1);
    y_(n) = y;

    // Extend the factor by one row; fall back to a full refactor with more
    // jitter when the new pivot is not positive.
    Eigen::VectorXd kn(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        kn(i) = k(inputs_.col(i).data(), inputs_.col(n).data());
    }
    Eigen::VectorXd l = kn;
    if (n > 0) {
        chol_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(l);
    }
    const double pivot = kernel_.signal_variance + jitter_ - l.squaredNorm();
    if (pivot > 0.0 && std::isfinite(pivot)) {
        chol_.conservativeResize(n + 1, n + 1);
        chol_.row(n).head(n) = l.transpose();
        chol_.col(n).setZero();
        chol_(n, n) = std::sqrt(pivot);
    } else {
        refactor();
    }
    update_weights();
}

void GaussianProcess::refactor() {
    const Eigen::Index n = inputs_.cols();
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = kernel_.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = k(inputs_.col(i).data(), inputs_.col(j).data());
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }
    double jitter = std::max(jitter_, 1e-6);
    for (;;) {
        Eigen::LLT<Eigen::MatrixXd> llt(gram + jitter * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success && (llt.matrixL().toDenseMatrix().diagonal().array() > 0).all()) {
            chol_ = llt.matrixL();
            jitter_ = jitter;
            return;
        }
        jitter *= 2.0;
        if (jitter > kMaxJitter) {
            throw IllConditioned("GaussianProcess: Gram matrix not positive definite with jitter up to " +
                                 std::to_string(kMaxJitter));
        }
    }
}

void GaussianProcess::update_weights() {
    const auto n = static_cast<double>(y_.size());
    mean_ = y_.mean();
    const double var = (y_.array() - mean_).square().sum() / n;
    scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
    alpha_ = (y_.array() - mean_) / scale_;
    chol_.triangularView<Eigen::Lower>().solveInPlace(alpha_);
    chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha_);
}

Prediction GaussianProcess::predict(std::span<const double> x) const {
    if (x.size() != dim_) {
        throw std::invalid_argument("GaussianProcess::predict: dimension mismatch");
    }
    Eigen::MatrixXd c(static_cast<Eigen::Index>(dim_), 1);
    for (std::size_t i = 0; i < dim_; ++i) c(static_cast<Eigen::Index>(i), 0) = x[i];
    Eigen::VectorXd mu, sigma;
    predict(c, mu, sigma);
    return {mu(0), sigma(0)};
}

void GaussianProcess::predict(const Eigen::MatrixXd& candidates, Eigen::VectorXd& mu,
                              Eigen::VectorXd& sigma) const {
    const Eigen::Index m = candidates.cols();
    const Eigen::Index n = inputs_.cols();
    if (n == 0) {
        mu = Eigen::VectorXd::Zero(m);
        sigma = Eigen::VectorXd::Constant(m, std::sqrt(kernel_.signal_variance));
        return;
    }
    Eigen::MatrixXd cross(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            cross(i, j) = k(inputs_.col(i).data(), candidates.col(j).data());
        }
    }
    mu = (cross.transpose() * alpha_).array() * scale_ + mean_;
    chol_.triangularView<Eigen::Lower>().solveInPlace(cross);
    const Eigen::VectorXd explained = cross.colwise().squaredNorm().transpose();
    sigma = ((kernel_.signal_variance - explained.array()).max(0.0).sqrt() * scale_).matrix();
}

GaussianProcess gp_fit(std::span<const Observation> observations, const KernelConfig& k) {
    if (observations.empty()) {
        throw std::invalid_argument("gp_fit: at least one observation required");
    }
    GaussianProcess gp(observations.front().x.size(), k);
    for (const auto& o : observations) {
        for (double v : o.x) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("gp_fit: inputs must lie in the unit box");
            }
        }
        gp.add(o.x, o.y);
    }
    return gp;
}

Prediction gp_predict(const GaussianProcess& gp, std::span<const double> x) { return gp.predict(x); }

std::vector<double> propose_next(const GaussianProcess& gp, std::size_t dim, Random& rng,
                                 std::size_t n_candidates, double beta) {
    if (n_candidates == 0) {
        throw std::invalid_argument("propose_next: n_candidates must be >= 1");
    }
    Eigen::MatrixXd candidates(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n_candidates));
    for (Eigen::Index j = 0; j < candidates.cols(); ++j) {
        for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
            candidates(i, j) = rng.uniform();
        }
    }
    Eigen::VectorXd mu, sigma;
    gp.predict(candidates, mu, sigma);
    Eigen::Index best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < candidates.cols(); ++j) {
        const double a = ucb(mu(j), sigma(j), beta);
        if (a > best_value) {
            best_value = a;
            best = j;
        }
    }
    const auto col = candidates.col(best);
    return {col.data(), col.data() + col.size()};
}

// optimize -------------------------------------------------------------------

LearnResult optimize(const Objective& evaluate, std::span<const double> initial, std::size_t budget,
                     std::size_t dim, Random& rng, const LearnerOptions& options) {
    if (budget < 1) {
        throw std::invalid_argument("optimize: budget must be >= 1");
    }
    if (initial.size() != dim) {
        throw std::invalid_argument("optimize: initial point has wrong dimension");
    }
    LearnResult result;
    const auto record = [&](std::vector<double> x) {
        double y;
        try {
            y = evaluate(x);
        } catch (const std::exception& e) {
            throw LearnerEvaluationError(e.what(), result);
        }
        if (result.history.empty() || y > result.best_fitness) {
            result.best_fitness = y;
            result.best_params = x;
        }
        result.history.push_back({std::move(x), y});
        result.evaluations_used = result.history.size();
    };

    record({initial.begin(), initial.end()});
    if (dim == 0) {
        return result;
    }
    GaussianProcess gp(dim, options.kernel);
    gp.add(result.history.back().params, result.history.back().fitness);
    while (result.history.size() < budget) {
        record(propose_next(gp, dim, rng, options.n_candidates, options.beta));
        gp.add(result.history.back().params, result.history.back().fitness);
    }
    return result;
}

// Calibration ------------------------------------------------------------------

CalibrationResult fraction_of_potential(std::vector<LearnResult> runs, std::size_t max_budget) {
    CalibrationResult out;
    out.mean_fraction.assign(max_budget, 0.0);
    for (const auto& run : runs) {
        if (run.history.empty()) continue;
        double lowest = std::numeric_limits<double>::infinity();
        double potential = -std::numeric_limits<double>::infinity();
        for (const auto& s : run.history) {
            lowest = std::min(lowest, s.fitness);
            potential = std::max(potential, s.fitness);
        }
        if (!(potential > lowest)) continue;
        ++out.robots_used;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < max_budget; ++b) {
            if (b < run.history.size()) best = std::max(best, run.history[b].fitness);
            out.mean_fraction[b] += (best - lowest) / (potential - lowest);
        }
    }
    if (out.robots_used > 0) {
        for (auto& f : out.mean_fraction) f /= static_cast<double>(out.robots_used);
    }
    out.runs = std::move(runs);
    return out;
}

CalibrationResult calibrate_budget(std::span<const CalibrationTask> tasks, std::size_t max_budget,
                                   std::uint64_t seed, const LearnerOptions& options, std::size_t jobs) {
    if (max_budget < 1) {
        throw std::invalid_argument("calibrate_budget: max_budget must be >= 1");
    }
    std::vector<LearnResult> runs(tasks.size());
    parallel_for(tasks.size(), jobs, [&](std::size_t i) {
        Random rng(derive_seed(seed, i));
        runs[i] = optimize(tasks[i].objective, tasks[i].initial, max_budget, tasks[i].initial.size(), rng,
                           options);
    });
    return fraction_of_potential(std::move(runs), max_budget);
}

}  // namespace morphevo
