#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "morphevo/random.hpp"

namespace morphevo {

struct KernelConfig {
    double length_scale = 0.2;  // in unit-box input coordinates
    double signal_variance = 1.0;
    double observation_noise = 1e-6;
};

/// Matern nu = 5/2 covariance.
double matern52(std::span<const double> x, std::span<const double> y, const KernelConfig& k);

class IllConditioned : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Observation {
    std::vector<double> x;
    double y = 0.0;
};

struct Prediction {
    double mu = 0.0;
    double sigma = 0.0;
};

/// Exact GP regression with a fixed Matern 5/2 kernel. Outputs are
/// standardized internally (centred on their mean, divided by their standard
/// deviation when it is positive); predictions are reported in output units.
/// The Cholesky factor is extended in O(n^2) per added observation.
class GaussianProcess {
public:
    /// Jitter is doubled from the configured noise up to this ceiling before
    /// a factorization is declared failed.
    static constexpr double kMaxJitter = 1e-2;

    GaussianProcess(std::size_t dim, KernelConfig kernel);

    void add(std::span<const double> x, double y);

    Prediction predict(std::span<const double> x) const;
    /// Batch prediction; `candidates` holds one point per column.
    void predict(const Eigen::MatrixXd& candidates, Eigen::VectorXd& mu, Eigen::VectorXd& sigma) const;

    std::size_t size() const { return static_cast<std::size_t>(y_.size()); }
    std::size_t dim() const { return dim_; }
    const KernelConfig& kernel() const { return kernel_; }
    /// Diagonal jitter currently in use (>= observation_noise).
    double jitter() const { return jitter_; }
    double output_mean() const { return mean_; }
    double output_scale() const { return scale_; }

private:
    void refactor();
    void update_weights();
    double k(const double* a, const double* b) const;

    std::size_t dim_;
    KernelConfig kernel_;
    double jitter_;
    Eigen::MatrixXd inputs_;  // dim x n
    Eigen::VectorXd y_;
    Eigen::MatrixXd chol_;    // lower factor of K + jitter * I
    Eigen::VectorXd alpha_;   // (K + jitter I)^-1 * standardized outputs
    double mean_ = 0.0;
    double scale_ = 1.0;
};

GaussianProcess gp_fit(std::span<const Observation> observations, const KernelConfig& k);
Prediction gp_predict(const GaussianProcess& gp, std::span<const double> x);

inline double ucb(double mu, double sigma, double beta) { return mu + beta * sigma; }

inline constexpr double kDefaultBeta = 3.0;
inline constexpr std::size_t kDefaultCandidates = 1024;

/// Maximizes UCB over `n_candidates` uniform points of [0,1]^dim; ties go to
/// the lowest candidate index.
std::vector<double> propose_next(const GaussianProcess& gp, std::size_t dim, Random& rng,
                                 std::size_t n_candidates = kDefaultCandidates,
                                 double beta = kDefaultBeta);

// Optimization loop ------------------------------------------------------------

using Objective = std::function<double(std::span<const double>)>;

struct Sample {
    std::vector<double> params;
    double fitness = 0.0;
};

struct LearnResult {
    std::vector<double> best_params;
    double best_fitness = 0.0;
    std::vector<Sample> history;
    std::size_t evaluations_used = 0;
};

struct LearnerOptions {
    KernelConfig kernel;
    std::size_t n_candidates = kDefaultCandidates;
    double beta = kDefaultBeta;
};

/// Thrown when the objective fails; carries everything evaluated before it.
class LearnerEvaluationError : public std::runtime_error {
public:
    LearnerEvaluationError(const std::string& what, LearnResult partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const LearnResult& partial() const { return partial_; }

private:
    LearnResult partial_;
};

/// Bayesian optimization with a warm start: evaluation 1 is `initial`, every
/// later one is the UCB maximizer of a GP fitted to all previous evaluations.
/// A zero-dimensional problem is evaluated once.
LearnResult optimize(const Objective& evaluate, std::span<const double> initial, std::size_t budget,
                     std::size_t dim, Random& rng, const LearnerOptions& options = {});

// Budget calibration -----------------------------------------------------------

struct CalibrationTask {
    Objective objective;
    std::vector<double> initial;
};

struct CalibrationResult {
    /// mean_fraction[b - 1]: mean over robots of the share of their potential
    /// reached after b evaluations.
    std::vector<double> mean_fraction;
    std::size_t robots_used = 0;
    std::vector<LearnResult> runs;
};

/// Per-run fraction of potential: (best_by_b - min) / (best_overall - min).
/// Runs whose best equals their minimum are skipped.
CalibrationResult fraction_of_potential(std::vector<LearnResult> runs, std::size_t max_budget);

/// Runs `optimize` to `max_budget` on every task. Task i draws from a private
/// stream derived from (seed, i), so `jobs` does not affect the result.
CalibrationResult calibrate_budget(std::span<const CalibrationTask> tasks, std::size_t max_budget,
                                   std::uint64_t seed, const LearnerOptions& options = {},
                                   std::size_t jobs = 1);

}  // namespace morphevo
