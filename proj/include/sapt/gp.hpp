#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sapt/repertoire.hpp"

namespace sapt {

/// Squared-exponential kernel hyperparameters, in normalized goal-space units.
struct GPHyper {
    std::vector<double> lengthscale;
    double signal_var = 1.0;
    double noise_var = 1e-2;

    void validate(std::size_t dims) const;  // throws ConfigError
};

/// signal_var * exp(-1/2 * sum_i ((x_i - y_i) / l_i)^2)
double se_kernel(std::span<const double> x, std::span<const double> y, const GPHyper& hyper);

using PriorMean = std::function<double(std::span<const double>)>;

PriorMean constant_prior(double value);

/// Piecewise-constant prior over the goal space: the value stored at the
/// nearest repertoire descriptor (normalized coordinates, ties to the lowest
/// cell index). Exact at every repertoire point.
class RepertoirePrior {
public:
    enum class Field { Safety, Reward };

    RepertoirePrior(const Repertoire& rep, Field field);
    double operator()(std::span<const double> x) const;

private:
    std::size_t dims_;
    std::vector<double> points_;  // flat, row per entry
    std::vector<double> values_;
};

struct Observation {
    std::vector<double> x;
    double y = 0.0;
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
    double stddev() const;
};

/// GP posterior with an informative prior mean. Targets are modelled as
/// residuals y - M(x) under a zero-mean SE kernel. Immutable while shared;
/// add_observation needs exclusive access.
class GPModel {
public:
    GPModel(PriorMean prior, GPHyper hyper, std::vector<Observation> observations = {});

    /// Extends the Cholesky factor by one row; falls back to a full refit
    /// when the new pivot is not safely positive.
    void add_observation(Observation obs);

    Prediction predict(std::span<const double> x) const;
    double prior_mean(std::span<const double> x) const { return prior_(x); }

    std::vector<Prediction> predict_batch(const std::vector<std::vector<double>>& xs) const;
    std::vector<Prediction> predict_batch_serial(const std::vector<std::vector<double>>& xs) const;

    const std::vector<Observation>& observations() const { return obs_; }
    const GPHyper& hyper() const { return hyper_; }
    /// Diagonal jitter the current factorization needed (0 if none).
    double jitter() const { return jitter_; }

private:
    void factorize();
    void solve_alpha();
    Eigen::VectorXd cross_kernel(std::span<const double> x) const;

    PriorMean prior_;
    GPHyper hyper_;
    std::vector<Observation> obs_;
    Eigen::MatrixXd chol_;         // lower factor of K + (noise + jitter) I
    Eigen::VectorXd residual_;     // y - M(x) at observations
    Eigen::VectorXd alpha_;        // (K + noise I)^-1 residual
    double jitter_ = 0.0;
};

GPModel gp_fit(PriorMean prior, std::vector<Observation> observations, GPHyper hyper);
Prediction gp_predict(const GPModel& model, std::span<const double> x);

}  // namespace sapt
