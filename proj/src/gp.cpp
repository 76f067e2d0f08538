#include "sapt/gp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sapt/error.hpp"

namespace sapt {

void GPHyper::validate(std::size_t dims) const {
    if (lengthscale.size() != dims)
        throw ConfigError("gp.lengthscale", "needs one entry per goal-space dimension");
    for (double l : lengthscale)
        if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("gp.lengthscale", "must be > 0");
    if (!(signal_var > 0.0) || !std::isfinite(signal_var)) throw ConfigError("gp.signal_var", "must be > 0");
    if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw ConfigError("gp.noise_var", "must be > 0");
}

double se_kernel(std::span<const double> x, std::span<const double> y, const GPHyper& hyper) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = (x[i] - y[i]) / hyper.lengthscale[i];
        r2 += d * d;
    }
    return hyper.signal_var * std::exp(-0.5 * r2);
}

PriorMean constant_prior(double value) {
    return [value](std::span<const double>) { return value; };
}

RepertoirePrior::RepertoirePrior(const Repertoire& rep, Field field) : dims_(rep.grid().dims()) {
    for (const auto& [cell, e] : rep.entries()) {
        const auto x = rep.grid().normalize(e.descriptor);
        points_.insert(points_.end(), x.begin(), x.end());
        if (field == Field::Safety) {
            values_.push_back(e.safety_prior);
        } else {
            if (!e.reward_prior)
                throw CorruptRepertoire("cell " + std::to_string(cell) + " has no reward prior assigned");
            values_.push_back(*e.reward_prior);
        }
    }
    if (values_.empty()) throw EmptyArchive("prior mean needs a non-empty repertoire");
}

double RepertoirePrior::operator()(std::span<const double> x) const {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double* p = points_.data() + i * dims_;
        double d2 = 0.0;
        for (std::size_t k = 0; k < dims_; ++k) d2 += (p[k] - x[k]) * (p[k] - x[k]);
        if (d2 < best) {
            best = d2;
            arg = i;
        }
    }
    return values_[arg];
}

double Prediction::stddev() const { return std::sqrt(variance); }

GPModel::GPModel(PriorMean prior, GPHyper hyper, std::vector<Observation> observations)
    : prior_(std::move(prior)), hyper_(std::move(hyper)), obs_(std::move(observations)) {
    hyper_.validate(hyper_.lengthscale.size());
    for (const auto& o : obs_) {
        if (o.x.size() != hyper_.lengthscale.size())
            throw InvalidDescriptor("observation dimension does not match the kernel");
        if (!std::isfinite(o.y)) throw InvalidDescriptor("observation target must be finite");
    }
    factorize();
}

Eigen::VectorXd GPModel::cross_kernel(std::span<const double> x) const {
    Eigen::VectorXd k(static_cast<Eigen::Index>(obs_.size()));
    for (std::size_t i = 0; i < obs_.size(); ++i) k(static_cast<Eigen::Index>(i)) = se_kernel(obs_[i].x, x, hyper_);
    return k;
}

void GPModel::factorize() {
    const auto n = static_cast<Eigen::Index>(obs_.size());
    residual_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& o = obs_[static_cast<std::size_t>(i)];
        residual_(i) = o.y - prior_(o.x);
    }
    if (n == 0) {
        chol_.resize(0, 0);
        alpha_.resize(0);
        jitter_ = 0.0;
        return;
    }
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            gram(i, j) = gram(j, i) =
                se_kernel(obs_[static_cast<std::size_t>(i)].x, obs_[static_cast<std::size_t>(j)].x, hyper_);
    gram.diagonal().array() += hyper_.noise_var;

    for (double jitter : {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
        Eigen::MatrixXd a = gram;
        a.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success) {
            chol_ = llt.matrixL();
            jitter_ = jitter;
            solve_alpha();
            return;
        }
    }
    std::ostringstream msg;
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues();
    msg << "covariance matrix is not positive definite after jitter 1e-6 (n=" << n
        << ", eigenvalue range [" << ev.minCoeff() << ", " << ev.maxCoeff() << "])";
    throw NumericalError(msg.str());
}

void GPModel::solve_alpha() {
    alpha_ = chol_.triangularView<Eigen::Lower>().solve(residual_);
    chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

void GPModel::add_observation(Observation obs) {
    if (obs.x.size() != hyper_.lengthscale.size())
        throw InvalidDescriptor("observation dimension does not match the kernel");
    if (!std::isfinite(obs.y)) throw InvalidDescriptor("observation target must be finite");

    const auto n = static_cast<Eigen::Index>(obs_.size());
    if (n == 0 || jitter_ != 0.0) {
        obs_.push_back(std::move(obs));
        factorize();
        return;
    }
    const Eigen::VectorXd k = cross_kernel(obs.x);
    const Eigen::VectorXd l = chol_.triangularView<Eigen::Lower>().solve(k);
    const double kxx = hyper_.signal_var + hyper_.noise_var;
    const double pivot2 = kxx - l.squaredNorm();
    if (!(pivot2 > 1e-12 * kxx)) {
        obs_.push_back(std::move(obs));
        factorize();
        return;
    }
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(n + 1, n + 1);
    grown.topLeftCorner(n, n) = chol_;
    grown.block(n, 0, 1, n) = l.transpose();
    grown(n, n) = std::sqrt(pivot2);
    chol_ = std::move(grown);

    const double r = obs.y - prior_(obs.x);
    obs_.push_back(std::move(obs));
    residual_.conservativeResize(n + 1);
    residual_(n) = r;
    solve_alpha();
}

Prediction GPModel::predict(std::span<const double> x) const {
    const double prior = prior_(x);
    const double kxx = hyper_.signal_var;
    if (obs_.empty()) return {prior, kxx};
    const Eigen::VectorXd k = cross_kernel(x);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
    const double var = kxx - v.squaredNorm();
    return {prior + k.dot(alpha_), std::max(var, std::numeric_limits<double>::min())};
}

std::vector<Prediction> GPModel::predict_batch_serial(const std::vector<std::vector<double>>& xs) const {
    std::vector<Prediction> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(predict(x));
    return out;
}

std::vector<Prediction> GPModel::predict_batch(const std::vector<std::vector<double>>& xs) const {
    const long n = static_cast<long>(xs.size());
    std::vector<Prediction> out(xs.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = predict(xs[static_cast<std::size_t>(i)]);
    return out;
}

GPModel gp_fit(PriorMean prior, std::vector<Observation> observations, GPHyper hyper) {
    return GPModel(std::move(prior), std::move(hyper), std::move(observations));
}

Prediction gp_predict(const GPModel& model, std::span<const double> x) { return model.predict(x); }

}  // namespace sapt
