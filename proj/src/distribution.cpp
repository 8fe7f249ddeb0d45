#include "uab/distribution.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace uab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_weights(const Eigen::VectorXd& w) {
    if (w.size() < 1) throw std::invalid_argument("DiscreteDistribution: empty weight vector");
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (!(w[i] >= 0.0) || !std::isfinite(w[i]))
            throw std::invalid_argument("DiscreteDistribution: weights must be finite and >= 0");
    }
    if (std::abs(w.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteDistribution: weights must sum to 1 within 1e-12");
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(Eigen::VectorXd weights)
    : weights_(std::move(weights)) {
    check_weights(weights_);
}

DiscreteDistribution::DiscreteDistribution(Eigen::VectorXd weights, Eigen::VectorXd atoms)
    : weights_(std::move(weights)), atoms_(std::move(atoms)) {
    check_weights(weights_);
    if (atoms_->size() != weights_.size())
        throw std::invalid_argument("DiscreteDistribution: atoms/weights length mismatch");
}

DiscreteDistribution DiscreteDistribution::normalized(const Eigen::VectorXd& values) {
    return likelihood_distribution(values);
}

DiscreteDistribution DiscreteDistribution::normalized(const Eigen::VectorXd& values,
                                                      const Eigen::VectorXd& atoms) {
    return likelihood_distribution(values, atoms);
}

DiscreteDistribution DiscreteDistribution::uniform(Eigen::Index n) {
    if (n < 1) throw std::invalid_argument("DiscreteDistribution: size must be >= 1");
    return DiscreteDistribution(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

double DiscreteDistribution::mean() const {
    if (!atoms_) throw std::logic_error("DiscreteDistribution::mean: no atoms attached");
    return weights_.dot(*atoms_);
}

bool DiscreteDistribution::is_uniform_on_support(double tol) const {
    double ref = -1.0;
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
        if (weights_[i] == 0.0) continue;
        if (ref < 0.0)
            ref = weights_[i];
        else if (std::abs(weights_[i] - ref) > tol)
            return false;
    }
    return true;
}

bool DiscreteDistribution::support_subset_of(const DiscreteDistribution& other) const {
    if (other.size() != size()) return false;
    for (Eigen::Index i = 0; i < size(); ++i)
        if (weights_[i] > 0.0 && other.weights_[i] == 0.0) return false;
    return true;
}

GaussianBelief::GaussianBelief(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    const Eigen::Index d = mean_.size();
    if (covariance_.rows() != d || covariance_.cols() != d)
        throw std::invalid_argument("GaussianBelief: covariance dimension mismatch");
    const double scale = std::max(1.0, covariance_.cwiseAbs().maxCoeff());
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("GaussianBelief: covariance not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("GaussianBelief: covariance not positive definite");
}

GaussianBelief::GaussianBelief(double mean, double variance)
    : GaussianBelief(Eigen::VectorXd::Constant(1, mean),
                     Eigen::MatrixXd::Constant(1, 1, variance)) {}

DiscreteDistribution likelihood_distribution(const Eigen::VectorXd& likelihood_values) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < likelihood_values.size(); ++i) {
        const double v = likelihood_values[i];
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("likelihood_distribution: values must be finite and >= 0");
        sum += v;
    }
    if (likelihood_values.size() < 1 || sum <= 0.0)
        throw std::invalid_argument("likelihood_distribution: no strictly positive value");
    return DiscreteDistribution(likelihood_values / sum);
}

DiscreteDistribution likelihood_distribution(const Eigen::VectorXd& likelihood_values,
                                             const Eigen::VectorXd& atoms) {
    DiscreteDistribution d = likelihood_distribution(likelihood_values);
    return DiscreteDistribution(d.weights(), atoms);
}

DiscreteDistribution alpha_scale(const DiscreteDistribution& h, double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::domain_error("alpha_scale: alpha must be finite and >= 0");
    if (alpha == 1.0) return h;

    const Eigen::VectorXd& w = h.weights();
    Eigen::VectorXd scaled(w.size());
    if (alpha == 0.0) {
        // uniform over the support; zero atoms stay zero
        Eigen::Index support = 0;
        for (Eigen::Index i = 0; i < w.size(); ++i)
            if (w[i] > 0.0) ++support;
        for (Eigen::Index i = 0; i < w.size(); ++i)
            scaled[i] = w[i] > 0.0 ? 1.0 / static_cast<double>(support) : 0.0;
    } else {
        // log-domain power with a max shift so large alpha cannot underflow
        // the whole vector
        double max_log = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < w.size(); ++i)
            if (w[i] > 0.0) max_log = std::max(max_log, alpha * std::log(w[i]));
        double sum = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            scaled[i] = w[i] > 0.0 ? std::exp(alpha * std::log(w[i]) - max_log) : 0.0;
            sum += scaled[i];
        }
        scaled /= sum;
    }
    if (h.has_atoms()) return DiscreteDistribution(scaled, h.atoms());
    return DiscreteDistribution(scaled);
}

GaussianBelief alpha_scale(const GaussianBelief& g, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::domain_error("alpha_scale: uniform limit alpha=0 has no Gaussian form");
    return GaussianBelief(g.mean(), g.covariance() / alpha);
}

double entropy(const DiscreteDistribution& h) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        const double w = h.weight(i);
        if (w > 0.0) acc -= w * std::log(w);
    }
    return acc;
}

double entropy(const GaussianBelief& g) {
    const double d = static_cast<double>(g.dim());
    const Eigen::LLT<Eigen::MatrixXd> llt(g.covariance());
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < g.dim(); ++i)
        log_det += 2.0 * std::log(llt.matrixL()(i, i));
    return 0.5 * (d * std::log(kTwoPi) + log_det) + 0.5 * d;
}

double kl_divergence(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("kl_divergence: dimension mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double wa = a.weight(i);
        if (wa == 0.0) continue;
        const double wb = b.weight(i);
        if (wb == 0.0) return std::numeric_limits<double>::infinity();
        acc += wa * std::log(wa / wb);
    }
    return std::max(acc, 0.0);
}

double kl_divergence(const GaussianBelief& a, const GaussianBelief& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("kl_divergence: dimension mismatch");
    const Eigen::Index d = a.dim();
    const Eigen::LLT<Eigen::MatrixXd> llt_b(b.covariance());
    const Eigen::MatrixXd b_inv_a = llt_b.solve(a.covariance());
    const Eigen::VectorXd diff = b.mean() - a.mean();

    const Eigen::LLT<Eigen::MatrixXd> llt_a(a.covariance());
    double log_det_ratio = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
        log_det_ratio += 2.0 * (std::log(llt_b.matrixL()(i, i)) - std::log(llt_a.matrixL()(i, i)));

    const double kl = 0.5 * (b_inv_a.trace() + diff.dot(llt_b.solve(diff)) -
                             static_cast<double>(d) + log_det_ratio);
    return std::max(kl, 0.0);
}

}  // namespace uab
