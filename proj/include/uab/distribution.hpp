#pragma once

#include <optional>

#include <Eigen/Core>

namespace uab {

/// Normalized non-negative weight vector over a finite parameter set.
/// Carries priors, likelihood distributions, particle weights and model
/// weights. Weights must sum to 1 within 1e-12; use the factories below
/// to build one from unnormalized values.
class DiscreteDistribution {
public:
    explicit DiscreteDistribution(Eigen::VectorXd weights);
    DiscreteDistribution(Eigen::VectorXd weights, Eigen::VectorXd atoms);

    /// Normalize arbitrary non-negative values (at least one positive).
    static DiscreteDistribution normalized(const Eigen::VectorXd& values);
    static DiscreteDistribution normalized(const Eigen::VectorXd& values,
                                           const Eigen::VectorXd& atoms);
    static DiscreteDistribution uniform(Eigen::Index n);

    const Eigen::VectorXd& weights() const { return weights_; }
    bool has_atoms() const { return atoms_.has_value(); }
    /// Atom positions; only call when has_atoms().
    const Eigen::VectorXd& atoms() const { return *atoms_; }
    Eigen::Index size() const { return weights_.size(); }
    double weight(Eigen::Index i) const { return weights_[i]; }

    /// Expected atom value; requires atoms.
    double mean() const;

    /// True when all positive weights are equal (the scaling fixed point).
    bool is_uniform_on_support(double tol = 1e-12) const;

    /// support(this) ⊆ support(other), element-wise.
    bool support_subset_of(const DiscreteDistribution& other) const;

private:
    Eigen::VectorXd weights_;
    std::optional<Eigen::VectorXd> atoms_;
};

/// Gaussian state belief: mean plus symmetric positive-definite covariance.
class GaussianBelief {
public:
    GaussianBelief(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

    /// 1-D convenience.
    GaussianBelief(double mean, double variance);

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return covariance_; }
    Eigen::Index dim() const { return mean_.size(); }

    double scalar_mean() const { return mean_[0]; }
    double scalar_variance() const { return covariance_(0, 0); }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd covariance_;
};

/// Normalize a likelihood function sampled on a finite grid into a
/// distribution of the parameter. Throws std::invalid_argument when the
/// values are all zero or not finite.
DiscreteDistribution likelihood_distribution(const Eigen::VectorXd& likelihood_values);
DiscreteDistribution likelihood_distribution(const Eigen::VectorXd& likelihood_values,
                                             const Eigen::VectorXd& atoms);

/// h^(alpha): element-wise power, renormalized. alpha = 1 returns h
/// unchanged bit-for-bit; alpha = 0 returns uniform over the support of h.
DiscreteDistribution alpha_scale(const DiscreteDistribution& h, double alpha);

/// Gaussian scaling: mean kept, covariance divided by alpha. alpha = 0 has
/// no Gaussian representation and throws std::domain_error.
GaussianBelief alpha_scale(const GaussianBelief& g, double alpha);

/// Shannon entropy (natural log); zero-weight atoms contribute 0.
double entropy(const DiscreteDistribution& h);

/// Differential entropy: 0.5*ln((2*pi)^d * det(cov)) + d/2.
double entropy(const GaussianBelief& g);

/// KL(a || b); returns +infinity when support(a) is not contained in
/// support(b). Never throws for valid inputs.
double kl_divergence(const DiscreteDistribution& a, const DiscreteDistribution& b);
double kl_divergence(const GaussianBelief& a, const GaussianBelief& b);

}  // namespace uab
