#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "uab/distribution.hpp"

namespace uab {

/// Exponents of the tempered posterior: alpha on the likelihood
/// distribution, beta on the prior.
struct TemperPair {
    double alpha = 1.0;
    double beta = 1.0;

    TemperPair(double alpha_, double beta_);
};

/// Weights of the three-term variational objective
///   a1*KL(q||p) + a2*KL(q||l) + a3*Ent(q).
/// a1, a2 >= 0; a3 may be negative but not exceed a1 + a2.
struct FusionWeights {
    double a1 = 1.0;
    double a2 = 1.0;
    double a3 = 1.0;

    FusionWeights(double a1_, double a2_, double a3_);
};

/// Thrown when a3 == a1 + a2: the posterior collapses onto the weighted
/// MAP set, carried here as atom indices when known.
class DegenerateMapError : public std::domain_error {
public:
    explicit DegenerateMapError(std::vector<Eigen::Index> argmax_set = {});
    const std::vector<Eigen::Index>& argmax_set() const { return argmax_set_; }

private:
    std::vector<Eigen::Index> argmax_set_;
};

/// Map objective weights to posterior exponents:
/// beta = a1/(a1+a2-a3), alpha = a2/(a1+a2-a3).
TemperPair weights_to_temper(const FusionWeights& w);

/// Tempered fusion: normalized prior_i^beta * lik_i^alpha. A zero exponent
/// removes that factor entirely (the degenerate base 0^0 counts as 1, so
/// alpha = 0 ignores the data wholesale).
DiscreteDistribution fuse(const DiscreteDistribution& prior, const DiscreteDistribution& lik,
                          const TemperPair& t);

/// Gaussian tempered fusion in information form:
/// posterior precision = beta*prior_precision + alpha*lik_precision.
GaussianBelief fuse(const GaussianBelief& prior, const GaussianBelief& lik, const TemperPair& t);

/// n-sample rule: normalized p^beta * prod_i l_i^(alpha/n).
DiscreteDistribution fuse_multi_sample(const DiscreteDistribution& prior,
                                       const std::vector<DiscreteDistribution>& liks,
                                       const TemperPair& t);

struct WeightedPrior {
    DiscreteDistribution dist;
    double weight;
};

/// m-prior, n-sample rule: normalized prod_i p_i^(beta*w_i) * prod_j l_j^(alpha/n).
/// Prior weights must lie in [0,1] and sum to 1 within 1e-12.
DiscreteDistribution fuse_multi_prior(const std::vector<WeightedPrior>& priors,
                                      const std::vector<DiscreteDistribution>& liks,
                                      const TemperPair& t);

/// Fuse through the objective weights; at a3 == a1 + a2 throws
/// DegenerateMapError carrying the weighted-MAP index set.
DiscreteDistribution fuse_with_weights(const DiscreteDistribution& prior,
                                       const DiscreteDistribution& lik, const FusionWeights& w);

/// Indices maximizing a1*ln(prior_i) + a2*ln(lik_i).
std::vector<Eigen::Index> weighted_map_set(const DiscreteDistribution& prior,
                                           const DiscreteDistribution& lik,
                                           const FusionWeights& w);

/// a1*KL(q||p) + a2*KL(q||l) + a3*Ent(q); +infinity outside the joint
/// support. Zero-weight terms are dropped before multiplying.
double objective_value(const DiscreteDistribution& q, const DiscreteDistribution& prior,
                       const DiscreteDistribution& lik, const FusionWeights& w);

/// Ground-truth oracle for the tempered fusion: minimizes the objective
/// over the probability simplex by projected gradient descent with
/// backtracking line search (cap 1e6 iterations) until the objective
/// change per iteration drops below tol. Throws std::runtime_error when
/// the cap is hit first.
DiscreteDistribution brute_force_posterior(const DiscreteDistribution& prior,
                                           const DiscreteDistribution& lik,
                                           const FusionWeights& w, double tol);

/// Sum_i (h0_i - h_i) * ln(h_i). A nonzero value certifies, for
/// non-uniform h, that some alpha strictly improves KL(h0 || h^(alpha)).
/// Returns +infinity when support(h0) leaves support(h).
double scaling_gain(const DiscreteDistribution& h0, const DiscreteDistribution& h);

struct ScaleSearch {
    double alpha_star;
    double kl_star;
};

/// Golden-section minimization of alpha -> KL(h0 || h^(alpha)) on
/// [0, alpha_max] to interval tolerance 1e-8. The map is strictly convex
/// for non-uniform h, so the minimizer is unique. Uniform h is a scaling
/// fixed point and throws std::domain_error.
ScaleSearch best_scale(const DiscreteDistribution& h0, const DiscreteDistribution& h,
                       double alpha_max = 10.0);
ScaleSearch best_scale(const GaussianBelief& h0, const GaussianBelief& h,
                       double alpha_max = 10.0);

/// Bretagnolle-Huber gap bound: 2*m*sqrt(1 - exp(-kl)).
double bh_bound(double m, double kl);

/// Tempered MAP for the linear-Gaussian regression model: solves
/// (X^T X + (beta/alpha) I) w = X^T y.
Eigen::VectorXd map_ridge(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                          const TemperPair& t);

}  // namespace uab
