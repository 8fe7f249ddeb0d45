#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "uab/distribution.hpp"
#include "uab/posterior.hpp"
#include "uab/random.hpp"

namespace uab {

/// Linear Gaussian state-space model x' = F x + G w, y = H x + v with
/// w ~ N(0, Q) and v ~ N(0, R).
struct LinearSSM {
    Eigen::MatrixXd F;
    Eigen::MatrixXd G;
    Eigen::MatrixXd H;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;
};

/// Scalar nonlinear model x' = f(x, k) + w, y = g(x) + v with variances
/// attached. The transition receives the 1-based step index.
struct NonlinearSSM {
    std::function<double(double, int)> transition;
    std::function<double(double)> measurement;
    double process_var = 1.0;
    double meas_var = 1.0;
};

/// Weighted particle cloud for the scalar nonlinear model.
struct ParticleSet {
    Eigen::VectorXd states;
    DiscreteDistribution weights;
    double ess_threshold;

    Eigen::Index size() const { return states.size(); }
    /// Posterior mean estimate.
    double mean() const { return weights.weights().dot(states); }
};

/// Bank of mode-matched Kalman filters over a jump-linear system. Each
/// mode shares the LinearSSM matrices but applies its own acceleration
/// input (entering the state equation as G * input).
struct ImmBank {
    std::vector<GaussianBelief> modes;
    DiscreteDistribution model_probs;
    Eigen::MatrixXd tpm;
    Eigen::VectorXd inputs;

    Eigen::Index size() const { return static_cast<Eigen::Index>(modes.size()); }
};

/// One uncertainty-aware Kalman cycle: predict, rescale P <- P/beta and
/// R <- R/alpha, then a Joseph-form measurement update. (1,1) is the
/// textbook filter; beta < 1 inflates trust in the data, alpha < 1 in
/// the prior.
GaussianBelief ua_kalman_step(const GaussianBelief& belief, const LinearSSM& model,
                              const Eigen::VectorXd& y, const TemperPair& t);

/// 1 / sum(w_i^2), in [1, N]: the particle-diversity measure.
double effective_sample_size(const DiscreteDistribution& weights);

/// Low-variance resampling from one uniform draw u: offspring are chosen
/// at positions (u + i)/N against the cumulative weights. Offspring
/// counts deviate from N * w_i by strictly less than one. Output weights
/// are uniform.
ParticleSet systematic_resample(const ParticleSet& particles, double u);

/// One uncertainty-aware particle-filter cycle at step k: propagate with
/// the supplied process-noise draws, reweight w_i ∝ w_i^beta * p(y|x_i)^alpha,
/// then systematically resample with draw u when the effective sample
/// size falls below the threshold. A zero exponent drops its factor
/// (alpha = 0 ignores the measurement, beta = 0 flattens the history).
ParticleSet ua_pf_step(const ParticleSet& particles, const NonlinearSSM& model, double y,
                       const TemperPair& t, int k, const Eigen::VectorXd& process_noise,
                       double resample_u);

/// Convenience overload drawing N process-noise normals and the resample
/// uniform from rng. The uniform is consumed every step, resample or not,
/// so trajectories with different exponents stay draw-aligned.
ParticleSet ua_pf_step(const ParticleSet& particles, const NonlinearSSM& model, double y,
                       const TemperPair& t, int k, Rng& rng);

/// One uncertainty-aware IMM cycle: mix with the transition matrix,
/// run one Kalman update per mode (with its acceleration input), then
/// update model probabilities by mu_j ∝ c_j^beta * Lambda_j^alpha where
/// c_j is the predicted model probability and Lambda_j the Gaussian
/// innovation density. ua_inside additionally applies the (alpha, beta)
/// covariance rescaling inside every per-mode Kalman update.
ImmBank ua_imm_step(const ImmBank& bank, const LinearSSM& model, const Eigen::VectorXd& y,
                    const TemperPair& t, bool ua_inside = false);

/// Moment-matched combination of the bank into a single belief.
GaussianBelief imm_combined(const ImmBank& bank);

/// Rooted time-averaged mean-squared error over a trajectory, all state
/// components pooled into one root.
double rtamse(const std::vector<Eigen::VectorXd>& estimates,
              const std::vector<Eigen::VectorXd>& truth);

/// Scalar-state convenience: one entry per step.
double rtamse(const Eigen::VectorXd& estimates, const Eigen::VectorXd& truth);

}  // namespace uab
