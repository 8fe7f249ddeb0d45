#include "uab/filters.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace uab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// c * ln(v) with the zero-exponent-drops-the-factor convention shared
// with the fusion operations.
double scaled_log(double coeff, double value) {
    if (coeff == 0.0) return 0.0;
    return value > 0.0 ? coeff * std::log(value) : -kInf;
}

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& m, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error(std::string(what) + ": matrix is not positive definite");
    }
    return llt;
}

// Measurement update shared by the plain and IMM paths. P and R arrive
// already rescaled. Returns the log innovation density as well, which the
// IMM path consumes as the mode likelihood.
struct UpdateResult {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double log_likelihood;
};

UpdateResult kalman_update(const Eigen::VectorXd& x_pred, const Eigen::MatrixXd& p_pred,
                           const Eigen::MatrixXd& h, const Eigen::MatrixXd& r,
                           const Eigen::VectorXd& y) {
    const Eigen::VectorXd innovation = y - h * x_pred;
    const Eigen::MatrixXd s = h * p_pred * h.transpose() + r;
    const auto llt = checked_llt(s, "kalman_update: innovation covariance");
    const Eigen::MatrixXd gain = p_pred * h.transpose() * llt.solve(
        Eigen::MatrixXd::Identity(s.rows(), s.cols()));

    UpdateResult out;
    out.mean = x_pred + gain * innovation;
    const Eigen::MatrixXd joseph =
        Eigen::MatrixXd::Identity(p_pred.rows(), p_pred.cols()) - gain * h;
    out.cov = joseph * p_pred * joseph.transpose() + gain * r * gain.transpose();
    out.cov = ((out.cov + out.cov.transpose()) / 2.0).eval();

    double log_det = 0.0;
    const auto& l = llt.matrixL();
    for (Eigen::Index i = 0; i < s.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
    const double mahal = innovation.dot(llt.solve(innovation));
    out.log_likelihood =
        -0.5 * (static_cast<double>(s.rows()) * std::log(2.0 * M_PI) + log_det + mahal);
    return out;
}

void check_model(const LinearSSM& m, Eigen::Index state_dim, Eigen::Index meas_dim) {
    if (m.F.rows() != state_dim || m.F.cols() != state_dim) {
        throw std::invalid_argument("LinearSSM: F must be state_dim x state_dim");
    }
    if (m.G.rows() != state_dim || m.Q.rows() != m.G.cols() || m.Q.cols() != m.G.cols()) {
        throw std::invalid_argument("LinearSSM: G and Q are not conformable");
    }
    if (m.H.rows() != meas_dim || m.H.cols() != state_dim) {
        throw std::invalid_argument("LinearSSM: H must be meas_dim x state_dim");
    }
    if (m.R.rows() != meas_dim || m.R.cols() != meas_dim) {
        throw std::invalid_argument("LinearSSM: R must be meas_dim x meas_dim");
    }
}

double log_normal_pdf(double x, double mean, double var) {
    const double diff = x - mean;
    return -0.5 * std::log(2.0 * M_PI * var) - diff * diff / (2.0 * var);
}

}  // namespace

GaussianBelief ua_kalman_step(const GaussianBelief& belief, const LinearSSM& model,
                              const Eigen::VectorXd& y, const TemperPair& t) {
    if (t.alpha <= 0.0 || t.beta <= 0.0) {
        throw std::domain_error("ua_kalman_step: alpha and beta must be positive");
    }
    check_model(model, belief.dim(), y.size());
    const Eigen::VectorXd x_pred = model.F * belief.mean();
    Eigen::MatrixXd p_pred = model.F * belief.covariance() * model.F.transpose() +
                             model.G * model.Q * model.G.transpose();
    p_pred /= t.beta;
    const Eigen::MatrixXd r = model.R / t.alpha;
    const auto updated = kalman_update(x_pred, p_pred, model.H, r, y);
    return GaussianBelief(updated.mean, updated.cov);
}

double effective_sample_size(const DiscreteDistribution& weights) {
    return 1.0 / weights.weights().squaredNorm();
}

ParticleSet systematic_resample(const ParticleSet& particles, double u) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw std::invalid_argument("systematic_resample: u must lie in [0, 1)");
    }
    const Eigen::Index n = particles.size();
    Eigen::VectorXd resampled(n);
    double cumulative = particles.weights.weight(0);
    Eigen::Index src = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double position = (u + static_cast<double>(i)) / static_cast<double>(n);
        // Ties advance: a position equal to the boundary belongs to the next
        // particle, which keeps every offspring count within 1 of n*w_i and
        // never selects a leading zero-weight particle.
        while (position >= cumulative && src + 1 < n) {
            ++src;
            cumulative += particles.weights.weight(src);
        }
        resampled[i] = particles.states[src];
    }
    return ParticleSet{std::move(resampled), DiscreteDistribution::uniform(n),
                       particles.ess_threshold};
}

ParticleSet ua_pf_step(const ParticleSet& particles, const NonlinearSSM& model, double y,
                       const TemperPair& t, int k, const Eigen::VectorXd& process_noise,
                       double resample_u) {
    const Eigen::Index n = particles.size();
    if (n < 2) {
        throw std::invalid_argument("ua_pf_step: need at least 2 particles");
    }
    if (process_noise.size() != n) {
        throw std::invalid_argument("ua_pf_step: one process-noise draw per particle required");
    }
    if (!(particles.ess_threshold > 0.0 && particles.ess_threshold <= static_cast<double>(n))) {
        throw std::invalid_argument("ua_pf_step: ess_threshold must lie in (0, N]");
    }

    Eigen::VectorXd propagated(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        propagated[i] = model.transition(particles.states[i], k) + process_noise[i];
    }

    Eigen::VectorXd log_w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double log_lik = log_normal_pdf(y, model.measurement(propagated[i]), model.meas_var);
        log_w[i] = scaled_log(t.beta, particles.weights.weight(i)) + t.alpha * log_lik;
    }
    const double max_log = log_w.maxCoeff();
    if (!std::isfinite(max_log)) {
        throw std::runtime_error("ua_pf_step: all particle weights vanished (depletion)");
    }
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        w[i] = std::isfinite(log_w[i]) ? std::exp(log_w[i] - max_log) : 0.0;
    }
    ParticleSet next{std::move(propagated), DiscreteDistribution::normalized(w),
                     particles.ess_threshold};
    if (effective_sample_size(next.weights) < next.ess_threshold) {
        next = systematic_resample(next, resample_u);
    }
    return next;
}

ParticleSet ua_pf_step(const ParticleSet& particles, const NonlinearSSM& model, double y,
                       const TemperPair& t, int k, Rng& rng) {
    const Eigen::Index n = particles.size();
    const Eigen::VectorXd noise = rng.normal_vector(n, 0.0, std::sqrt(model.process_var));
    // Drawn unconditionally so different exponent settings consume the
    // same stream and stay paired.
    const double u = rng.uniform();
    return ua_pf_step(particles, model, y, t, k, noise, u);
}

ImmBank ua_imm_step(const ImmBank& bank, const LinearSSM& model, const Eigen::VectorXd& y,
                    const TemperPair& t, bool ua_inside) {
    if (t.beta <= 0.0) {
        throw std::domain_error("ua_imm_step: beta must be positive");
    }
    const Eigen::Index m = bank.size();
    if (m < 2) {
        throw std::invalid_argument("ua_imm_step: need at least 2 modes");
    }
    if (bank.model_probs.size() != m || bank.inputs.size() != m || bank.tpm.rows() != m ||
        bank.tpm.cols() != m) {
        throw std::invalid_argument("ua_imm_step: bank components are not conformable");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (std::abs(bank.tpm.row(i).sum() - 1.0) > 1e-12) {
            throw std::invalid_argument("ua_imm_step: tpm rows must sum to 1");
        }
    }
    const Eigen::Index d = bank.modes.front().dim();
    check_model(model, d, y.size());

    // (i) predicted model probabilities and mixing weights.
    Eigen::VectorXd c(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            acc += bank.tpm(i, j) * bank.model_probs.weight(i);
        }
        c[j] = acc;
    }

    // (ii) moment-matched mixed initial conditions per mode.
    std::vector<Eigen::VectorXd> mixed_mean(static_cast<std::size_t>(m));
    std::vector<Eigen::MatrixXd> mixed_cov(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
        if (c[j] > 0.0) {
            for (Eigen::Index i = 0; i < m; ++i) {
                const double mix = bank.tpm(i, j) * bank.model_probs.weight(i) / c[j];
                mean += mix * bank.modes[static_cast<std::size_t>(i)].mean();
            }
        } else {
            mean = bank.modes[static_cast<std::size_t>(j)].mean();
        }
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
        if (c[j] > 0.0) {
            for (Eigen::Index i = 0; i < m; ++i) {
                const double mix = bank.tpm(i, j) * bank.model_probs.weight(i) / c[j];
                const Eigen::VectorXd diff =
                    bank.modes[static_cast<std::size_t>(i)].mean() - mean;
                cov += mix * (bank.modes[static_cast<std::size_t>(i)].covariance() +
                              diff * diff.transpose());
            }
        } else {
            cov = bank.modes[static_cast<std::size_t>(j)].covariance();
        }
        mixed_mean[static_cast<std::size_t>(j)] = std::move(mean);
        mixed_cov[static_cast<std::size_t>(j)] = ((cov + cov.transpose()) / 2.0).eval();
    }

    // (iii) per-mode Kalman cycle with the mode's acceleration input.
    std::vector<GaussianBelief> new_modes;
    new_modes.reserve(static_cast<std::size_t>(m));
    Eigen::VectorXd log_mu(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::VectorXd x_pred = model.F * mixed_mean[static_cast<std::size_t>(j)] +
                                       model.G * Eigen::VectorXd::Constant(model.G.cols(),
                                                                           bank.inputs[j]);
        Eigen::MatrixXd p_pred = model.F * mixed_cov[static_cast<std::size_t>(j)] *
                                     model.F.transpose() +
                                 model.G * model.Q * model.G.transpose();
        Eigen::MatrixXd r = model.R;
        if (ua_inside) {
            if (t.alpha <= 0.0) {
                throw std::domain_error("ua_imm_step: alpha must be positive with ua_inside");
            }
            p_pred /= t.beta;
            r /= t.alpha;
        }
        const auto updated = kalman_update(x_pred, p_pred, model.H, r, y);
        new_modes.emplace_back(updated.mean, updated.cov);
        // (iv) tempered model-probability update in the log domain.
        log_mu[j] = scaled_log(t.beta, c[j]) + t.alpha * updated.log_likelihood;
    }
    const double max_log = log_mu.maxCoeff();
    if (!std::isfinite(max_log)) {
        throw std::runtime_error("ua_imm_step: all tempered model weights vanished");
    }
    Eigen::VectorXd mu(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        mu[j] = std::isfinite(log_mu[j]) ? std::exp(log_mu[j] - max_log) : 0.0;
    }
    return ImmBank{std::move(new_modes), DiscreteDistribution::normalized(mu), bank.tpm,
                   bank.inputs};
}

GaussianBelief imm_combined(const ImmBank& bank) {
    const Eigen::Index d = bank.modes.front().dim();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (Eigen::Index j = 0; j < bank.size(); ++j) {
        mean += bank.model_probs.weight(j) * bank.modes[static_cast<std::size_t>(j)].mean();
    }
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index j = 0; j < bank.size(); ++j) {
        const Eigen::VectorXd diff = bank.modes[static_cast<std::size_t>(j)].mean() - mean;
        cov += bank.model_probs.weight(j) *
               (bank.modes[static_cast<std::size_t>(j)].covariance() + diff * diff.transpose());
    }
    return GaussianBelief(mean, ((cov + cov.transpose()) / 2.0).eval());
}

double rtamse(const std::vector<Eigen::VectorXd>& estimates,
              const std::vector<Eigen::VectorXd>& truth) {
    if (estimates.size() != truth.size() || estimates.empty()) {
        throw std::invalid_argument("rtamse: sequences must be non-empty and equally long");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < estimates.size(); ++k) {
        if (estimates[k].size() != truth[k].size()) {
            throw std::invalid_argument("rtamse: state dimensions differ");
        }
        acc += (estimates[k] - truth[k]).squaredNorm();
    }
    return std::sqrt(acc / static_cast<double>(estimates.size()));
}

double rtamse(const Eigen::VectorXd& estimates, const Eigen::VectorXd& truth) {
    if (estimates.size() != truth.size() || estimates.size() == 0) {
        throw std::invalid_argument("rtamse: sequences must be non-empty and equally long");
    }
    return std::sqrt((estimates - truth).squaredNorm() / static_cast<double>(estimates.size()));
}

}  // namespace uab
