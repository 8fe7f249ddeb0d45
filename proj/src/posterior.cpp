#include "uab/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace uab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exponentiate-and-normalize a vector of log weights. Entries of -inf drop
// to exact zero; all-(-inf) means the fused measure vanished.
Eigen::VectorXd normalize_log_weights(const Eigen::VectorXd& log_w) {
    const double max_log = log_w.maxCoeff();
    if (!std::isfinite(max_log)) {
        throw std::invalid_argument("fuse: prior and likelihood have disjoint support");
    }
    Eigen::VectorXd w(log_w.size());
    for (Eigen::Index i = 0; i < log_w.size(); ++i) {
        w[i] = std::isfinite(log_w[i]) ? std::exp(log_w[i] - max_log) : 0.0;
    }
    w /= w.sum();
    return w;
}

// c * ln(v) with the convention that a zero coefficient removes the factor
// even at v = 0 (0^0 := 1 in the fusion product).
double scaled_log(double coeff, double value) {
    if (coeff == 0.0) return 0.0;
    return value > 0.0 ? coeff * std::log(value) : -kInf;
}

void check_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) {
        std::ostringstream msg;
        msg << what << ": size mismatch (" << a << " vs " << b << ")";
        throw std::invalid_argument(msg.str());
    }
}

// Euclidean projection onto the probability simplex (sort-based).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumsum = 0.0;
    double tau = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        cumsum += u[static_cast<std::size_t>(i)];
        const double candidate = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (u[static_cast<std::size_t>(i)] - candidate > 0.0) {
            tau = candidate;
        }
    }
    Eigen::VectorXd out = (v.array() - tau).cwiseMax(0.0);
    out /= out.sum();
    return out;
}

}  // namespace

TemperPair::TemperPair(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || alpha < 0.0 || beta < 0.0) {
        throw std::invalid_argument("TemperPair: exponents must be finite and non-negative");
    }
}

FusionWeights::FusionWeights(double a1_, double a2_, double a3_) : a1(a1_), a2(a2_), a3(a3_) {
    if (!std::isfinite(a1) || !std::isfinite(a2) || !std::isfinite(a3)) {
        throw std::invalid_argument("FusionWeights: weights must be finite");
    }
    if (a1 < 0.0 || a2 < 0.0) {
        throw std::invalid_argument("FusionWeights: a1 and a2 must be non-negative");
    }
    if (a3 > a1 + a2) {
        throw std::invalid_argument("FusionWeights: a3 must not exceed a1 + a2");
    }
}

DegenerateMapError::DegenerateMapError(std::vector<Eigen::Index> argmax_set)
    : std::domain_error("fusion weights degenerate (a3 == a1 + a2): posterior collapses "
                        "onto the weighted MAP set"),
      argmax_set_(std::move(argmax_set)) {}

TemperPair weights_to_temper(const FusionWeights& w) {
    const double denom = w.a1 + w.a2 - w.a3;
    if (denom <= 0.0) {
        throw DegenerateMapError();
    }
    return TemperPair(w.a2 / denom, w.a1 / denom);
}

DiscreteDistribution fuse(const DiscreteDistribution& prior, const DiscreteDistribution& lik,
                          const TemperPair& t) {
    check_same_size(prior.size(), lik.size(), "fuse");
    Eigen::VectorXd log_w(prior.size());
    for (Eigen::Index i = 0; i < prior.size(); ++i) {
        log_w[i] = scaled_log(t.beta, prior.weight(i)) + scaled_log(t.alpha, lik.weight(i));
    }
    if (prior.has_atoms()) {
        return DiscreteDistribution(normalize_log_weights(log_w), prior.atoms());
    }
    return DiscreteDistribution(normalize_log_weights(log_w));
}

GaussianBelief fuse(const GaussianBelief& prior, const GaussianBelief& lik, const TemperPair& t) {
    check_same_size(prior.dim(), lik.dim(), "fuse");
    if (t.alpha + t.beta <= 0.0) {
        throw std::domain_error("fuse: alpha + beta must be positive for Gaussian fusion");
    }
    const Eigen::Index d = prior.dim();
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd prior_prec = prior.covariance().llt().solve(identity);
    const Eigen::MatrixXd lik_prec = lik.covariance().llt().solve(identity);
    const Eigen::MatrixXd post_prec = t.beta * prior_prec + t.alpha * lik_prec;
    const auto llt = post_prec.llt();
    const Eigen::VectorXd info =
        t.beta * (prior_prec * prior.mean()) + t.alpha * (lik_prec * lik.mean());
    const Eigen::VectorXd mean = llt.solve(info);
    Eigen::MatrixXd cov = llt.solve(identity);
    cov = ((cov + cov.transpose()) / 2.0).eval();
    return GaussianBelief(mean, cov);
}

DiscreteDistribution fuse_multi_sample(const DiscreteDistribution& prior,
                                       const std::vector<DiscreteDistribution>& liks,
                                       const TemperPair& t) {
    if (liks.empty()) {
        throw std::invalid_argument("fuse_multi_sample: need at least one likelihood");
    }
    const double per_sample = t.alpha / static_cast<double>(liks.size());
    Eigen::VectorXd log_w(prior.size());
    for (Eigen::Index i = 0; i < prior.size(); ++i) {
        log_w[i] = scaled_log(t.beta, prior.weight(i));
    }
    for (const auto& lik : liks) {
        check_same_size(prior.size(), lik.size(), "fuse_multi_sample");
        for (Eigen::Index i = 0; i < prior.size(); ++i) {
            log_w[i] += scaled_log(per_sample, lik.weight(i));
        }
    }
    if (prior.has_atoms()) {
        return DiscreteDistribution(normalize_log_weights(log_w), prior.atoms());
    }
    return DiscreteDistribution(normalize_log_weights(log_w));
}

DiscreteDistribution fuse_multi_prior(const std::vector<WeightedPrior>& priors,
                                      const std::vector<DiscreteDistribution>& liks,
                                      const TemperPair& t) {
    if (priors.empty()) {
        throw std::invalid_argument("fuse_multi_prior: need at least one prior");
    }
    if (liks.empty()) {
        throw std::invalid_argument("fuse_multi_prior: need at least one likelihood");
    }
    double weight_sum = 0.0;
    for (const auto& wp : priors) {
        if (!std::isfinite(wp.weight) || wp.weight < 0.0 || wp.weight > 1.0) {
            throw std::invalid_argument("fuse_multi_prior: prior weights must lie in [0, 1]");
        }
        weight_sum += wp.weight;
    }
    if (std::abs(weight_sum - 1.0) > 1e-12) {
        throw std::invalid_argument("fuse_multi_prior: prior weights must sum to 1");
    }
    const Eigen::Index n = priors.front().dist.size();
    const double per_sample = t.alpha / static_cast<double>(liks.size());
    Eigen::VectorXd log_w = Eigen::VectorXd::Zero(n);
    for (const auto& wp : priors) {
        check_same_size(n, wp.dist.size(), "fuse_multi_prior");
        const double coeff = t.beta * wp.weight;
        for (Eigen::Index i = 0; i < n; ++i) {
            log_w[i] += scaled_log(coeff, wp.dist.weight(i));
        }
    }
    for (const auto& lik : liks) {
        check_same_size(n, lik.size(), "fuse_multi_prior");
        for (Eigen::Index i = 0; i < n; ++i) {
            log_w[i] += scaled_log(per_sample, lik.weight(i));
        }
    }
    if (priors.front().dist.has_atoms()) {
        return DiscreteDistribution(normalize_log_weights(log_w), priors.front().dist.atoms());
    }
    return DiscreteDistribution(normalize_log_weights(log_w));
}

std::vector<Eigen::Index> weighted_map_set(const DiscreteDistribution& prior,
                                           const DiscreteDistribution& lik,
                                           const FusionWeights& w) {
    check_same_size(prior.size(), lik.size(), "weighted_map_set");
    Eigen::VectorXd score(prior.size());
    for (Eigen::Index i = 0; i < prior.size(); ++i) {
        score[i] = scaled_log(w.a1, prior.weight(i)) + scaled_log(w.a2, lik.weight(i));
    }
    const double best = score.maxCoeff();
    if (!std::isfinite(best)) {
        throw std::invalid_argument("weighted_map_set: prior and likelihood have disjoint support");
    }
    std::vector<Eigen::Index> set;
    // Scores are exact log sums, so exact-tie comparison is intended here.
    for (Eigen::Index i = 0; i < score.size(); ++i) {
        if (score[i] == best) set.push_back(i);
    }
    return set;
}

DiscreteDistribution fuse_with_weights(const DiscreteDistribution& prior,
                                       const DiscreteDistribution& lik, const FusionWeights& w) {
    if (w.a3 == w.a1 + w.a2) {
        throw DegenerateMapError(weighted_map_set(prior, lik, w));
    }
    return fuse(prior, lik, weights_to_temper(w));
}

double objective_value(const DiscreteDistribution& q, const DiscreteDistribution& prior,
                       const DiscreteDistribution& lik, const FusionWeights& w) {
    check_same_size(q.size(), prior.size(), "objective_value");
    check_same_size(q.size(), lik.size(), "objective_value");
    double total = 0.0;
    if (w.a1 != 0.0) {
        const double kp = kl_divergence(q, prior);
        if (!std::isfinite(kp)) return kInf;
        total += w.a1 * kp;
    }
    if (w.a2 != 0.0) {
        const double klk = kl_divergence(q, lik);
        if (!std::isfinite(klk)) return kInf;
        total += w.a2 * klk;
    }
    if (w.a3 != 0.0) {
        total += w.a3 * entropy(q);
    }
    return total;
}

DiscreteDistribution brute_force_posterior(const DiscreteDistribution& prior,
                                           const DiscreteDistribution& lik,
                                           const FusionWeights& w, double tol) {
    check_same_size(prior.size(), lik.size(), "brute_force_posterior");
    if (w.a3 >= w.a1 + w.a2) {
        throw DegenerateMapError(weighted_map_set(prior, lik, w));
    }
    // The minimizer puts no mass outside the joint support, so optimize on
    // the restricted coordinates and scatter back at the end.
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < prior.size(); ++i) {
        if (prior.weight(i) > 0.0 && lik.weight(i) > 0.0) support.push_back(i);
    }
    if (support.empty()) {
        throw std::invalid_argument("brute_force_posterior: disjoint support");
    }
    const auto n = static_cast<Eigen::Index>(support.size());
    Eigen::VectorXd log_p(n);
    Eigen::VectorXd log_l(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        log_p[j] = std::log(prior.weight(support[static_cast<std::size_t>(j)]));
        log_l[j] = std::log(lik.weight(support[static_cast<std::size_t>(j)]));
    }
    const double ent_coeff = w.a1 + w.a2 - w.a3;
    constexpr int kMaxIter = 1'000'000;
    constexpr double kFloor = 1e-16;  // keeps ln(q) finite at the boundary

    Eigen::VectorXd q = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    auto objective = [&](const Eigen::VectorXd& v) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (v[j] > 0.0) {
                acc += v[j] * (ent_coeff * std::log(v[j]) - w.a1 * log_p[j] - w.a2 * log_l[j]);
            }
        }
        return acc;
    };
    // Projected gradient descent with Armijo backtracking. A fixed
    // diminishing schedule (0.1/k) stalls on flat objectives (small
    // a1 + a2 - a3) long before reaching tol, so the step is chosen by
    // line search instead; the iterate stays a plain simplex projection
    // of a gradient step either way.
    double current = objective(q);
    bool converged = false;
    for (int k = 1; k <= kMaxIter; ++k) {
        Eigen::VectorXd grad(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            grad[j] = ent_coeff * (std::log(q[j]) + 1.0) - w.a1 * log_p[j] - w.a2 * log_l[j];
        }
        double step = 1.0;
        Eigen::VectorXd next = q;
        double value = current;
        for (int halvings = 0; halvings < 60; ++halvings) {
            Eigen::VectorXd cand = project_simplex(q - step * grad);
            cand = cand.cwiseMax(kFloor).eval();
            cand /= cand.sum();
            const double cand_value = objective(cand);
            if (cand_value <= current + 1e-4 * grad.dot(cand - q)) {
                next = std::move(cand);
                value = cand_value;
                break;
            }
            step /= 2.0;
        }
        q = next;
        if (std::abs(current - value) < tol) {
            current = value;
            converged = true;
            break;
        }
        current = value;
    }
    if (!converged) {
        throw std::runtime_error("brute_force_posterior: no convergence within iteration cap");
    }
    Eigen::VectorXd full = Eigen::VectorXd::Zero(prior.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        full[support[static_cast<std::size_t>(j)]] = q[j];
    }
    full /= full.sum();
    if (prior.has_atoms()) {
        return DiscreteDistribution(full, prior.atoms());
    }
    return DiscreteDistribution(full);
}

double scaling_gain(const DiscreteDistribution& h0, const DiscreteDistribution& h) {
    check_same_size(h0.size(), h.size(), "scaling_gain");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        const double hi = h.weight(i);
        if (hi > 0.0) {
            acc += (h0.weight(i) - hi) * std::log(hi);
        } else if (h0.weight(i) > 0.0) {
            return kInf;  // h0 puts mass where h has none
        }
    }
    return acc;
}

namespace {

// Golden-section minimization of a unimodal g on [lo, hi]; interior points
// only, so g need not be defined at the endpoints.
ScaleSearch golden_section(const std::function<double(double)>& g, double lo, double hi,
                           double tol) {
    constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
    double a = lo;
    double b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = g(x1);
    double f2 = g(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = g(x2);
        }
    }
    const double alpha_star = (a + b) / 2.0;
    return ScaleSearch{alpha_star, g(alpha_star)};
}

}  // namespace

ScaleSearch best_scale(const DiscreteDistribution& h0, const DiscreteDistribution& h,
                       double alpha_max) {
    check_same_size(h0.size(), h.size(), "best_scale");
    if (alpha_max <= 0.0) {
        throw std::invalid_argument("best_scale: alpha_max must be positive");
    }
    if (h.is_uniform_on_support()) {
        throw std::domain_error("best_scale: h is uniform, a fixed point of scaling");
    }
    if (!h0.support_subset_of(h)) {
        throw std::invalid_argument("best_scale: support(h0) must lie within support(h)");
    }
    auto g = [&](double alpha) { return kl_divergence(h0, alpha_scale(h, alpha)); };
    return golden_section(g, 0.0, alpha_max, 1e-8);
}

ScaleSearch best_scale(const GaussianBelief& h0, const GaussianBelief& h, double alpha_max) {
    check_same_size(h0.dim(), h.dim(), "best_scale");
    if (alpha_max <= 0.0) {
        throw std::invalid_argument("best_scale: alpha_max must be positive");
    }
    auto g = [&](double alpha) { return kl_divergence(h0, alpha_scale(h, alpha)); };
    return golden_section(g, 0.0, alpha_max, 1e-8);
}

double bh_bound(double m, double kl) {
    if (!std::isfinite(m) || m < 0.0) {
        throw std::invalid_argument("bh_bound: m must be finite and non-negative");
    }
    if (kl < 0.0) {
        throw std::invalid_argument("bh_bound: KL divergence must be non-negative");
    }
    return 2.0 * m * std::sqrt(1.0 - std::exp(-kl));
}

Eigen::VectorXd map_ridge(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                          const TemperPair& t) {
    if (design.rows() != targets.size()) {
        throw std::invalid_argument("map_ridge: row count must match target count");
    }
    if (t.alpha <= 0.0) {
        throw std::domain_error("map_ridge: alpha must be positive");
    }
    const double ridge = t.beta / t.alpha;
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd rhs = design.transpose() * targets;
    if (ridge > 0.0) {
        const Eigen::MatrixXd reg =
            gram + ridge * Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
        return reg.llt().solve(rhs);
    }
    // beta = 0 degenerates to least squares; demand an invertible Gram matrix.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) {
        throw std::domain_error("map_ridge: singular design with no ridge (beta = 0)");
    }
    return lu.solve(rhs);
}

}  // namespace uab
