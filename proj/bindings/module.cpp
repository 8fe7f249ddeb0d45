// Python surface: the fusion, scaling, and filtering operations with
// numpy in and out. Structs are flattened into tuples or dicts except
// the trained classifier, which keeps its parameters opaque.

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uab/classify.hpp"
#include "uab/distribution.hpp"
#include "uab/experiments.hpp"
#include "uab/filters.hpp"
#include "uab/posterior.hpp"
#include "uab/simulate.hpp"
#include "uab/tuning.hpp"

namespace py = pybind11;

using uab::DiscreteDistribution;
using uab::GaussianBelief;
using uab::TemperPair;

namespace {

std::pair<Eigen::VectorXd, Eigen::MatrixXd> unpack(const GaussianBelief& g) {
    return {g.mean(), g.covariance()};
}

py::dict tuning_dict(const uab::TuningResult& r) {
    py::dict out;
    out["best_point"] = r.best_point;
    out["best_value"] = r.best_value;
    out["evaluations"] = r.evaluations.size();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Tempered Bayesian fusion, distribution scaling, and "
              "uncertainty-aware filters";

    // --- fusion ---------------------------------------------------------

    m.def(
        "weights_to_temper",
        [](double a1, double a2, double a3) {
            const TemperPair t = uab::weights_to_temper(uab::FusionWeights(a1, a2, a3));
            return std::make_pair(t.alpha, t.beta);
        },
        py::arg("a1"), py::arg("a2"), py::arg("a3"),
        "Map objective weights to the (alpha, beta) exponent pair.");

    m.def(
        "fuse",
        [](const Eigen::VectorXd& prior, const Eigen::VectorXd& lik, double alpha,
           double beta) {
            return uab::fuse(DiscreteDistribution(prior), DiscreteDistribution(lik),
                             TemperPair(alpha, beta))
                .weights();
        },
        py::arg("prior"), py::arg("lik"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
        "Normalized prior^beta * lik^alpha over a shared finite support.");

    m.def(
        "fuse_gaussian",
        [](const Eigen::VectorXd& prior_mean, const Eigen::MatrixXd& prior_cov,
           const Eigen::VectorXd& lik_mean, const Eigen::MatrixXd& lik_cov, double alpha,
           double beta) {
            return unpack(uab::fuse(GaussianBelief(prior_mean, prior_cov),
                                    GaussianBelief(lik_mean, lik_cov),
                                    TemperPair(alpha, beta)));
        },
        py::arg("prior_mean"), py::arg("prior_cov"), py::arg("lik_mean"),
        py::arg("lik_cov"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
        "Tempered conjugate update; returns (mean, covariance).");

    m.def(
        "brute_force_posterior",
        [](const Eigen::VectorXd& prior, const Eigen::VectorXd& lik, double a1, double a2,
           double a3, double tol) {
            return uab::brute_force_posterior(DiscreteDistribution(prior),
                                              DiscreteDistribution(lik),
                                              uab::FusionWeights(a1, a2, a3), tol)
                .weights();
        },
        py::arg("prior"), py::arg("lik"), py::arg("a1"), py::arg("a2"), py::arg("a3"),
        py::arg("tol") = 1e-10,
        "Variational oracle: minimizes the weighted objective on the simplex.");

    // --- scaling and divergences ---------------------------------------

    m.def(
        "alpha_scale",
        [](const Eigen::VectorXd& h, double alpha) {
            return uab::alpha_scale(DiscreteDistribution(h), alpha).weights();
        },
        py::arg("weights"), py::arg("alpha"),
        "Element-wise power alpha, renormalized.");

    m.def(
        "alpha_scale_gaussian",
        [](const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, double alpha) {
            return unpack(uab::alpha_scale(GaussianBelief(mean, cov), alpha));
        },
        py::arg("mean"), py::arg("cov"), py::arg("alpha"),
        "Gaussian scaling: covariance divided by alpha.");

    m.def(
        "entropy",
        [](const Eigen::VectorXd& h) { return uab::entropy(DiscreteDistribution(h)); },
        py::arg("weights"));

    m.def(
        "gaussian_entropy",
        [](const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
            return uab::entropy(GaussianBelief(mean, cov));
        },
        py::arg("mean"), py::arg("cov"));

    m.def(
        "kl_divergence",
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
            return uab::kl_divergence(DiscreteDistribution(a), DiscreteDistribution(b));
        },
        py::arg("p"), py::arg("q"));

    m.def(
        "gaussian_kl",
        [](const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a,
           const Eigen::VectorXd& mean_b, const Eigen::MatrixXd& cov_b) {
            return uab::kl_divergence(GaussianBelief(mean_a, cov_a),
                                      GaussianBelief(mean_b, cov_b));
        },
        py::arg("mean_a"), py::arg("cov_a"), py::arg("mean_b"), py::arg("cov_b"));

    m.def(
        "scaling_gain",
        [](const Eigen::VectorXd& h0, const Eigen::VectorXd& h) {
            return uab::scaling_gain(DiscreteDistribution(h0), DiscreteDistribution(h));
        },
        py::arg("h0"), py::arg("h"),
        "Nonzero value certifies a strictly KL-improving scaling exponent.");

    m.def(
        "best_scale",
        [](const Eigen::VectorXd& h0, const Eigen::VectorXd& h, double alpha_max) {
            const auto found =
                uab::best_scale(DiscreteDistribution(h0), DiscreteDistribution(h), alpha_max);
            return std::make_pair(found.alpha_star, found.kl_star);
        },
        py::arg("h0"), py::arg("h"), py::arg("alpha_max") = 10.0,
        "Returns (alpha_star, kl_star) minimizing KL(h0 || h^(alpha)).");

    // --- filters --------------------------------------------------------

    m.def(
        "ua_kalman_step",
        [](const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const Eigen::MatrixXd& F,
           const Eigen::MatrixXd& G, const Eigen::MatrixXd& H, const Eigen::MatrixXd& Q,
           const Eigen::MatrixXd& R, const Eigen::VectorXd& y, double alpha, double beta) {
            const uab::LinearSSM model{F, G, H, Q, R};
            return unpack(uab::ua_kalman_step(GaussianBelief(mean, cov), model, y,
                                              TemperPair(alpha, beta)));
        },
        py::arg("mean"), py::arg("cov"), py::arg("F"), py::arg("G"), py::arg("H"),
        py::arg("Q"), py::arg("R"), py::arg("y"), py::arg("alpha") = 1.0,
        py::arg("beta") = 1.0,
        "One predict/update cycle; (1, 1) is the textbook filter.");

    m.def(
        "effective_sample_size",
        [](const Eigen::VectorXd& weights) {
            return uab::effective_sample_size(DiscreteDistribution(weights));
        },
        py::arg("weights"));

    m.def(
        "systematic_resample",
        [](const Eigen::VectorXd& states, const Eigen::VectorXd& weights, double u) {
            const double n = static_cast<double>(states.size());
            const uab::ParticleSet p{states, DiscreteDistribution(weights), n / 2.0};
            const auto out = uab::systematic_resample(p, u);
            return std::make_pair(out.states, out.weights.weights());
        },
        py::arg("states"), py::arg("weights"), py::arg("u"),
        "Low-variance resampling from the single uniform draw u.");

    m.def(
        "ua_pf_step",
        [](const Eigen::VectorXd& states, const Eigen::VectorXd& weights,
           const std::function<double(double, int)>& transition,
           const std::function<double(double)>& measurement, double process_var,
           double meas_var, double y, int k, const Eigen::VectorXd& noise, double u,
           double alpha, double beta, std::optional<double> ess_threshold) {
            uab::NonlinearSSM model;
            model.transition = transition;
            model.measurement = measurement;
            model.process_var = process_var;
            model.meas_var = meas_var;
            const double threshold =
                ess_threshold.value_or(static_cast<double>(states.size()) / 2.0);
            const uab::ParticleSet p{states, DiscreteDistribution(weights), threshold};
            const auto out =
                uab::ua_pf_step(p, model, y, TemperPair(alpha, beta), k, noise, u);
            return std::make_pair(out.states, out.weights.weights());
        },
        py::arg("states"), py::arg("weights"), py::arg("transition"), py::arg("measurement"),
        py::arg("process_var"), py::arg("meas_var"), py::arg("y"), py::arg("k"),
        py::arg("noise"), py::arg("u"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
        py::arg("ess_threshold") = std::nullopt,
        "Propagate with the given noise, reweight by prior^beta * lik^alpha, "
        "resample below the threshold.");

    m.def(
        "rtamse",
        [](const Eigen::MatrixXd& estimates, const Eigen::MatrixXd& truth) {
            std::vector<Eigen::VectorXd> est, tru;
            est.reserve(static_cast<std::size_t>(estimates.rows()));
            tru.reserve(static_cast<std::size_t>(truth.rows()));
            for (Eigen::Index i = 0; i < estimates.rows(); ++i) {
                est.push_back(estimates.row(i).transpose());
            }
            for (Eigen::Index i = 0; i < truth.rows(); ++i) {
                tru.push_back(truth.row(i).transpose());
            }
            return uab::rtamse(est, tru);
        },
        py::arg("estimates"), py::arg("truth"),
        "Rooted time-averaged squared error; rows are steps.");

    // --- classifier -----------------------------------------------------

    py::class_<uab::GaussianNBModel>(m, "GaussianNB",
                                     "Gaussian naive Bayes with tunable exponents.")
        .def("predict_lambda",
             [](const uab::GaussianNBModel& model, const Eigen::VectorXd& x, double lam) {
                 return uab::predict_lambda(model, x, lam);
             },
             py::arg("x"), py::arg("lam"),
             "argmax of (1 - lam) * log prior + lam * log likelihood.")
        .def("predict_ab",
             [](const uab::GaussianNBModel& model, const Eigen::VectorXd& x, double alpha,
                double beta) {
                 return uab::predict_ab(model, x, TemperPair(alpha, beta));
             },
             py::arg("x"), py::arg("alpha"), py::arg("beta"),
             "Exponent form; only the ratio alpha/(alpha + beta) matters.")
        .def("error_rate",
             [](const uab::GaussianNBModel& model, const Eigen::MatrixXd& features,
                const Eigen::VectorXi& labels, double lam) {
                 return uab::misclassification_rate(model, {features, labels}, lam);
             },
             py::arg("features"), py::arg("labels"), py::arg("lam"));

    m.def(
        "train_gaussian_nb",
        [](const Eigen::MatrixXd& features, const Eigen::VectorXi& labels) {
            return uab::train_gaussian({features, labels});
        },
        py::arg("features"), py::arg("labels"),
        "Per-class maximum-likelihood means and floored variances.");

    // --- tuning ---------------------------------------------------------

    m.def(
        "grid_search",
        [](const uab::LossFunction& loss, const Eigen::VectorXd& lower,
           const Eigen::VectorXd& upper, double step) {
            return tuning_dict(uab::grid_search(loss, uab::SearchDomain(lower, upper), step));
        },
        py::arg("loss"), py::arg("lower"), py::arg("upper"), py::arg("step"),
        "Exhaustive scan plus the conventional-inference anchor.");

    m.def(
        "surrogate_minimize",
        [](const uab::LossFunction& loss, const Eigen::VectorXd& lower,
           const Eigen::VectorXd& upper, int budget, std::uint64_t seed,
           const Eigen::VectorXd& start) {
            return tuning_dict(uab::rbf_surrogate_optimize(
                loss, uab::SearchDomain(lower, upper), budget, seed, start));
        },
        py::arg("loss"), py::arg("lower"), py::arg("upper"), py::arg("budget"),
        py::arg("seed"), py::arg("start"),
        "Derivative-free search; the result never falls behind the start point.");

    // --- experiment one-shots -------------------------------------------

    m.def(
        "check_scaling_properties",
        [](std::uint64_t seed, int instances) {
            return uab::check_scaling_properties(seed, instances).all_passed();
        },
        py::arg("seed"), py::arg("instances") = 200,
        "Entropy ordering, sign pattern, divergence shape, and improvement "
        "laws on random distributions.");

    m.def(
        "pf_error_table",
        [](std::uint64_t seed, int episodes, int horizon, const std::vector<int>& counts,
           const std::vector<double>& alphas) {
            uab::ScenarioConfig cfg;
            cfg.seed = seed;
            cfg.episodes = episodes;
            cfg.horizon = horizon;
            py::list out;
            for (const auto& cell : uab::pf_rtamse_table(cfg, counts, alphas, 1)) {
                py::dict row;
                row["particles"] = cell.particles;
                row["alpha"] = cell.alpha;
                row["rtamse"] = cell.mean_rtamse;
                row["completed"] = cell.completed_episodes;
                row["depleted"] = cell.depleted_episodes;
                out.append(row);
            }
            return out;
        },
        py::arg("seed"), py::arg("episodes"), py::arg("horizon"),
        py::arg("particle_counts"), py::arg("alphas"),
        "Paired-episode tracking error under the misspecified measurement map.");

    m.def(
        "imm_tuning",
        [](std::uint64_t seed, int episodes, int horizon, bool incomplete, double tau,
           double grid_step) {
            uab::ScenarioConfig cfg;
            cfg.seed = seed;
            cfg.episodes = episodes;
            cfg.horizon = horizon;
            cfg.incomplete_model_set = incomplete;
            const auto res = uab::imm_tuning_experiment(cfg, tau, grid_step, 1);
            py::dict out;
            out["best_point"] = res.tuned.best_point;
            out["baseline_rtamse"] = res.baseline_rtamse;
            out["tuned_rtamse"] = res.tuned_rtamse;
            out["strict_improvement"] = res.strict_improvement;
            return out;
        },
        py::arg("seed"), py::arg("episodes"), py::arg("horizon"),
        py::arg("incomplete") = false, py::arg("tau") = 3.0, py::arg("grid_step") = 0.1,
        "Grid-tunes the exponent pair on the jump-linear scenario against "
        "the (1, 1) anchor.");

    m.def(
        "classifier_tuning",
        [](std::uint64_t seed, bool prior_corruption, double lambda_step, int budget) {
            uab::ScenarioConfig cfg;
            cfg.seed = seed;
            cfg.prior_corruption = prior_corruption;
            const auto res = uab::classifier_experiment(cfg, lambda_step, budget);
            py::dict out;
            out["lambda_star"] = res.lambda_star;
            out["accuracy_star"] = res.accuracy_star;
            out["accuracy_at_half"] = res.accuracy_at_half;
            return out;
        },
        py::arg("seed"), py::arg("prior_corruption") = false,
        py::arg("lambda_step") = 0.01, py::arg("budget") = 60,
        "Surrogate-tunes the log-opinion weight on a seeded synthetic corpus.");

    m.attr("__version__") = "0.1.0";
}
