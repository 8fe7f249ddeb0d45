#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "uab/simulate.hpp"

namespace uab {

/// Box search domain, one- or two-dimensional.
struct SearchDomain {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    SearchDomain(Eigen::VectorXd lo, Eigen::VectorXd hi);
    /// Convenience for the common symmetric boxes [lo, hi]^dim.
    static SearchDomain box(double lo, double hi, Eigen::Index dim);

    [[nodiscard]] Eigen::Index dimension() const { return lower.size(); }
    [[nodiscard]] bool contains(const Eigen::VectorXd& point) const;
};

struct Evaluation {
    Eigen::VectorXd point;
    double value;
};

struct TuningResult {
    Eigen::VectorXd best_point;
    double best_value;
    std::vector<Evaluation> evaluations;
    std::uint64_t seed;
};

using LossFunction = std::function<double(const Eigen::VectorXd&)>;

/// Anchors that are always evaluated alongside the grid when they fall
/// inside the domain: 0.5 in one dimension, (1, 1) in two.
std::vector<Eigen::VectorXd> default_anchors(const SearchDomain& domain);

/// Exhaustive evaluation of every grid node (lower + j*step per axis)
/// plus the anchors. Non-finite losses are recorded as +infinity. Ties
/// keep the earliest evaluation in scan order.
TuningResult grid_search(const LossFunction& loss, const SearchDomain& domain, double step,
                         const std::vector<Eigen::VectorXd>& anchors);
TuningResult grid_search(const LossFunction& loss, const SearchDomain& domain, double step);

/// Surrogate search: evaluates `start` first, then repeatedly fits a
/// cubic radial-basis interpolant with a linear tail through all
/// evaluated points and evaluates the candidate that best trades the
/// surrogate prediction against distance from previous evaluations.
/// Exactly `budget` evaluations are performed; the result is never
/// worse than loss(start) and never leaves the domain.
TuningResult rbf_surrogate_optimize(const LossFunction& loss, const SearchDomain& domain,
                                    int budget, std::uint64_t seed,
                                    const Eigen::VectorXd& start);

/// Estimator output: per-episode sequences of state estimates.
using EpisodeEstimates = std::vector<std::vector<Eigen::VectorXd>>;

/// Wraps an estimator and a fixed episode set into a loss over the
/// tuning parameter: the squared estimation error averaged over time
/// and episodes (the square of the per-episode error metric).
LossFunction empirical_estimation_loss(
    std::function<EpisodeEstimates(const Eigen::VectorXd&)> estimator,
    std::vector<EpisodeRecord> episodes);

void to_json(nlohmann::json& j, const Evaluation& e);
void from_json(const nlohmann::json& j, Evaluation& e);
void to_json(nlohmann::json& j, const TuningResult& r);
void from_json(const nlohmann::json& j, TuningResult& r);

/// One row per evaluation: index, point components, loss value.
void save_evaluations_csv(const TuningResult& result, const std::string& path);

}  // namespace uab
