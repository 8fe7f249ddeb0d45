#include "uab/tuning.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "uab/random.hpp"

namespace uab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double recorded_value(double raw) { return std::isfinite(raw) ? raw : kInf; }

void update_best(TuningResult& result, const Evaluation& eval) {
    if (eval.value < result.best_value) {
        result.best_value = eval.value;
        result.best_point = eval.point;
    }
}

}  // namespace

SearchDomain::SearchDomain(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) {
        throw std::invalid_argument("SearchDomain: bound dimensions differ");
    }
    if (lower.size() < 1 || lower.size() > 2) {
        throw std::invalid_argument("SearchDomain: dimension must be 1 or 2");
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
            throw std::invalid_argument("SearchDomain: bounds must be finite with lower < upper");
        }
    }
}

SearchDomain SearchDomain::box(double lo, double hi, Eigen::Index dim) {
    return SearchDomain(Eigen::VectorXd::Constant(dim, lo),
                        Eigen::VectorXd::Constant(dim, hi));
}

bool SearchDomain::contains(const Eigen::VectorXd& point) const {
    if (point.size() != dimension()) return false;
    return (point.array() >= lower.array()).all() && (point.array() <= upper.array()).all();
}

std::vector<Eigen::VectorXd> default_anchors(const SearchDomain& domain) {
    const double value = domain.dimension() == 1 ? 0.5 : 1.0;
    Eigen::VectorXd anchor = Eigen::VectorXd::Constant(domain.dimension(), value);
    if (domain.contains(anchor)) return {anchor};
    return {};
}

TuningResult grid_search(const LossFunction& loss, const SearchDomain& domain, double step,
                         const std::vector<Eigen::VectorXd>& anchors) {
    if (!(step > 0.0)) throw std::invalid_argument("grid_search: step must be > 0");
    for (const auto& anchor : anchors) {
        if (!domain.contains(anchor)) {
            throw std::invalid_argument("grid_search: anchor outside the domain");
        }
    }

    std::vector<Eigen::VectorXd> axes;
    for (Eigen::Index d = 0; d < domain.dimension(); ++d) {
        const auto n = static_cast<Eigen::Index>(
            std::floor((domain.upper[d] - domain.lower[d]) / step + 1e-9));
        Eigen::VectorXd axis(n + 1);
        for (Eigen::Index j = 0; j <= n; ++j) {
            axis[j] = std::min(domain.lower[d] + static_cast<double>(j) * step,
                               domain.upper[d]);
        }
        axes.push_back(std::move(axis));
    }

    TuningResult result;
    result.best_value = kInf;
    result.seed = 0;
    auto evaluate = [&](const Eigen::VectorXd& point) {
        const Evaluation eval{point, recorded_value(loss(point))};
        result.evaluations.push_back(eval);
        update_best(result, eval);
    };

    if (domain.dimension() == 1) {
        for (Eigen::Index j = 0; j < axes[0].size(); ++j) {
            evaluate(Eigen::VectorXd::Constant(1, axes[0][j]));
        }
    } else {
        Eigen::VectorXd point(2);
        for (Eigen::Index i = 0; i < axes[0].size(); ++i) {
            for (Eigen::Index j = 0; j < axes[1].size(); ++j) {
                point << axes[0][i], axes[1][j];
                evaluate(point);
            }
        }
    }
    for (const auto& anchor : anchors) evaluate(anchor);

    if (!std::isfinite(result.best_value)) {
        // keep the invariant that best_point appears in the record
        result.best_point = result.evaluations.front().point;
        result.best_value = result.evaluations.front().value;
    }
    return result;
}

TuningResult grid_search(const LossFunction& loss, const SearchDomain& domain, double step) {
    return grid_search(loss, domain, step, default_anchors(domain));
}

namespace {

/// Cubic radial-basis interpolant with a linear polynomial tail,
/// regularized so nearly-coincident samples stay solvable.
class RbfModel {
public:
    RbfModel(const std::vector<Evaluation>& evals, double fallback) {
        const auto n = static_cast<Eigen::Index>(evals.size());
        const Eigen::Index d = evals.front().point.size();
        points_.resize(n, d);
        Eigen::VectorXd values(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            points_.row(i) = evals[static_cast<std::size_t>(i)].point;
            const double v = evals[static_cast<std::size_t>(i)].value;
            values[i] = std::isfinite(v) ? v : fallback;
        }
        const Eigen::Index m = d + 1;
        Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n + m, n + m);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double r = (points_.row(i) - points_.row(j)).norm();
                system(i, j) = r * r * r;
            }
            system(i, i) += 1e-10;
            system(i, n) = 1.0;
            system(n, i) = 1.0;
            system.block(i, n + 1, 1, d) = points_.row(i);
            system.block(n + 1, i, d, 1) = points_.row(i).transpose();
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
        rhs.head(n) = values;
        const Eigen::VectorXd solution = system.colPivHouseholderQr().solve(rhs);
        weights_ = solution.head(n);
        tail_ = solution.tail(m);
    }

    double operator()(const Eigen::VectorXd& x) const {
        double value = tail_[0] + tail_.tail(x.size()).dot(x);
        for (Eigen::Index i = 0; i < points_.rows(); ++i) {
            const double r = (points_.row(i).transpose() - x).norm();
            value += weights_[i] * r * r * r;
        }
        return value;
    }

private:
    Eigen::MatrixXd points_;
    Eigen::VectorXd weights_;
    Eigen::VectorXd tail_;
};

double min_distance(const std::vector<Evaluation>& evals, const Eigen::VectorXd& x) {
    double best = kInf;
    for (const auto& e : evals) best = std::min(best, (e.point - x).norm());
    return best;
}

}  // namespace

TuningResult rbf_surrogate_optimize(const LossFunction& loss, const SearchDomain& domain,
                                    int budget, std::uint64_t seed,
                                    const Eigen::VectorXd& start) {
    if (budget < 1) throw std::invalid_argument("rbf_surrogate_optimize: budget must be >= 1");
    if (!domain.contains(start)) {
        throw std::invalid_argument("rbf_surrogate_optimize: start outside the domain");
    }
    constexpr int kUniformCandidates = 500;
    constexpr int kPerturbCandidates = 100;
    constexpr double kExploreWeights[] = {0.3, 0.5, 0.8, 0.95};

    Rng rng(seed);
    const Eigen::Index d = domain.dimension();
    const Eigen::VectorXd width = domain.upper - domain.lower;

    TuningResult result;
    result.seed = seed;
    result.best_value = kInf;
    auto evaluate = [&](const Eigen::VectorXd& point) {
        const Evaluation eval{point, recorded_value(loss(point))};
        result.evaluations.push_back(eval);
        update_best(result, eval);
    };
    evaluate(start);
    if (!std::isfinite(result.best_value)) {
        result.best_point = start;
    }

    int iteration = 0;
    while (static_cast<int>(result.evaluations.size()) < budget) {
        double worst_finite = result.best_value;
        for (const auto& e : result.evaluations) {
            if (std::isfinite(e.value)) worst_finite = std::max(worst_finite, e.value);
        }
        const double fallback =
            std::isfinite(worst_finite) ? worst_finite + std::abs(worst_finite) + 1.0 : 1.0;
        const RbfModel surrogate(result.evaluations, fallback);
        const Eigen::VectorXd incumbent =
            std::isfinite(result.best_value) ? result.best_point : start;

        // Candidate pool: uniform draws plus local perturbations of the
        // incumbent, clamped into the box.
        std::vector<Eigen::VectorXd> candidates;
        candidates.reserve(kUniformCandidates + kPerturbCandidates);
        for (int c = 0; c < kUniformCandidates; ++c) {
            Eigen::VectorXd x(d);
            for (Eigen::Index i = 0; i < d; ++i) {
                x[i] = rng.uniform(domain.lower[i], domain.upper[i]);
            }
            candidates.push_back(std::move(x));
        }
        for (int c = 0; c < kPerturbCandidates; ++c) {
            Eigen::VectorXd x(d);
            for (Eigen::Index i = 0; i < d; ++i) {
                x[i] = std::clamp(incumbent[i] + rng.normal(0.0, 0.05 * width[i]),
                                  domain.lower[i], domain.upper[i]);
            }
            candidates.push_back(std::move(x));
        }

        Eigen::VectorXd predicted(candidates.size());
        Eigen::VectorXd distance(candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            predicted[static_cast<Eigen::Index>(c)] = surrogate(candidates[c]);
            distance[static_cast<Eigen::Index>(c)] =
                min_distance(result.evaluations, candidates[c]);
        }
        const double vmin = predicted.minCoeff();
        const double vmax = predicted.maxCoeff();
        const double dmin = distance.minCoeff();
        const double dmax = distance.maxCoeff();
        const double w = kExploreWeights[iteration % 4];
        ++iteration;

        int chosen = -1;
        double best_score = kInf;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            const auto idx = static_cast<Eigen::Index>(c);
            if (distance[idx] < 1e-9) continue;  // already sampled there
            const double value_score =
                vmax > vmin ? (predicted[idx] - vmin) / (vmax - vmin) : 0.0;
            const double distance_score =
                dmax > dmin ? (dmax - distance[idx]) / (dmax - dmin) : 0.0;
            const double score = w * value_score + (1.0 - w) * distance_score;
            if (score < best_score) {
                best_score = score;
                chosen = static_cast<int>(c);
            }
        }
        if (chosen < 0) break;  // nothing new to sample
        evaluate(candidates[static_cast<std::size_t>(chosen)]);
    }
    return result;
}

LossFunction empirical_estimation_loss(
    std::function<EpisodeEstimates(const Eigen::VectorXd&)> estimator,
    std::vector<EpisodeRecord> episodes) {
    if (episodes.empty()) {
        throw std::invalid_argument("empirical_estimation_loss: no episodes");
    }
    for (const auto& ep : episodes) {
        if (ep.states.empty()) {
            throw std::invalid_argument("empirical_estimation_loss: empty episode");
        }
    }
    return [estimator = std::move(estimator),
            episodes = std::move(episodes)](const Eigen::VectorXd& omega) {
        const EpisodeEstimates estimates = estimator(omega);
        if (estimates.size() != episodes.size()) {
            throw std::invalid_argument(
                "empirical_estimation_loss: estimator returned the wrong episode count");
        }
        double total = 0.0;
        for (std::size_t e = 0; e < episodes.size(); ++e) {
            const auto& truth = episodes[e].states;
            const auto& est = estimates[e];
            if (est.size() != truth.size()) {
                throw std::invalid_argument(
                    "empirical_estimation_loss: estimate length mismatch");
            }
            double episode_sum = 0.0;
            for (std::size_t k = 0; k < truth.size(); ++k) {
                episode_sum += (truth[k] - est[k]).squaredNorm();
            }
            total += episode_sum / static_cast<double>(truth.size());
        }
        return total / static_cast<double>(episodes.size());
    };
}

void to_json(nlohmann::json& j, const Evaluation& e) {
    j = nlohmann::json{{"point", std::vector<double>(e.point.begin(), e.point.end())},
                       {"value", e.value}};
}

void from_json(const nlohmann::json& j, Evaluation& e) {
    const auto point = j.at("point").get<std::vector<double>>();
    e.point = Eigen::Map<const Eigen::VectorXd>(point.data(),
                                                static_cast<Eigen::Index>(point.size()));
    e.value = j.at("value").get<double>();
}

void to_json(nlohmann::json& j, const TuningResult& r) {
    j = nlohmann::json{
        {"best_point", std::vector<double>(r.best_point.begin(), r.best_point.end())},
        {"best_value", r.best_value},
        {"evaluations", r.evaluations},
        {"seed", r.seed}};
}

void from_json(const nlohmann::json& j, TuningResult& r) {
    const auto point = j.at("best_point").get<std::vector<double>>();
    r.best_point = Eigen::Map<const Eigen::VectorXd>(point.data(),
                                                     static_cast<Eigen::Index>(point.size()));
    r.best_value = j.at("best_value").get<double>();
    r.evaluations = j.at("evaluations").get<std::vector<Evaluation>>();
    r.seed = j.at("seed").get<std::uint64_t>();
}

void save_evaluations_csv(const TuningResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_evaluations_csv: cannot open " + path);
    const Eigen::Index d = result.best_point.size();
    out << "index";
    for (Eigen::Index i = 0; i < d; ++i) out << ",p" << i;
    out << ",value\n";
    out.precision(17);
    for (std::size_t i = 0; i < result.evaluations.size(); ++i) {
        out << i;
        for (Eigen::Index c = 0; c < d; ++c) out << ',' << result.evaluations[i].point[c];
        out << ',' << result.evaluations[i].value << '\n';
    }
}

}  // namespace uab
