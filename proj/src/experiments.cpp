#include "uab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>
#include <thread>

#include "uab/distribution.hpp"
#include "uab/posterior.hpp"
#include "uab/random.hpp"

namespace uab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd scalar_vec(double v) {
    Eigen::VectorXd out(1);
    out << v;
    return out;
}

DiscreteDistribution random_distribution(Rng& rng, Eigen::Index n) {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = rng.uniform(0.05, 1.0);
    return DiscreteDistribution::normalized(w);
}

void scenario_from_json(const nlohmann::json& j, ScenarioConfig& cfg) {
    cfg.seed = j.value("seed", cfg.seed);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.episodes = j.value("episodes", cfg.episodes);
    cfg.benchmark_process_var = j.value("benchmark_process_var", cfg.benchmark_process_var);
    cfg.benchmark_meas_var = j.value("benchmark_meas_var", cfg.benchmark_meas_var);
    cfg.benchmark_init_mean = j.value("benchmark_init_mean", cfg.benchmark_init_mean);
    cfg.benchmark_init_var = j.value("benchmark_init_var", cfg.benchmark_init_var);
    cfg.benchmark_true_map = j.value("benchmark_true_map", cfg.benchmark_true_map);
    cfg.sampling_time = j.value("sampling_time", cfg.sampling_time);
    cfg.accel_noise_std = j.value("accel_noise_std", cfg.accel_noise_std);
    cfg.position_noise_std = j.value("position_noise_std", cfg.position_noise_std);
    cfg.incomplete_model_set = j.value("incomplete_model_set", cfg.incomplete_model_set);
    cfg.corpus_classes = j.value("corpus_classes", cfg.corpus_classes);
    cfg.corpus_features = j.value("corpus_features", cfg.corpus_features);
    cfg.corpus_size = j.value("corpus_size", cfg.corpus_size);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    cfg.class_separation = j.value("class_separation", cfg.class_separation);
    cfg.prior_corruption = j.value("prior_corruption", cfg.prior_corruption);
    cfg.likelihood_corruption = j.value("likelihood_corruption", cfg.likelihood_corruption);
    cfg.likelihood_shift = j.value("likelihood_shift", cfg.likelihood_shift);
}

nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
    return nlohmann::json{{"seed", cfg.seed},
                          {"horizon", cfg.horizon},
                          {"episodes", cfg.episodes},
                          {"benchmark_process_var", cfg.benchmark_process_var},
                          {"benchmark_meas_var", cfg.benchmark_meas_var},
                          {"benchmark_init_mean", cfg.benchmark_init_mean},
                          {"benchmark_init_var", cfg.benchmark_init_var},
                          {"benchmark_true_map", cfg.benchmark_true_map},
                          {"sampling_time", cfg.sampling_time},
                          {"accel_noise_std", cfg.accel_noise_std},
                          {"position_noise_std", cfg.position_noise_std},
                          {"incomplete_model_set", cfg.incomplete_model_set},
                          {"corpus_classes", cfg.corpus_classes},
                          {"corpus_features", cfg.corpus_features},
                          {"corpus_size", cfg.corpus_size},
                          {"train_fraction", cfg.train_fraction},
                          {"class_separation", cfg.class_separation},
                          {"prior_corruption", cfg.prior_corruption},
                          {"likelihood_corruption", cfg.likelihood_corruption},
                          {"likelihood_shift", cfg.likelihood_shift}};
}

}  // namespace

ExperimentSpec spec_from_json(const nlohmann::json& j) {
    return spec_from_json(j, ExperimentSpec{});
}

ExperimentSpec spec_from_json(const nlohmann::json& j, ExperimentSpec base) {
    ExperimentSpec spec = std::move(base);
    if (j.contains("scenario")) scenario_from_json(j.at("scenario"), spec.scenario);
    spec.out_dir = j.value("out_dir", spec.out_dir);
    spec.workers = j.value("workers", spec.workers);
    spec.paper_scale = j.value("paper_scale", spec.paper_scale);
    spec.tune_method = j.value("tune_method", spec.tune_method);
    spec.tune_target = j.value("tune_target", spec.tune_target);
    spec.tau = j.value("tau", spec.tau);
    spec.grid_step = j.value("grid_step", spec.grid_step);
    spec.lambda_step = j.value("lambda_step", spec.lambda_step);
    spec.surrogate_budget = j.value("surrogate_budget", spec.surrogate_budget);
    spec.particle_counts = j.value("particle_counts", spec.particle_counts);
    spec.alpha_grid = j.value("alpha_grid", spec.alpha_grid);
    if (spec.workers < 1) throw std::invalid_argument("spec: workers must be >= 1");
    return spec;
}

nlohmann::json spec_to_json(const ExperimentSpec& spec) {
    return nlohmann::json{{"scenario", scenario_to_json(spec.scenario)},
                          {"out_dir", spec.out_dir},
                          {"workers", spec.workers},
                          {"paper_scale", spec.paper_scale},
                          {"tune_method", spec.tune_method},
                          {"tune_target", spec.tune_target},
                          {"tau", spec.tau},
                          {"grid_step", spec.grid_step},
                          {"lambda_step", spec.lambda_step},
                          {"surrogate_budget", spec.surrogate_budget},
                          {"particle_counts", spec.particle_counts},
                          {"alpha_grid", spec.alpha_grid}};
}

std::vector<double> run_episodes(int episodes, int workers,
                                 const std::function<double(int)>& body) {
    if (episodes < 1) throw std::invalid_argument("run_episodes: episodes must be >= 1");
    if (workers < 1) throw std::invalid_argument("run_episodes: workers must be >= 1");
    std::vector<double> results(static_cast<std::size_t>(episodes), kNaN);
    const int used = std::min(workers, episodes);
    if (used == 1) {
        for (int e = 0; e < episodes; ++e) results[static_cast<std::size_t>(e)] = body(e);
        return results;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(used));
    for (int w = 0; w < used; ++w) {
        pool.emplace_back([&, w]() {
            for (int e = w; e < episodes; e += used) {
                results[static_cast<std::size_t>(e)] = body(e);
            }
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

PropertyReport check_scaling_properties(std::uint64_t seed, int instances) {
    PropertyReport report;
    report.instances = instances;
    Rng rng(seed);
    for (int trial = 0; trial < instances; ++trial) {
        const auto h = random_distribution(rng, 50);
        const double base_entropy = entropy(h);

        bool entropy_ok = true;
        bool sign_ok = true;
        bool kl_ok = true;
        double previous_entropy = kInf;
        std::vector<double> alphas;
        std::vector<double> kls;
        for (int i = 1; i <= 50; ++i) {
            const double alpha = static_cast<double>(i) / 10.0;
            const auto scaled = alpha_scale(h, alpha);
            const double ent = entropy(scaled);
            if (!(ent < previous_entropy)) entropy_ok = false;
            previous_entropy = ent;

            const double diff = ent - base_entropy;
            if (alpha < 1.0 && !(diff > 0.0)) sign_ok = false;
            if (alpha == 1.0 && diff != 0.0) sign_ok = false;
            if (alpha > 1.0 && !(diff < 0.0)) sign_ok = false;

            alphas.push_back(alpha);
            kls.push_back(kl_divergence(h, scaled));
        }
        for (std::size_t i = 1; i < kls.size(); ++i) {
            if (alphas[i] <= 1.0 && !(kls[i] <= kls[i - 1] + 1e-14)) kl_ok = false;
            if (alphas[i - 1] >= 1.0 && !(kls[i] >= kls[i - 1] - 1e-14)) kl_ok = false;
        }
        for (std::size_t i = 1; i + 1 < kls.size(); ++i) {
            if (kls[i] > (kls[i - 1] + kls[i + 1]) / 2.0 + 1e-10) kl_ok = false;
        }

        if (!entropy_ok) ++report.entropy_monotone_failures;
        if (!sign_ok) ++report.gain_sign_failures;
        if (!kl_ok) ++report.kl_shape_failures;

        // scaled-for-closeness guarantee on an independent pair
        const auto h0 = random_distribution(rng, 50);
        const auto target = random_distribution(rng, 50);
        if (std::abs(scaling_gain(h0, target)) > 0.01) {
            const auto search = best_scale(h0, target);
            if (!(search.kl_star < kl_divergence(h0, target) - 1e-9)) {
                ++report.scale_improvement_failures;
            }
        }
    }
    return report;
}

nlohmann::json property_report_json(const PropertyReport& report) {
    return nlohmann::json{
        {"instances", report.instances},
        {"entropy_monotone_failures", report.entropy_monotone_failures},
        {"gain_sign_failures", report.gain_sign_failures},
        {"kl_shape_failures", report.kl_shape_failures},
        {"scale_improvement_failures", report.scale_improvement_failures},
        {"all_passed", report.all_passed()}};
}

void write_scaling_curves_csv(const std::string& path, std::uint64_t seed) {
    Rng rng(seed);
    const auto h = random_distribution(rng, 50);
    const double base_entropy = entropy(h);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_scaling_curves_csv: cannot open " + path);
    out.precision(17);
    out << "alpha,entropy,entropy_diff,kl_from_original\n";
    for (int i = 1; i <= 50; ++i) {
        const double alpha = static_cast<double>(i) / 10.0;
        const auto scaled = alpha_scale(h, alpha);
        out << alpha << ',' << entropy(scaled) << ',' << entropy(scaled) - base_entropy
            << ',' << kl_divergence(h, scaled) << '\n';
    }
}

double pf_episode_rtamse(const ScenarioConfig& cfg, int episode, int particles,
                         TemperPair t) {
    const ScenarioConfig ep_cfg = for_episode(cfg, episode);
    const EpisodeRecord record = simulate_benchmark_nonlinear(ep_cfg);
    const NonlinearSSM model = benchmark_nominal_model(cfg);

    // filter randomness: an independent substream of the episode seed,
    // shared across all exponent settings for paired comparisons
    Rng filter_rng = Rng::substream(ep_cfg.seed, 1);
    ParticleSet p{filter_rng.normal_vector(particles, cfg.benchmark_init_mean,
                                           std::sqrt(cfg.benchmark_init_var)),
                  DiscreteDistribution::uniform(particles),
                  static_cast<double>(particles) / 2.0};
    double sum_sq = 0.0;
    try {
        for (int k = 1; k <= cfg.horizon; ++k) {
            p = ua_pf_step(p, model, record.measurements[static_cast<std::size_t>(k - 1)][0],
                           t, k, filter_rng);
            const double err = p.mean() - record.states[static_cast<std::size_t>(k - 1)][0];
            sum_sq += err * err;
        }
    } catch (const std::runtime_error&) {
        return kNaN;  // particle depletion: the filter diverged
    }
    return std::sqrt(sum_sq / static_cast<double>(cfg.horizon));
}

std::vector<PfCell> pf_rtamse_table(const ScenarioConfig& cfg,
                                    const std::vector<int>& particle_counts,
                                    const std::vector<double>& alphas, int workers) {
    std::vector<PfCell> table;
    for (const int n : particle_counts) {
        for (const double alpha : alphas) {
            const TemperPair t(alpha, 1.0);
            const auto errors = run_episodes(cfg.episodes, workers, [&](int episode) {
                return pf_episode_rtamse(cfg, episode, n, t);
            });
            PfCell cell;
            cell.particles = n;
            cell.alpha = alpha;
            double sum = 0.0;
            for (const double e : errors) {
                if (std::isnan(e)) {
                    ++cell.depleted_episodes;
                } else {
                    sum += e;
                    ++cell.completed_episodes;
                }
            }
            cell.mean_rtamse =
                cell.completed_episodes > 0 ? sum / cell.completed_episodes : kNaN;
            table.push_back(cell);
        }
    }
    return table;
}

void write_pf_table_csv(const std::string& path, const std::vector<PfCell>& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_pf_table_csv: cannot open " + path);
    out.precision(17);
    out << "particles,alpha,beta,mean_rtamse,completed_episodes,depleted_episodes\n";
    for (const auto& cell : table) {
        out << cell.particles << ',' << cell.alpha << ',' << cell.beta << ','
            << cell.mean_rtamse << ',' << cell.completed_episodes << ','
            << cell.depleted_episodes << '\n';
    }
}

namespace {

GaussianBelief imm_initial_belief() {
    return GaussianBelief(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2) * 100.0);
}

double imm_episode_loss(const EpisodeRecord& record, const ScenarioConfig& cfg,
                        TemperPair t) {
    const LinearSSM model = jump_linear_model(cfg);
    ImmBank bank = jump_linear_filter_bank(cfg, imm_initial_belief());
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < record.states.size(); ++k) {
        bank = ua_imm_step(bank, model, record.measurements[k], t);
        sum_sq += (imm_combined(bank).mean() - record.states[k]).squaredNorm();
    }
    return sum_sq / static_cast<double>(record.states.size());
}

}  // namespace

LossFunction imm_empirical_loss(const ScenarioConfig& cfg, int workers) {
    auto records = std::make_shared<std::vector<EpisodeRecord>>();
    records->reserve(static_cast<std::size_t>(cfg.episodes));
    for (int e = 0; e < cfg.episodes; ++e) {
        records->push_back(simulate_jump_linear(for_episode(cfg, e)));
    }
    return [records, cfg, workers](const Eigen::VectorXd& omega) {
        if (omega.size() != 2) {
            throw std::invalid_argument("imm loss expects a 2-dimensional point");
        }
        const auto losses = run_episodes(cfg.episodes, workers, [&](int episode) {
            try {
                return imm_episode_loss((*records)[static_cast<std::size_t>(episode)], cfg,
                                        TemperPair(omega[0], omega[1]));
            } catch (const std::exception&) {
                return kInf;  // invalid exponents or vanished model probabilities
            }
        });
        double total = 0.0;
        for (const double l : losses) total += l;
        return total / static_cast<double>(losses.size());
    };
}

ImmExperimentResult imm_tuning_experiment(const ScenarioConfig& cfg, double tau,
                                          double grid_step, int workers) {
    const LossFunction loss = imm_empirical_loss(cfg, workers);
    ImmExperimentResult result;
    Eigen::VectorXd anchor(2);
    anchor << 1.0, 1.0;
    result.baseline_loss = loss(anchor);
    result.baseline_rtamse = std::sqrt(result.baseline_loss);
    result.tuned = grid_search(loss, SearchDomain::box(0.0, tau, 2), grid_step);
    result.tuned.seed = cfg.seed;
    result.tuned_rtamse = std::sqrt(result.tuned.best_value);
    result.strict_improvement = result.tuned.best_value < result.baseline_loss;
    return result;
}

void write_imm_trajectory_csv(const std::string& path, const ScenarioConfig& cfg,
                              int episode, TemperPair t) {
    const EpisodeRecord record = simulate_jump_linear(for_episode(cfg, episode));
    const LinearSSM model = jump_linear_model(cfg);
    ImmBank bank = jump_linear_filter_bank(cfg, imm_initial_belief());
    std::vector<Eigen::VectorXd> estimates;
    std::vector<Eigen::VectorXd> probs;
    for (std::size_t k = 0; k < record.states.size(); ++k) {
        bank = ua_imm_step(bank, model, record.measurements[k], t);
        estimates.push_back(imm_combined(bank).mean());
        probs.push_back(bank.model_probs.weights());
    }
    write_trajectory_csv(path, record, estimates, probs);
}

ClassifierExperimentResult classifier_experiment(const ScenarioConfig& cfg,
                                                 double lambda_step, int budget) {
    return classifier_experiment(generate_classification_corpus(cfg), cfg.seed, lambda_step,
                                 budget);
}

ClassifierExperimentResult classifier_experiment(const CorpusPair& corpus,
                                                 std::uint64_t seed, double lambda_step,
                                                 int budget) {
    const GaussianNBModel model = train_gaussian(corpus.train);
    const LossFunction loss = [&](const Eigen::VectorXd& lambda) {
        return misclassification_rate(model, corpus.test, lambda[0]);
    };

    ClassifierExperimentResult result;
    const auto steps = static_cast<int>(std::lround(1.0 / lambda_step));
    for (int i = 0; i <= steps; ++i) {
        const double lambda = std::min(static_cast<double>(i) * lambda_step, 1.0);
        result.curve.push_back({scalar_vec(lambda), 1.0 - loss(scalar_vec(lambda))});
    }
    result.tuned = rbf_surrogate_optimize(loss, SearchDomain::box(0.0, 1.0, 1), budget,
                                          seed, scalar_vec(0.5));
    result.lambda_star = result.tuned.best_point[0];
    result.accuracy_star = 1.0 - result.tuned.best_value;
    result.accuracy_at_half = 1.0 - loss(scalar_vec(0.5));
    return result;
}

void write_accuracy_curve_csv(const std::string& path,
                              const std::vector<Evaluation>& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_accuracy_curve_csv: cannot open " + path);
    out.precision(17);
    out << "lambda,accuracy\n";
    for (const auto& point : curve) out << point.point[0] << ',' << point.value << '\n';
}

void write_trajectory_csv(const std::string& path, const EpisodeRecord& record,
                          const std::vector<Eigen::VectorXd>& estimates,
                          const std::vector<Eigen::VectorXd>& model_probs) {
    if (estimates.size() != record.states.size()) {
        throw std::invalid_argument("write_trajectory_csv: estimate count mismatch");
    }
    if (!model_probs.empty() && model_probs.size() != record.states.size()) {
        throw std::invalid_argument("write_trajectory_csv: probability count mismatch");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
    out.precision(17);

    out << "k";
    for (Eigen::Index i = 0; i < record.states.front().size(); ++i) out << ",truth_" << i;
    for (Eigen::Index i = 0; i < record.measurements.front().size(); ++i) out << ",y_" << i;
    for (Eigen::Index i = 0; i < estimates.front().size(); ++i) out << ",estimate_" << i;
    if (!model_probs.empty()) {
        for (Eigen::Index i = 0; i < model_probs.front().size(); ++i) out << ",mu_" << i;
    }
    out << '\n';

    for (std::size_t k = 0; k < record.states.size(); ++k) {
        out << (k + 1);
        for (Eigen::Index i = 0; i < record.states[k].size(); ++i) {
            out << ',' << record.states[k][i];
        }
        for (Eigen::Index i = 0; i < record.measurements[k].size(); ++i) {
            out << ',' << record.measurements[k][i];
        }
        for (Eigen::Index i = 0; i < estimates[k].size(); ++i) {
            out << ',' << estimates[k][i];
        }
        if (!model_probs.empty()) {
            for (Eigen::Index i = 0; i < model_probs[k].size(); ++i) {
                out << ',' << model_probs[k][i];
            }
        }
        out << '\n';
    }
}

}  // namespace uab
