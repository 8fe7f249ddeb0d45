#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "json.hpp"
#include "uab/distribution.hpp"
#include "uab/experiments.hpp"
#include "uab/posterior.hpp"
#include "uab/random.hpp"

namespace fs = std::filesystem;

namespace {

/// Flags shared by every subcommand; option pointers record which ones
/// were actually given so they can override the config file.
struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int workers = 1;
    int episodes = 0;
    bool paper_scale = false;

    CLI::Option* config_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* episodes_opt = nullptr;
    CLI::Option* paper_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    flags.config_opt =
        cmd->add_option("--config", flags.config_path, "JSON config file for this run");
    flags.out_opt = cmd->add_option("--out", flags.out_dir, "output directory");
    flags.seed_opt = cmd->add_option("--seed", flags.seed, "master random seed");
    flags.workers_opt =
        cmd->add_option("--workers", flags.workers, "episode-level worker threads");
    flags.episodes_opt =
        cmd->add_option("--episodes", flags.episodes, "Monte Carlo episode count");
    flags.paper_opt = cmd->add_flag("--paper-scale", flags.paper_scale,
                                    "use the published experiment sizes instead of the "
                                    "fast desk-scale defaults");
}

nlohmann::json load_config(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

/// Precedence: flags > config file > scale-dependent defaults.
uab::ExperimentSpec resolve_spec(const CommonFlags& flags, const std::string& kind) {
    const nlohmann::json file = load_config(flags.config_path);
    const bool paper = flags.paper_opt->count() > 0 ? flags.paper_scale
                                                    : file.value("paper_scale", false);

    uab::ExperimentSpec base;
    base.paper_scale = paper;
    base.scenario.episodes = paper ? 500 : 100;
    if (kind == "imm") {
        base.grid_step = paper ? 0.01 : 0.1;
    }
    if (kind == "properties") {
        base.scenario.episodes = paper ? 500 : 200;
    }

    uab::ExperimentSpec spec = uab::spec_from_json(file, std::move(base));
    if (flags.out_opt->count() > 0) spec.out_dir = flags.out_dir;
    if (flags.seed_opt->count() > 0) spec.scenario.seed = flags.seed;
    if (flags.workers_opt->count() > 0) spec.workers = flags.workers;
    if (flags.episodes_opt->count() > 0) spec.scenario.episodes = flags.episodes;
    if (flags.paper_opt->count() > 0) spec.paper_scale = flags.paper_scale;
    if (spec.workers < 1) throw std::runtime_error("--workers must be >= 1");
    return spec;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    [[nodiscard]] double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void write_json_file(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_manifest(const fs::path& out_dir, const std::string& kind,
                    const uab::ExperimentSpec& spec, double wall_ms,
                    const std::vector<std::string>& outputs) {
    write_json_file(out_dir / "manifest.json",
                    nlohmann::json{{"kind", kind},
                                   {"spec", uab::spec_to_json(spec)},
                                   {"wall_ms", wall_ms},
                                   {"outputs", outputs}});
}

fs::path prepare_out_dir(const uab::ExperimentSpec& spec) {
    const fs::path dir(spec.out_dir);
    fs::create_directories(dir);
    return dir;
}

int run_properties(const uab::ExperimentSpec& spec) {
    const Stopwatch watch;
    const fs::path out = prepare_out_dir(spec);
    const auto report =
        uab::check_scaling_properties(spec.scenario.seed, spec.scenario.episodes);
    write_json_file(out / "report.json", uab::property_report_json(report));
    uab::write_scaling_curves_csv((out / "curves.csv").string(), spec.scenario.seed);
    write_manifest(out, "properties", spec, watch.elapsed_ms(),
                   {"report.json", "curves.csv"});
    std::cout << "properties: " << report.instances << " instances, "
              << (report.all_passed() ? "all passed" : "FAILURES") << '\n';
    if (!report.all_passed()) {
        std::cerr << "property failures under seed " << spec.scenario.seed << ": "
                  << uab::property_report_json(report).dump() << '\n';
        return 1;
    }
    return 0;
}

int run_fuse(const uab::ExperimentSpec& spec, const std::vector<double>& prior,
             const std::vector<double>& likelihood, const std::vector<double>& atoms,
             double alpha, double beta, const std::vector<double>& fusion_weights) {
    const Stopwatch watch;
    const fs::path out = prepare_out_dir(spec);
    auto to_dist = [&](const std::vector<double>& w) {
        Eigen::VectorXd v =
            Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
        if (atoms.empty()) return uab::DiscreteDistribution::normalized(v);
        Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
            atoms.data(), static_cast<Eigen::Index>(atoms.size()));
        return uab::DiscreteDistribution::normalized(v, a);
    };
    const auto p = to_dist(prior);
    const auto l = to_dist(likelihood);

    nlohmann::json result;
    try {
        uab::DiscreteDistribution posterior =
            fusion_weights.empty()
                ? uab::fuse(p, l, uab::TemperPair(alpha, beta))
                : uab::fuse_with_weights(p, l,
                                         uab::FusionWeights(fusion_weights[0],
                                                            fusion_weights[1],
                                                            fusion_weights[2]));
        result["posterior_weights"] =
            std::vector<double>(posterior.weights().begin(), posterior.weights().end());
        if (posterior.has_atoms()) {
            result["atoms"] =
                std::vector<double>(posterior.atoms().begin(), posterior.atoms().end());
            result["mean"] = posterior.mean();
        }
    } catch (const uab::DegenerateMapError& e) {
        // collapse onto the weighted-MAP set: report it rather than fail
        result["degenerate"] = true;
        result["map_set"] = e.argmax_set();
        result["message"] = e.what();
    }
    write_json_file(out / "fusion.json", result);
    write_manifest(out, "fuse", spec, watch.elapsed_ms(), {"fusion.json"});
    std::cout << result.dump(2) << '\n';
    return 0;
}

int run_classify(const uab::ExperimentSpec& spec, const std::string& train_csv,
                 const std::string& test_csv) {
    const Stopwatch watch;
    const fs::path out = prepare_out_dir(spec);
    uab::ClassifierExperimentResult result;
    if (!train_csv.empty() || !test_csv.empty()) {
        if (train_csv.empty() || test_csv.empty()) {
            throw std::runtime_error("--train-csv and --test-csv must be given together");
        }
        const uab::CorpusPair corpus{uab::load_dataset_csv(train_csv),
                                     uab::load_dataset_csv(test_csv)};
        result = uab::classifier_experiment(corpus, spec.scenario.seed, spec.lambda_step,
                                            spec.surrogate_budget);
    } else {
        result = uab::classifier_experiment(spec.scenario, spec.lambda_step,
                                            spec.surrogate_budget);
    }
    uab::write_accuracy_curve_csv((out / "accuracy_curve.csv").string(), result.curve);
    uab::save_evaluations_csv(result.tuned, (out / "lambda_trace.csv").string());
    write_json_file(out / "classify_result.json",
                    nlohmann::json{{"lambda_star", result.lambda_star},
                                   {"accuracy_star", result.accuracy_star},
                                   {"accuracy_at_half", result.accuracy_at_half},
                                   {"improvement",
                                    result.accuracy_star - result.accuracy_at_half}});
    write_manifest(out, "classify", spec, watch.elapsed_ms(),
                   {"accuracy_curve.csv", "lambda_trace.csv", "classify_result.json"});
    std::cout << "classify: lambda* = " << result.lambda_star
              << ", accuracy " << result.accuracy_star << " (vs " << result.accuracy_at_half
              << " at 0.5)\n";
    return 0;
}

int run_kalman(const uab::ExperimentSpec& spec, double alpha, double beta) {
    const Stopwatch watch;
    const fs::path out = prepare_out_dir(spec);
    const uab::LinearSSM model = uab::jump_linear_model(spec.scenario);
    const uab::EpisodeRecord record =
        uab::simulate_linear_ssm(spec.scenario, model);
    uab::GaussianBelief belief(Eigen::VectorXd::Zero(2),
                               Eigen::MatrixXd::Identity(2, 2) * 100.0);
    std::vector<Eigen::VectorXd> estimates;
    estimates.reserve(record.states.size());
    for (const auto& y : record.measurements) {
        belief = uab::ua_kalman_step(belief, model, y, uab::TemperPair(alpha, beta));
        estimates.push_back(belief.mean());
    }
    const double error = uab::rtamse(estimates, record.states);
    uab::write_trajectory_csv((out / "kalman_trajectory.csv").string(), record, estimates);
    write_json_file(out / "kalman_result.json",
                    nlohmann::json{{"alpha", alpha}, {"beta", beta}, {"rtamse", error}});
    write_manifest(out, "kalman", spec, watch.elapsed_ms(),
                   {"kalman_trajectory.csv", "kalman_result.json"});
    std::cout << "kalman: rtamse " << error << " at (" << alpha << ", " << beta << ")\n";
    return 0;
}

int run_pf(const uab::ExperimentSpec& spec) {
    const Stopwatch watch;
    const fs::path out = prepare_out_dir(spec);
    const auto table = uab::pf_rtamse_table(spec.scenario, spec.particle_counts,
                                            spec.alpha_grid, spec.workers);
    uab::write_pf_table_csv((out / "pf_rtamse.csv").string(), table);
    write_manifest(out, "pf", spec, watch.elapsed_ms(), {"pf_rtamse.csv"});
    for (const auto& cell : table) {
        std::cout << "pf: N=" << cell.particles << " alpha=" << cell.alpha
                  << " mean rtamse " << cell.mean_rtamse;
        if (cell.depleted_episodes > 0) {
            std::cout << " (" << cell.depleted_episodes << " depleted episodes excluded)";
        }
        std::cout << '\n';
    }
    return 0;
}

int run_imm(const uab::ExperimentSpec& spec) {
    const Stopwatch watch;
    const fs::path out = prepare_out_dir(spec);
    const auto result = uab::imm_tuning_experiment(spec.scenario, spec.tau, spec.grid_step,
                                                   spec.workers);
    uab::save_evaluations_csv(result.tuned, (out / "imm_surface.csv").string());
    uab::write_imm_trajectory_csv(
        (out / "imm_trajectory.csv").string(), spec.scenario, 0,
        uab::TemperPair(result.tuned.best_point[0], result.tuned.best_point[1]));
    write_json_file(out / "imm_result.json",
                    nlohmann::json{{"baseline_rtamse", result.baseline_rtamse},
                                   {"tuned_rtamse", result.tuned_rtamse},
                                   {"best_alpha", result.tuned.best_point[0]},
                                   {"best_beta", result.tuned.best_point[1]},
                                   {"strict_improvement", result.strict_improvement}});
    write_manifest(out, "imm", spec, watch.elapsed_ms(),
                   {"imm_surface.csv", "imm_trajectory.csv", "imm_result.json"});
    std::cout << "imm: baseline rtamse " << result.baseline_rtamse << ", tuned "
              << result.tuned_rtamse << " at (" << result.tuned.best_point[0] << ", "
              << result.tuned.best_point[1] << ")"
              << (result.strict_improvement ? " [strict improvement]" : "") << '\n';
    return 0;
}

int run_tune(const uab::ExperimentSpec& spec) {
    const Stopwatch watch;
    const fs::path out = prepare_out_dir(spec);

    uab::LossFunction loss;
    uab::SearchDomain domain = uab::SearchDomain::box(0.0, 1.0, 1);
    Eigen::VectorXd start;
    if (spec.tune_target == "imm") {
        loss = uab::imm_empirical_loss(spec.scenario, spec.workers);
        domain = uab::SearchDomain::box(0.0, spec.tau, 2);
        start = Eigen::VectorXd::Constant(2, 1.0);
    } else if (spec.tune_target == "pf") {
        const int particles =
            spec.particle_counts[std::min<std::size_t>(1, spec.particle_counts.size() - 1)];
        const uab::ScenarioConfig scenario = spec.scenario;
        const int workers = spec.workers;
        loss = [scenario, particles, workers](const Eigen::VectorXd& point) {
            const auto errors =
                uab::run_episodes(scenario.episodes, workers, [&](int episode) {
                    const double e = uab::pf_episode_rtamse(scenario, episode, particles,
                                                            uab::TemperPair(point[0], 1.0));
                    return std::isnan(e) ? std::numeric_limits<double>::infinity() : e * e;
                });
            double total = 0.0;
            for (const double e : errors) total += e;
            return total / static_cast<double>(errors.size());
        };
        domain = uab::SearchDomain(Eigen::VectorXd::Constant(1, 0.05),
                                   Eigen::VectorXd::Constant(1, 2.0));
        start = Eigen::VectorXd::Constant(1, 1.0);
    } else if (spec.tune_target == "classify") {
        const auto corpus = uab::generate_classification_corpus(spec.scenario);
        const auto model = uab::train_gaussian(corpus.train);
        loss = [corpus, model](const Eigen::VectorXd& point) {
            return uab::misclassification_rate(model, corpus.test, point[0]);
        };
        domain = uab::SearchDomain::box(0.0, 1.0, 1);
        start = Eigen::VectorXd::Constant(1, 0.5);
    } else {
        throw std::runtime_error("unknown tune target: " + spec.tune_target);
    }

    uab::TuningResult result;
    if (spec.tune_method == "grid") {
        result = uab::grid_search(loss, domain, spec.grid_step);
        result.seed = spec.scenario.seed;
    } else if (spec.tune_method == "surrogate") {
        result = uab::rbf_surrogate_optimize(loss, domain, spec.surrogate_budget,
                                             spec.scenario.seed, start);
    } else {
        throw std::runtime_error("unknown tune method: " + spec.tune_method);
    }

    const double wall = watch.elapsed_ms();
    nlohmann::json payload = result;
    payload["target"] = spec.tune_target;
    payload["method"] = spec.tune_method;
    payload["wall_ms"] = wall;
    write_json_file(out / "tune_result.json", payload);
    uab::save_evaluations_csv(result, (out / "tune_trace.csv").string());
    write_manifest(out, "tune", spec, wall, {"tune_result.json", "tune_trace.csv"});
    std::cout << "tune(" << spec.tune_target << "/" << spec.tune_method << "): best value "
              << result.best_value << " at [" << result.best_point.transpose() << "] after "
              << result.evaluations.size() << " evaluations\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch experiments for tempered-posterior inference and filtering"};
    app.require_subcommand(1);

    CommonFlags properties_flags;
    auto* properties_cmd = app.add_subcommand(
        "properties", "verify the scaling laws on seeded populations and emit curve data");
    add_common_flags(properties_cmd, properties_flags);

    CommonFlags fuse_flags;
    std::vector<double> prior_weights;
    std::vector<double> likelihood_weights;
    std::vector<double> atom_values;
    std::vector<double> fusion_weights;
    double fuse_alpha = 1.0;
    double fuse_beta = 1.0;
    auto* fuse_cmd =
        app.add_subcommand("fuse", "fuse a discrete prior and likelihood");
    add_common_flags(fuse_cmd, fuse_flags);
    fuse_cmd->add_option("--prior", prior_weights, "prior weights")->required();
    fuse_cmd->add_option("--likelihood", likelihood_weights, "likelihood weights")
        ->required();
    fuse_cmd->add_option("--atoms", atom_values, "optional atom locations");
    fuse_cmd->add_option("--alpha", fuse_alpha, "likelihood exponent");
    fuse_cmd->add_option("--beta", fuse_beta, "prior exponent");
    fuse_cmd->add_option("--weights", fusion_weights,
                         "objective weights a1 a2 a3 (overrides --alpha/--beta)")
        ->expected(3);

    CommonFlags classify_flags;
    std::string train_csv;
    std::string test_csv;
    auto* classify_cmd = app.add_subcommand(
        "classify", "accuracy-versus-lambda curve and tuned lambda on a corpus");
    add_common_flags(classify_cmd, classify_flags);
    classify_cmd->add_option("--train-csv", train_csv, "external training dataset");
    classify_cmd->add_option("--test-csv", test_csv, "external test dataset");

    CommonFlags kalman_flags;
    double kalman_alpha = 1.0;
    double kalman_beta = 1.0;
    auto* kalman_cmd =
        app.add_subcommand("kalman", "track a linear scenario at the given exponents");
    add_common_flags(kalman_cmd, kalman_flags);
    kalman_cmd->add_option("--alpha", kalman_alpha, "measurement exponent");
    kalman_cmd->add_option("--beta", kalman_beta, "prior exponent");

    CommonFlags pf_flags;
    auto* pf_cmd = app.add_subcommand(
        "pf", "particle-filter error table over particle counts and alpha");
    add_common_flags(pf_cmd, pf_flags);

    CommonFlags imm_flags;
    auto* imm_cmd = app.add_subcommand(
        "imm", "grid-tuned multiple-model tracking on the jump-linear scenario");
    add_common_flags(imm_cmd, imm_flags);
    bool imm_incomplete = false;
    auto* imm_incomplete_opt = imm_cmd->add_flag(
        "--incomplete", imm_incomplete, "simulate the rich acceleration set the filter lacks");

    CommonFlags tune_flags;
    std::string tune_method;
    std::string tune_target;
    int tune_budget = 0;
    double tune_step = 0.0;
    auto* tune_cmd =
        app.add_subcommand("tune", "hyper-parameter search over a chosen empirical loss");
    add_common_flags(tune_cmd, tune_flags);
    auto* method_opt = tune_cmd->add_option("--method", tune_method, "grid | surrogate");
    auto* target_opt = tune_cmd->add_option("--target", tune_target, "imm | pf | classify");
    auto* budget_opt = tune_cmd->add_option("--budget", tune_budget, "surrogate budget");
    auto* step_opt = tune_cmd->add_option("--step", tune_step, "grid step");

    CLI11_PARSE(app, argc, argv);

    try {
        if (properties_cmd->parsed()) {
            return run_properties(resolve_spec(properties_flags, "properties"));
        }
        if (fuse_cmd->parsed()) {
            return run_fuse(resolve_spec(fuse_flags, "fuse"), prior_weights,
                            likelihood_weights, atom_values, fuse_alpha, fuse_beta,
                            fusion_weights);
        }
        if (classify_cmd->parsed()) {
            return run_classify(resolve_spec(classify_flags, "classify"), train_csv,
                                test_csv);
        }
        if (kalman_cmd->parsed()) {
            return run_kalman(resolve_spec(kalman_flags, "kalman"), kalman_alpha,
                              kalman_beta);
        }
        if (pf_cmd->parsed()) {
            return run_pf(resolve_spec(pf_flags, "pf"));
        }
        if (imm_cmd->parsed()) {
            uab::ExperimentSpec spec = resolve_spec(imm_flags, "imm");
            if (imm_incomplete_opt->count() > 0) {
                spec.scenario.incomplete_model_set = imm_incomplete;
            }
            return run_imm(spec);
        }
        if (tune_cmd->parsed()) {
            uab::ExperimentSpec spec = resolve_spec(tune_flags, "tune");
            if (method_opt->count() > 0) spec.tune_method = tune_method;
            if (target_opt->count() > 0) spec.tune_target = tune_target;
            if (budget_opt->count() > 0) spec.surrogate_budget = tune_budget;
            if (step_opt->count() > 0) spec.grid_step = tune_step;
            return run_tune(spec);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
