#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "uab/filters.hpp"
#include "uab/simulate.hpp"
#include "uab/tuning.hpp"

namespace uab {

/// Resolved configuration for one batch run. Defaults are desk scale;
/// paper_scale switches the episode counts and grid steps to the
/// published figures' settings.
struct ExperimentSpec {
    ScenarioConfig scenario;
    std::string out_dir = "out";
    int workers = 1;
    bool paper_scale = false;

    // tuning knobs
    std::string tune_method = "grid";  // "grid" | "surrogate"
    std::string tune_target = "imm";   // "imm" | "pf" | "classify"
    double tau = 3.0;
    double grid_step = 0.1;
    double lambda_step = 0.001;
    int surrogate_budget = 60;

    // pf experiment table
    std::vector<int> particle_counts = {50, 100, 200};
    std::vector<double> alpha_grid = {0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
};

/// Applies the fields present in `j` on top of `base`; absent fields
/// keep the base values, so precedence layers (defaults, config file,
/// flags) can be stacked.
ExperimentSpec spec_from_json(const nlohmann::json& j, ExperimentSpec base);
ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);

/// Runs episodes `0..episodes-1` through `body(episode_index)` on up to
/// `workers` threads and returns the per-episode results in index
/// order, so reductions are deterministic however the threads finish.
std::vector<double> run_episodes(int episodes, int workers,
                                 const std::function<double(int)>& body);

// --- property report ----------------------------------------------------

struct PropertyReport {
    int instances = 0;
    int entropy_monotone_failures = 0;
    int gain_sign_failures = 0;
    int kl_shape_failures = 0;
    int scale_improvement_failures = 0;
    [[nodiscard]] bool all_passed() const {
        return entropy_monotone_failures == 0 && gain_sign_failures == 0 &&
               kl_shape_failures == 0 && scale_improvement_failures == 0;
    }
};

/// Checks the ordering laws of the scaling operator on seeded random
/// discrete distributions: entropy decreasing in the exponent, the
/// derivative-sign pattern around 1, the divergence's unimodal shape,
/// and the guaranteed improvement of the optimal scale.
PropertyReport check_scaling_properties(std::uint64_t seed, int instances);

nlohmann::json property_report_json(const PropertyReport& report);

/// Curve table for plotting: exponent, entropy, gain statistic, and
/// divergence from the unscaled distribution, for one seeded example.
void write_scaling_curves_csv(const std::string& path, std::uint64_t seed);

// --- particle filter experiment ----------------------------------------

struct PfCell {
    int particles = 0;
    double alpha = 1.0;
    double beta = 1.0;
    double mean_rtamse = 0.0;
    int completed_episodes = 0;
    int depleted_episodes = 0;
};

/// Mean tracking error per (particle count, alpha) under the
/// misspecified measurement map. Episodes are paired: every cell sees
/// the same measurement records and the same filter noise streams.
std::vector<PfCell> pf_rtamse_table(const ScenarioConfig& cfg,
                                    const std::vector<int>& particle_counts,
                                    const std::vector<double>& alphas, int workers);

/// Error of a single episode run at the given exponents; returns NaN
/// when the particle set depletes.
double pf_episode_rtamse(const ScenarioConfig& cfg, int episode, int particles,
                         TemperPair t);

void write_pf_table_csv(const std::string& path, const std::vector<PfCell>& table);

// --- IMM experiment -----------------------------------------------------

struct ImmExperimentResult {
    TuningResult tuned;
    double baseline_loss = 0.0;     // squared-error loss at (1, 1)
    double baseline_rtamse = 0.0;   // its root for reporting
    double tuned_rtamse = 0.0;
    bool strict_improvement = false;
};

/// Loss over the exponent pair for the jump-linear scenario: mean over
/// episodes of the time-averaged squared combined-estimate error.
/// Filter failures (invalid exponents, vanished model probabilities)
/// surface as +infinity so searches can step over them.
LossFunction imm_empirical_loss(const ScenarioConfig& cfg, int workers);

/// Grid-tunes the exponents on [0, tau]^2 with the (1,1) anchor and
/// reports the baseline comparison.
ImmExperimentResult imm_tuning_experiment(const ScenarioConfig& cfg, double tau,
                                          double grid_step, int workers);

/// Combined-estimate trajectory for one episode at the given exponents;
/// per-model probabilities are appended to each row of the CSV.
void write_imm_trajectory_csv(const std::string& path, const ScenarioConfig& cfg,
                              int episode, TemperPair t);

// --- classifier experiment ----------------------------------------------

struct ClassifierExperimentResult {
    TuningResult tuned;          // over lambda in [0, 1]
    double lambda_star = 0.5;
    double accuracy_star = 0.0;
    double accuracy_at_half = 0.0;
    std::vector<Evaluation> curve;  // accuracy versus lambda
};

/// Test-set misclassification as a function of lambda for a seeded
/// corpus; tunes lambda by surrogate search starting from 0.5.
ClassifierExperimentResult classifier_experiment(const ScenarioConfig& cfg,
                                                 double lambda_step, int budget);

/// Same experiment on an externally supplied train/test pair.
ClassifierExperimentResult classifier_experiment(const CorpusPair& corpus,
                                                 std::uint64_t seed, double lambda_step,
                                                 int budget);

void write_accuracy_curve_csv(const std::string& path,
                              const std::vector<Evaluation>& curve);

// --- trajectory export --------------------------------------------------

/// Rows: k, truth components, measurement components, estimate
/// components, and optional per-model probabilities.
void write_trajectory_csv(const std::string& path, const EpisodeRecord& record,
                          const std::vector<Eigen::VectorXd>& estimates,
                          const std::vector<Eigen::VectorXd>& model_probs = {});

}  // namespace uab
