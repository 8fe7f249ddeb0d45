#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "uab/classify.hpp"
#include "uab/filters.hpp"

namespace uab {

/// Knobs for the synthetic-data generators. Every generator reads only
/// the fields relevant to it; unrelated fields are ignored.
struct ScenarioConfig {
    std::uint64_t seed = 0;
    int horizon = 100;
    int episodes = 1;

    // 1-D nonlinear benchmark.
    double benchmark_process_var = 10.0;
    double benchmark_meas_var = 1.0;
    double benchmark_init_mean = 0.0;
    double benchmark_init_var = 1.0;
    /// When set the generated measurements include the extra sinusoidal
    /// term the filter's nominal model omits.
    bool benchmark_true_map = true;

    // Jump-linear maneuvering target.
    double sampling_time = 1.0;
    double accel_noise_std = 1.0;
    double position_noise_std = 5.0;
    /// When set the simulated target draws accelerations from the rich
    /// nine-value set while the filter bank keeps only {0, +10, -10}.
    bool incomplete_model_set = false;

    // Classification corpora.
    int corpus_classes = 2;
    int corpus_features = 4;
    int corpus_size = 500;
    double train_fraction = 0.8;
    double class_separation = 2.0;
    bool prior_corruption = false;
    bool likelihood_corruption = false;
    double likelihood_shift = 0.5;
};

/// One simulated episode: states and measurements indexed k = 1..horizon.
/// `modes` carries the acting mode index per step for the jump-linear
/// generator and stays empty elsewhere.
struct EpisodeRecord {
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> measurements;
    std::vector<int> modes;
};

/// Seed for one Monte-Carlo episode, derived from the master seed so
/// episodes can be generated independently and in any order.
std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t episode_index);

/// Copy of cfg whose seed is replaced by the derived episode seed.
ScenarioConfig for_episode(const ScenarioConfig& cfg, int episode_index);

// --- 1-D nonlinear benchmark ------------------------------------------

double benchmark_transition(double x, int k);
double benchmark_nominal_measurement(double x);
double benchmark_true_measurement(double x);

/// The model handed to the filter: same transition, but the nominal
/// measurement map without the sinusoidal term.
NonlinearSSM benchmark_nominal_model(const ScenarioConfig& cfg);

EpisodeRecord simulate_benchmark_nonlinear(const ScenarioConfig& cfg);

// --- Jump-linear maneuvering target -----------------------------------

/// One noiseless constant-acceleration step of the double integrator.
Eigen::VectorXd jump_linear_transition(const Eigen::VectorXd& x, double accel,
                                       double sampling_time);

/// Acceleration values the simulated target may take.
Eigen::VectorXd jump_linear_truth_accelerations(const ScenarioConfig& cfg);

/// Acceleration values the filter bank knows about: {0, +10, -10}.
Eigen::VectorXd jump_linear_filter_accelerations();

/// Row-stochastic matrix with the given diagonal and the remaining mass
/// spread evenly over the off-diagonal entries.
Eigen::MatrixXd uniform_offdiag_tpm(Eigen::Index num_modes, double diagonal);

/// State-space matrices shared by the truth rollout and the filter.
LinearSSM jump_linear_model(const ScenarioConfig& cfg);

/// Three-mode filter bank with uniform initial model probabilities.
ImmBank jump_linear_filter_bank(const ScenarioConfig& cfg,
                                const GaussianBelief& init);

EpisodeRecord simulate_jump_linear(const ScenarioConfig& cfg);

// --- Generic linear-Gaussian rollout -----------------------------------

/// `init` defaults to the all-zero state when left empty.
EpisodeRecord simulate_linear_ssm(const ScenarioConfig& cfg, const LinearSSM& model,
                                  const Eigen::VectorXd& init = Eigen::VectorXd());

// --- Classification corpora --------------------------------------------

struct CorpusPair {
    LabeledDataset train;
    LabeledDataset test;
};

/// Seeded Gaussian class-conditional corpus with an 80/20 train/test
/// split. The corruption switches shift the test distribution away from
/// the training one: prior corruption reverses the class frequencies,
/// likelihood corruption shifts every class mean by `likelihood_shift`.
CorpusPair generate_classification_corpus(const ScenarioConfig& cfg);

}  // namespace uab
