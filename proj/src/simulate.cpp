#include "uab/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "uab/random.hpp"

namespace uab {

namespace {

void check_config(const ScenarioConfig& cfg) {
    if (cfg.horizon < 1) throw std::invalid_argument("ScenarioConfig: horizon must be >= 1");
    if (cfg.episodes < 1) throw std::invalid_argument("ScenarioConfig: episodes must be >= 1");
}

Eigen::VectorXd scalar_vec(double v) {
    Eigen::VectorXd out(1);
    out << v;
    return out;
}

/// Square root factor of a PSD covariance for noise generation; handles
/// exactly-zero blocks that a plain Cholesky would reject.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    if (m.isZero(0.0)) return Eigen::MatrixXd::Zero(m.rows(), m.cols());
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    if (ldlt.info() != Eigen::Success) {
        throw std::invalid_argument("noise covariance is not positive semi-definite");
    }
    Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    return ldlt.transpositionsP().transpose() *
           (Eigen::MatrixXd(ldlt.matrixL()) * d.asDiagonal());
}

}  // namespace

std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t episode_index) {
    // same derivation as Rng::substream so both routes agree
    return Rng::splitmix64(Rng::splitmix64(master_seed) ^
                           Rng::splitmix64(episode_index + 0x9e3779b97f4a7c15ULL));
}

ScenarioConfig for_episode(const ScenarioConfig& cfg, int episode_index) {
    if (episode_index < 0) throw std::invalid_argument("for_episode: index must be >= 0");
    ScenarioConfig out = cfg;
    out.seed = episode_seed(cfg.seed, static_cast<std::uint64_t>(episode_index));
    return out;
}

double benchmark_transition(double x, int k) {
    return x / 2.0 + 25.0 * x / (1.0 + x * x) + 8.0 * std::cos(1.2 * k);
}

double benchmark_nominal_measurement(double x) { return x * x / 20.0; }

double benchmark_true_measurement(double x) {
    return benchmark_nominal_measurement(x) + 0.5 * std::sin(x);
}

NonlinearSSM benchmark_nominal_model(const ScenarioConfig& cfg) {
    NonlinearSSM model;
    model.transition = benchmark_transition;
    model.measurement = benchmark_nominal_measurement;
    model.process_var = cfg.benchmark_process_var;
    model.meas_var = cfg.benchmark_meas_var;
    return model;
}

EpisodeRecord simulate_benchmark_nonlinear(const ScenarioConfig& cfg) {
    check_config(cfg);
    Rng rng(cfg.seed);
    EpisodeRecord record;
    record.states.reserve(cfg.horizon);
    record.measurements.reserve(cfg.horizon);
    double x = cfg.benchmark_init_mean;
    const double w_std = std::sqrt(cfg.benchmark_process_var);
    const double v_std = std::sqrt(cfg.benchmark_meas_var);
    for (int k = 1; k <= cfg.horizon; ++k) {
        x = benchmark_transition(x, k) + rng.normal(0.0, w_std);
        const double y_clean = cfg.benchmark_true_map ? benchmark_true_measurement(x)
                                                      : benchmark_nominal_measurement(x);
        record.states.push_back(scalar_vec(x));
        record.measurements.push_back(scalar_vec(y_clean + rng.normal(0.0, v_std)));
    }
    return record;
}

Eigen::VectorXd jump_linear_transition(const Eigen::VectorXd& x, double accel,
                                       double sampling_time) {
    if (x.size() != 2) throw std::invalid_argument("jump_linear_transition: state must be 2-D");
    const double t = sampling_time;
    Eigen::VectorXd next(2);
    next << x[0] + t * x[1] + t * t / 2.0 * accel, x[1] + t * accel;
    return next;
}

Eigen::VectorXd jump_linear_truth_accelerations(const ScenarioConfig& cfg) {
    if (cfg.incomplete_model_set) {
        Eigen::VectorXd a(9);
        a << 0.0, 2.5, -2.5, 5.0, -5.0, 7.5, -7.5, 10.0, -10.0;
        return a;
    }
    return jump_linear_filter_accelerations();
}

Eigen::VectorXd jump_linear_filter_accelerations() {
    Eigen::VectorXd a(3);
    a << 0.0, 10.0, -10.0;
    return a;
}

Eigen::MatrixXd uniform_offdiag_tpm(Eigen::Index num_modes, double diagonal) {
    if (num_modes < 2) throw std::invalid_argument("uniform_offdiag_tpm: need >= 2 modes");
    if (!(diagonal > 0.0 && diagonal <= 1.0)) {
        throw std::invalid_argument("uniform_offdiag_tpm: diagonal must lie in (0, 1]");
    }
    const double off = (1.0 - diagonal) / static_cast<double>(num_modes - 1);
    Eigen::MatrixXd tpm = Eigen::MatrixXd::Constant(num_modes, num_modes, off);
    tpm.diagonal().setConstant(diagonal);
    return tpm;
}

LinearSSM jump_linear_model(const ScenarioConfig& cfg) {
    if (!(cfg.sampling_time > 0.0)) {
        throw std::invalid_argument("jump_linear_model: sampling time must be > 0");
    }
    const double t = cfg.sampling_time;
    LinearSSM model;
    model.F.resize(2, 2);
    model.F << 1.0, t, 0.0, 1.0;
    model.G.resize(2, 1);
    model.G << t * t / 2.0, t;
    model.H.resize(1, 2);
    model.H << 1.0, 0.0;
    model.Q = Eigen::MatrixXd::Constant(1, 1, cfg.accel_noise_std * cfg.accel_noise_std);
    model.R = Eigen::MatrixXd::Constant(1, 1, cfg.position_noise_std * cfg.position_noise_std);
    return model;
}

ImmBank jump_linear_filter_bank(const ScenarioConfig& cfg, const GaussianBelief& init) {
    const Eigen::VectorXd inputs = jump_linear_filter_accelerations();
    std::vector<GaussianBelief> modes(static_cast<std::size_t>(inputs.size()), init);
    return ImmBank{std::move(modes), DiscreteDistribution::uniform(inputs.size()),
                   uniform_offdiag_tpm(inputs.size(), 0.8), inputs};
}

EpisodeRecord simulate_jump_linear(const ScenarioConfig& cfg) {
    check_config(cfg);
    const Eigen::VectorXd accels = jump_linear_truth_accelerations(cfg);
    const Eigen::Index nm = accels.size();
    const Eigen::MatrixXd tpm = uniform_offdiag_tpm(nm, 0.8);
    Rng rng(cfg.seed);

    EpisodeRecord record;
    record.states.reserve(cfg.horizon);
    record.measurements.reserve(cfg.horizon);
    record.modes.reserve(cfg.horizon);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    auto mode = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(nm)));
    for (int k = 1; k <= cfg.horizon; ++k) {
        const double accel = accels[mode] + rng.normal(0.0, cfg.accel_noise_std);
        x = jump_linear_transition(x, accel, cfg.sampling_time);
        record.states.push_back(x);
        record.measurements.push_back(
            scalar_vec(x[0] + rng.normal(0.0, cfg.position_noise_std)));
        record.modes.push_back(static_cast<int>(mode));

        // Markov jump for the next step.
        const double draw = rng.uniform();
        double cumulative = 0.0;
        Eigen::Index next_mode = nm - 1;
        for (Eigen::Index j = 0; j < nm; ++j) {
            cumulative += tpm(mode, j);
            if (draw < cumulative) {
                next_mode = j;
                break;
            }
        }
        mode = next_mode;
    }
    return record;
}

EpisodeRecord simulate_linear_ssm(const ScenarioConfig& cfg, const LinearSSM& model,
                                  const Eigen::VectorXd& init) {
    check_config(cfg);
    if (model.F.rows() != model.F.cols() || model.G.rows() != model.F.rows() ||
        model.H.cols() != model.F.rows()) {
        throw std::invalid_argument("simulate_linear_ssm: inconsistent model dimensions");
    }
    if (init.size() != 0 && init.size() != model.F.rows()) {
        throw std::invalid_argument("simulate_linear_ssm: init has the wrong dimension");
    }
    const Eigen::MatrixXd q_sqrt = psd_sqrt(model.Q);
    const Eigen::MatrixXd r_sqrt = psd_sqrt(model.R);
    Rng rng(cfg.seed);

    EpisodeRecord record;
    record.states.reserve(cfg.horizon);
    record.measurements.reserve(cfg.horizon);
    Eigen::VectorXd x =
        init.size() != 0 ? init : Eigen::VectorXd::Zero(model.F.rows());
    for (int k = 1; k <= cfg.horizon; ++k) {
        x = model.F * x + model.G * (q_sqrt * rng.normal_vector(model.Q.rows()));
        record.states.push_back(x);
        record.measurements.push_back(model.H * x +
                                      r_sqrt * rng.normal_vector(model.R.rows()));
    }
    return record;
}

namespace {

Eigen::VectorXd class_frequencies(int num_classes, bool descending) {
    Eigen::VectorXd probs(num_classes);
    for (int c = 0; c < num_classes; ++c) {
        probs[c] = static_cast<double>(descending ? num_classes - c : c + 1);
    }
    return probs / probs.sum();
}

LabeledDataset sample_corpus(Rng& rng, int count, const ScenarioConfig& cfg,
                             const Eigen::VectorXd& class_probs, double mean_shift) {
    LabeledDataset data;
    data.features.resize(count, cfg.corpus_features);
    data.labels.resize(count);
    for (int i = 0; i < count; ++i) {
        const double draw = rng.uniform();
        int label = cfg.corpus_classes - 1;
        double cumulative = 0.0;
        for (int c = 0; c < cfg.corpus_classes; ++c) {
            cumulative += class_probs[c];
            if (draw < cumulative) {
                label = c;
                break;
            }
        }
        data.labels[i] = label;
        const double mean =
            cfg.class_separation *
                (label - (cfg.corpus_classes - 1) / 2.0) +
            mean_shift;
        for (int f = 0; f < cfg.corpus_features; ++f) {
            data.features(i, f) = rng.normal(mean, 1.0);
        }
    }
    return data;
}

}  // namespace

CorpusPair generate_classification_corpus(const ScenarioConfig& cfg) {
    check_config(cfg);
    if (cfg.corpus_classes < 2) {
        throw std::invalid_argument("generate_classification_corpus: need >= 2 classes");
    }
    if (cfg.corpus_features < 1 || cfg.corpus_size < 2) {
        throw std::invalid_argument("generate_classification_corpus: corpus too small");
    }
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
        throw std::invalid_argument(
            "generate_classification_corpus: train fraction must lie in (0, 1)");
    }
    const int n_train =
        std::max(1, static_cast<int>(std::lround(cfg.train_fraction * cfg.corpus_size)));
    const int n_test = std::max(1, cfg.corpus_size - n_train);

    const Eigen::VectorXd train_probs = class_frequencies(cfg.corpus_classes, false);
    const Eigen::VectorXd test_probs =
        cfg.prior_corruption ? class_frequencies(cfg.corpus_classes, true) : train_probs;
    const double test_shift = cfg.likelihood_corruption ? cfg.likelihood_shift : 0.0;

    Rng train_rng = Rng::substream(cfg.seed, 0);
    Rng test_rng = Rng::substream(cfg.seed, 1);
    CorpusPair pair{sample_corpus(train_rng, n_train, cfg, train_probs, 0.0),
                    sample_corpus(test_rng, n_test, cfg, test_probs, test_shift)};

    // every class must appear in training for the model fit to succeed
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(cfg.corpus_classes);
    for (int i = 0; i < pair.train.labels.size(); ++i) counts[pair.train.labels[i]] += 1;
    if ((counts.array() < 2).any()) {
        throw std::runtime_error(
            "generate_classification_corpus: a class has fewer than two training samples; "
            "increase corpus_size");
    }
    return pair;
}

}  // namespace uab
