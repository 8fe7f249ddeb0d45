#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "uab/classify.hpp"
#include "uab/random.hpp"

using uab::GaussianNBModel;
using uab::LabeledDataset;
using uab::MultinomialNBModel;
using uab::TemperPair;

namespace {

LabeledDataset two_cluster_data() {
    // Two well-separated 1-D clusters; class 0 near 0, class 1 near 10.
    LabeledDataset data;
    data.features.resize(4, 1);
    data.features << 0.0, 1.0, 10.0, 11.0;
    data.labels.resize(4);
    data.labels << 0, 0, 1, 1;
    return data;
}

// Conventional naive Bayes prediction, written independently of the
// library: plain argmax of log prior + log likelihood.
Eigen::Index reference_gaussian_predict(const GaussianNBModel& m, const Eigen::VectorXd& x) {
    Eigen::Index best = 0;
    double best_score = -1e300;
    for (Eigen::Index c = 0; c < m.num_classes(); ++c) {
        double score = m.class_log_prior[c];
        for (Eigen::Index f = 0; f < m.num_features(); ++f) {
            const double var = m.variances(c, f);
            score += -0.5 * std::log(2.0 * M_PI * var) -
                     (x[f] - m.means(c, f)) * (x[f] - m.means(c, f)) / (2.0 * var);
        }
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return best;
}

Eigen::Index reference_multinomial_predict(const MultinomialNBModel& m, const Eigen::VectorXd& x) {
    Eigen::Index best = 0;
    double best_score = -1e300;
    for (Eigen::Index c = 0; c < m.num_classes(); ++c) {
        const double score = m.class_log_prior[c] + m.feature_log_prob.row(c).dot(x);
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return best;
}

MultinomialNBModel random_multinomial_model(uab::Rng& rng, Eigen::Index r, Eigen::Index v) {
    MultinomialNBModel m;
    Eigen::VectorXd prior(r);
    for (Eigen::Index c = 0; c < r; ++c) prior[c] = rng.uniform(0.2, 1.0);
    m.class_log_prior = (prior / prior.sum()).array().log();
    m.feature_log_prob.resize(r, v);
    for (Eigen::Index c = 0; c < r; ++c) {
        Eigen::VectorXd row(v);
        for (Eigen::Index f = 0; f < v; ++f) row[f] = rng.uniform(0.05, 1.0);
        m.feature_log_prob.row(c) = (row / row.sum()).array().log().transpose();
    }
    return m;
}

}  // namespace

TEST_SUITE("classify") {

TEST_CASE("multinomial training applies add-one smoothing") {
    LabeledDataset data;
    data.features.resize(1, 2);
    data.features << 2.0, 0.0;
    data.labels.resize(1);
    data.labels << 0;
    const auto model = uab::train_multinomial(data);
    // (2+1)/(2+2) and (0+1)/(2+2)
    CHECK(std::exp(model.feature_log_prob(0, 0)) == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(std::exp(model.feature_log_prob(0, 1)) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(model.class_log_prior[0] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("multinomial training validates its input") {
    LabeledDataset gap;
    gap.features.resize(2, 2);
    gap.features << 1.0, 0.0, 0.0, 1.0;
    gap.labels.resize(2);
    gap.labels << 0, 2;  // class 1 absent
    CHECK_THROWS_AS(uab::train_multinomial(gap), std::invalid_argument);

    LabeledDataset negative;
    negative.features.resize(2, 2);
    negative.features << 1.0, -1.0, 0.0, 1.0;
    negative.labels.resize(2);
    negative.labels << 0, 1;
    CHECK_THROWS_AS(uab::train_multinomial(negative), std::invalid_argument);

    LabeledDataset no_features;
    no_features.features.resize(2, 0);
    no_features.labels.resize(2);
    no_features.labels << 0, 1;
    CHECK_THROWS_AS(uab::train_multinomial(no_features), std::invalid_argument);
}

TEST_CASE("multinomial model invariants hold after training") {
    uab::Rng rng(12);
    LabeledDataset data;
    data.features.resize(30, 5);
    data.labels.resize(30);
    for (Eigen::Index i = 0; i < 30; ++i) {
        for (Eigen::Index f = 0; f < 5; ++f) {
            data.features(i, f) = static_cast<double>(rng.below(6));
        }
        data.labels[i] = static_cast<int>(i % 3);
    }
    const auto model = uab::train_multinomial(data);
    CHECK(model.class_log_prior.array().exp().sum() == doctest::Approx(1.0).epsilon(1e-10));
    for (Eigen::Index c = 0; c < model.num_classes(); ++c) {
        CHECK(model.feature_log_prob.row(c).array().exp().sum() ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("gaussian training computes ML moments with a variance floor") {
    LabeledDataset data;
    data.features.resize(4, 1);
    data.features << 0.0, 2.0, 5.0, 5.0;
    data.labels.resize(4);
    data.labels << 0, 0, 1, 1;
    const auto model = uab::train_gaussian(data);
    CHECK(model.means(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(model.variances(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(model.means(1, 0) == doctest::Approx(5.0).epsilon(1e-13));
    // Class 1 is degenerate; its variance sits at the floor, which is
    // 1e-9 times the largest dataset-wide feature variance.
    const double dataset_var = (Eigen::Vector4d(0.0, 2.0, 5.0, 5.0).array() - 3.0).square().mean();
    CHECK(model.variances(1, 0) == doctest::Approx(1e-9 * dataset_var).epsilon(1e-10));
    CHECK(model.variances(1, 0) > 0.0);
    CHECK(std::exp(model.class_log_prior[0]) == doctest::Approx(0.5).epsilon(1e-13));

    LabeledDataset thin;
    thin.features.resize(3, 1);
    thin.features << 0.0, 1.0, 5.0;
    thin.labels.resize(3);
    thin.labels << 0, 0, 1;  // class 1 has a single instance
    CHECK_THROWS_AS(uab::train_gaussian(thin), std::invalid_argument);
}

TEST_CASE("fully degenerate data still yields positive variances") {
    LabeledDataset data;
    data.features = Eigen::MatrixXd::Constant(4, 2, 3.0);
    data.labels.resize(4);
    data.labels << 0, 0, 1, 1;
    const auto model = uab::train_gaussian(data);
    CHECK(model.variances.minCoeff() > 0.0);
}

TEST_CASE("lambda endpoints select prior-only and likelihood-only rules") {
    const auto model = uab::train_gaussian(two_cluster_data());
    Eigen::VectorXd near_one(1);
    near_one << 10.4;

    // lambda = 1: nearest cluster wins.
    CHECK(uab::predict_lambda(model, near_one, 1.0) == 1);

    // lambda = 0: class priors only. Build a skewed-prior model.
    GaussianNBModel skewed = model;
    skewed.class_log_prior << std::log(0.9), std::log(0.1);
    CHECK(uab::predict_lambda(skewed, near_one, 0.0) == 0);

    CHECK_THROWS_AS(uab::predict_lambda(model, near_one, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(uab::predict_lambda(model, near_one, 1.1), std::invalid_argument);
}

TEST_CASE("lambda one half reproduces the conventional classifier") {
    uab::Rng rng(51);
    LabeledDataset data;
    data.features.resize(60, 3);
    data.labels.resize(60);
    for (Eigen::Index i = 0; i < 60; ++i) {
        const int c = static_cast<int>(i % 3);
        for (Eigen::Index f = 0; f < 3; ++f) {
            data.features(i, f) = rng.normal(2.0 * c, 1.0);
        }
        data.labels[i] = c;
    }
    const auto model = uab::train_gaussian(data);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd x(3);
        for (Eigen::Index f = 0; f < 3; ++f) x[f] = rng.uniform(-2.0, 8.0);
        CHECK(uab::predict_lambda(model, x, 0.5) == reference_gaussian_predict(model, x));
    }

    const auto mn = random_multinomial_model(rng, 4, 6);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd x(6);
        for (Eigen::Index f = 0; f < 6; ++f) x[f] = static_cast<double>(rng.below(8));
        CHECK(uab::predict_lambda(mn, x, 0.5) == reference_multinomial_predict(mn, x));
    }
}

TEST_CASE("predict_ab equals predict_lambda at the exponent ratio") {
    uab::Rng rng(2718);
    const auto mn = random_multinomial_model(rng, 3, 5);
    int checked = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        Eigen::VectorXd x(5);
        for (Eigen::Index f = 0; f < 5; ++f) x[f] = static_cast<double>(rng.below(10));
        const double alpha = rng.uniform(0.0, 3.0);
        const double beta = rng.uniform(0.0, 3.0);
        if (alpha + beta <= 0.0) continue;
        const TemperPair t(alpha, beta);
        CHECK(uab::predict_ab(mn, x, t) == uab::predict_lambda(mn, x, alpha / (alpha + beta)));
        ++checked;
    }
    CHECK(checked == 10000);
}

TEST_CASE("predict_ab is invariant to common scaling") {
    const auto model = uab::train_gaussian(two_cluster_data());
    uab::Rng rng(31337);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x(1);
        x << rng.uniform(-5.0, 15.0);
        const double alpha = rng.uniform(0.1, 2.0);
        const double beta = rng.uniform(0.1, 2.0);
        const double c = rng.uniform(0.1, 10.0);
        CHECK(uab::predict_ab(model, x, TemperPair(alpha, beta)) ==
              uab::predict_ab(model, x, TemperPair(c * alpha, c * beta)));
    }
    CHECK_THROWS_AS(uab::predict_ab(model, Eigen::VectorXd::Zero(1), TemperPair(0.0, 0.0)),
                    std::domain_error);
}

TEST_CASE("extreme exponents pick likelihood-only and prior-only classes") {
    const auto model = uab::train_gaussian(two_cluster_data());
    Eigen::VectorXd x(1);
    x << 9.7;
    CHECK(uab::predict_ab(model, x, TemperPair(1.0, 0.0)) == 1);

    GaussianNBModel skewed = model;
    skewed.class_log_prior << std::log(0.99), std::log(0.01);
    CHECK(uab::predict_ab(skewed, x, TemperPair(0.0, 1.0)) == 0);
}

TEST_CASE("misclassification rate counts exact disagreements") {
    const auto model = uab::train_gaussian(two_cluster_data());

    // The training set itself is separable: zero loss.
    CHECK(uab::misclassification_rate(model, two_cluster_data(), 0.5) == 0.0);

    // Four instances with one deliberately mislabeled: rate 0.25.
    LabeledDataset test;
    test.features.resize(4, 1);
    test.features << 0.2, 0.8, 10.3, 0.4;
    test.labels.resize(4);
    test.labels << 0, 0, 1, 1;  // the last one is wrong on purpose
    CHECK(uab::misclassification_rate(model, test, 0.5) == doctest::Approx(0.25).epsilon(1e-14));

    // A prior-only rule on balanced data scores exactly chance.
    GaussianNBModel constant = model;
    constant.class_log_prior << std::log(0.9), std::log(0.1);
    CHECK(uab::misclassification_rate(constant, two_cluster_data(), 0.0) ==
          doctest::Approx(0.5).epsilon(1e-14));

    LabeledDataset empty;
    empty.features.resize(0, 1);
    empty.labels.resize(0);
    CHECK_THROWS_AS(uab::misclassification_rate(model, empty, 0.5), std::invalid_argument);
}

TEST_CASE("label permutation leaves the rate unchanged") {
    uab::Rng rng(909);
    LabeledDataset data;
    data.features.resize(40, 2);
    data.labels.resize(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
        const int c = static_cast<int>(i % 2);
        data.features(i, 0) = rng.normal(c == 0 ? 0.0 : 2.0, 1.5);
        data.features(i, 1) = rng.normal(c == 0 ? 1.0 : -1.0, 1.5);
        data.labels[i] = c;
    }
    const auto model = uab::train_gaussian(data);

    // Swap class indices 0 and 1 everywhere.
    GaussianNBModel swapped = model;
    swapped.class_log_prior.reverseInPlace();
    swapped.means = model.means.colwise().reverse().eval();
    swapped.variances = model.variances.colwise().reverse().eval();
    LabeledDataset relabeled = data;
    for (Eigen::Index i = 0; i < relabeled.size(); ++i) {
        relabeled.labels[i] = 1 - relabeled.labels[i];
    }
    for (double lambda : {0.0, 0.3, 0.5, 0.8, 1.0}) {
        CHECK(uab::misclassification_rate(model, data, lambda) ==
              doctest::Approx(uab::misclassification_rate(swapped, relabeled, lambda))
                  .epsilon(1e-14));
    }
}

TEST_CASE("dataset CSV round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "uab_classify_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "corpus.csv").string();

    LabeledDataset data;
    data.features.resize(3, 2);
    data.features << 0.5, -1.25, 2.0, 3.5, 1e-3, 7.0;
    data.labels.resize(3);
    data.labels << 0, 1, 1;
    uab::save_dataset_csv(path, data);
    const auto loaded = uab::load_dataset_csv(path);
    CHECK(loaded.size() == 3);
    CHECK((loaded.features - data.features).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(loaded.labels[2] == 1);
    std::filesystem::remove_all(dir);

    CHECK_THROWS_AS(uab::load_dataset_csv("/nonexistent/file.csv"), std::runtime_error);
}

TEST_CASE("model JSON round trip") {
    const auto gaussian = uab::train_gaussian(two_cluster_data());
    nlohmann::json gj = gaussian;
    const auto g2 = gj.get<GaussianNBModel>();
    CHECK((g2.means - gaussian.means).cwiseAbs().maxCoeff() == 0.0);
    CHECK((g2.variances - gaussian.variances).cwiseAbs().maxCoeff() == 0.0);
    CHECK(gj.at("family") == "gaussian");

    uab::Rng rng(7);
    const auto mn = random_multinomial_model(rng, 2, 3);
    nlohmann::json mj = mn;
    const auto m2 = mj.get<MultinomialNBModel>();
    CHECK((m2.feature_log_prob - mn.feature_log_prob).cwiseAbs().maxCoeff() == 0.0);
    CHECK((m2.class_log_prior - mn.class_log_prior).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE
