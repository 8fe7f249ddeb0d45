#pragma once

#include <string>

#include <Eigen/Core>

#include "json.hpp"
#include "uab/posterior.hpp"

namespace uab {

/// Feature matrix (rows = instances) with integer class labels.
struct LabeledDataset {
    Eigen::MatrixXd features;
    Eigen::VectorXi labels;

    Eigen::Index size() const { return labels.size(); }
    /// Number of classes, inferred as max label + 1.
    Eigen::Index num_classes() const;
};

/// Multinomial naive Bayes with add-one (Laplace) smoothing, log domain.
struct MultinomialNBModel {
    Eigen::VectorXd class_log_prior;
    Eigen::MatrixXd feature_log_prob;  // rows = classes, cols = features

    Eigen::Index num_classes() const { return class_log_prior.size(); }
    Eigen::Index num_features() const { return feature_log_prob.cols(); }
};

/// Gaussian naive Bayes; variances are floored away from zero.
struct GaussianNBModel {
    Eigen::VectorXd class_log_prior;
    Eigen::MatrixXd means;      // rows = classes
    Eigen::MatrixXd variances;  // rows = classes, strictly positive

    Eigen::Index num_classes() const { return class_log_prior.size(); }
    Eigen::Index num_features() const { return means.cols(); }
};

/// Count-feature training: class priors from class frequencies, feature
/// parameters (count + 1)/(class total + vocabulary size). Every class
/// index up to the maximum label must occur in the data.
MultinomialNBModel train_multinomial(const LabeledDataset& data);

/// Continuous-feature training: per-class maximum-likelihood means and
/// variances; variances are floored at 1e-9 times the largest dataset-wide
/// feature variance so degenerate features cannot produce log(0). Each
/// class needs at least two instances.
GaussianNBModel train_gaussian(const LabeledDataset& data);

/// Generalized classifier: argmax over classes of
/// (1 - lambda) * log prior + lambda * log likelihood, lambda in [0, 1].
/// The likelihood normalizer is constant over classes and omitted. Ties
/// resolve to the lowest class index.
Eigen::Index predict_lambda(const MultinomialNBModel& model, const Eigen::VectorXd& x,
                            double lambda);
Eigen::Index predict_lambda(const GaussianNBModel& model, const Eigen::VectorXd& x, double lambda);

/// Exponent form: argmax of beta * log prior + alpha * log likelihood.
/// Only the ratio matters: equals predict_lambda(alpha/(alpha+beta)).
Eigen::Index predict_ab(const MultinomialNBModel& model, const Eigen::VectorXd& x,
                        const TemperPair& t);
Eigen::Index predict_ab(const GaussianNBModel& model, const Eigen::VectorXd& x,
                        const TemperPair& t);

/// Fraction of instances whose predict_lambda label differs from the truth.
double misclassification_rate(const MultinomialNBModel& model, const LabeledDataset& data,
                              double lambda);
double misclassification_rate(const GaussianNBModel& model, const LabeledDataset& data,
                              double lambda);

/// CSV layout: header row, one instance per row, features first, integer
/// label in the last column.
LabeledDataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const std::string& path, const LabeledDataset& data);

void to_json(nlohmann::json& j, const MultinomialNBModel& model);
void from_json(const nlohmann::json& j, MultinomialNBModel& model);
void to_json(nlohmann::json& j, const GaussianNBModel& model);
void from_json(const nlohmann::json& j, GaussianNBModel& model);

}  // namespace uab
