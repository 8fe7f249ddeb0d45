#include "uab/classify.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace uab {

namespace {

void check_dataset(const LabeledDataset& data) {
    if (data.labels.size() == 0) {
        throw std::invalid_argument("dataset is empty");
    }
    if (data.features.rows() != data.labels.size()) {
        throw std::invalid_argument("dataset: feature rows and label count differ");
    }
    if (data.features.cols() == 0) {
        throw std::invalid_argument("dataset has no feature columns");
    }
    if (data.labels.minCoeff() < 0) {
        throw std::invalid_argument("dataset: negative class label");
    }
}

std::vector<Eigen::Index> class_counts(const LabeledDataset& data) {
    const Eigen::Index r = data.num_classes();
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(r), 0);
    for (Eigen::Index i = 0; i < data.labels.size(); ++i) {
        ++counts[static_cast<std::size_t>(data.labels[i])];
    }
    return counts;
}

// Argmax with ties resolved to the lowest index.
Eigen::Index argmax_first(const Eigen::VectorXd& scores) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[best]) best = c;
    }
    return best;
}

Eigen::VectorXd multinomial_log_likelihood(const MultinomialNBModel& model,
                                           const Eigen::VectorXd& x) {
    if (x.size() != model.num_features()) {
        throw std::invalid_argument("predict: feature vector length mismatch");
    }
    return model.feature_log_prob * x;
}

Eigen::VectorXd gaussian_log_likelihood(const GaussianNBModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.num_features()) {
        throw std::invalid_argument("predict: feature vector length mismatch");
    }
    Eigen::VectorXd ll(model.num_classes());
    for (Eigen::Index c = 0; c < model.num_classes(); ++c) {
        double acc = 0.0;
        for (Eigen::Index f = 0; f < model.num_features(); ++f) {
            const double var = model.variances(c, f);
            const double diff = x[f] - model.means(c, f);
            acc += -0.5 * std::log(2.0 * M_PI * var) - diff * diff / (2.0 * var);
        }
        ll[c] = acc;
    }
    return ll;
}

template <typename Model>
Eigen::Index predict_lambda_impl(const Model& model, const Eigen::VectorXd& x, double lambda,
                                 Eigen::VectorXd (*log_lik)(const Model&,
                                                            const Eigen::VectorXd&)) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("predict_lambda: lambda must lie in [0, 1]");
    }
    const Eigen::VectorXd scores =
        (1.0 - lambda) * model.class_log_prior + lambda * log_lik(model, x);
    return argmax_first(scores);
}

template <typename Model>
Eigen::Index predict_ab_impl(const Model& model, const Eigen::VectorXd& x, const TemperPair& t,
                             Eigen::VectorXd (*log_lik)(const Model&, const Eigen::VectorXd&)) {
    if (t.alpha + t.beta <= 0.0) {
        throw std::domain_error("predict_ab: alpha and beta cannot both be zero");
    }
    const Eigen::VectorXd scores = t.beta * model.class_log_prior + t.alpha * log_lik(model, x);
    return argmax_first(scores);
}

template <typename Model>
double rate_impl(const Model& model, const LabeledDataset& data, double lambda,
                 Eigen::Index (*predict)(const Model&, const Eigen::VectorXd&, double)) {
    check_dataset(data);
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        if (predict(model, data.features.row(i).transpose(), lambda) != data.labels[i]) {
            ++wrong;
        }
    }
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

}  // namespace

Eigen::Index LabeledDataset::num_classes() const {
    if (labels.size() == 0) return 0;
    return static_cast<Eigen::Index>(labels.maxCoeff()) + 1;
}

MultinomialNBModel train_multinomial(const LabeledDataset& data) {
    check_dataset(data);
    if ((data.features.array() < 0.0).any()) {
        throw std::invalid_argument("train_multinomial: counts must be non-negative");
    }
    const Eigen::Index r = data.num_classes();
    const Eigen::Index v = data.features.cols();
    const auto counts = class_counts(data);
    for (Eigen::Index c = 0; c < r; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            throw std::invalid_argument("train_multinomial: class " + std::to_string(c) +
                                        " has no instances");
        }
    }

    MultinomialNBModel model;
    model.class_log_prior.resize(r);
    model.feature_log_prob.resize(r, v);
    Eigen::MatrixXd feature_counts = Eigen::MatrixXd::Zero(r, v);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        feature_counts.row(data.labels[i]) += data.features.row(i);
    }
    for (Eigen::Index c = 0; c < r; ++c) {
        model.class_log_prior[c] = std::log(static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                                            static_cast<double>(data.size()));
        const double class_total = feature_counts.row(c).sum();
        for (Eigen::Index f = 0; f < v; ++f) {
            model.feature_log_prob(c, f) =
                std::log((feature_counts(c, f) + 1.0) / (class_total + static_cast<double>(v)));
        }
    }
    return model;
}

GaussianNBModel train_gaussian(const LabeledDataset& data) {
    check_dataset(data);
    const Eigen::Index r = data.num_classes();
    const Eigen::Index v = data.features.cols();
    const auto counts = class_counts(data);
    for (Eigen::Index c = 0; c < r; ++c) {
        if (counts[static_cast<std::size_t>(c)] < 2) {
            throw std::invalid_argument("train_gaussian: class " + std::to_string(c) +
                                        " needs at least 2 instances");
        }
    }

    GaussianNBModel model;
    model.class_log_prior.resize(r);
    model.means = Eigen::MatrixXd::Zero(r, v);
    model.variances = Eigen::MatrixXd::Zero(r, v);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        model.means.row(data.labels[i]) += data.features.row(i);
    }
    for (Eigen::Index c = 0; c < r; ++c) {
        model.means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        const Eigen::Index c = data.labels[i];
        const Eigen::RowVectorXd diff = data.features.row(i) - model.means.row(c);
        model.variances.row(c) += diff.cwiseProduct(diff);
    }
    for (Eigen::Index c = 0; c < r; ++c) {
        model.class_log_prior[c] = std::log(static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                                            static_cast<double>(data.size()));
        model.variances.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }

    // Floor relative to the overall dataset spread; an absolute fallback
    // covers the fully degenerate all-identical case.
    double max_feature_var = 0.0;
    const Eigen::RowVectorXd grand_mean = data.features.colwise().mean();
    for (Eigen::Index f = 0; f < v; ++f) {
        const double var =
            (data.features.col(f).array() - grand_mean[f]).square().mean();
        max_feature_var = std::max(max_feature_var, var);
    }
    const double floor = max_feature_var > 0.0 ? 1e-9 * max_feature_var : 1e-9;
    model.variances = model.variances.cwiseMax(floor);
    return model;
}

Eigen::Index predict_lambda(const MultinomialNBModel& model, const Eigen::VectorXd& x,
                            double lambda) {
    return predict_lambda_impl(model, x, lambda, multinomial_log_likelihood);
}

Eigen::Index predict_lambda(const GaussianNBModel& model, const Eigen::VectorXd& x,
                            double lambda) {
    return predict_lambda_impl(model, x, lambda, gaussian_log_likelihood);
}

Eigen::Index predict_ab(const MultinomialNBModel& model, const Eigen::VectorXd& x,
                        const TemperPair& t) {
    return predict_ab_impl(model, x, t, multinomial_log_likelihood);
}

Eigen::Index predict_ab(const GaussianNBModel& model, const Eigen::VectorXd& x,
                        const TemperPair& t) {
    return predict_ab_impl(model, x, t, gaussian_log_likelihood);
}

double misclassification_rate(const MultinomialNBModel& model, const LabeledDataset& data,
                              double lambda) {
    return rate_impl<MultinomialNBModel>(model, data, lambda, predict_lambda);
}

double misclassification_rate(const GaussianNBModel& model, const LabeledDataset& data,
                              double lambda) {
    return rate_impl<GaussianNBModel>(model, data, lambda, predict_lambda);
}

LabeledDataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open dataset file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("dataset file is empty: " + path);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            row.push_back(std::stod(cell));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::runtime_error("dataset file has ragged rows: " + path);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().size() < 2) {
        throw std::runtime_error("dataset file needs at least one feature column and a label: " +
                                 path);
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto v = static_cast<Eigen::Index>(rows.front().size() - 1);
    LabeledDataset data;
    data.features.resize(n, v);
    data.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index f = 0; f < v; ++f) {
            data.features(i, f) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)];
        }
        data.labels[i] = static_cast<int>(
            std::lround(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)]));
    }
    return data;
}

void save_dataset_csv(const std::string& path, const LabeledDataset& data) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write dataset file: " + path);
    }
    for (Eigen::Index f = 0; f < data.features.cols(); ++f) {
        out << 'f' << f << ',';
    }
    out << "label\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index f = 0; f < data.features.cols(); ++f) {
            out << data.features(i, f) << ',';
        }
        out << data.labels[i] << '\n';
    }
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto n = static_cast<Eigen::Index>(j.size());
    if (n == 0) return {};
    const auto m = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd out(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < m; ++k) {
            out(i, k) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k));
        }
    }
    return out;
}

}  // namespace

void to_json(nlohmann::json& j, const MultinomialNBModel& model) {
    j = nlohmann::json{
        {"family", "multinomial"},
        {"class_log_prior", std::vector<double>(model.class_log_prior.begin(),
                                                model.class_log_prior.end())},
        {"feature_log_prob", matrix_to_json(model.feature_log_prob)},
    };
}

void from_json(const nlohmann::json& j, MultinomialNBModel& model) {
    const auto prior = j.at("class_log_prior").get<std::vector<double>>();
    model.class_log_prior =
        Eigen::Map<const Eigen::VectorXd>(prior.data(), static_cast<Eigen::Index>(prior.size()));
    model.feature_log_prob = matrix_from_json(j.at("feature_log_prob"));
}

void to_json(nlohmann::json& j, const GaussianNBModel& model) {
    j = nlohmann::json{
        {"family", "gaussian"},
        {"class_log_prior", std::vector<double>(model.class_log_prior.begin(),
                                                model.class_log_prior.end())},
        {"means", matrix_to_json(model.means)},
        {"variances", matrix_to_json(model.variances)},
    };
}

void from_json(const nlohmann::json& j, GaussianNBModel& model) {
    const auto prior = j.at("class_log_prior").get<std::vector<double>>();
    model.class_log_prior =
        Eigen::Map<const Eigen::VectorXd>(prior.data(), static_cast<Eigen::Index>(prior.size()));
    model.means = matrix_from_json(j.at("means"));
    model.variances = matrix_from_json(j.at("variances"));
}

}  // namespace uab
