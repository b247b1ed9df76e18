#include "transitcast/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "transitcast/errors.hpp"

namespace transitcast {

namespace {

constexpr int kModelFormatVersion = 1;
constexpr std::string_view kModelFormat = "transitcast-model";

}  // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::moving_average: return "moving_average";
        case ModelKind::linear: return "linear";
        case ModelKind::ridge: return "ridge";
        case ModelKind::lasso: return "lasso";
        case ModelKind::poisson: return "poisson";
        case ModelKind::knn: return "knn";
        case ModelKind::random_forest: return "random_forest";
        case ModelKind::gradient_boosting: return "gradient_boosting";
    }
    return "unknown";
}

std::vector<ModelKind> all_model_kinds() {
    return {ModelKind::random_forest, ModelKind::gradient_boosting, ModelKind::linear, ModelKind::ridge,
            ModelKind::lasso,         ModelKind::poisson,           ModelKind::knn,    ModelKind::moving_average};
}

ModelKind parse_model_kind(std::string_view name) {
    for (auto kind : all_model_kinds()) {
        if (to_string(kind) == name) return kind;
    }
    if (name == "svr" || name == "mlp") {
        throw ArgumentError("model '" + std::string(name) + "' is not implemented in this build");
    }
    throw ArgumentError("unknown model kind '" + std::string(name) + "'");
}

Hyperparameters default_hyperparameters(ModelKind kind) {
    switch (kind) {
        case ModelKind::moving_average: return {};
        case ModelKind::linear: return {};
        case ModelKind::ridge: return {{"lambda", 1.0}};
        case ModelKind::lasso: return {{"lambda", 0.1}, {"tol", 1e-6}, {"max_sweeps", 10000.0}};
        case ModelKind::poisson: return {{"max_iterations", 100.0}, {"max_step_halvings", 10.0}, {"tol", 1e-10}};
        case ModelKind::knn: return {{"k", 5.0}};
        case ModelKind::random_forest:
            return {{"n_trees", 100.0}, {"max_features_fraction", 1.0 / 3.0}, {"min_samples_leaf", 1.0},
                    {"max_depth", 0.0}};
        case ModelKind::gradient_boosting:
            return {{"n_trees", 100.0}, {"max_depth", 3.0}, {"learning_rate", 0.1}, {"min_samples_leaf", 1.0}};
    }
    throw ArgumentError("unknown model kind");
}

Regressor::Regressor(ModelKind kind, Hyperparameters hyper) : kind_(kind), hyper_(std::move(hyper)) {}

double Regressor::hyper(const std::string& key) const {
    const auto it = hyper_.find(key);
    if (it == hyper_.end()) throw ArgumentError("missing hyperparameter '" + key + "'");
    return it->second;
}

void Regressor::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) {
    if (X.rows() != y.size()) {
        throw ArgumentError("fit: X has " + std::to_string(X.rows()) + " rows but y has " + std::to_string(y.size()));
    }
    if (static_cast<std::size_t>(X.rows()) < min_rows()) {
        throw ArgumentError(std::string(to_string(kind_)) + " needs at least " + std::to_string(min_rows()) + " rows");
    }
    if (!X.allFinite() || !y.allFinite()) throw ArgumentError("fit: non-finite input");
    if (!context.feature_names.empty() && context.feature_names.size() != static_cast<std::size_t>(X.cols())) {
        throw ArgumentError("fit: feature_names length does not match X columns");
    }
    fitted_ = false;
    do_fit(X, y, context);
    n_features_ = static_cast<std::size_t>(X.cols());
    fitted_ = true;
}

Eigen::VectorXd Regressor::predict(const Eigen::MatrixXd& X) const {
    if (!fitted_) throw StateError(std::string(to_string(kind_)) + ": predict called before fit");
    if (static_cast<std::size_t>(X.cols()) != n_features_) {
        throw ArgumentError("predict: expected " + std::to_string(n_features_) + " columns, got " +
                            std::to_string(X.cols()));
    }
    return do_predict(X);
}

nlohmann::json Regressor::to_json() const {
    if (!fitted_) throw StateError("cannot serialize an unfitted model");
    nlohmann::json doc;
    doc["format"] = kModelFormat;
    doc["version"] = kModelFormatVersion;
    doc["kind"] = to_string(kind_);
    doc["hyperparameters"] = hyper_;
    doc["n_features"] = n_features_;
    doc["state"] = state_json();
    return doc;
}

std::unique_ptr<Regressor> make_regressor(ModelKind kind, const Hyperparameters& overrides) {
    Hyperparameters hyper = default_hyperparameters(kind);
    for (const auto& [key, value] : overrides) {
        if (!hyper.contains(key)) {
            throw ArgumentError("unknown hyperparameter '" + key + "' for " + std::string(to_string(kind)));
        }
        if (!std::isfinite(value)) throw ArgumentError("hyperparameter '" + key + "' must be finite");
        hyper[key] = value;
    }
    switch (kind) {
        case ModelKind::moving_average: return std::make_unique<MovingAverageRegressor>(hyper);
        case ModelKind::linear: return std::make_unique<LinearRegressor>(hyper);
        case ModelKind::ridge: return std::make_unique<RidgeRegressor>(hyper);
        case ModelKind::lasso: return std::make_unique<LassoRegressor>(hyper);
        case ModelKind::poisson: return std::make_unique<PoissonRegressor>(hyper);
        case ModelKind::knn: return std::make_unique<KnnRegressor>(hyper);
        case ModelKind::random_forest: return std::make_unique<RandomForestRegressor>(hyper);
        case ModelKind::gradient_boosting: return std::make_unique<GradientBoostingRegressor>(hyper);
    }
    throw ArgumentError("unknown model kind");
}

std::unique_ptr<Regressor> regressor_from_json(const nlohmann::json& doc) {
    if (doc.value("format", std::string{}) != kModelFormat) throw InputError("not a transitcast model document");
    if (doc.value("version", 0) != kModelFormatVersion) {
        throw InputError("unsupported model format version " + doc.value("version", nlohmann::json()).dump());
    }
    const auto kind = parse_model_kind(doc.at("kind").get<std::string>());
    auto model = make_regressor(kind, doc.at("hyperparameters").get<Hyperparameters>());
    model->load_state(doc.at("state"));
    model->n_features_ = doc.at("n_features").get<std::size_t>();
    model->fitted_ = true;
    return model;
}

// ---- moving average ---------------------------------------------------------

MovingAverageRegressor::MovingAverageRegressor(Hyperparameters hyper)
    : Regressor(ModelKind::moving_average, std::move(hyper)) {}

void MovingAverageRegressor::do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd&, const FitContext& context) {
    columns_.clear();
    if (context.feature_names.empty()) {
        // Without names every column is taken to be a lagged target.
        for (Eigen::Index c = 0; c < X.cols(); ++c) columns_.push_back(c);
        return;
    }
    for (std::size_t c = 0; c < context.feature_names.size(); ++c) {
        if (context.feature_names[c].starts_with("target_lag")) columns_.push_back(static_cast<Eigen::Index>(c));
    }
    if (columns_.empty()) throw ArgumentError("moving_average: no target_lag* columns among the features");
}

Eigen::VectorXd MovingAverageRegressor::do_predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    for (auto c : columns_) out += X.col(c);
    return out / static_cast<double>(columns_.size());
}

nlohmann::json MovingAverageRegressor::state_json() const { return {{"target_columns", columns_}}; }

void MovingAverageRegressor::load_state(const nlohmann::json& state) {
    columns_ = state.at("target_columns").get<std::vector<Eigen::Index>>();
}

// ---- k nearest neighbours ---------------------------------------------------

KnnRegressor::KnnRegressor(Hyperparameters hyper) : Regressor(ModelKind::knn, std::move(hyper)) {
    if (!(this->hyper("k") >= 1.0)) throw ArgumentError("knn: k must be >= 1");
}

void KnnRegressor::do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext&) {
    train_X_ = X;
    train_y_ = y;
}

Eigen::VectorXd KnnRegressor::do_predict(const Eigen::MatrixXd& X) const {
    const auto n_train = static_cast<std::size_t>(train_X_.rows());
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(hyper("k")), n_train);
    Eigen::VectorXd out(X.rows());
    std::vector<std::pair<double, std::size_t>> dist(n_train);
    for (Eigen::Index q = 0; q < X.rows(); ++q) {
        for (std::size_t i = 0; i < n_train; ++i) {
            dist[i] = {(train_X_.row(static_cast<Eigen::Index>(i)) - X.row(q)).squaredNorm(), i};
        }
        // Pair ordering: distance, then training index.
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
        std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k));
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += train_y_[static_cast<Eigen::Index>(dist[j].second)];
        out[q] = sum / static_cast<double>(k);
    }
    return out;
}

nlohmann::json KnnRegressor::state_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < train_X_.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(train_X_.cols()));
        for (Eigen::Index c = 0; c < train_X_.cols(); ++c) row[static_cast<std::size_t>(c)] = train_X_(r, c);
        rows.push_back(std::move(row));
    }
    return {{"X", rows}, {"y", std::vector<double>(train_y_.data(), train_y_.data() + train_y_.size())}};
}

void KnnRegressor::load_state(const nlohmann::json& state) {
    const auto rows = state.at("X").get<std::vector<std::vector<double>>>();
    const auto y = state.at("y").get<std::vector<double>>();
    const auto cols = rows.empty() ? 0 : rows.front().size();
    train_X_.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw InputError("knn state: ragged training matrix");
        for (std::size_t c = 0; c < cols; ++c) train_X_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    train_y_ = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

}  // namespace transitcast
