#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "transitcast/errors.hpp"
#include "transitcast/models.hpp"
#include "transitcast/parallel.hpp"
#include "transitcast/random.hpp"

namespace transitcast {

namespace {

struct SplitCandidate {
    int feature{-1};
    double threshold{0.0};
    double score{-std::numeric_limits<double>::infinity()};  // sumL^2/nL + sumR^2/nR
};

// True when (feature, threshold, score) should replace `best`: higher score,
// or an exact tie broken towards lower feature index then lower threshold.
bool better(const SplitCandidate& c, const SplitCandidate& best) {
    if (c.score > best.score) return true;
    if (c.score < best.score || best.feature < 0) return false;
    if (c.feature != best.feature) return c.feature < best.feature;
    return c.threshold < best.threshold;
}

struct PendingNode {
    int node;
    std::size_t begin;
    std::size_t end;
    int depth;
};

}  // namespace

void RegressionTree::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const Eigen::Index> rows,
                         const TreeOptions& options, std::uint64_t seed) {
    if (rows.empty()) throw ArgumentError("regression tree needs at least one row");
    const auto p = static_cast<std::size_t>(X.cols());
    const std::size_t max_features = options.max_features == 0 ? p : std::min(options.max_features, p);
    const std::size_t min_leaf = std::max<std::size_t>(options.min_samples_leaf, 1);

    Rng rng(seed);
    std::vector<Eigen::Index> index(rows.begin(), rows.end());
    std::vector<std::size_t> feature_order(p);
    std::vector<std::pair<double, double>> column;  // (x, y)
    nodes_.clear();
    nodes_.push_back({});

    std::vector<PendingNode> stack{{0, 0, index.size(), 0}};
    while (!stack.empty()) {
        const PendingNode job = stack.back();
        stack.pop_back();
        const std::size_t count = job.end - job.begin;

        double sum = 0.0;
        double lo_y = std::numeric_limits<double>::infinity();
        double hi_y = -lo_y;
        for (std::size_t i = job.begin; i < job.end; ++i) {
            const double v = y[index[i]];
            sum += v;
            lo_y = std::min(lo_y, v);
            hi_y = std::max(hi_y, v);
        }
        nodes_[static_cast<std::size_t>(job.node)].value = sum / static_cast<double>(count);

        const bool depth_capped = options.max_depth > 0 && job.depth >= options.max_depth;
        if (depth_capped || count < 2 * min_leaf || lo_y == hi_y || p == 0) continue;

        // Visit features in random order until max_features non-constant
        // ones have been examined.
        std::iota(feature_order.begin(), feature_order.end(), std::size_t{0});
        if (max_features < p) {
            for (std::size_t i = 0; i + 1 < p; ++i) {
                const auto j = i + static_cast<std::size_t>(open_uniform(rng) * static_cast<double>(p - i));
                std::swap(feature_order[i], feature_order[std::min(j, p - 1)]);
            }
        }
        SplitCandidate best;
        std::size_t examined = 0;
        for (std::size_t fi = 0; fi < p && examined < max_features; ++fi) {
            const auto f = static_cast<Eigen::Index>(feature_order[fi]);
            const double first = X(index[job.begin], f);
            bool constant = true;
            for (std::size_t i = job.begin + 1; i < job.end && constant; ++i) constant = X(index[i], f) == first;
            if (constant) continue;
            ++examined;
            column.clear();
            for (std::size_t i = job.begin; i < job.end; ++i) column.emplace_back(X(index[i], f), y[index[i]]);
            std::sort(column.begin(), column.end());
            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < count; ++i) {
                left_sum += column[i].second;
                const std::size_t n_left = i + 1;
                if (column[i].first == column[i + 1].first) continue;
                if (n_left < min_leaf || count - n_left < min_leaf) continue;
                const double right_sum = sum - left_sum;
                SplitCandidate c;
                c.feature = static_cast<int>(f);
                c.threshold = 0.5 * (column[i].first + column[i + 1].first);
                if (!(c.threshold < column[i + 1].first)) c.threshold = column[i].first;
                c.score = left_sum * left_sum / static_cast<double>(n_left) +
                          right_sum * right_sum / static_cast<double>(count - n_left);
                if (better(c, best)) best = c;
            }
        }
        if (best.feature < 0) continue;

        const auto mid = std::partition(index.begin() + static_cast<std::ptrdiff_t>(job.begin),
                                        index.begin() + static_cast<std::ptrdiff_t>(job.end),
                                        [&](Eigen::Index r) { return X(r, best.feature) <= best.threshold; });
        const auto split = static_cast<std::size_t>(mid - index.begin());

        const int left = static_cast<int>(nodes_.size());
        nodes_.push_back({});
        const int right = static_cast<int>(nodes_.size());
        nodes_.push_back({});
        auto& node = nodes_[static_cast<std::size_t>(job.node)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        stack.push_back({right, split, job.end, job.depth + 1});
        stack.push_back({left, job.begin, split, job.depth + 1});
    }
}

double RegressionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    std::size_t at = 0;
    while (nodes_[at].feature >= 0) {
        const auto& n = nodes_[at];
        at = static_cast<std::size_t>(row[n.feature] <= n.threshold ? n.left : n.right);
    }
    return nodes_[at].value;
}

int RegressionTree::depth() const {
    if (nodes_.empty()) return 0;
    int deepest = 0;
    std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [at, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (nodes_[at].feature >= 0) {
            stack.emplace_back(static_cast<std::size_t>(nodes_[at].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes_[at].right), d + 1);
        }
    }
    return deepest;
}

nlohmann::json RegressionTree::to_json() const {
    // Built bottom-up: children always carry larger indices than parents.
    std::vector<nlohmann::json> built(nodes_.size());
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        const auto& n = nodes_[i];
        if (n.feature < 0) {
            built[i] = {{"leaf", n.value}};
        } else {
            built[i] = {{"feature", n.feature},
                        {"threshold", n.threshold},
                        {"value", n.value},
                        {"left", std::move(built[static_cast<std::size_t>(n.left)])},
                        {"right", std::move(built[static_cast<std::size_t>(n.right)])}};
        }
    }
    return built.empty() ? nlohmann::json{} : std::move(built.front());
}

RegressionTree RegressionTree::from_json(const nlohmann::json& root) {
    RegressionTree tree;
    std::vector<std::pair<const nlohmann::json*, int>> stack{{&root, 0}};
    tree.nodes_.push_back({});
    while (!stack.empty()) {
        const auto [doc, at] = stack.back();
        stack.pop_back();
        TreeNode node;
        if (doc->contains("leaf")) {
            node.value = doc->at("leaf").get<double>();
        } else {
            node.feature = doc->at("feature").get<int>();
            node.threshold = doc->at("threshold").get<double>();
            node.value = doc->value("value", 0.0);
            node.left = static_cast<int>(tree.nodes_.size());
            tree.nodes_.push_back({});
            node.right = static_cast<int>(tree.nodes_.size());
            tree.nodes_.push_back({});
            stack.emplace_back(&doc->at("right"), node.right);
            stack.emplace_back(&doc->at("left"), node.left);
        }
        tree.nodes_[static_cast<std::size_t>(at)] = node;
    }
    return tree;
}

// ---- random forest ----------------------------------------------------------

RandomForestRegressor::RandomForestRegressor(Hyperparameters hyper)
    : Regressor(ModelKind::random_forest, std::move(hyper)) {
    if (!(this->hyper("n_trees") >= 1.0)) throw ArgumentError("random_forest: n_trees must be >= 1");
    const double fraction = this->hyper("max_features_fraction");
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ArgumentError("random_forest: max_features_fraction in (0, 1]");
}

void RandomForestRegressor::do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) {
    const auto n_trees = static_cast<std::size_t>(hyper("n_trees"));
    const auto p = static_cast<double>(X.cols());
    TreeOptions options;
    options.max_depth = static_cast<int>(hyper("max_depth"));
    options.min_samples_leaf = static_cast<std::size_t>(hyper("min_samples_leaf"));
    options.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(p * hyper("max_features_fraction") - 1e-12)));

    const auto n = static_cast<std::size_t>(X.rows());
    trees_.assign(n_trees, {});
    parallel_for(n_trees, context.threads, [&](std::size_t t) {
        const std::uint64_t tree_seed = derive_seed(context.seed, t);
        Rng rng(tree_seed);
        std::vector<Eigen::Index> sample(n);
        for (auto& r : sample) {
            r = static_cast<Eigen::Index>(std::min(n - 1, static_cast<std::size_t>(open_uniform(rng) * static_cast<double>(n))));
        }
        trees_[t].fit(X, y, sample, options, splitmix64(tree_seed));
    });
}

Eigen::VectorXd RandomForestRegressor::do_predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        double sum = 0.0;
        for (const auto& tree : trees_) sum += tree.predict_row(X.row(r));
        out[r] = sum / static_cast<double>(trees_.size());
    }
    return out;
}

nlohmann::json RandomForestRegressor::state_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    return {{"trees", std::move(trees)}};
}

void RandomForestRegressor::load_state(const nlohmann::json& state) {
    trees_.clear();
    for (const auto& t : state.at("trees")) trees_.push_back(RegressionTree::from_json(t));
}

// ---- gradient boosting ------------------------------------------------------

GradientBoostingRegressor::GradientBoostingRegressor(Hyperparameters hyper)
    : Regressor(ModelKind::gradient_boosting, std::move(hyper)) {
    if (!(this->hyper("n_trees") >= 1.0)) throw ArgumentError("gradient_boosting: n_trees must be >= 1");
    if (!(this->hyper("learning_rate") > 0.0)) throw ArgumentError("gradient_boosting: learning_rate must be > 0");
}

void GradientBoostingRegressor::do_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitContext& context) {
    const auto n_trees = static_cast<std::size_t>(hyper("n_trees"));
    const double rate = hyper("learning_rate");
    TreeOptions options;
    options.max_depth = static_cast<int>(hyper("max_depth"));
    options.min_samples_leaf = static_cast<std::size_t>(hyper("min_samples_leaf"));

    std::vector<Eigen::Index> rows(static_cast<std::size_t>(X.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    init_ = y.mean();
    Eigen::VectorXd fitted = Eigen::VectorXd::Constant(y.size(), init_);
    trees_.assign(n_trees, {});
    for (std::size_t t = 0; t < n_trees; ++t) {
        const Eigen::VectorXd residual = y - fitted;
        trees_[t].fit(X, residual, rows, options, derive_seed(context.seed, t));
        for (Eigen::Index r = 0; r < X.rows(); ++r) fitted[r] += rate * trees_[t].predict_row(X.row(r));
    }
}

Eigen::VectorXd GradientBoostingRegressor::do_predict(const Eigen::MatrixXd& X) const {
    const double rate = hyper("learning_rate");
    Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), init_);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        for (const auto& tree : trees_) out[r] += rate * tree.predict_row(X.row(r));
    }
    return out;
}

nlohmann::json GradientBoostingRegressor::state_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    return {{"init", init_}, {"trees", std::move(trees)}};
}

void GradientBoostingRegressor::load_state(const nlohmann::json& state) {
    init_ = state.at("init").get<double>();
    trees_.clear();
    for (const auto& t : state.at("trees")) trees_.push_back(RegressionTree::from_json(t));
}

}  // namespace transitcast
