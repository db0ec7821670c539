#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegstem/dataset.hpp"
#include "eegstem/tree.hpp"
#include "eegstem/types.hpp"
#include "eegstem/util.hpp"

namespace eegstem {

inline constexpr int kModelFormatVersion = 1;

enum class ClassifierKind : std::uint8_t { Bagging, RandomForest, GBoost };

inline constexpr std::array<ClassifierKind, 3> kClassifiers{ClassifierKind::Bagging, ClassifierKind::RandomForest,
                                                            ClassifierKind::GBoost};

/// Report row names.
constexpr std::string_view display_name(ClassifierKind k) noexcept {
    switch (k) {
        case ClassifierKind::Bagging: return "Bagging Classifier";
        case ClassifierKind::RandomForest: return "Random Forest";
        case ClassifierKind::GBoost: return "XGBoost Classifier";
    }
    return "";
}

/// Identifiers used on the command line and in model files.
constexpr std::string_view kind_id(ClassifierKind k) noexcept {
    switch (k) {
        case ClassifierKind::Bagging: return "bagging";
        case ClassifierKind::RandomForest: return "random_forest";
        case ClassifierKind::GBoost: return "gboost";
    }
    return "";
}

inline std::optional<ClassifierKind> parse_classifier(std::string_view s) {
    s = detail::trim(s);
    for (auto k : kClassifiers) {
        if (detail::iequals(s, kind_id(k)) || detail::iequals(s, display_name(k))) return k;
    }
    if (detail::iequals(s, "rf")) return ClassifierKind::RandomForest;
    if (detail::iequals(s, "xgboost")) return ClassifierKind::GBoost;
    return std::nullopt;
}

struct TrainConfig {
    std::size_t n_trees = 100;
    std::optional<std::size_t> mtry;       ///< random forest; default floor(sqrt(p))
    std::optional<std::size_t> max_depth;  ///< default: unlimited for forests, 6 for boosting
    std::size_t min_samples_split = 2;
    double learning_rate = 0.3;
    double l2_lambda = 1.0;
    std::uint64_t seed = 0;
    bool bootstrap = true;            ///< false draws each training row exactly once (test hook)
    bool hard_vote = false;           ///< forests: majority of per-tree argmax instead of mean probability
    bool gboost_full_rounds = false;  ///< n_trees rounds (n_trees * classes trees) instead of n_trees total
    std::size_t workers = 1;          ///< execution only; never affects the model

    void validate(std::size_t p) const {
        if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
        if (mtry && (*mtry < 1 || *mtry > p)) throw ConfigError("mtry must lie in [1, p]");
        if (min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("learning_rate must lie in (0, 1]");
        if (!(l2_lambda >= 0.0)) throw ConfigError("l2_lambda must be >= 0");
    }

    std::size_t resolved_mtry(std::size_t p) const {
        return mtry.value_or(std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p)))));
    }
};

struct ForestModel {
    ClassifierKind kind = ClassifierKind::RandomForest;
    std::vector<Tree> trees;
    std::vector<TaskLabel> classes{kTasks.begin(), kTasks.end()};
    std::vector<std::string> schema;
    std::uint64_t seed = 0;
    TrainConfig config;
};

/// Multiclass softmax boosting: trees are stored round-major, trees[round * classes + class].
struct BoostedModel {
    std::vector<Tree> trees;
    std::size_t rounds = 0;
    std::vector<double> base_score;
    std::vector<TaskLabel> classes{kTasks.begin(), kTasks.end()};
    std::vector<std::string> schema;
    std::uint64_t seed = 0;
    TrainConfig config;
};

using EnsembleModel = std::variant<ForestModel, BoostedModel>;

/// Training rows of a dataset gathered into a dense matrix plus class indices.
struct TrainingSet {
    FeatureMatrix x;
    std::vector<std::uint8_t> y;
};

inline TrainingSet gather_rows(const Dataset& d, std::span<const std::size_t> indices) {
    TrainingSet t;
    t.x.rows = indices.size();
    t.x.cols = d.num_features();
    t.x.values.reserve(t.x.rows * t.x.cols);
    t.y.reserve(indices.size());
    for (auto i : indices) {
        const auto& r = d.rows.at(i);
        if (r.features.size() != t.x.cols) throw DataError("row feature count does not match schema");
        t.x.values.insert(t.x.values.end(), r.features.begin(), r.features.end());
        t.y.push_back(static_cast<std::uint8_t>(index_of(r.label)));
    }
    return t;
}

namespace detail {

inline ForestModel train_forest(ClassifierKind kind, const Dataset& d, const SplitPlan& split,
                                const TrainConfig& cfg) {
    if (split.train.empty()) throw DataError("empty training set");
    cfg.validate(d.num_features());
    const auto data = gather_rows(d, split.train);
    const auto presorted = PresortedColumns::build(data.x);

    TreeParams params;
    params.max_depth = cfg.max_depth;
    params.min_samples_split = cfg.min_samples_split;
    params.mtry = kind == ClassifierKind::RandomForest ? cfg.resolved_mtry(d.num_features()) : 0;

    ForestModel model;
    model.kind = kind;
    model.schema = d.schema;
    model.seed = cfg.seed;
    model.config = cfg;
    model.trees.resize(cfg.n_trees);
    const std::size_t n = data.x.rows;
    parallel_for(cfg.n_trees, cfg.workers, [&](std::size_t t) {
        // Each tree owns a stream derived from (seed, tree index): scheduling cannot change it.
        std::mt19937_64 rng(derive_seed(cfg.seed, t));
        std::vector<std::uint32_t> weights(n, cfg.bootstrap ? 0U : 1U);
        if (cfg.bootstrap) {
            std::uniform_int_distribution<std::size_t> draw(0, n - 1);
            for (std::size_t i = 0; i < n; ++i) ++weights[draw(rng)];
        }
        model.trees[t] = train_tree(data.x, data.y, kNumTasks, weights, presorted, params, rng);
    });
    return model;
}

inline std::vector<double> softmax(std::span<const double> scores) {
    const double top = *std::max_element(scores.begin(), scores.end());
    std::vector<double> p(scores.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < scores.size(); ++c) sum += (p[c] = std::exp(scores[c] - top));
    for (auto& v : p) v /= sum;
    return p;
}

inline double leaf_weight(const Tree& tree, std::span<const double> x) {
    return std::get<WeightLeaf>(tree.leaf_for(x)).weight;
}

}  // namespace detail

/// Trees on bootstrap resamples, every feature considered at every split.
inline ForestModel train_bagging(const Dataset& d, const SplitPlan& split, const TrainConfig& cfg) {
    return detail::train_forest(ClassifierKind::Bagging, d, split, cfg);
}

/// Bagging plus a fresh random subset of mtry features at every split.
inline ForestModel train_random_forest(const Dataset& d, const SplitPlan& split, const TrainConfig& cfg) {
    return detail::train_forest(ClassifierKind::RandomForest, d, split, cfg);
}

/// Number of boosting rounds a config yields for `n_classes` classes.
inline std::size_t boosting_rounds(const TrainConfig& cfg, std::size_t n_classes) {
    return cfg.gboost_full_rounds ? cfg.n_trees : cfg.n_trees / n_classes;
}

/// Gradient-boosted trees under the multiclass softmax loss.
///
/// Scores start at the log class frequencies. Each round fits one depth-limited regression
/// tree per class to g = p_c - y_c, h = p_c (1 - p_c) with leaf weight -G / (H + lambda), then
/// adds learning_rate * weight to that class score.
inline BoostedModel train_gboost(const Dataset& d, const SplitPlan& split, const TrainConfig& cfg) {
    if (split.train.empty()) throw DataError("empty training set");
    cfg.validate(d.num_features());
    const auto data = gather_rows(d, split.train);
    const std::size_t n = data.x.rows;
    const std::size_t n_classes = kNumTasks;

    std::vector<double> freq(n_classes, 0.0);
    for (auto y : data.y) freq[y] += 1.0;
    if (std::count_if(freq.begin(), freq.end(), [](double f) { return f > 0.0; }) < 2) {
        throw DataError("boosting needs at least two classes in the training rows");
    }

    BoostedModel model;
    model.schema = d.schema;
    model.seed = cfg.seed;
    model.config = cfg;
    model.rounds = boosting_rounds(cfg, n_classes);
    model.base_score.resize(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        // Classes absent from training get a tiny floor so the score stays finite.
        model.base_score[c] = std::log(std::max(freq[c] / static_cast<double>(n), 1e-12));
    }

    TreeParams params;
    params.max_depth = cfg.max_depth.value_or(6);
    params.min_samples_split = cfg.min_samples_split;
    const auto presorted = PresortedColumns::build(data.x);

    std::vector<double> scores(n * n_classes);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(model.base_score.begin(), model.base_score.end(), scores.begin() + static_cast<std::ptrdiff_t>(i * n_classes));
    }
    std::vector<double> prob(n * n_classes);
    model.trees.resize(model.rounds * n_classes);
    for (std::size_t round = 0; round < model.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = detail::softmax({scores.data() + i * n_classes, n_classes});
            std::copy(p.begin(), p.end(), prob.begin() + static_cast<std::ptrdiff_t>(i * n_classes));
        }
        parallel_for(n_classes, cfg.workers, [&](std::size_t c) {
            std::vector<double> grad(n), hess(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double p = prob[i * n_classes + c];
                grad[i] = p - (data.y[i] == c ? 1.0 : 0.0);
                hess[i] = p * (1.0 - p);
            }
            model.trees[round * n_classes + c] =
                train_regression_tree(data.x, grad, hess, cfg.l2_lambda, presorted, params);
        });
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = data.x.row(i);
            for (std::size_t c = 0; c < n_classes; ++c) {
                scores[i * n_classes + c] +=
                    cfg.learning_rate * detail::leaf_weight(model.trees[round * n_classes + c], row);
            }
        }
    }
    return model;
}

inline EnsembleModel train(ClassifierKind kind, const Dataset& d, const SplitPlan& split, const TrainConfig& cfg) {
    switch (kind) {
        case ClassifierKind::Bagging: return train_bagging(d, split, cfg);
        case ClassifierKind::RandomForest: return train_random_forest(d, split, cfg);
        case ClassifierKind::GBoost: return train_gboost(d, split, cfg);
    }
    throw ConfigError("unknown classifier");
}

namespace detail {

inline void check_schema(std::size_t expected, std::span<const double> x) {
    if (x.size() != expected) {
        throw DataError("feature count " + std::to_string(x.size()) + " does not match model schema of " +
                        std::to_string(expected));
    }
}

/// Argmax with ties resolved to the lowest (canonical) class index.
inline std::size_t argmax(std::span<const double> p) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < p.size(); ++c) {
        if (p[c] > p[best]) best = c;
    }
    return best;
}

}  // namespace detail

inline std::vector<double> predict_proba(const ForestModel& m, std::span<const double> x) {
    detail::check_schema(m.schema.size(), x);
    std::vector<double> p(m.classes.size(), 0.0);
    for (const auto& tree : m.trees) {
        const auto& leaf = std::get<ClassLeaf>(tree.leaf_for(x));
        if (m.config.hard_vote) {
            std::vector<double> counts(leaf.counts.begin(), leaf.counts.end());
            p[detail::argmax(counts)] += 1.0;
            continue;
        }
        double total = 0.0;
        for (auto c : leaf.counts) total += c;
        for (std::size_t c = 0; c < p.size(); ++c) p[c] += leaf.counts[c] / total;
    }
    const double norm = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= norm;
    return p;
}

/// Raw class scores after the first `rounds` rounds (all rounds by default).
inline std::vector<double> predict_scores(const BoostedModel& m, std::span<const double> x,
                                          std::optional<std::size_t> rounds = std::nullopt) {
    detail::check_schema(m.schema.size(), x);
    const std::size_t n_classes = m.classes.size();
    const std::size_t used = std::min(rounds.value_or(m.rounds), m.rounds);
    std::vector<double> scores = m.base_score;
    for (std::size_t r = 0; r < used; ++r) {
        for (std::size_t c = 0; c < n_classes; ++c) {
            scores[c] += m.config.learning_rate * detail::leaf_weight(m.trees[r * n_classes + c], x);
        }
    }
    return scores;
}

inline std::vector<double> predict_proba(const BoostedModel& m, std::span<const double> x,
                                         std::optional<std::size_t> rounds = std::nullopt) {
    return detail::softmax(predict_scores(m, x, rounds));
}

inline std::vector<double> predict_proba(const EnsembleModel& m, std::span<const double> x) {
    return std::visit([&](const auto& model) { return predict_proba(model, x); }, m);
}

template <typename Model>
TaskLabel predict(const Model& m, std::span<const double> x) {
    const auto p = predict_proba(m, x);
    return kTasks[detail::argmax(p)];
}

// Model files: versioned JSON with a fixed field order. nlohmann writes doubles as the
// shortest round-trip decimal, so equal models serialize to identical bytes.

namespace detail {

inline nlohmann::ordered_json tree_to_json(const Tree& tree, std::size_t node = 0) {
    nlohmann::ordered_json j;
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, SplitNode>) {
                j["f"] = n.feature;
                j["t"] = n.threshold;
                j["l"] = tree_to_json(tree, n.left);
                j["r"] = tree_to_json(tree, n.right);
            } else if constexpr (std::is_same_v<T, ClassLeaf>) {
                j["counts"] = n.counts;
            } else {
                j["w"] = n.weight;
            }
        },
        tree.nodes[node]);
    return j;
}

inline void tree_from_json(const nlohmann::json& j, Tree& tree) {
    const auto index = tree.nodes.size();
    if (j.contains("f")) {
        tree.nodes.emplace_back(SplitNode{j.at("f").get<std::uint32_t>(), j.at("t").get<double>(), 0, 0});
        const auto left = static_cast<std::uint32_t>(tree.nodes.size());
        tree_from_json(j.at("l"), tree);
        const auto right = static_cast<std::uint32_t>(tree.nodes.size());
        tree_from_json(j.at("r"), tree);
        auto& s = std::get<SplitNode>(tree.nodes[index]);
        s.left = left;
        s.right = right;
    } else if (j.contains("counts")) {
        tree.nodes.emplace_back(ClassLeaf{j.at("counts").get<std::vector<std::uint32_t>>()});
    } else {
        tree.nodes.emplace_back(WeightLeaf{j.at("w").get<double>()});
    }
}

inline nlohmann::ordered_json config_to_json(const TrainConfig& c, ClassifierKind kind, std::size_t p) {
    nlohmann::ordered_json j;
    j["n_trees"] = c.n_trees;
    if (kind == ClassifierKind::RandomForest) j["mtry"] = c.resolved_mtry(p);
    if (kind == ClassifierKind::GBoost) {
        j["max_depth"] = c.max_depth.value_or(6);
    } else if (c.max_depth) {
        j["max_depth"] = *c.max_depth;
    } else {
        j["max_depth"] = nullptr;
    }
    j["min_samples_split"] = c.min_samples_split;
    if (kind == ClassifierKind::GBoost) {
        j["learning_rate"] = c.learning_rate;
        j["l2_lambda"] = c.l2_lambda;
        j["full_rounds"] = c.gboost_full_rounds;
    } else {
        j["bootstrap"] = c.bootstrap;
        j["hard_vote"] = c.hard_vote;
    }
    return j;
}

inline TrainConfig config_from_json(const nlohmann::json& j, std::uint64_t seed) {
    TrainConfig c;
    c.seed = seed;
    c.n_trees = j.at("n_trees").get<std::size_t>();
    if (j.contains("mtry")) c.mtry = j.at("mtry").get<std::size_t>();
    if (j.contains("max_depth") && !j.at("max_depth").is_null()) c.max_depth = j.at("max_depth").get<std::size_t>();
    c.min_samples_split = j.at("min_samples_split").get<std::size_t>();
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.l2_lambda = j.value("l2_lambda", c.l2_lambda);
    c.gboost_full_rounds = j.value("full_rounds", false);
    c.bootstrap = j.value("bootstrap", true);
    c.hard_vote = j.value("hard_vote", false);
    return c;
}

template <typename Model>
nlohmann::ordered_json header_json(const Model& m, ClassifierKind kind) {
    nlohmann::ordered_json j;
    j["format_version"] = kModelFormatVersion;
    j["kind"] = kind_id(kind);
    j["seed"] = m.seed;
    std::vector<std::string> classes;
    for (auto c : m.classes) classes.emplace_back(task_name(c));
    j["classes"] = classes;
    j["schema"] = m.schema;
    j["config"] = config_to_json(m.config, kind, m.schema.size());
    return j;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ForestModel& m) {
    auto j = detail::header_json(m, m.kind);
    auto& trees = j["trees"] = nlohmann::ordered_json::array();
    for (const auto& t : m.trees) trees.push_back(detail::tree_to_json(t));
    return j;
}

inline nlohmann::ordered_json to_json(const BoostedModel& m) {
    auto j = detail::header_json(m, ClassifierKind::GBoost);
    j["rounds"] = m.rounds;
    j["base_score"] = m.base_score;
    auto& trees = j["trees"] = nlohmann::ordered_json::array();
    for (const auto& t : m.trees) trees.push_back(detail::tree_to_json(t));
    return j;
}

inline std::string serialize(const EnsembleModel& m) {
    return std::visit([](const auto& model) { return to_json(model).dump(); }, m) + "\n";
}

inline EnsembleModel parse_model(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        if (j.at("format_version").get<int>() != kModelFormatVersion) throw DataError("unsupported model format_version");
        const auto kind = parse_classifier(j.at("kind").get<std::string>());
        if (!kind) throw DataError("unknown model kind");
        const auto seed = j.at("seed").get<std::uint64_t>();
        std::vector<TaskLabel> classes;
        for (const auto& c : j.at("classes")) {
            auto t = parse_task(c.get<std::string>());
            if (!t) throw DataError("unknown class in model file");
            classes.push_back(*t);
        }
        auto schema = j.at("schema").get<std::vector<std::string>>();
        auto cfg = detail::config_from_json(j.at("config"), seed);
        std::vector<Tree> trees;
        for (const auto& t : j.at("trees")) {
            Tree tree;
            detail::tree_from_json(t, tree);
            trees.push_back(std::move(tree));
        }
        if (*kind == ClassifierKind::GBoost) {
            BoostedModel m;
            m.trees = std::move(trees);
            m.rounds = j.at("rounds").get<std::size_t>();
            m.base_score = j.at("base_score").get<std::vector<double>>();
            m.classes = std::move(classes);
            m.schema = std::move(schema);
            m.seed = seed;
            m.config = cfg;
            if (m.trees.size() != m.rounds * m.classes.size()) throw DataError("model tree count mismatch");
            return m;
        }
        ForestModel m;
        m.kind = *kind;
        m.trees = std::move(trees);
        m.classes = std::move(classes);
        m.schema = std::move(schema);
        m.seed = seed;
        m.config = cfg;
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

}  // namespace eegstem
