#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace eegstem {

/// Dense row-major feature matrix.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const noexcept { return values[r * cols + c]; }
    std::span<const double> row(std::size_t r) const noexcept { return {values.data() + r * cols, cols}; }
};

/// Internal node: feature < threshold goes left, otherwise right.
struct SplitNode {
    std::uint32_t feature = 0;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
};

/// Classification leaf with (bootstrap-weighted) training class counts.
struct ClassLeaf {
    std::vector<std::uint32_t> counts;
};

/// Regression leaf used by boosting.
struct WeightLeaf {
    double weight = 0.0;
};

using TreeNode = std::variant<SplitNode, ClassLeaf, WeightLeaf>;

/// Flat pre-order tree; node 0 is the root.
struct Tree {
    std::vector<TreeNode> nodes;

    const TreeNode& leaf_for(std::span<const double> x) const {
        std::size_t i = 0;
        while (const auto* split = std::get_if<SplitNode>(&nodes[i])) {
            i = x[split->feature] < split->threshold ? split->left : split->right;
        }
        return nodes[i];
    }

    std::size_t depth(std::size_t node = 0) const {
        if (const auto* split = std::get_if<SplitNode>(&nodes[node])) {
            return 1 + std::max(depth(split->left), depth(split->right));
        }
        return 0;
    }

    std::size_t leaf_count() const {
        return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) {
            return !std::holds_alternative<SplitNode>(n);
        }));
    }
};

struct TreeParams {
    std::optional<std::size_t> max_depth;  ///< nullopt grows until the other stop rules fire
    std::size_t min_samples_split = 2;
    std::size_t mtry = 0;                  ///< 0 or >= cols evaluates every feature at every node
};

/// Per-feature row orderings (ascending value, ties by row index) over one training matrix.
/// Built once and filtered per tree, so nodes never re-sort.
struct PresortedColumns {
    std::vector<std::vector<std::uint32_t>> order;

    static PresortedColumns build(const FeatureMatrix& x) {
        PresortedColumns p;
        p.order.resize(x.cols);
        for (std::size_t f = 0; f < x.cols; ++f) {
            auto& o = p.order[f];
            o.resize(x.rows);
            std::iota(o.begin(), o.end(), 0U);
            std::sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
                const double va = x.at(a, f), vb = x.at(b, f);
                return va < vb || (va == vb && a < b);
            });
        }
        return p;
    }

    /// Copy restricted to rows with non-zero weight.
    PresortedColumns filtered(std::span<const std::uint32_t> weights) const {
        PresortedColumns p;
        p.order.resize(order.size());
        for (std::size_t f = 0; f < order.size(); ++f) {
            p.order[f].reserve(order[f].size());
            for (auto r : order[f]) {
                if (weights[r] > 0) p.order[f].push_back(r);
            }
        }
        return p;
    }
};

namespace detail {

inline bool clearly_greater(double a, double b) noexcept {
    return a > b + 1e-12 * std::max(1.0, std::abs(b));
}

/// Greedy exact-split tree grower. The criterion supplies per-node accumulators and a split
/// score that is additive over children (higher is better); a split is taken only when it
/// beats the parent's own score.
template <typename Criterion>
class TreeGrower {
public:
    TreeGrower(const FeatureMatrix& x, const Criterion& crit, PresortedColumns columns, const TreeParams& params,
               std::mt19937_64* rng)
        : x_(x), crit_(crit), cols_(std::move(columns)), params_(params), rng_(rng),
          goes_left_(x.rows, 0), scratch_(x.rows) {}

    Tree grow() {
        Tree tree;
        const std::size_t n = cols_.order.empty() ? 0 : cols_.order[0].size();
        if (n == 0) throw std::invalid_argument("train_tree: no rows");
        grow_node(tree, 0, n, 0);
        return tree;
    }

private:
    using Acc = typename Criterion::Accumulator;

    struct Candidate {
        bool found = false;
        std::uint32_t feature = 0;
        double threshold = 0.0;
        double score = 0.0;
    };

    std::vector<std::uint32_t> candidate_features(std::size_t begin, std::size_t end) {
        const std::size_t p = cols_.order.size();
        std::vector<std::uint32_t> feats(p);
        std::iota(feats.begin(), feats.end(), 0U);
        if (params_.mtry == 0 || params_.mtry >= p || rng_ == nullptr) return feats;

        // Draw features without replacement until mtry of them vary within the node
        // (features constant here cannot split and do not use up the budget).
        std::vector<std::uint32_t> chosen;
        for (std::size_t i = 0; i < p && chosen.size() < params_.mtry; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, p - 1);
            std::swap(feats[i], feats[pick(*rng_)]);
            const auto& o = cols_.order[feats[i]];
            if (x_.at(o[begin], feats[i]) < x_.at(o[end - 1], feats[i])) chosen.push_back(feats[i]);
        }
        std::sort(chosen.begin(), chosen.end());
        return chosen;
    }

    Candidate best_split(std::size_t begin, std::size_t end, const Acc& parent) {
        Candidate best;
        best.score = crit_.score(parent);
        Acc left = crit_.empty();
        for (auto f : candidate_features(begin, end)) {
            const auto& o = cols_.order[f];
            crit_.clear(left);
            for (std::size_t i = begin; i + 1 < end; ++i) {
                crit_.add(left, o[i]);
                const double v = x_.at(o[i], f);
                const double next = x_.at(o[i + 1], f);
                if (!(v < next)) continue;
                const double score = crit_.split_score(left, parent);
                if (clearly_greater(score, best.score)) {
                    double mid = v + (next - v) / 2.0;
                    if (!(mid > v)) mid = next;  // adjacent doubles
                    best = {true, f, mid, score};
                }
            }
        }
        return best;
    }

    void partition(std::size_t begin, std::size_t end, const Candidate& split, std::size_t& mid) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto r = cols_.order[0][i];
            goes_left_[r] = x_.at(r, split.feature) < split.threshold ? 1 : 0;
        }
        for (auto& o : cols_.order) {
            std::size_t l = begin, k = 0;
            for (std::size_t i = begin; i < end; ++i) {
                if (goes_left_[o[i]]) {
                    o[l++] = o[i];
                } else {
                    scratch_[k++] = o[i];
                }
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(k),
                      o.begin() + static_cast<std::ptrdiff_t>(l));
            mid = l;
        }
    }

    std::uint32_t grow_node(Tree& tree, std::size_t begin, std::size_t end, std::size_t depth) {
        const auto index = static_cast<std::uint32_t>(tree.nodes.size());
        Acc acc = crit_.empty();
        for (std::size_t i = begin; i < end; ++i) crit_.add(acc, cols_.order[0][i]);

        const bool stop = crit_.is_pure(acc) || crit_.count(acc) < static_cast<double>(params_.min_samples_split) ||
                          (params_.max_depth && depth >= *params_.max_depth);
        if (stop) {
            tree.nodes.emplace_back(crit_.make_leaf(acc));
            return index;
        }
        const auto split = best_split(begin, end, acc);
        if (!split.found) {
            tree.nodes.emplace_back(crit_.make_leaf(acc));
            return index;
        }
        tree.nodes.emplace_back(SplitNode{split.feature, split.threshold, 0, 0});
        std::size_t mid = begin;
        partition(begin, end, split, mid);
        const auto left = grow_node(tree, begin, mid, depth + 1);
        const auto right = grow_node(tree, mid, end, depth + 1);
        auto& node = std::get<SplitNode>(tree.nodes[index]);
        node.left = left;
        node.right = right;
        return index;
    }

    const FeatureMatrix& x_;
    const Criterion& crit_;
    PresortedColumns cols_;
    TreeParams params_;
    std::mt19937_64* rng_;
    std::vector<char> goes_left_;
    std::vector<std::uint32_t> scratch_;
};

}  // namespace detail

/// Gini criterion over integer row weights (bootstrap multiplicities).
///
/// Maximizing sum_c n_c^2 / n summed over both children is equivalent to maximizing the
/// weighted Gini impurity decrease.
struct GiniCriterion {
    struct Accumulator {
        std::vector<double> counts;
        double total = 0.0;
    };

    std::span<const std::uint8_t> labels;
    std::span<const std::uint32_t> weights;
    std::size_t n_classes = 0;

    Accumulator empty() const { return {std::vector<double>(n_classes, 0.0), 0.0}; }
    void clear(Accumulator& a) const {
        std::fill(a.counts.begin(), a.counts.end(), 0.0);
        a.total = 0.0;
    }
    void add(Accumulator& a, std::uint32_t row) const {
        const double w = weights[row];
        a.counts[labels[row]] += w;
        a.total += w;
    }
    double count(const Accumulator& a) const noexcept { return a.total; }
    bool is_pure(const Accumulator& a) const {
        return std::count_if(a.counts.begin(), a.counts.end(), [](double c) { return c > 0.0; }) <= 1;
    }
    double score(const Accumulator& a) const {
        double s = 0.0;
        for (double c : a.counts) s += c * c;
        return a.total > 0.0 ? s / a.total : 0.0;
    }
    double split_score(const Accumulator& left, const Accumulator& parent) const {
        const double right_total = parent.total - left.total;
        if (left.total <= 0.0 || right_total <= 0.0) return -1.0;
        double sl = 0.0, sr = 0.0;
        for (std::size_t c = 0; c < n_classes; ++c) {
            sl += left.counts[c] * left.counts[c];
            const double rc = parent.counts[c] - left.counts[c];
            sr += rc * rc;
        }
        return sl / left.total + sr / right_total;
    }
    TreeNode make_leaf(const Accumulator& a) const {
        ClassLeaf leaf;
        leaf.counts.reserve(n_classes);
        for (double c : a.counts) leaf.counts.push_back(static_cast<std::uint32_t>(std::llround(c)));
        return leaf;
    }
};

/// Second-order (Newton) criterion for boosting: score G^2 / (H + lambda), leaf -G / (H + lambda).
struct NewtonCriterion {
    struct Accumulator {
        double grad = 0.0;
        double hess = 0.0;
        double n = 0.0;
    };

    std::span<const double> grad;
    std::span<const double> hess;
    double l2_lambda = 1.0;

    Accumulator empty() const noexcept { return {}; }
    void clear(Accumulator& a) const noexcept { a = {}; }
    void add(Accumulator& a, std::uint32_t row) const noexcept {
        a.grad += grad[row];
        a.hess += hess[row];
        a.n += 1.0;
    }
    double count(const Accumulator& a) const noexcept { return a.n; }
    bool is_pure(const Accumulator&) const noexcept { return false; }
    double score(const Accumulator& a) const noexcept { return a.grad * a.grad / (a.hess + l2_lambda); }
    double split_score(const Accumulator& left, const Accumulator& parent) const noexcept {
        const Accumulator right{parent.grad - left.grad, parent.hess - left.hess, parent.n - left.n};
        return score(left) + score(right);
    }
    TreeNode make_leaf(const Accumulator& a) const noexcept {
        return WeightLeaf{-a.grad / (a.hess + l2_lambda)};
    }
};

/// CART classification tree on the rows with non-zero weight. With params.mtry in (0, cols)
/// each node evaluates a random feature subset drawn from `rng`; otherwise all features.
/// Ties between equal-gain splits go to the lowest feature index, then the lowest threshold.
inline Tree train_tree(const FeatureMatrix& x, std::span<const std::uint8_t> labels, std::size_t n_classes,
                       std::span<const std::uint32_t> row_weights, const PresortedColumns& presorted,
                       const TreeParams& params, std::mt19937_64& rng) {
    if (x.rows == 0 || labels.size() != x.rows || row_weights.size() != x.rows) {
        throw std::invalid_argument("train_tree: empty or inconsistent input");
    }
    GiniCriterion crit{labels, row_weights, n_classes};
    detail::TreeGrower<GiniCriterion> grower(x, crit, presorted.filtered(row_weights), params, &rng);
    return grower.grow();
}

inline Tree train_tree(const FeatureMatrix& x, std::span<const std::uint8_t> labels, std::size_t n_classes,
                       std::span<const std::uint32_t> row_weights, const TreeParams& params, std::mt19937_64& rng) {
    return train_tree(x, labels, n_classes, row_weights, PresortedColumns::build(x), params, rng);
}

/// Newton-step regression tree on gradient/hessian pairs (every row participates).
inline Tree train_regression_tree(const FeatureMatrix& x, std::span<const double> grad, std::span<const double> hess,
                                  double l2_lambda, const PresortedColumns& presorted, const TreeParams& params) {
    if (x.rows == 0) throw std::invalid_argument("train_regression_tree: no rows");
    NewtonCriterion crit{grad, hess, l2_lambda};
    detail::TreeGrower<NewtonCriterion> grower(x, crit, presorted, params, nullptr);
    return grower.grow();
}

}  // namespace eegstem
