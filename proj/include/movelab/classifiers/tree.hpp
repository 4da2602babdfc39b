#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "movelab/errors.hpp"

namespace movelab {

struct TreeParams {
    int max_depth = 16;
    int min_samples_leaf = 1;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> dist; // leaf class distribution, sums to 1
};

struct DecisionTree {
    int n_classes = 0;
    std::vector<TreeNode> nodes;
};

inline double gini_impurity(const std::vector<std::size_t>& counts) {
    std::size_t n = 0;
    for (const std::size_t c : counts) n += c;
    if (n == 0) return 0.0;
    double g = 1.0;
    for (const std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        g -= p * p;
    }
    return g;
}

namespace detail {

struct SplitChoice {
    double decrease = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

// Best (feature, threshold) by Gini impurity decrease over the given
// candidate features; thresholds are midpoints between consecutive distinct
// sorted values. Ties: first feature index, then lower threshold; both fall
// out of the strict-improvement comparison with candidates visited in
// ascending (feature, threshold) order.
inline SplitChoice best_gini_split(const std::vector<std::vector<double>>& X,
                                   const std::vector<int>& y, const std::vector<std::size_t>& idx,
                                   const std::vector<int>& features, int n_classes,
                                   int min_samples_leaf) {
    const std::size_t n = idx.size();
    std::vector<std::size_t> total(static_cast<std::size_t>(n_classes), 0);
    for (const std::size_t i : idx) ++total[static_cast<std::size_t>(y[i])];
    const double parent = gini_impurity(total);

    SplitChoice best;
    std::vector<std::pair<double, int>> vals(n);
    std::vector<std::size_t> left_counts(static_cast<std::size_t>(n_classes));
    for (const int f : features) {
        for (std::size_t k = 0; k < n; ++k) {
            vals[k] = {X[idx[k]][static_cast<std::size_t>(f)], y[idx[k]]};
        }
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::fill(left_counts.begin(), left_counts.end(), 0);
        std::size_t nl = 0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            ++left_counts[static_cast<std::size_t>(vals[k].second)];
            ++nl;
            if (vals[k].first == vals[k + 1].first) continue;
            const std::size_t nr = n - nl;
            if (nl < static_cast<std::size_t>(min_samples_leaf) ||
                nr < static_cast<std::size_t>(min_samples_leaf)) {
                continue;
            }
            double gl = 1.0;
            double gr = 1.0;
            for (int c = 0; c < n_classes; ++c) {
                const double pl =
                    static_cast<double>(left_counts[static_cast<std::size_t>(c)]) / static_cast<double>(nl);
                const double pr = static_cast<double>(total[static_cast<std::size_t>(c)] -
                                                      left_counts[static_cast<std::size_t>(c)]) /
                                  static_cast<double>(nr);
                gl -= pl * pl;
                gr -= pr * pr;
            }
            const double decrease =
                parent - (static_cast<double>(nl) * gl + static_cast<double>(nr) * gr) /
                             static_cast<double>(n);
            if (decrease > best.decrease) {
                double thr = 0.5 * (vals[k].first + vals[k + 1].first);
                if (!(thr < vals[k + 1].first)) thr = vals[k].first;
                best.decrease = decrease;
                best.feature = f;
                best.threshold = thr;
            }
        }
    }
    return best;
}

template <typename FeatureSelector>
int grow_gini_tree(DecisionTree& tree, const std::vector<std::vector<double>>& X,
                   const std::vector<int>& y, std::vector<std::size_t> idx, int depth,
                   const TreeParams& params, FeatureSelector& select_features) {
    const std::size_t n = idx.size();
    std::vector<std::size_t> counts(static_cast<std::size_t>(tree.n_classes), 0);
    for (const std::size_t i : idx) ++counts[static_cast<std::size_t>(y[i])];
    const bool pure = *std::max_element(counts.begin(), counts.end()) == n;

    const auto make_leaf = [&]() {
        TreeNode leaf;
        leaf.dist.resize(static_cast<std::size_t>(tree.n_classes));
        for (int c = 0; c < tree.n_classes; ++c) {
            leaf.dist[static_cast<std::size_t>(c)] =
                static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(n);
        }
        tree.nodes.push_back(std::move(leaf));
        return static_cast<int>(tree.nodes.size() - 1);
    };

    if (pure || depth >= params.max_depth || n < 2 * static_cast<std::size_t>(params.min_samples_leaf)) {
        return make_leaf();
    }
    const std::vector<int> features = select_features();
    const SplitChoice split =
        best_gini_split(X, y, idx, features, tree.n_classes, params.min_samples_leaf);
    if (split.feature < 0 || !(split.decrease > 0.0)) return make_leaf();

    std::vector<std::size_t> left_idx;
    std::vector<std::size_t> right_idx;
    for (const std::size_t i : idx) {
        if (X[i][static_cast<std::size_t>(split.feature)] <= split.threshold) {
            left_idx.push_back(i);
        } else {
            right_idx.push_back(i);
        }
    }
    idx.clear();
    idx.shrink_to_fit();

    const int node_id = static_cast<int>(tree.nodes.size());
    TreeNode node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    tree.nodes.push_back(std::move(node));
    const int left = grow_gini_tree(tree, X, y, std::move(left_idx), depth + 1, params, select_features);
    const int right = grow_gini_tree(tree, X, y, std::move(right_idx), depth + 1, params, select_features);
    tree.nodes[static_cast<std::size_t>(node_id)].left = left;
    tree.nodes[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
}

} // namespace detail

// CART growth with exhaustive threshold enumeration; the candidate feature
// set is re-drawn per node by the selector (the forest passes a sampler, the
// plain tree uses every feature).
template <typename FeatureSelector>
DecisionTree tree_fit_with(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                           const TreeParams& params, int n_classes, FeatureSelector select_features,
                           const std::vector<std::size_t>& sample_idx) {
    if (X.empty() || y.empty()) throw EmptyData("tree_fit: empty training set");
    if (X.size() != y.size()) throw LengthMismatch("tree_fit: X/y size mismatch");
    DecisionTree tree;
    tree.n_classes = n_classes;
    detail::grow_gini_tree(tree, X, y, sample_idx, 0, params, select_features);
    return tree;
}

inline DecisionTree tree_fit(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                             const TreeParams& params = {}, int n_classes = 0) {
    if (X.empty() || y.empty()) throw EmptyData("tree_fit: empty training set");
    if (n_classes == 0) {
        for (const int c : y) n_classes = std::max(n_classes, c + 1);
    }
    std::vector<int> all_features(X.front().size());
    for (std::size_t f = 0; f < all_features.size(); ++f) all_features[f] = static_cast<int>(f);
    auto select = [&all_features]() { return all_features; };
    std::vector<std::size_t> idx(X.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return tree_fit_with(X, y, params, n_classes, select, idx);
}

inline const std::vector<double>& tree_leaf_dist(const DecisionTree& tree,
                                                 const std::vector<double>& x) {
    int node = 0;
    for (;;) {
        const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
        if (nd.feature < 0) return nd.dist;
        node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
}

inline int tree_predict(const DecisionTree& tree, const std::vector<double>& x) {
    const std::vector<double>& dist = tree_leaf_dist(tree, x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < dist.size(); ++c) {
        if (dist[c] > dist[best]) best = c;
    }
    return static_cast<int>(best);
}

} // namespace movelab
