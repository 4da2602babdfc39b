#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "movelab/classifiers/tree.hpp"
#include "movelab/errors.hpp"
#include "movelab/rng.hpp"
#include "movelab/threads.hpp"

namespace movelab {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 16;
    int min_samples_leaf = 1;
    bool bootstrap = true;
    int features_per_split = 0; // 0 -> round(sqrt(D))
    std::uint64_t seed = 0;

    void validate() const {
        if (n_trees < 1) throw InvalidConfig("forest: n_trees must be >= 1");
        if (max_depth < 1) throw InvalidConfig("forest: max_depth must be >= 1");
    }
};

struct ForestModel {
    ForestParams params;
    int n_classes = 0;
    std::vector<DecisionTree> trees;
};

// Bagged CART trees. Per-tree seeds derive from the master seed by tree
// index, and each node redraws its candidate features from the tree's own
// stream, so fitting is independent of thread count.
inline ForestModel forest_fit(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                              const ForestParams& params, int n_classes = 0, unsigned threads = 1) {
    params.validate();
    if (X.empty() || y.empty()) throw EmptyData("forest_fit: empty training set");
    if (X.size() != y.size()) throw LengthMismatch("forest_fit: X/y size mismatch");
    if (n_classes == 0) {
        for (const int c : y) n_classes = std::max(n_classes, c + 1);
    }
    const std::size_t n = X.size();
    const std::size_t D = X.front().size();
    const std::size_t m = params.features_per_split > 0
                              ? std::min<std::size_t>(static_cast<std::size_t>(params.features_per_split), D)
                              : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(
                                                             std::sqrt(static_cast<double>(D)))));

    ForestModel model;
    model.params = params;
    model.n_classes = n_classes;
    model.trees.resize(static_cast<std::size_t>(params.n_trees));

    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.min_samples_leaf = params.min_samples_leaf;

    parallel_for(static_cast<std::size_t>(params.n_trees), threads, [&](std::size_t t) {
        Rand rng(derive_seed(params.seed, 0x464f52ULL, t));
        std::vector<std::size_t> idx(n);
        if (params.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) idx[i] = rng.below(n);
        } else {
            for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        }
        std::vector<int> all(D);
        for (std::size_t f = 0; f < D; ++f) all[f] = static_cast<int>(f);
        auto select = [&]() {
            if (m >= D) return all;
            // partial Fisher-Yates, then sorted so the first-feature tie rule
            // is an index order rule within the sample
            std::vector<int> pool = all;
            std::vector<int> pick;
            pick.reserve(m);
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t j = i + rng.below(pool.size() - i);
                std::swap(pool[i], pool[j]);
                pick.push_back(pool[i]);
            }
            std::sort(pick.begin(), pick.end());
            return pick;
        };
        model.trees[t] = tree_fit_with(X, y, tp, n_classes, select, idx);
    });
    return model;
}

// Majority vote over per-tree predictions; ties toward the lower class code.
inline int forest_predict(const ForestModel& model, const std::vector<double>& x) {
    std::vector<std::size_t> votes(static_cast<std::size_t>(model.n_classes), 0);
    for (const DecisionTree& t : model.trees) ++votes[static_cast<std::size_t>(tree_predict(t, x))];
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c) {
        if (votes[c] > votes[best]) best = c;
    }
    return static_cast<int>(best);
}

} // namespace movelab
