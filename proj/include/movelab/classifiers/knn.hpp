#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "movelab/errors.hpp"

namespace movelab {

// Brute-force k-nearest-neighbor over flattened feature vectors.
struct KnnModel {
    std::size_t k = 1;
    std::vector<std::vector<double>> X;
    std::vector<int> y;
};

inline KnnModel knn_fit(std::vector<std::vector<double>> X, std::vector<int> y, std::size_t k) {
    if (X.empty()) throw EmptyData("knn_fit: empty training set");
    if (X.size() != y.size()) throw LengthMismatch("knn_fit: X/y size mismatch");
    if (k < 1 || k > X.size()) throw Error("knn_fit: k must be in [1, n]");
    return {k, std::move(X), std::move(y)};
}

// Majority label among the k nearest by Euclidean distance. Distance ties
// break toward the lower training index, vote ties toward the lower class.
inline int knn_predict(const KnnModel& model, const std::vector<double>& x) {
    const std::size_t n = model.X.size();
    if (model.X.front().size() != x.size()) {
        throw DimensionMismatch("knn_predict: query dimension mismatch");
    }
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double>& row = model.X[i];
        double d2 = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double d = row[j] - x[j];
            d2 += d * d;
        }
        dist.emplace_back(d2, i);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(model.k), dist.end());
    int max_class = 0;
    for (const int c : model.y) max_class = std::max(max_class, c);
    std::vector<std::size_t> votes(static_cast<std::size_t>(max_class) + 1, 0);
    for (std::size_t i = 0; i < model.k; ++i) ++votes[static_cast<std::size_t>(model.y[dist[i].second])];
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c) {
        if (votes[c] > votes[best]) best = c;
    }
    return static_cast<int>(best);
}

} // namespace movelab
