#include "convexclust/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace convexclust {

EdgeSet::EdgeSet(Index m, std::vector<Edge> edges) : m_(m) {
    if (m < 1) throw std::invalid_argument("edge set needs at least one node");
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    edges_.reserve(edges.size());
    for (const Edge& e : edges) {
        if (e.i < 0 || e.j <= e.i || e.j >= m) {
            throw std::invalid_argument("edge (" + std::to_string(e.i) + ", " +
                                        std::to_string(e.j) + ") out of range");
        }
        if (!std::isfinite(e.weight) || e.weight < 0.0) {
            throw std::invalid_argument("edge weights must be finite and nonnegative");
        }
        if (!edges_.empty() && edges_.back().i == e.i && edges_.back().j == e.j) {
            throw std::invalid_argument("duplicate edge");
        }
        if (e.weight > 0.0) edges_.push_back(e);
    }
}

std::vector<double> gaussian_weights(const DataMatrix& data, double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw std::invalid_argument("kernel bandwidth r must be finite and >= 0");
    }
    const Index m = data.rows();
    std::vector<double> w(static_cast<std::size_t>(pair_count(m)));
    std::size_t p = 0;
    for (Index i = 0; i < m; ++i) {
        for (Index j = i + 1; j < m; ++j, ++p) {
            w[p] = std::exp(-r * (data.row(i) - data.row(j)).squaredNorm());
        }
    }
    return w;
}

EdgeSet knn_sparsify(const DataMatrix& data, const std::vector<double>& weights, Knn knn) {
    const Index m = data.rows();
    if (static_cast<Index>(weights.size()) != pair_count(m)) {
        throw std::invalid_argument("weight table size does not match C(m,2)");
    }
    std::vector<Edge> edges;
    if (!knn) {
        edges.reserve(weights.size());
        std::size_t p = 0;
        for (Index i = 0; i < m; ++i) {
            for (Index j = i + 1; j < m; ++j, ++p) edges.push_back({i, j, weights[p]});
        }
        return EdgeSet(m, std::move(edges));
    }
    if (*knn < 1 || *knn > m - 1) {
        throw std::invalid_argument("knn must lie in [1, m-1], got " + std::to_string(*knn));
    }

    std::vector<char> keep(weights.size(), 0);
    std::vector<Index> order;
    std::vector<double> dist(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) dist[j] = (data.row(i) - data.row(j)).squaredNorm();
        order.resize(static_cast<std::size_t>(m));
        std::iota(order.begin(), order.end(), Index{0});
        order.erase(order.begin() + i);
        std::partial_sort(order.begin(), order.begin() + *knn, order.end(),
                          [&](Index a, Index b) {
                              return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
                          });
        for (int t = 0; t < *knn; ++t) {
            const Index j = order[t];
            keep[pair_row_index(std::min(i, j), std::max(i, j), m)] = 1;
        }
    }
    std::size_t p = 0;
    for (Index i = 0; i < m; ++i) {
        for (Index j = i + 1; j < m; ++j, ++p) {
            if (keep[p]) edges.push_back({i, j, weights[p]});
        }
    }
    return EdgeSet(m, std::move(edges));
}

EdgeSet build_edges(const DataMatrix& data, const KernelParams& params) {
    return knn_sparsify(data, gaussian_weights(data, params.r), params.knn);
}

}  // namespace convexclust
