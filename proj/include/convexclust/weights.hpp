#pragma once

// Gaussian-kernel pair weights and the edge set handed to the solver.

#include "convexclust/core.hpp"

#include <optional>
#include <vector>

namespace convexclust {

struct Edge {
    Index i;
    Index j;
    double weight;
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted edges (i < j) over m nodes, sorted by (i, j), no duplicates,
/// weights finite and strictly positive. Zero weights are dropped on
/// construction since they contribute nothing to the objective.
class EdgeSet {
public:
    EdgeSet(Index m, std::vector<Edge> edges);

    Index nodes() const noexcept { return m_; }
    std::size_t size() const noexcept { return edges_.size(); }
    bool empty() const noexcept { return edges_.empty(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& operator[](std::size_t l) const { return edges_[l]; }

private:
    Index m_;
    std::vector<Edge> edges_;
};

/// Neighbor count for sparsification; nullopt keeps every pair.
using Knn = std::optional<int>;

struct KernelParams {
    double r = 0.0;
    Knn knn = 5;
};

/// exp(-r * ||A_i - A_j||^2) for every pair, indexed by pair_row_index.
std::vector<double> gaussian_weights(const DataMatrix& data, double r);

/// Keeps pair (i, j) when j is among the knn nearest neighbors of i or i is
/// among those of j. Equidistant neighbors are ranked by ascending index.
EdgeSet knn_sparsify(const DataMatrix& data, const std::vector<double>& weights, Knn knn);

/// gaussian_weights followed by knn_sparsify.
EdgeSet build_edges(const DataMatrix& data, const KernelParams& params);

}  // namespace convexclust
