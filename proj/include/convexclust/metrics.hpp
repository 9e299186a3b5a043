#pragma once

#include "convexclust/core.hpp"
#include "convexclust/extraction.hpp"

#include <optional>

namespace convexclust {

/// Fraction of the C(m,2) point pairs on which two partitions agree.
/// Throws std::invalid_argument on length mismatch or m < 2.
double rand_index(const Assignment& a, const Assignment& b);

struct SeparationStats {
    /// dist(S_k, S_l): minimum cross-cluster distance; zero diagonal.
    Matrix pairwise_dist;
    /// dia(S_k): maximum within-cluster distance, 0 for singletons.
    Vector diameters;
    double min_dist = 0.0;
    double max_dist = 0.0;
    double max_dia = 0.0;
};

SeparationStats cluster_geometry(const DataMatrix& data, const Assignment& labels);

struct ExactnessCheck {
    bool exact = true;
    /// First (i, j) in row-major pair order that violates the property.
    std::optional<PairIndex> violation;
};

/// Rows equal (within merge_tol) exactly when they share a true cluster.
ExactnessCheck exact_clustering_check(const Matrix& x, const Assignment& truth, double merge_tol = 1e-8);

/// Two-cluster exact recovery condition of the unweighted sum-of-l2 model:
/// dist > max_s (1 + 2 m_{1-s} (m_s - 1) / m_s^2) dia(S_s). Comparison only.
bool zhu_condition(const DataMatrix& data, const Assignment& labels);
double zhu_threshold(const SeparationStats& stats, Index m0, Index m1);

}  // namespace convexclust
