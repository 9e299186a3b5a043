#pragma once

// Reference clusterers: Lloyd's k-means (uniform or D^2 seeding) and
// agglomerative single / average linkage.

#include "convexclust/core.hpp"
#include "convexclust/extraction.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace convexclust {

struct KMeansResult {
    Matrix centers;  ///< row j is the center of label j
    Assignment labels;
    int iterations = 0;
    double inertia = 0.0;
    /// Inertia after each assignment step.
    std::vector<double> inertia_history;
};

/// k distinct rows chosen uniformly at random.
Matrix uniform_init(const DataMatrix& data, int k, std::uint64_t seed);

/// k-means++ seeding: first center uniform over rows, each further center
/// drawn with probability proportional to the squared distance to the
/// nearest chosen center.
Matrix kmeanspp_init(const DataMatrix& data, int k, std::uint64_t seed);

/// Lloyd iterations until assignments stop changing or max_iter. With no
/// init_centers, centers are drawn by uniform_init(seed). A cluster that
/// empties is reseeded at the point farthest from its current center.
KMeansResult lloyd(const DataMatrix& data, int k, const std::optional<Matrix>& init_centers,
                   int max_iter = 300, std::uint64_t seed = 0);

enum class Linkage { single, average };

std::string_view to_string(Linkage linkage) noexcept;

/// Agglomerative clustering down to k clusters. Clusters are identified by
/// their smallest member index; among equally close cluster pairs the
/// lexicographically smallest (id_a, id_b) merges first.
Assignment hierarchical(const DataMatrix& data, int k, Linkage linkage);

}  // namespace convexclust
