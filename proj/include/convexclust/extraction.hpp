#pragma once

#include "convexclust/core.hpp"
#include "convexclust/solver.hpp"
#include "convexclust/weights.hpp"

#include <optional>
#include <span>
#include <vector>

namespace convexclust {

/// Cluster labels 0..k-1, canonicalized so ids appear in order of first
/// occurrence.
class Assignment {
public:
    Assignment() = default;
    /// Relabels arbitrary integer ids by first occurrence.
    explicit Assignment(std::span<const int> raw);
    explicit Assignment(const std::vector<int>& raw) : Assignment(std::span<const int>(raw)) {}

    const std::vector<int>& labels() const noexcept { return labels_; }
    int k() const noexcept { return k_; }
    std::size_t size() const noexcept { return labels_.size(); }
    int operator[](std::size_t i) const { return labels_[i]; }
    std::vector<Index> cluster_sizes() const;

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    std::vector<int> labels_;
    int k_ = 0;
};

/// Connected components of the graph joining rows at Euclidean distance
/// <= merge_tol, over all pairs.
Assignment extract_clusters(const Matrix& x, double merge_tol = 1e-8);

struct PathPoint {
    double c = 0.0;
    Assignment assignment;
    int cluster_count = 0;
    int iterations = 0;
    double final_change = 0.0;
    bool converged = false;
};

struct PathResult {
    std::vector<double> grid;
    std::vector<PathPoint> points;
};

/// Solves for every grid value in ascending order, warm-starting each solve
/// from the previous (X, Z, Lambda). cfg.c is ignored.
PathResult regularization_path(const DataMatrix& data, const EdgeSet& edges,
                               std::span<const double> c_grid, const SolverConfig& cfg,
                               double merge_tol = 1e-8);

/// Smallest grid value whose cluster count equals k.
std::optional<double> select_c_for_k(const PathResult& path, int k);

/// Geometric grid from lo to hi inclusive (lo > 0), `count` >= 2 points.
std::vector<double> geometric_grid(double lo, double hi, int count);

/// Grid spanning the scales at which edges start and finish fusing:
/// from 1e-3 * s / w_max to 10 * m * s / deg_min, where s is the largest
/// per-coordinate spread of the data and deg_min the smallest nonzero
/// weighted node degree; `per_decade` points per factor 10.
/// Prepends 0. Values are paper-model c.
std::vector<double> auto_c_grid(const DataMatrix& data, const EdgeSet& edges, int per_decade = 4);

/// Path over `grid`, stopping at the first point with at most k clusters
/// (the returned path holds only the solved points); if that point has
/// fewer than k, bisection in log c between it and its predecessor (at most `refine_steps`
/// extra solves). `c` is set only when k clusters were found; otherwise
/// the point whose count is closest to k is returned.
struct KSelection {
    std::optional<double> c;
    double selected_c = 0.0;
    Assignment assignment;
    SolverState state;
    PathResult path;
};

KSelection path_select_k(const DataMatrix& data, const EdgeSet& edges, std::span<const double> grid,
                         const SolverConfig& cfg, int k, double merge_tol = 1e-8,
                         int refine_steps = 30);

}  // namespace convexclust
