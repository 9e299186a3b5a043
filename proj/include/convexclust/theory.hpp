#pragma once

// Computable side of the exact-recovery theory for the weighted l1 model:
// separation checks, the kernel-bandwidth lower bound, the feasible
// regularization interval for two and for K clusters, the unit-ball center
// condition and the Gaussian-mixture separation bound.
//
// Every c here is in the paper-model convention (squared Frobenius fidelity
// without the 1/2).

#include "convexclust/core.hpp"
#include "convexclust/extraction.hpp"
#include "convexclust/metrics.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace convexclust {

struct SeparationCheck {
    bool separated = false;  ///< min dist > max dia
    SeparationStats stats;
    /// Cluster means pairwise distinct in every coordinate.
    bool means_distinct = false;
    std::vector<Index> coincident_mean_dims;
};

/// Throws std::invalid_argument for fewer than two clusters.
SeparationCheck separation_check(const DataMatrix& data, const Assignment& labels);

/// max_i ln(4 (m - m_i) / m_i) / (d^2 - l_i^2); nullopt when d <= l_i for
/// some cluster (no finite bound).
std::optional<double> r_lower_bound(const std::vector<Index>& sizes, double d, const Vector& diameters);

struct FeasibilityReport {
    double r = 0.0;
    int clusters = 0;
    std::vector<Index> sizes;
    /// Intra-class distance entering r_min: dist(S0, S1) for two clusters,
    /// the max over cluster pairs for K clusters.
    double d = 0.0;
    double d_min = 0.0;
    Vector diameters;
    std::optional<double> r_min;
    /// Same bound evaluated with the minimum intra-class distance.
    std::optional<double> r_min_using_min_dist;

    /// One row per cluster pair (s, l), s < l; the two-cluster case has one.
    Matrix tau;
    std::vector<std::pair<int, int>> tau_pairs;
    std::vector<Index> zero_tau_dims;
    double rho = 0.0;  ///< two-cluster only
    Vector epsilon;
    double gamma_max_between = 0.0;
    double gamma_min_within = 1.0;

    /// nullopt: some lower-bound denominator is <= 0.
    std::optional<double> kappa_lower;
    /// nullopt: degenerate (no usable dimension); may be +inf.
    std::optional<double> kappa_upper;
    bool degenerate = false;
    bool feasible = false;
    std::vector<std::string> notes;
};

/// Two-cluster interval. Labels need not be contiguous; rows are regrouped
/// internally and the data are column-centered first.
FeasibilityReport c_interval_two(const DataMatrix& data, const Assignment& labels, double r);

/// K-cluster interval (K >= 2).
FeasibilityReport c_interval_k(const DataMatrix& data, const Assignment& labels, double r);

/// Dispatches on the cluster count.
FeasibilityReport feasibility(const DataMatrix& data, const Assignment& labels, double r);

struct ParameterChoice {
    double r = 0.0;
    double c = 0.0;
    FeasibilityReport report;
};

/// Scans r upward from the min-distance bound until the interval is
/// nonempty, then picks c at the geometric midpoint of [kappa_lower,
/// kappa_upper]. nullopt when no r up to `r_max_factor` times the bound
/// works (or no finite bound exists).
std::optional<ParameterChoice> suggest_parameters(const DataMatrix& data, const Assignment& labels,
                                                  double r_max_factor = 64.0);

struct BallCheck {
    double delta = 0.0;
    bool satisfied = false;
};

/// Minimum pairwise center distance against the unit-ball threshold 4.
BallCheck ball_condition(const std::vector<Vector>& centers);

struct GmmBound {
    /// required(s, l): pair term for (s, l) plus the largest spread term.
    Matrix required;
    Vector spread_terms;
    Matrix pair_terms;
    double max_required = 0.0;
    double min_center_distance = 0.0;
    bool satisfied = false;
};

/// Separation bound for a Gaussian mixture with m samples (natural log).
GmmBound gmm_separation_bound(const std::vector<Vector>& means, const std::vector<Matrix>& covariances,
                              Index m);

}  // namespace convexclust
