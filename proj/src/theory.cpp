#include "convexclust/theory.hpp"

#include "convexclust/datagen.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace convexclust {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

/// Centered rows regrouped into contiguous label blocks, with the pair
/// index sets and the kernel weight of every pair.
struct BlockedProblem {
    Matrix centered;
    std::vector<int> labels;
    IndexSets sets;
    std::vector<double> gamma;
    Index m = 0;

    auto diff(Index p) const {
        const PairIndex ij = pair_from_row_index(p, m);
        return centered.row(ij.i) - centered.row(ij.j);
    }
};

BlockedProblem block_problem(const DataMatrix& data, const Assignment& labels, double r) {
    if (static_cast<Index>(labels.size()) != data.rows()) {
        throw std::invalid_argument("label count does not match data rows");
    }
    BlockedProblem bp;
    const BlockOrder order = contiguous_order(labels.labels());
    // canonical labels are first-occurrence ordered, so after a stable sort
    // the blocks run 0..K-1 in order
    bp.labels = order.labels;
    bp.centered = permute_rows(center_columns(data).centered, order.permutation);
    bp.sets = index_sets(bp.labels);
    bp.m = data.rows();
    bp.gamma = gaussian_weights(DataMatrix(bp.centered), r);
    return bp;
}

void fill_common(FeasibilityReport& report, const DataMatrix& data, const Assignment& labels,
                 const BlockedProblem& bp, double r, bool use_max_dist) {
    const SeparationStats stats = cluster_geometry(data, labels);
    report.r = r;
    report.clusters = labels.k();
    report.sizes = bp.sets.sizes;
    report.diameters = stats.diameters;
    report.d_min = stats.min_dist;
    report.d = use_max_dist ? stats.max_dist : stats.min_dist;
    report.r_min = r_lower_bound(report.sizes, report.d, report.diameters);
    report.r_min_using_min_dist = r_lower_bound(report.sizes, report.d_min, report.diameters);

    const auto m = static_cast<double>(bp.m);
    report.epsilon.resize(report.clusters);
    for (int i = 0; i < report.clusters; ++i) {
        const auto mi = static_cast<double>(report.sizes[static_cast<std::size_t>(i)]);
        report.epsilon(i) = (8.0 * (m - mi) * (mi - 1.0) + 4.0 * mi * mi) / (m * mi * mi);
    }

    report.gamma_max_between = 0.0;
    for (Index p : bp.sets.between) report.gamma_max_between = std::max(report.gamma_max_between, bp.gamma[p]);
    report.gamma_min_within = 1.0;
    for (Index p : bp.sets.within) report.gamma_min_within = std::min(report.gamma_min_within, bp.gamma[p]);

    // Lower end: max over clusters i and within-pairs p of
    //   eps_i dia_i / (gamma_p - 4 (m - m_i)/m_i * max_between gamma)
    double lower = 0.0;
    bool lower_ok = true;
    for (int i = 0; i < report.clusters && lower_ok; ++i) {
        const auto mi = static_cast<double>(report.sizes[static_cast<std::size_t>(i)]);
        const double factor = 4.0 * (m - mi) / mi;
        for (Index p : bp.sets.within) {
            const double denom = bp.gamma[p] - factor * report.gamma_max_between;
            if (!(denom > 0.0)) {
                lower_ok = false;
                report.notes.push_back("lower-bound denominator <= 0 for cluster " + std::to_string(i) +
                                       "; r too small for this data");
                break;
            }
            lower = std::max(lower, report.epsilon(i) * report.diameters(i) / denom);
        }
    }
    if (lower_ok) report.kappa_lower = lower;
}

void finish(FeasibilityReport& report) {
    report.feasible = report.kappa_lower && report.kappa_upper && !report.degenerate &&
                      *report.kappa_lower < *report.kappa_upper;
    if (report.feasible && report.r_min && report.r < *report.r_min) {
        report.feasible = false;
        report.notes.push_back("r below the kernel-bandwidth lower bound");
    }
}

}  // namespace

SeparationCheck separation_check(const DataMatrix& data, const Assignment& labels) {
    if (labels.k() < 2) throw std::invalid_argument("separation check needs at least two clusters");
    SeparationCheck check;
    check.stats = cluster_geometry(data, labels);
    check.separated = check.stats.min_dist > check.stats.max_dia;

    Matrix means = Matrix::Zero(labels.k(), data.cols());
    const auto sizes = labels.cluster_sizes();
    for (Index i = 0; i < data.rows(); ++i) means.row(labels[static_cast<std::size_t>(i)]) += data.row(i);
    for (int s = 0; s < labels.k(); ++s) means.row(s) /= static_cast<double>(sizes[static_cast<std::size_t>(s)]);
    for (Index q = 0; q < data.cols(); ++q) {
        bool distinct = true;
        for (int s = 0; s < labels.k() && distinct; ++s) {
            for (int l = s + 1; l < labels.k(); ++l) {
                if (means(s, q) == means(l, q)) {
                    distinct = false;
                    break;
                }
            }
        }
        if (!distinct) check.coincident_mean_dims.push_back(q);
    }
    check.means_distinct = check.coincident_mean_dims.empty();
    return check;
}

std::optional<double> r_lower_bound(const std::vector<Index>& sizes, double d, const Vector& diameters) {
    if (sizes.size() != static_cast<std::size_t>(diameters.size()) || sizes.size() < 2) {
        throw std::invalid_argument("r bound needs one diameter per cluster and >= 2 clusters");
    }
    Index m = 0;
    for (Index s : sizes) m += s;
    double bound = -inf;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const double gap = d * d - diameters(static_cast<Index>(i)) * diameters(static_cast<Index>(i));
        if (!(gap > 0.0)) return std::nullopt;
        const auto mi = static_cast<double>(sizes[i]);
        bound = std::max(bound, std::log(4.0 * (static_cast<double>(m) - mi) / mi) / gap);
    }
    return bound;
}

FeasibilityReport c_interval_two(const DataMatrix& data, const Assignment& labels, double r) {
    if (labels.k() != 2) throw std::invalid_argument("two-cluster interval needs exactly two clusters");
    const BlockedProblem bp = block_problem(data, labels, r);
    FeasibilityReport report;
    fill_common(report, data, labels, bp, r, /*use_max_dist=*/false);

    const Index n = data.cols();
    const auto m = static_cast<double>(bp.m);
    const double pair_count_between = static_cast<double>(report.sizes[0] * report.sizes[1]);
    report.tau_pairs = {{0, 1}};
    report.tau = Matrix::Zero(1, n);
    double gamma_sum = 0.0;
    for (Index p : bp.sets.between) {
        report.tau.row(0) += bp.diff(p);
        gamma_sum += bp.gamma[p];
    }
    report.tau /= pair_count_between;
    report.rho = gamma_sum / pair_count_between;

    double upper = inf;
    for (Index q = 0; q < n; ++q) {
        const double tau = std::abs(report.tau(0, q));
        if (tau == 0.0) {
            report.zero_tau_dims.push_back(q);
            continue;
        }
        if (report.rho > 0.0) upper = std::min(upper, 2.0 * tau / (m * report.rho));
        for (Index p : bp.sets.between) {
            const double denom = m * std::abs(report.rho - bp.gamma[p]);
            if (denom > 0.0) upper = std::min(upper, 2.0 * tau / denom);
        }
    }
    if (static_cast<Index>(report.zero_tau_dims.size()) == n) {
        report.degenerate = true;
        report.notes.push_back("cluster means coincide in every dimension; upper bound undefined");
    } else {
        report.kappa_upper = upper;
    }
    finish(report);
    return report;
}

FeasibilityReport c_interval_k(const DataMatrix& data, const Assignment& labels, double r) {
    if (labels.k() < 2) throw std::invalid_argument("interval needs at least two clusters");
    const BlockedProblem bp = block_problem(data, labels, r);
    FeasibilityReport report;
    fill_common(report, data, labels, bp, r, /*use_max_dist=*/true);
    if (report.clusters > 2 && report.d_min != report.d) {
        report.notes.push_back("r_min uses the maximum intra-class distance; r_min_using_min_dist "
                               "gives the bound with the minimum");
    }

    const Index n = data.cols();
    const auto m = static_cast<double>(bp.m);
    report.tau = Matrix::Zero(static_cast<Index>(bp.sets.between_by_pair.size()), n);
    Index row = 0;
    for (const auto& [pair, rows] : bp.sets.between_by_pair) {
        for (Index p : rows) report.tau.row(row) += bp.diff(p);
        report.tau.row(row) /= static_cast<double>(report.sizes[static_cast<std::size_t>(pair.first)] *
                                                   report.sizes[static_cast<std::size_t>(pair.second)]);
        report.tau_pairs.push_back(pair);
        ++row;
    }
    for (Index q = 0; q < n; ++q) {
        if ((report.tau.col(q).array() == 0.0).any()) report.zero_tau_dims.push_back(q);
    }

    const double scale = 3.0 * m * report.gamma_max_between;
    double upper = inf;
    if (scale > 0.0) upper = report.tau.cwiseAbs().minCoeff() / scale;
    report.kappa_upper = upper;
    if (!report.zero_tau_dims.empty()) {
        report.degenerate = true;
        report.notes.push_back("cluster means are not distinct in every dimension");
    }
    finish(report);
    return report;
}

FeasibilityReport feasibility(const DataMatrix& data, const Assignment& labels, double r) {
    return labels.k() == 2 ? c_interval_two(data, labels, r) : c_interval_k(data, labels, r);
}

std::optional<ParameterChoice> suggest_parameters(const DataMatrix& data, const Assignment& labels,
                                                  double r_max_factor) {
    const FeasibilityReport probe = feasibility(data, labels, 1.0);
    if (!probe.r_min_using_min_dist) return std::nullopt;
    const double base = std::max(*probe.r_min_using_min_dist, probe.r_min.value_or(0.0));
    if (!(base > 0.0)) return std::nullopt;
    for (double factor = 1.25; factor <= r_max_factor; factor *= 1.25) {
        const double r = base * factor;
        FeasibilityReport report = feasibility(data, labels, r);
        if (!report.feasible || !std::isfinite(*report.kappa_upper)) continue;
        const double lo = *report.kappa_lower;
        const double hi = *report.kappa_upper;
        const double c = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
        return ParameterChoice{r, c, std::move(report)};
    }
    return std::nullopt;
}

BallCheck ball_condition(const std::vector<Vector>& centers) {
    if (centers.size() < 2) throw std::invalid_argument("ball condition needs at least two centers");
    BallCheck check;
    check.delta = inf;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            check.delta = std::min(check.delta, (centers[i] - centers[j]).norm());
        }
    }
    check.satisfied = check.delta >= 4.0;
    return check;
}

GmmBound gmm_separation_bound(const std::vector<Vector>& means, const std::vector<Matrix>& covariances,
                              Index m) {
    if (m < 2) throw std::invalid_argument("gmm bound needs m >= 2");
    if (means.size() < 2 || covariances.size() != means.size()) {
        throw std::invalid_argument("gmm bound needs >= 2 components with one covariance each");
    }
    for (const Matrix& cov : covariances) psd_sqrt(cov);  // validates symmetric PSD

    const double log_m = std::log(static_cast<double>(m));
    const double root12 = std::sqrt(12.0 * log_m);
    const double quart12 = std::pow(12.0 * log_m, 0.25);
    auto operator_norm = [](const Matrix& s) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
        return std::max(0.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    };

    const auto k = static_cast<Index>(means.size());
    GmmBound out;
    out.spread_terms.resize(k);
    for (Index i = 0; i < k; ++i) {
        const Matrix& s = covariances[static_cast<std::size_t>(i)];
        out.spread_terms(i) =
            std::sqrt(s.trace() + s.norm() * root12 + 6.0 * operator_norm(s) * log_m);
    }
    const double spread = out.spread_terms.maxCoeff();
    out.pair_terms = Matrix::Zero(k, k);
    out.required = Matrix::Zero(k, k);
    out.min_center_distance = inf;
    for (Index s = 0; s < k; ++s) {
        for (Index l = s + 1; l < k; ++l) {
            const Matrix sum = covariances[static_cast<std::size_t>(s)] + covariances[static_cast<std::size_t>(l)];
            const double term = std::sqrt(operator_norm(sum)) * root12 + quart12 * std::sqrt(sum.norm());
            out.pair_terms(s, l) = out.pair_terms(l, s) = term;
            out.required(s, l) = out.required(l, s) = term + spread;
            out.max_required = std::max(out.max_required, term + spread);
            out.min_center_distance = std::min(
                out.min_center_distance,
                (means[static_cast<std::size_t>(s)] - means[static_cast<std::size_t>(l)]).norm());
        }
    }
    out.satisfied = out.min_center_distance > out.max_required;
    return out;
}

}  // namespace convexclust
