#include "convexclust/metrics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace convexclust {

double rand_index(const Assignment& a, const Assignment& b) {
    if (a.size() != b.size()) throw std::invalid_argument("rand index: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("rand index needs at least two points");
    // agreements = C(m,2) - (pairs joined in a) - (joined in b) + 2 (joined in both)
    const auto ka = static_cast<std::size_t>(a.k());
    const auto kb = static_cast<std::size_t>(b.k());
    std::vector<long long> table(ka * kb, 0);
    std::vector<long long> rows(ka, 0);
    std::vector<long long> cols(kb, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++table[static_cast<std::size_t>(a[i]) * kb + static_cast<std::size_t>(b[i])];
        ++rows[static_cast<std::size_t>(a[i])];
        ++cols[static_cast<std::size_t>(b[i])];
    }
    auto pairs = [](long long n) { return n * (n - 1) / 2; };
    long long both = 0;
    long long in_a = 0;
    long long in_b = 0;
    for (long long v : table) both += pairs(v);
    for (long long v : rows) in_a += pairs(v);
    for (long long v : cols) in_b += pairs(v);
    const long long total = pairs(static_cast<long long>(a.size()));
    return static_cast<double>(total - in_a - in_b + 2 * both) / static_cast<double>(total);
}

SeparationStats cluster_geometry(const DataMatrix& data, const Assignment& labels) {
    if (static_cast<Index>(labels.size()) != data.rows()) {
        throw std::invalid_argument("label count does not match data rows");
    }
    const int k = labels.k();
    SeparationStats stats;
    stats.pairwise_dist = Matrix::Constant(k, k, std::numeric_limits<double>::infinity());
    stats.pairwise_dist.diagonal().setZero();
    stats.diameters = Vector::Zero(k);
    for (Index i = 0; i < data.rows(); ++i) {
        for (Index j = i + 1; j < data.rows(); ++j) {
            const int a = labels[static_cast<std::size_t>(i)];
            const int b = labels[static_cast<std::size_t>(j)];
            const double d = (data.row(i) - data.row(j)).norm();
            if (a == b) {
                stats.diameters(a) = std::max(stats.diameters(a), d);
            } else if (d < stats.pairwise_dist(a, b)) {
                stats.pairwise_dist(a, b) = stats.pairwise_dist(b, a) = d;
            }
        }
    }
    stats.max_dia = k > 0 ? stats.diameters.maxCoeff() : 0.0;
    if (k >= 2) {
        stats.min_dist = std::numeric_limits<double>::infinity();
        stats.max_dist = 0.0;
        for (int a = 0; a < k; ++a) {
            for (int b = a + 1; b < k; ++b) {
                stats.min_dist = std::min(stats.min_dist, stats.pairwise_dist(a, b));
                stats.max_dist = std::max(stats.max_dist, stats.pairwise_dist(a, b));
            }
        }
    }
    return stats;
}

ExactnessCheck exact_clustering_check(const Matrix& x, const Assignment& truth, double merge_tol) {
    if (static_cast<Index>(truth.size()) != x.rows()) {
        throw std::invalid_argument("label count does not match centroid rows");
    }
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = i + 1; j < x.rows(); ++j) {
            const bool same = truth[static_cast<std::size_t>(i)] == truth[static_cast<std::size_t>(j)];
            const bool fused = (x.row(i) - x.row(j)).norm() <= merge_tol;
            if (same != fused) return {false, PairIndex{i, j}};
        }
    }
    return {};
}

double zhu_threshold(const SeparationStats& stats, Index m0, Index m1) {
    const Index sizes[2] = {m0, m1};
    double threshold = 0.0;
    for (int s = 0; s < 2; ++s) {
        const double ms = static_cast<double>(sizes[s]);
        const double other = static_cast<double>(sizes[1 - s]);
        const double factor = 1.0 + 2.0 * other * (ms - 1.0) / (ms * ms);
        threshold = std::max(threshold, factor * stats.diameters(s));
    }
    return threshold;
}

bool zhu_condition(const DataMatrix& data, const Assignment& labels) {
    if (labels.k() != 2) throw std::invalid_argument("zhu condition needs exactly two clusters");
    const SeparationStats stats = cluster_geometry(data, labels);
    const auto sizes = labels.cluster_sizes();
    return stats.pairwise_dist(0, 1) > zhu_threshold(stats, sizes[0], sizes[1]);
}

}  // namespace convexclust
