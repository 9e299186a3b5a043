#include "convexclust/baselines.hpp"

#include "convexclust/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace convexclust {

namespace {

void check_k(const DataMatrix& data, int k) {
    if (k < 1 || k > data.rows()) {
        throw std::invalid_argument("k must lie in [1, m], got " + std::to_string(k));
    }
}

}  // namespace

Matrix uniform_init(const DataMatrix& data, int k, std::uint64_t seed) {
    check_k(data, k);
    CounterRng rng(seed);
    std::vector<Index> rows(static_cast<std::size_t>(data.rows()));
    std::iota(rows.begin(), rows.end(), Index{0});
    // partial Fisher-Yates
    Matrix centers(k, data.cols());
    for (int c = 0; c < k; ++c) {
        const auto pick = c + static_cast<std::size_t>(rng.below(rows.size() - c));
        std::swap(rows[c], rows[pick]);
        centers.row(c) = data.row(rows[c]);
    }
    return centers;
}

Matrix kmeanspp_init(const DataMatrix& data, int k, std::uint64_t seed) {
    check_k(data, k);
    CounterRng rng(seed);
    const Index m = data.rows();
    Matrix centers(k, data.cols());
    centers.row(0) = data.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(m))));
    Vector nearest(m);
    for (Index i = 0; i < m; ++i) nearest(i) = (data.row(i) - centers.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = nearest.sum();
        Index chosen = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double cumulative = 0.0;
            chosen = -1;
            for (Index i = 0; i < m; ++i) {
                cumulative += nearest(i);
                if (nearest(i) > 0.0 && target < cumulative) {
                    chosen = i;
                    break;
                }
            }
            if (chosen < 0) {
                // rounding left target at the very end: take the last positive weight
                for (Index i = m - 1; i >= 0; --i) {
                    if (nearest(i) > 0.0) {
                        chosen = i;
                        break;
                    }
                }
            }
        } else {
            // every point coincides with a chosen center
            chosen = static_cast<Index>(rng.below(static_cast<std::uint64_t>(m)));
        }
        centers.row(c) = data.row(chosen);
        for (Index i = 0; i < m; ++i) {
            nearest(i) = std::min(nearest(i), (data.row(i) - centers.row(c)).squaredNorm());
        }
    }
    return centers;
}

KMeansResult lloyd(const DataMatrix& data, int k, const std::optional<Matrix>& init_centers,
                   int max_iter, std::uint64_t seed) {
    check_k(data, k);
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    const Index m = data.rows();
    Matrix centers = init_centers ? *init_centers : uniform_init(data, k, seed);
    if (centers.rows() != k || centers.cols() != data.cols()) {
        throw std::invalid_argument("initial centers must be k x n");
    }

    std::vector<int> labels(static_cast<std::size_t>(m), -1);
    Vector dist(m);
    KMeansResult result;
    auto assign = [&]() {
        bool changed = false;
        double inertia = 0.0;
        for (Index i = 0; i < m; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (data.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[i] != best) changed = true;
            labels[i] = best;
            dist(i) = best_d;
            inertia += best_d;
        }
        return std::pair{changed, inertia};
    };

    auto [changed, inertia] = assign();
    result.inertia_history.push_back(inertia);
    int it = 0;
    while (it < max_iter) {
        ++it;
        // update step
        Matrix sums = Matrix::Zero(k, data.cols());
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < m; ++i) {
            sums.row(labels[i]) += data.row(i);
            ++counts[labels[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
                continue;
            }
            // reseed an empty cluster at the point farthest from its center
            Index far = 0;
            for (Index i = 1; i < m; ++i) {
                if (dist(i) > dist(far)) far = i;
            }
            centers.row(c) = data.row(far);
            dist(far) = 0.0;
        }
        std::tie(changed, inertia) = assign();
        result.inertia_history.push_back(inertia);
        if (!changed) break;
    }
    result.labels = Assignment(labels);
    // rows of centers follow the canonical label ids; unused centers go last
    std::vector<int> order;
    std::vector<bool> used(static_cast<std::size_t>(k), false);
    for (Index i = 0; i < m; ++i) {
        const int raw = labels[i];
        if (!used[raw]) {
            used[raw] = true;
            order.push_back(raw);
        }
    }
    for (int c = 0; c < k; ++c) {
        if (!used[c]) order.push_back(c);
    }
    result.centers.resize(k, data.cols());
    for (int c = 0; c < k; ++c) result.centers.row(c) = centers.row(order[c]);
    result.iterations = it;
    result.inertia = inertia;
    return result;
}

std::string_view to_string(Linkage linkage) noexcept {
    return linkage == Linkage::single ? "single" : "average";
}

Assignment hierarchical(const DataMatrix& data, int k, Linkage linkage) {
    check_k(data, k);
    const Index m = data.rows();
    Matrix dist(m, m);
    for (Index i = 0; i < m; ++i) {
        dist(i, i) = 0.0;
        for (Index j = i + 1; j < m; ++j) {
            dist(i, j) = dist(j, i) = (data.row(i) - data.row(j)).norm();
        }
    }
    // Cluster ids are the smallest member index; `active` lists live ids in
    // ascending order so a strict '<' scan yields the lexicographic tie rule.
    std::vector<Index> active(static_cast<std::size_t>(m));
    std::iota(active.begin(), active.end(), Index{0});
    std::vector<Index> size(static_cast<std::size_t>(m), 1);
    std::vector<int> owner(static_cast<std::size_t>(m));
    std::iota(owner.begin(), owner.end(), 0);

    while (static_cast<Index>(active.size()) > k) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_a = 0;
        std::size_t best_b = 1;
        for (std::size_t a = 0; a < active.size(); ++a) {
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                const double d = dist(active[a], active[b]);
                if (d < best) {
                    best = d;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        const Index keep = active[best_a];
        const Index gone = active[best_b];
        for (Index other : active) {
            if (other == keep || other == gone) continue;
            double merged;
            if (linkage == Linkage::single) {
                merged = std::min(dist(keep, other), dist(gone, other));
            } else {
                merged = (static_cast<double>(size[keep]) * dist(keep, other) +
                          static_cast<double>(size[gone]) * dist(gone, other)) /
                         static_cast<double>(size[keep] + size[gone]);
            }
            dist(keep, other) = dist(other, keep) = merged;
        }
        size[keep] += size[gone];
        for (auto& o : owner) {
            if (o == gone) o = static_cast<int>(keep);
        }
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    }
    return Assignment(owner);
}

}  // namespace convexclust
