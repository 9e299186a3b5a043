#include "convexclust/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace convexclust {

Assignment::Assignment(std::span<const int> raw) {
    std::unordered_map<int, int> ids;
    labels_.reserve(raw.size());
    for (int v : raw) {
        auto [it, inserted] = ids.try_emplace(v, static_cast<int>(ids.size()));
        labels_.push_back(it->second);
    }
    k_ = static_cast<int>(ids.size());
}

std::vector<Index> Assignment::cluster_sizes() const {
    std::vector<Index> sizes(static_cast<std::size_t>(k_), 0);
    for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

Assignment extract_clusters(const Matrix& x, double merge_tol) {
    if (!(merge_tol >= 0.0)) throw std::invalid_argument("merge_tol must be >= 0");
    const auto m = static_cast<std::size_t>(x.rows());
    DisjointSets sets(m);
    const double tol2 = merge_tol * merge_tol;
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = i + 1; j < x.rows(); ++j) {
            if ((x.row(i) - x.row(j)).squaredNorm() <= tol2) {
                sets.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            }
        }
    }
    std::vector<int> roots(m);
    for (std::size_t i = 0; i < m; ++i) roots[i] = static_cast<int>(sets.find(i));
    return Assignment(roots);
}

namespace {

PathPoint summarize(double c, const SolverState& state, double merge_tol) {
    PathPoint point;
    point.c = c;
    point.assignment = extract_clusters(state.x, merge_tol);
    point.cluster_count = point.assignment.k();
    point.iterations = state.iterations;
    point.final_change = state.final_change;
    point.converged = state.converged;
    return point;
}

void check_grid(std::span<const double> grid) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
            throw std::invalid_argument("c grid values must be finite and >= 0");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("c grid must be strictly ascending");
        }
    }
}

}  // namespace

PathResult regularization_path(const DataMatrix& data, const EdgeSet& edges,
                               std::span<const double> c_grid, const SolverConfig& cfg,
                               double merge_tol) {
    check_grid(c_grid);
    const AdmmSolver solver(data, edges, cfg.nu);
    PathResult result;
    result.grid.assign(c_grid.begin(), c_grid.end());
    SolverState previous;
    bool have_previous = false;
    for (double c : c_grid) {
        SolverConfig point_cfg = cfg;
        point_cfg.c = c;
        SolverState state = solver.solve(point_cfg, have_previous ? &previous : nullptr);
        result.points.push_back(summarize(c, state, merge_tol));
        previous = std::move(state);
        have_previous = true;
    }
    return result;
}

std::optional<double> select_c_for_k(const PathResult& path, int k) {
    for (const PathPoint& point : path.points) {
        if (point.cluster_count == k) return point.c;
    }
    return std::nullopt;
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) {
        throw std::invalid_argument("geometric grid needs 0 < lo < hi and count >= 2");
    }
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double step = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    grid.back() = hi;
    return grid;
}

std::vector<double> auto_c_grid(const DataMatrix& data, const EdgeSet& edges, int per_decade) {
    if (per_decade < 1) throw std::invalid_argument("per_decade must be >= 1");
    std::vector<double> grid{0.0};
    if (edges.empty()) return grid;
    const Vector spread = data.values().colwise().maxCoeff() - data.values().colwise().minCoeff();
    const double s = spread.maxCoeff();
    if (s == 0.0) return grid;
    double w_max = 0.0;
    std::vector<double> degree(static_cast<std::size_t>(data.rows()), 0.0);
    for (const Edge& e : edges.edges()) {
        w_max = std::max(w_max, e.weight);
        degree[static_cast<std::size_t>(e.i)] += e.weight;
        degree[static_cast<std::size_t>(e.j)] += e.weight;
    }
    double deg_min = std::numeric_limits<double>::infinity();
    for (double d : degree) {
        if (d > 0.0) deg_min = std::min(deg_min, d);
    }
    const double lo = 1e-3 * s / w_max;
    const double hi = std::max(10.0 * lo, 10.0 * static_cast<double>(data.rows()) * s / deg_min);
    const int count = std::max(2, static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)) + 1);
    const auto tail = geometric_grid(lo, hi, count);
    grid.insert(grid.end(), tail.begin(), tail.end());
    return grid;
}

KSelection path_select_k(const DataMatrix& data, const EdgeSet& edges, std::span<const double> grid,
                         const SolverConfig& cfg, int k, double merge_tol, int refine_steps) {
    check_grid(grid);
    const AdmmSolver solver(data, edges, cfg.nu);
    KSelection out;
    out.path.grid.assign(grid.begin(), grid.end());

    auto solve_at = [&](double c, const SolverState* warm) {
        SolverConfig point_cfg = cfg;
        point_cfg.c = c;
        return solver.solve(point_cfg, warm);
    };

    std::vector<SolverState> states;
    states.reserve(grid.size());
    for (double c : grid) {
        states.push_back(solve_at(c, states.empty() ? nullptr : &states.back()));
        out.path.points.push_back(summarize(c, states.back(), merge_tol));
        if (out.path.points.back().cluster_count <= k) break;
    }
    out.path.grid.resize(out.path.points.size());

    std::size_t closest = 0;
    for (std::size_t i = 0; i < out.path.points.size(); ++i) {
        const int count = out.path.points[i].cluster_count;
        if (count == k) {
            out.c = out.path.points[i].c;
            out.selected_c = *out.c;
            out.assignment = out.path.points[i].assignment;
            out.state = std::move(states[i]);
            return out;
        }
        if (std::abs(count - k) < std::abs(out.path.points[closest].cluster_count - k)) closest = i;
    }
    if (!out.path.points.empty()) {
        out.selected_c = out.path.points[closest].c;
        out.assignment = out.path.points[closest].assignment;
        out.state = states[closest];
    }

    const std::size_t n = out.path.points.size();
    if (n >= 2 && out.path.points[n - 2].cluster_count > k && out.path.points[n - 1].cluster_count < k) {
        double lo = out.path.points[n - 2].c;
        double hi = out.path.points[n - 1].c;
        SolverState warm = states[n - 2];
        for (int step = 0; step < refine_steps; ++step) {
            const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
            SolverState state = solve_at(mid, &warm);
            const PathPoint point = summarize(mid, state, merge_tol);
            if (point.cluster_count == k) {
                out.c = mid;
                out.selected_c = mid;
                out.assignment = point.assignment;
                out.state = std::move(state);
                return out;
            }
            if (point.cluster_count > k) {
                lo = mid;
                warm = std::move(state);
            } else {
                hi = mid;
            }
        }
    }
    return out;
}

}  // namespace convexclust
