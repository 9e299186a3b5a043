#include "convexclust/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace convexclust {

std::string_view to_string(Convention c) noexcept {
    return c == Convention::paper_model ? "paper" : "half";
}

Convention parse_convention(std::string_view name) {
    if (name == "paper" || name == "paper_model") return Convention::paper_model;
    if (name == "half" || name == "half_fidelity") return Convention::half_fidelity;
    throw std::invalid_argument("unknown objective convention '" + std::string(name) + "'");
}

double half_fidelity_weight(double c, Convention convention) noexcept {
    return convention == Convention::paper_model ? 0.5 * c : c;
}

void SolverConfig::validate() const {
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("c must be finite and >= 0");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("nu must be > 0");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

double soft_threshold(double v, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("soft threshold needs t >= 0");
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

Vector soft_threshold(const Vector& v, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("soft threshold needs t >= 0");
    return v.unaryExpr([t](double x) { return soft_threshold(x, t); });
}

AdmmSolver::AdmmSolver(const DataMatrix& data, const EdgeSet& edges, double nu)
    : data_(data.values()), edges_(edges), nu_(nu) {
    if (edges.nodes() != data.rows()) {
        throw std::invalid_argument("edge set node count does not match data rows");
    }
    if (!(nu > 0.0)) throw std::invalid_argument("nu must be > 0");

    const Index m = data.rows();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(m + 4 * edges.size());
    for (Index i = 0; i < m; ++i) triplets.emplace_back(i, i, 1.0);
    for (const Edge& e : edges.edges()) {
        triplets.emplace_back(e.i, e.i, nu);
        triplets.emplace_back(e.j, e.j, nu);
        triplets.emplace_back(e.i, e.j, -nu);
        triplets.emplace_back(e.j, e.i, -nu);
    }
    SparseMatrix system(m, m);
    system.setFromTriplets(triplets.begin(), triplets.end());
    dense_ = 4 * system.nonZeros() >= m * m;
    if (dense_) {
        dense_factor_.compute(Matrix(system));
        if (dense_factor_.info() != Eigen::Success) {
            throw std::runtime_error("factorization of I + nu*L failed");
        }
        return;
    }
    factor_.compute(system);
    if (factor_.info() != Eigen::Success) {
        throw std::runtime_error("factorization of I + nu*L failed");
    }
}

void AdmmSolver::edge_differences(const Matrix& x, Matrix& out) const {
    const auto rows = static_cast<Index>(edges_.size());
    out.resize(rows, x.cols());
    for (Index q = 0; q < x.cols(); ++q) {
        const double* xc = x.col(q).data();
        double* oc = out.col(q).data();
        for (Index l = 0; l < rows; ++l) {
            const Edge& e = edges_[static_cast<std::size_t>(l)];
            oc[l] = xc[e.i] - xc[e.j];
        }
    }
}

void AdmmSolver::x_update(const Matrix& z, const Matrix& lambda, Matrix& x) const {
    // (I + nu L) X = A + E^T (nu Z + Lambda)
    Matrix rhs = data_;
    const auto rows = static_cast<Index>(edges_.size());
    for (Index q = 0; q < rhs.cols(); ++q) {
        double* rc = rhs.col(q).data();
        const double* zc = z.col(q).data();
        const double* lc = lambda.col(q).data();
        for (Index l = 0; l < rows; ++l) {
            const Edge& e = edges_[static_cast<std::size_t>(l)];
            const double v = nu_ * zc[l] + lc[l];
            rc[e.i] += v;
            rc[e.j] -= v;
        }
    }
    if (dense_) {
        x = dense_factor_.solve(rhs);
    } else {
        x = factor_.solve(rhs);
    }
}

SolverState AdmmSolver::solve(const SolverConfig& cfg, const SolverState* warm_start) const {
    cfg.validate();
    if (cfg.nu != nu_) throw std::invalid_argument("config nu differs from factored nu");

    const Index m = data_.rows();
    const Index n = data_.cols();
    const auto edge_rows = static_cast<Index>(edges_.size());
    const double c = half_fidelity_weight(cfg.c, cfg.convention);

    SolverState state;
    if (c == 0.0 || edges_.empty()) {
        // Penalty vanishes: (A, EA, 0) is a fixed point of the iteration.
        state.x = data_;
        edge_differences(state.x, state.z);
        state.lambda = Matrix::Zero(edge_rows, n);
        state.iterations = 1;
        state.final_change = 0.0;
        state.converged = true;
        state.change_history.push_back(0.0);
        return state;
    }

    const bool warm = warm_start != nullptr && warm_start->x.rows() == m &&
                      warm_start->x.cols() == n && warm_start->z.rows() == edge_rows &&
                      warm_start->z.cols() == n && warm_start->lambda.rows() == edge_rows &&
                      warm_start->lambda.cols() == n;
    if (warm) {
        state.x = warm_start->x;
        state.z = warm_start->z;
        state.lambda = warm_start->lambda;
    } else {
        state.x = Matrix::Zero(m, n);
        state.z = Matrix::Zero(edge_rows, n);
        state.lambda = Matrix::Zero(edge_rows, n);
    }

    std::vector<double> thresholds(edges_.size());
    for (std::size_t l = 0; l < edges_.size(); ++l) thresholds[l] = c * edges_[l].weight / nu_;

    Matrix x_prev;
    Matrix diff;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        x_prev = state.x;
        x_update(state.z, state.lambda, state.x);
        edge_differences(state.x, diff);
        for (Index q = 0; q < n; ++q) {
            for (Index l = 0; l < edge_rows; ++l) {
                const double d = diff(l, q);
                const double v = d - state.lambda(l, q) / nu_;
                const double t = thresholds[static_cast<std::size_t>(l)];
                const double z = v > t ? v - t : (v < -t ? v + t : 0.0);
                state.z(l, q) = z;
                state.lambda(l, q) += nu_ * (z - d);
            }
        }
        const double change = (state.x - x_prev).norm();
        const double primal = (state.z - diff).norm();
        state.change_history.push_back(change);
        state.iterations = it;
        state.final_change = change;
        state.primal_residual = primal;
        if (change <= cfg.tol && primal <= cfg.tol) {
            state.converged = true;
            break;
        }
    }
    return state;
}

SolverState admm_solve(const DataMatrix& data, const EdgeSet& edges, const SolverConfig& cfg) {
    cfg.validate();
    return AdmmSolver(data, edges, cfg.nu).solve(cfg);
}

namespace {

void check_shapes(const DataMatrix& data, const Matrix& x, const EdgeSet& edges) {
    if (x.rows() != data.rows() || x.cols() != data.cols()) {
        throw std::invalid_argument("centroid matrix shape does not match data");
    }
    if (edges.nodes() != data.rows()) {
        throw std::invalid_argument("edge set node count does not match data rows");
    }
}

double fidelity_scale(Convention convention) {
    return convention == Convention::paper_model ? 1.0 : 0.5;
}

}  // namespace

double objective(const DataMatrix& data, const Matrix& x, const EdgeSet& edges, double c,
                 Convention convention) {
    check_shapes(data, x, edges);
    double penalty = 0.0;
    for (const Edge& e : edges.edges()) {
        penalty += e.weight * (x.row(e.i) - x.row(e.j)).lpNorm<1>();
    }
    return fidelity_scale(convention) * (data.values() - x).squaredNorm() + c * penalty;
}

double kkt_residual(const DataMatrix& data, const Matrix& x, const EdgeSet& edges, double c,
                    Convention convention, double zero_tol) {
    check_shapes(data, x, edges);
    const double grad_scale = 2.0 * fidelity_scale(convention);

    double total = 0.0;
    std::vector<std::size_t> free_edges;
    std::vector<double> signs;
    for (Index q = 0; q < data.cols(); ++q) {
        Vector r = grad_scale * (x.col(q) - data.values().col(q));
        free_edges.clear();
        for (std::size_t l = 0; l < edges.size(); ++l) {
            const Edge& e = edges[l];
            const double a = c * e.weight;
            const double d = x(e.i, q) - x(e.j, q);
            if (std::abs(d) > zero_tol) {
                const double s = d > 0.0 ? a : -a;
                r(e.i) += s;
                r(e.j) -= s;
            } else if (a > 0.0) {
                free_edges.push_back(l);
            }
        }
        // Box-constrained least squares over the fused-edge sign variables,
        // by cyclic coordinate descent (convex, monotone in the residual).
        signs.assign(free_edges.size(), 0.0);
        for (int sweep = 0; sweep < 200000 && !free_edges.empty(); ++sweep) {
            double max_step = 0.0;
            for (std::size_t k = 0; k < free_edges.size(); ++k) {
                const Edge& e = edges[free_edges[k]];
                const double a = c * e.weight;
                const double ri = r(e.i) - signs[k] * a;
                const double rj = r(e.j) + signs[k] * a;
                const double s = std::clamp(-(ri - rj) / (2.0 * a), -1.0, 1.0);
                max_step = std::max(max_step, std::abs(s - signs[k]) * a);
                signs[k] = s;
                r(e.i) = ri + s * a;
                r(e.j) = rj - s * a;
            }
            if (max_step <= 1e-15 * (1.0 + r.lpNorm<Eigen::Infinity>())) break;
        }
        total += r.squaredNorm();
    }
    return std::sqrt(total);
}

}  // namespace convexclust
