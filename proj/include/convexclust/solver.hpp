#pragma once

// ADMM for weighted sum-of-l1 convex clustering
//
//   minimize_X  f(A - X) + c * sum_{l in edges} w_l * ||X_{l.i} - X_{l.j}||_1
//
// with f = ||.||_F^2 (Convention::paper_model) or f = 0.5 ||.||_F^2
// (Convention::half_fidelity). The iteration itself always works on the
// half-fidelity form; a paper-model weight c is run as c / 2.

#include "convexclust/core.hpp"
#include "convexclust/weights.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include <optional>
#include <string_view>
#include <vector>

namespace convexclust {

enum class Convention { paper_model, half_fidelity };

std::string_view to_string(Convention c) noexcept;
/// Accepts "paper"/"paper_model" and "half"/"half_fidelity".
Convention parse_convention(std::string_view name);

/// Weight to use in the half-fidelity objective for the same minimizer.
double half_fidelity_weight(double c, Convention convention) noexcept;

struct SolverConfig {
    double c = 0.0;
    double nu = 1.0;
    double tol = 1e-4;
    int max_iter = 10000;
    Convention convention = Convention::paper_model;

    /// Throws std::invalid_argument on c < 0, nu <= 0, tol <= 0 or max_iter < 1.
    void validate() const;
};

struct SolverState {
    Matrix x;       ///< m x n centroids
    Matrix z;       ///< |edges| x n split variables
    Matrix lambda;  ///< |edges| x n multipliers
    int iterations = 0;
    double final_change = 0.0;
    /// ||Z - E X||_F after the last iteration.
    double primal_residual = 0.0;
    bool converged = false;
    std::vector<double> change_history;
};

/// Componentwise sign(v) * max(|v| - t, 0). Throws on t < 0.
Vector soft_threshold(const Vector& v, double t);
double soft_threshold(double v, double t);

/// Reusable solver: factors I + nu * L once for a fixed (data, edges, nu),
/// then solves any number of c values, optionally warm-started.
class AdmmSolver {
public:
    AdmmSolver(const DataMatrix& data, const EdgeSet& edges, double nu = 1.0);

    /// cfg.nu must equal the factored nu.
    SolverState solve(const SolverConfig& cfg, const SolverState* warm_start = nullptr) const;

    const EdgeSet& edges() const noexcept { return edges_; }
    double nu() const noexcept { return nu_; }

private:
    void x_update(const Matrix& z, const Matrix& lambda, Matrix& x) const;
    void edge_differences(const Matrix& x, Matrix& out) const;

    Matrix data_;
    EdgeSet edges_;
    double nu_;
    bool dense_ = false;
    Eigen::SimplicialLLT<SparseMatrix> factor_;
    Eigen::LLT<Matrix> dense_factor_;
};

SolverState admm_solve(const DataMatrix& data, const EdgeSet& edges, const SolverConfig& cfg);

/// Objective value under the requested convention.
double objective(const DataMatrix& data, const Matrix& x, const EdgeSet& edges, double c,
                 Convention convention);

/// Frobenius norm of the smallest element of the subdifferential at X.
/// Coordinates with |X_iq - X_jq| <= zero_tol count as fused; their sign
/// variables are chosen in [-1, 1] to minimize the residual.
double kkt_residual(const DataMatrix& data, const Matrix& x, const EdgeSet& edges, double c,
                    Convention convention, double zero_tol = 1e-9);

}  // namespace convexclust
