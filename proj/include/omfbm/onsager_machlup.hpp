#pragma once

#include "omfbm/cameron_martin.hpp"
#include "omfbm/grid.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace omfbm {

/*
 * Drift b: R^d -> R^d. The named fields are all coordinatewise, b_i(x) = phi_i(x_i);
 * `scalar` and `dscalar` expose that structure for the Monte Carlo inner loops.
 * A general field can be built from b and jacobian directly.
 */
struct DriftField {
    std::string name;
    std::vector<double> params;
    int dim = 1;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> b;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
    std::function<double(int, double)> scalar;   // empty for non-coordinatewise fields
    std::function<double(int, double)> dscalar;
    double sup_b = std::numeric_limits<double>::infinity();
    double sup_db = std::numeric_limits<double>::infinity();

    double divergence(const Eigen::VectorXd& x) const { return jacobian(x).trace(); }
    bool coordinatewise() const { return static_cast<bool>(scalar); }
};

// zero | constant [c] or [c1..cd] | linear [lambda] (b = -lambda x) | tanh [kappa]
// (b = kappa tanh(x/kappa)) | polynomial [a0, a1, ...] (b_i = sum a_k x_i^k)
DriftField make_drift(const std::string& name, const std::vector<double>& params, int dim);

// Largest relative mismatch between jacobian and central differences of b at `points` random
// points drawn from N(0, scale^2).
double jacobian_check(const DriftField& drift, int points, double scale, std::uint64_t seed);

// X_{i+1} = X_i + b(X_i) dt + (B_{i+1} - B_i), X_0 = 0.
Path euler_solve(const DriftField& drift, const Path& noise, const Grid& grid);
// Scalar inner loop for coordinatewise drifts; x and B have n+1 entries.
void euler_solve_1d(const DriftField& drift, int component, const double* B, double* x, int n, double dt);

struct OmReport {
    double j_value = 0.0;
    double cm_term = 0.0;   // |h - int b(h)|_H^2
    double div_term = 0.0;  // int_0^1 div b(h_t) dt
    double cm_norm_h = 0.0; // |h|_H, for reference
};

OmReport om_functional(const DriftField& drift, const CmElement& h, const HurstConfig& cfg);

struct OptimizerParams {
    int basis_size = 32;       // shifted Legendre polynomials per component, <= 64
    int max_iter = 400;
    long max_evals = 200000;
    double tol = 1e-6;         // on the max-norm of the reduced gradient
    double fd_step = 1e-7;
};

enum class OptStatus { Converged, BudgetExhausted, LineSearchStalled };
std::string to_string(OptStatus s);

struct MppResult {
    CmElement h;
    OmReport report;
    OptStatus status = OptStatus::BudgetExhausted;
    int iterations = 0;
    long evaluations = 0;
    double grad_norm = 0.0;
    std::vector<double> history;  // -J after each accepted step
    Eigen::MatrixXd coefficients; // d x m basis coordinates of f
};

/*
 * Maximizes J over h = K f with f in the span of the first m orthonormal Legendre
 * polynomials per component. An endpoint constraint h(1) = x_T is removed by writing the
 * coordinates as c0 + N z with N spanning the null space of the endpoint functional.
 */
MppResult most_probable_path(const DriftField& drift, const std::optional<Eigen::VectorXd>& endpoint,
                             const HurstConfig& cfg, const Grid& grid, const OptimizerParams& opt = {});

// Orthonormal shifted Legendre polynomials on [0,1] at the grid nodes, m x (n+1).
Eigen::MatrixXd legendre_basis(const Grid& g, int m);

}  // namespace omfbm
