#pragma once

#include "omfbm/fractional.hpp"
#include "omfbm/grid.hpp"
#include "omfbm/special.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>

namespace omfbm {

// R(s,t) = (s^2H + t^2H - |s-t|^2H)/2. Any H in (0,1); H = 1/2 gives min(s,t).
double covariance(double s, double t, double H);

struct CovarianceMatrix {
    Grid grid;
    Eigen::MatrixXd entries;  // (n+1) x (n+1), row/col 0 are zero
};
CovarianceMatrix covariance_matrix(const Grid& g, double H);

/// Kernel sampled on grid nodes, entry (i,j) = k(t_i, u_j).
struct KernelMatrix {
    Grid grid;
    Eigen::MatrixXd entries;
};

// Volterra kernel of fBm, K(t,u) = c_H (t-u)^(H-1/2) F(H-1/2, 1/2-H; H+1/2; 1-t/u) for u < t.
double kernel_K(double t, double u, const HurstConfig& cfg);

// K(t_i, u_j) for 1 <= j < i; column 0 holds the first-cell average (1/dt) int_0^dt K(t_i,u) du
// since K is infinite at u = 0.
KernelMatrix kernel_matrix_K(const Grid& g, const HurstConfig& cfg);

/*
 * Cell integrals of K(t_i, .) on the grid, computed once per (H, n) and shared.
 *   nodal(i,j): weight of f_j in int_0^t_i K(t_i,u) f(u) du, f piecewise linear
 *   cell(i,k):  int over cell k of K(t_i,u) du
 *   diag_sq(i): int over cell i-1 of K(t_i,u)^2 du
 */
struct KernelCellWeights {
    Eigen::MatrixXd nodal;
    Eigen::MatrixXd cell;
    Eigen::VectorXd diag_sq;
};
std::shared_ptr<const KernelCellWeights> kernel_cell_weights(const Grid& g, const HurstConfig& cfg);

SampledFn apply_K(const SampledFn& f, const HurstConfig& cfg);
// c_H Gamma(H+1/2) I^2H t^(1/2-H) I^(1/2-H) t^(H-1/2) f
SampledFn apply_K_composed(const SampledFn& f, const HurstConfig& cfg);
// (1/(c_H Gamma(H+1/2))) s^(H-1/2) I^(1/2-H)[ s^(1/2-H) h' ]
SampledFn apply_K_inverse_c1(const SampledFn& hprime, const HurstConfig& cfg);

enum class CmMethod {
    Derivative,  // C^1 formula on the piecewise-linear interpolant (cell slopes)
    FourFactor   // t^(1/2-H) D^(1/2-H) t^(H-1/2) D^2H h; lower accuracy, any pinned samples
};

// Matrix of h -> K^{-1}h at the nodes for pinned samples h (column 0 is irrelevant).
std::shared_ptr<const Eigen::MatrixXd> k_inverse_matrix(const Grid& g, const HurstConfig& cfg,
                                                        CmMethod method = CmMethod::Derivative);

/// Element of the Cameron-Martin space: a pinned path, optionally with its L2 preimage.
struct CmElement {
    Path h;
    std::optional<Eigen::MatrixXd> f;  // d x (n+1), K f = h

    explicit CmElement(Path p) : h(std::move(p)) {}
    CmElement(Path p, Eigen::MatrixXd pre);
    // h = K f componentwise
    static CmElement from_preimage(const Grid& g, const Eigen::MatrixXd& f, const HurstConfig& cfg);
};

// Preimage K^{-1}h per component, d x (n+1). Uses f when present.
Eigen::MatrixXd cm_preimage(const CmElement& h, const HurstConfig& cfg, CmMethod method = CmMethod::Derivative);
double cm_norm(const CmElement& h, const HurstConfig& cfg, CmMethod method = CmMethod::Derivative);
double cm_inner(const CmElement& h1, const CmElement& h2, const HurstConfig& cfg,
                CmMethod method = CmMethod::Derivative);

// Trapezoid L2 inner product of node samples on a grid with spacing dt.
double l2_inner(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b, double dt);

// sum_i sum_j u(i,j) dW(i,j), j < n: left-point (Ito) sums of K^{-1}u against the increments.
double skorokhod_integral(const Eigen::MatrixXd& u, const Eigen::MatrixXd& dW);

}  // namespace omfbm
