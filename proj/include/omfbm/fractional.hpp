#pragma once

#include "omfbm/grid.hpp"

#include <Eigen/Dense>

namespace omfbm {

/// A scalar function sampled at the nodes of a grid.
struct SampledFn {
    Grid grid;
    Eigen::VectorXd values;

    SampledFn(Grid g, Eigen::VectorXd v);
    template <class F>
    static SampledFn from_function(const Grid& g, F&& f) {
        Eigen::VectorXd v(g.size());
        for (int j = 0; j < g.size(); ++j) v[j] = f(g.node(j));
        return SampledFn(g, std::move(v));
    }
};

enum class FracOp { Integral, Derivative };

// How a sampled input is interpolated between nodes.
//   Nodal: piecewise linear through n+1 node values.
//   Cellwise: piecewise constant, one value per cell (n values).
enum class Basis { Nodal, Cellwise };

SampledFn frac_integral(const SampledFn& f, double alpha);
SampledFn frac_derivative(const SampledFn& g, double alpha);

// t^outer * Op^alpha[ s^inner f ].  Node 0 follows the limit convention: the value is the
// finite limit of the product when it exists, otherwise std::domain_error.
SampledFn weighted_op(const SampledFn& f, double alpha, double outer, FracOp which, double inner = 0.0);

/*
 * Matrix forms. Row i gives the value at t_i; columns follow the basis. Weighted
 * integral matrices include the inner weight s^inner inside the product integration
 * and scale row i >= 1 by t_i^outer. Row 0 holds the limit at t = 0 when the total
 * exponent outer+inner+alpha is 0 (Nodal only), zeros otherwise.
 */
Eigen::MatrixXd integral_matrix(const Grid& g, double alpha, double inner = 0.0, double outer = 0.0,
                                Basis basis = Basis::Nodal);

// Marchaud derivative of the piecewise-linear interpolant. The g_0 column is kept, so the
// matrix also applies to unpinned input (then D^alpha g(t) ~ g_0 t^-alpha / Gamma(1-alpha)).
// Row 0 is zero.
Eigen::MatrixXd marchaud_matrix(const Grid& g, double alpha);

}  // namespace omfbm
