#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "plab/grid.hpp"

namespace plab {

/// Knobs for the descent. Negative values select data-scaled defaults.
struct SolverOptions {
    double eps_reg = -1.0;
    double tol_residual = -1.0;
    std::size_t max_iters = 200;
};

/**
 * Discrete weak-energy problem on a box with zero Dirichlet data:
 *
 *   J(v) = 1/p sum_cells h^n |D v|^p + 1/p sum_i w_i V_i |v_i|^p - sum_i w_i f_i v_i
 *
 * where D v is the forward-difference gradient of the cell at its lower
 * corner and w_i are trapezoid weights.
 */
struct Problem {
    GridSpec spec;
    double p;
    GridFunction potential;
    GridFunction datum;
    double eps_reg;
    double tol_residual;
    std::size_t max_iters;
};

/// Validates p >= 2, V >= 1, shared grids, and resolves defaulted options.
Problem make_problem(GridFunction potential, GridFunction datum, double p,
                     SolverOptions options = {});

struct SolveResult {
    GridFunction u;
    std::size_t iterations = 0;
    double residual_sup = 0.0;
    double energy = 0.0;
    /// Values of the minimized (regularized) functional, one per accepted iterate.
    std::vector<double> energy_trace;
    bool converged = false;
    std::string status;
};

/// Unregularized J(v). Throws if v is nonzero on the boundary.
double energy(const GridFunction& v, const Problem& prob);

/// dJ/dv_i divided by the node weight at interior nodes, 0 on the boundary:
/// the discrete -div(|grad v|^{p-2} grad v) + V |v|^{p-2} v - f.
GridFunction residual(const GridFunction& v, const Problem& prob);

/// Sup norm of the residual over interior nodes.
double residual_sup(const GridFunction& v, const Problem& prob);

/// Minimizes J by damped Newton on the eps-regularized functional with a
/// monotone backtracking line search and a steepest-descent fallback.
SolveResult solve(const Problem& prob, const std::optional<GridFunction>& initial = std::nullopt);

nlohmann::json diagnostics_json(const SolveResult& res);

/// The p-Laplace flux |xi|^{p-2} xi (scalar and vector forms).
double p_flux(double s, double p);
std::vector<double> p_flux(std::span<const double> xi, double p);

}  // namespace plab
