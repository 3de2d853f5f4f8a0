#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plab/asymptotic_space.hpp"
#include "plab/grid.hpp"
#include "plab/potentials.hpp"
#include "plab/solver.hpp"

namespace plab {

enum class Regularization { canonical, mollified };

struct SchemeConfig {
    std::vector<double> k_list{1.0, 2.0, 4.0, 8.0, 16.0};
    std::vector<double> t_grid{0.1, 0.5, 1.0, 2.0, 5.0};
    std::vector<double> alpha_grid{0.5, 1.0, 2.0};
    std::vector<double> R_grid{2.0, 4.0, 6.0};
    /// Levels for the measure diagnostics |{|u_k - u_l| > eps}|.
    std::vector<double> eps_grid{1e-3, 1e-2, 1e-1};
    double tol = kDiscretizationTol;
    SolverOptions solver{};
    Regularization regularization = Regularization::canonical;
    /// Debug knob multiplying the stability constant; 1 in normal runs.
    double stability_scale = 1.0;
    unsigned threads = 1;

    /// Throws std::invalid_argument on empty grids or a non-increasing k_list.
    void validate() const;
};

/// f_k = T_k(f) on nodes with |x| < k, zero elsewhere.
GridFunction regularize_datum(const GridFunction& f, double k);

/// The canonical f_k convolved with a normalized raised-cosine kernel of
/// radius 1/k (identity when the radius is below the spacing).
GridFunction regularize_datum_mollified(const GridFunction& f, double k);

/// lhs = ||T_t u||_X^p, rhs = t * f_ref_l1.
EstimateReport check_energy_estimate(const SolveResult& res, const Problem& prob, double t,
                                     double f_ref_l1, double tol = kDiscretizationTol);

/// lhs = tail of T_t u beyond R, rhs = |E_R| + t f_ref_l1 / (kappa R^gamma).
/// R must satisfy 0 < R < L.
EstimateReport check_tail_bound(const SolveResult& res, const Problem& prob, const Potential& v,
                                double t, double radius, double f_ref_l1,
                                double tol = kDiscretizationTol);

/// lhs = ||T_t(u_k - u_l)||_X^p, rhs = scale * 2^{p-2} t ||f_k - f_l||_1.
EstimateReport check_stability(const SolveResult& res_k, const SolveResult& res_l,
                               const GridFunction& f_k, const GridFunction& f_l,
                               const Problem& prob, double t, double tol = kDiscretizationTol,
                               double scale = 1.0);

/// lhs = |{|u| > level}|, rhs = level^{1-p} f_ref_l1.
EstimateReport check_superlevel_bound(const SolveResult& res, const Problem& prob, double level,
                                      double f_ref_l1, double tol = kDiscretizationTol);

/// H_{alpha,t}(u, phi) = T_t(T_alpha u - phi) - T_t(T_alpha u), nodewise.
GridFunction localized_test_function(const GridFunction& u, const GridFunction& phi, double alpha,
                                     double t);

/// Residual of the localized identity for Phi = H_{alpha,t}(u, phi), with u,
/// phi, V and f interpolated multilinearly and integrated by sub-cell midpoint
/// quadrature with `subdivisions` midpoints per axis and cell.
/// lhs = |LHS - RHS|, rhs = c_budget * h. Requires alpha > t + max|phi| and
/// phi vanishing on the boundary.
EstimateReport check_localized_identity(const SolveResult& res, const Problem& prob,
                                        const GridFunction& phi, double alpha, double t,
                                        double c_budget, double tol = 0.0,
                                        int subdivisions = 8);

struct IdentityStudy {
    std::vector<double> spacings;
    std::vector<double> residuals;
    double c_budget = 0.0;
    std::vector<EstimateReport> reports;
};

/// Solves on each grid (spacing halving expected), fixes c_budget = r_0 / h_0
/// from the coarsest level, and reports the budget check on finer levels, the
/// per-halving rate (2 r_{j+1} <= r_j) and node-level support inclusion.
IdentityStudy localized_identity_study(const std::vector<GridSpec>& grids,
                                       const std::function<double(const Point&)>& datum,
                                       const Potential& v, double p,
                                       const std::function<double(const Point&)>& phi,
                                       double alpha, double t, SolverOptions options = {});

/// |int |grad|^{p-2} grad . grad psi + int V |u|^{p-2} u psi - int f psi| with
/// central-difference grad psi and trapezoidal quadrature.
double distributional_residual(const GridFunction& u, const VectorField& grad,
                               const Problem& prob, const GridFunction& psi);

struct SchemeResult {
    GridSpec spec{1, 1.0, 3};
    double p = 2.0;
    std::vector<double> k_list;
    std::vector<GridFunction> data;
    std::vector<SolveResult> solutions;
    std::vector<EstimateReport> reports;
    /// d(u_k, u_l) in the Lambda^p metric.
    std::vector<std::vector<double>> pairwise_lambda;
    std::vector<double> eps_grid;
    /// measure_diag[e][k][l] = |{|u_k - u_l| > eps_grid[e]}|.
    std::vector<std::vector<std::vector<double>>> measure_diag;
    std::vector<double> alpha_grid;
    /// ||T_alpha(u_k - u_ref)||_X per alpha and k; u_ref is the last solve.
    std::vector<std::vector<double>> x_distance_to_ref;
    /// ||grad T_alpha u_k - grad T_alpha u_ref||_p on [-L/2, L/2]^n.
    std::vector<std::vector<double>> local_gradient_gap;
    std::vector<std::size_t> nonconverged;
    std::string caveat = "finite-sequence surrogate";

    bool all_pass() const;
};

SchemeResult run_scheme(const GridFunction& f, const Potential& v, double p,
                        const SchemeConfig& cfg);

/// Directory with u_k grid files, reports.json, distances.csv, diagnostics.json.
void write_scheme_result(const SchemeResult& res, const std::filesystem::path& dir);

/// 12 exp(-|x - 1.5 e1|^2) - 6 exp(-|x + 3 e1|^2).
double two_bump(const Point& x);

}  // namespace plab
