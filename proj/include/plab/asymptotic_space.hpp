#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "plab/grid.hpp"

namespace plab {

/// Exponent p >= 1. `require_stable` additionally enforces p >= 2, the regime
/// in which the monotonicity-based estimates are available.
class ExponentP {
public:
    explicit ExponentP(double p, bool require_stable = false);

    double value() const { return p_; }
    bool stable_regime() const { return p_ >= 2.0; }
    /// p' = p/(p-1); throws for p == 1.
    double conjugate() const;

private:
    double p_;
};

/// Default tolerances: discretization-affected inequalities vs pointwise
/// algebraic identities.
inline constexpr double kDiscretizationTol = 5e-2;
inline constexpr double kAlgebraicTol = 1e-12;

/// One inequality lhs <= rhs together with its verdict.
struct EstimateReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool pass = false;
    double tol = 0.0;
    nlohmann::json context = nlohmann::json::object();
};

/// Builds a report with slack = rhs - lhs and pass <=> lhs <= rhs * (1 + tol).
EstimateReport make_report(std::string name, double lhs, double rhs, double tol,
                           nlohmann::json context = nlohmann::json::object());

void to_json(nlohmann::json& j, const EstimateReport& r);
void from_json(const nlohmann::json& j, EstimateReport& r);

/// T_t(s) = max(-t, min(s, t)).
double truncate(double s, double level);
GridFunction truncate(const GridFunction& u, double level);

/// Nodes where |u| < level; the support of the chain-rule gradient of T_level(u).
std::vector<bool> below_level_mask(const GridFunction& u, double level);
/// grad T_t(u) = grad(u) restricted to {|u| < t} (ties get 0).
VectorField chain_rule_gradient(const GridFunction& u, const VectorField& grad_u, double level);

/// (int min(|u|,1)^p)^(1/p)
double lambda_fnorm(const GridFunction& u, double p);
double lambda_dist(const GridFunction& u, const GridFunction& v, double p);

double lp_norm(const GridFunction& u, double p);
/// (int |grad u|^p + int V |u|^p)^(1/p); requires V >= 1 at every node.
double x_norm(const GridFunction& u, const VectorField& grad, const GridFunction& potential,
              double p);

/// sup_lambda lambda |{|u| > lambda}|^(1/q), evaluated exactly at the distinct
/// sample magnitudes using the measure of {|u| >= v}.
double weak_lq_quasinorm(const GridFunction& u, double q);

/// int_{|x|>R} min(|u|,1)^p
double tail_lambda(const GridFunction& u, double radius, double p);

/// Quadrature measure of {|u| > K}.
double superlevel_measure(const GridFunction& u, double level);

}  // namespace plab
