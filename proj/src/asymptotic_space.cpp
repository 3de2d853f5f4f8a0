#include "plab/asymptotic_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace plab {

ExponentP::ExponentP(double p, bool require_stable) : p_(p)
{
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw std::invalid_argument("ExponentP: p must be a finite number >= 1");
    }
    if (require_stable && p < 2.0) {
        throw std::invalid_argument(
            "ExponentP: p >= 2 is required (existence/uniqueness and stability need p >= 2)");
    }
}

double ExponentP::conjugate() const
{
    if (p_ == 1.0) {
        throw std::domain_error("ExponentP: conjugate exponent undefined for p = 1");
    }
    return p_ / (p_ - 1.0);
}

EstimateReport make_report(std::string name, double lhs, double rhs, double tol,
                           nlohmann::json context)
{
    EstimateReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = rhs - lhs;
    r.tol = tol;
    r.pass = lhs <= rhs * (1.0 + tol);
    r.context = std::move(context);
    return r;
}

void to_json(nlohmann::json& j, const EstimateReport& r)
{
    j = nlohmann::json{{"name", r.name}, {"lhs", r.lhs},   {"rhs", r.rhs},        {"slack", r.slack},
                       {"pass", r.pass}, {"tol", r.tol},   {"context", r.context}};
}

void from_json(const nlohmann::json& j, EstimateReport& r)
{
    j.at("name").get_to(r.name);
    j.at("lhs").get_to(r.lhs);
    j.at("rhs").get_to(r.rhs);
    j.at("slack").get_to(r.slack);
    j.at("pass").get_to(r.pass);
    j.at("tol").get_to(r.tol);
    r.context = j.at("context");
}

double truncate(double s, double level)
{
    return std::max(-level, std::min(s, level));
}

GridFunction truncate(const GridFunction& u, double level)
{
    if (!(level > 0.0)) {
        throw std::invalid_argument("truncate: level must be positive");
    }
    return u.map([level](double s) { return truncate(s, level); });
}

std::vector<bool> below_level_mask(const GridFunction& u, double level)
{
    std::vector<bool> mask(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        mask[i] = std::abs(u[i]) < level;
    }
    return mask;
}

VectorField chain_rule_gradient(const GridFunction& u, const VectorField& grad_u, double level)
{
    require_same_spec(u.spec(), grad_u.spec(), "chain_rule_gradient");
    return grad_u.masked(below_level_mask(u, level));
}

namespace {

void require_exponent(double p, const char* what)
{
    if (!(p >= 1.0)) {
        throw std::invalid_argument(std::string(what) + ": exponent must be >= 1");
    }
}

}  // namespace

double lambda_fnorm(const GridFunction& u, double p)
{
    require_exponent(p, "lambda_fnorm");
    const auto clipped = u.map([p](double s) { return std::pow(std::min(std::abs(s), 1.0), p); });
    return std::pow(integrate(clipped), 1.0 / p);
}

double lambda_dist(const GridFunction& u, const GridFunction& v, double p)
{
    require_same_spec(u.spec(), v.spec(), "lambda_dist");
    return lambda_fnorm(u - v, p);
}

double lp_norm(const GridFunction& u, double p)
{
    require_exponent(p, "lp_norm");
    return std::pow(integrate(u.map([p](double s) { return std::pow(std::abs(s), p); })), 1.0 / p);
}

double x_norm(const GridFunction& u, const VectorField& grad, const GridFunction& potential,
              double p)
{
    require_exponent(p, "x_norm");
    require_same_spec(u.spec(), grad.spec(), "x_norm");
    require_same_spec(u.spec(), potential.spec(), "x_norm");
    for (std::size_t i = 0; i < potential.size(); ++i) {
        if (potential[i] < 1.0) {
            throw std::invalid_argument("x_norm: potential must be >= 1 at every node (node " +
                                        std::to_string(i) + ")");
        }
    }
    const GridSpec& spec = u.spec();
    const GridFunction grad_mag = grad.magnitude();
    double sum = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        sum += spec.weight(i) *
               (std::pow(grad_mag[i], p) + potential[i] * std::pow(std::abs(u[i]), p));
    }
    return std::pow(sum, 1.0 / p);
}

double weak_lq_quasinorm(const GridFunction& u, double q)
{
    require_exponent(q, "weak_lq_quasinorm");
    const GridSpec& spec = u.spec();
    std::vector<std::size_t> order(spec.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(u[a]) > std::abs(u[b]);
    });
    double best = 0.0;
    double measure = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double level = std::abs(u[order[i]]);
        if (level == 0.0) {
            break;
        }
        // Accumulate every node sharing this magnitude: measure of {|u| >= level}.
        while (i < order.size() && std::abs(u[order[i]]) == level) {
            measure += spec.weight(order[i]);
            ++i;
        }
        best = std::max(best, level * std::pow(measure, 1.0 / q));
    }
    return best;
}

double tail_lambda(const GridFunction& u, double radius, double p)
{
    require_exponent(p, "tail_lambda");
    const auto clipped = u.map([p](double s) { return std::pow(std::min(std::abs(s), 1.0), p); });
    return annulus_integrate(clipped, radius);
}

double superlevel_measure(const GridFunction& u, double level)
{
    if (!(level > 0.0)) {
        throw std::invalid_argument("superlevel_measure: level must be positive");
    }
    const GridSpec& spec = u.spec();
    double measure = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (std::abs(u[i]) > level) {
            measure += spec.weight(i);
        }
    }
    return measure;
}

}  // namespace plab
