#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plab/grid.hpp"

namespace plab {

/// A ball {|x - center| < radius} on which a potential drops to its floor value.
struct Well {
    int index = 0;
    Point center{0.0, 0.0, 0.0};
    double radius = 0.0;
};

/// Potential V >= 1 with the candidate confinement pair (kappa, gamma) used to
/// define the bad sets E_R = {|x| >= R, V(x) < kappa |x|^gamma}.
struct Potential {
    std::function<double(const Point&)> evaluator;
    double kappa = 1.0;
    double gamma = 1.0;
    std::string label;
    /// Known wells (empty unless the constructor places them).
    std::vector<Well> wells;

    double operator()(const Point& x) const { return evaluator(x); }
    /// True iff x belongs to {V < kappa |x|^gamma}.
    bool is_bad(const Point& x) const;
};

/// V(x) = 1 + |x|^gamma.
Potential polynomial_trap(double gamma, double kappa = 1.0);

/// 1 + |x|^gamma outside the wells B(2^k e_1, 2^{-2k}), k >= 1, and 1 inside.
Potential sparse_wells(double gamma, double kappa = 1.0);

/// User-supplied evaluator; V >= 1 is checked when the potential is sampled.
Potential custom_potential(std::string label, std::function<double(const Point&)> evaluator,
                           double kappa, double gamma);

/// Samples V on the grid, rejecting any node with V < 1.
GridFunction sample_potential(const Potential& v, const GridSpec& spec);

/// Quadrature measure of E_R restricted to the box.
double bad_set_measure(const Potential& v, const GridSpec& spec, double radius);

/// Seeded Monte Carlo estimate of the same quantity (uniform samples in the
/// box); a cross-check for wells narrower than the grid spacing.
double bad_set_measure_mc(const Potential& v, const GridSpec& spec, double radius,
                          std::size_t samples, std::uint64_t seed);

struct ConfinementReport {
    std::string label;
    double kappa = 1.0;
    double gamma = 1.0;
    std::string grid_id;
    std::vector<double> radii;
    std::vector<double> bad_measures;
    double total_bad_measure = 0.0;
    bool classically_confining = true;
    std::optional<Point> violation_witness;
    /// Indices of in-box wells whose diameter is below the grid spacing.
    std::vector<int> sub_resolution_wells;
};

ConfinementReport confinement_report(const Potential& v, const GridSpec& spec,
                                     const std::vector<double>& radii);

void to_json(nlohmann::json& j, const ConfinementReport& r);

}  // namespace plab
