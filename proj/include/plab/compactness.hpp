#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "plab/asymptotic_space.hpp"
#include "plab/grid.hpp"

namespace plab {

/// Finite family of grid functions sharing one grid.
struct FunctionFamily {
    std::string label;
    std::vector<GridFunction> members;

    /// Throws if empty or if the members live on different grids.
    void validate() const;
};

/// One sampled point of a sup-over-family map.
struct MapPoint {
    double at = 0.0;
    double value = 0.0;
};

struct FamilyReport {
    std::string label;
    double p = 2.0;
    double eps = 0.0;
    std::vector<MapPoint> translation_modulus;
    std::vector<MapPoint> tails;
    std::vector<MapPoint> superlevels;
    /// Verdicts per condition: "decaying" or "not observed".
    std::string translation_verdict;
    std::string tail_verdict;
    std::string superlevel_verdict;

    /// Filled by ark_check only.
    bool has_ark = false;
    double q = 0.0;
    double ark_bound = 0.0;
    std::string ark_tail_verdict;
    /// Hypotheses observed and all three conditions decaying.
    bool ark_consistent = false;
};

void to_json(nlohmann::json& j, const MapPoint& m);
void to_json(nlohmann::json& j, const FamilyReport& r);

/// Centered maximal function: the largest average of |u| over the sets
/// {|z - x| <= r} within the box, for r in {h, 2h, ..., ceil(2 L sqrt(n) / h) h},
/// with trapezoid weights.
GridFunction maximal(const GridFunction& u);

/// Integer node offsets nearest to the shift y.
std::array<long, 3> lattice_shift(const GridSpec& spec, const Point& y);

/// h^n sum over the infinite lattice of min(|u(x + y) - u(x)|, 1)^p with u
/// extended by zero outside the box and y rounded to the lattice.
double translation_defect(const GridFunction& u, const Point& y, double p);

/// Empirical constant max |u(x+y) - u(x)| / (|y| (M|grad u|(x+y) + M|grad u|(x)))
/// over the sample nodes (x and x+y inside the box). Nodes with zero
/// denominator and nonzero numerator are excluded and counted.
EstimateReport maximal_translation_check(const GridFunction& u, const Point& y,
                                         const std::vector<std::size_t>& sample_nodes);

/// Refinement stability: lhs = max(C_fine / C_coarse, C_coarse / C_fine), rhs = 2.
EstimateReport maximal_refinement_check(const EstimateReport& coarse, const EstimateReport& fine);

/// Kolmogorov-Riesz condition maps. Shifts are applied along each axis and
/// the supremum is taken over axes and members. Conditions (i) and (ii) are
/// "decaying" when some map value is below eps^p, condition (iii) when some
/// value is below eps.
FamilyReport kr_report(const FunctionFamily& fam, double p, const std::vector<double>& shift_grid,
                       const std::vector<double>& R_grid, const std::vector<double>& K_grid,
                       double eps);

/// Empirical hypotheses: C = sup(||f||_p + ||grad f||_{q,inf}) and the tail
/// map, cross-checked against kr_report.
FamilyReport ark_check(const FunctionFamily& fam, double p, double q,
                       const std::vector<double>& shift_grid, const std::vector<double>& R_grid,
                       const std::vector<double>& K_grid, double eps);

/// Greedy farthest-point net in the Lambda^p metric; the first member is
/// the seed and ties go to the lowest index.
std::vector<std::size_t> epsilon_net(const FunctionFamily& fam, double p, double eps);

/// max over members of the distance to the nearest net member.
double net_coverage(const FunctionFamily& fam, double p, const std::vector<std::size_t>& net);

}  // namespace plab
