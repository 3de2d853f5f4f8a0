#include "plab/potentials.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace plab {

namespace {

// Wells beyond this index sit at |x| > 2^60 and never meet a representable box.
constexpr int kMaxWellIndex = 60;

void require_pair(double kappa, double gamma)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("potential: kappa must be positive");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("potential: gamma must be positive");
    }
}

double distance(const Point& a, const Point& b)
{
    return norm(Point{a[0] - b[0], a[1] - b[1], a[2] - b[2]});
}

}  // namespace

bool Potential::is_bad(const Point& x) const
{
    return evaluator(x) < kappa * std::pow(norm(x), gamma);
}

Potential polynomial_trap(double gamma, double kappa)
{
    require_pair(kappa, gamma);
    Potential v;
    v.evaluator = [gamma](const Point& x) { return 1.0 + std::pow(norm(x), gamma); };
    v.kappa = kappa;
    v.gamma = gamma;
    v.label = "polynomial_trap";
    return v;
}

Potential sparse_wells(double gamma, double kappa)
{
    require_pair(kappa, gamma);
    Potential v;
    for (int k = 1; k <= kMaxWellIndex; ++k) {
        v.wells.push_back(Well{k, Point{std::ldexp(1.0, k), 0.0, 0.0}, std::ldexp(1.0, -2 * k)});
    }
    v.evaluator = [gamma, wells = v.wells](const Point& x) {
        const double r = norm(x);
        for (const Well& w : wells) {
            if (w.center[0] - w.radius > r) {
                break;
            }
            if (distance(x, w.center) < w.radius) {
                return 1.0;
            }
        }
        return 1.0 + std::pow(r, gamma);
    };
    v.kappa = kappa;
    v.gamma = gamma;
    v.label = "sparse_wells";
    return v;
}

Potential custom_potential(std::string label, std::function<double(const Point&)> evaluator,
                           double kappa, double gamma)
{
    require_pair(kappa, gamma);
    if (!evaluator) {
        throw std::invalid_argument("custom_potential: empty evaluator");
    }
    Potential v;
    v.evaluator = std::move(evaluator);
    v.kappa = kappa;
    v.gamma = gamma;
    v.label = std::move(label);
    return v;
}

GridFunction sample_potential(const Potential& v, const GridSpec& spec)
{
    GridFunction g = sample(spec, v.evaluator);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] < 1.0) {
            throw std::invalid_argument("sample_potential: " + v.label + " is below 1 at node " +
                                        std::to_string(i));
        }
    }
    return g;
}

double bad_set_measure(const Potential& v, const GridSpec& spec, double radius)
{
    if (radius < 0.0) {
        throw std::invalid_argument("bad_set_measure: radius must be nonnegative");
    }
    double measure = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const Point x = spec.node(i);
        if (norm(x) >= radius && v.is_bad(x)) {
            measure += spec.weight(i);
        }
    }
    return measure;
}

double bad_set_measure_mc(const Potential& v, const GridSpec& spec, double radius,
                          std::size_t samples, std::uint64_t seed)
{
    if (samples == 0) {
        throw std::invalid_argument("bad_set_measure_mc: need at least one sample");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-spec.half_width(), spec.half_width());
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        Point x{0.0, 0.0, 0.0};
        for (int d = 0; d < spec.dim(); ++d) {
            x[d] = coord(rng);
        }
        if (norm(x) >= radius && v.is_bad(x)) {
            ++hits;
        }
    }
    return spec.box_volume() * static_cast<double>(hits) / static_cast<double>(samples);
}

ConfinementReport confinement_report(const Potential& v, const GridSpec& spec,
                                     const std::vector<double>& radii)
{
    if (radii.empty()) {
        throw std::invalid_argument("confinement_report: empty radius grid");
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < 0.0 || (i > 0 && !(radii[i] > radii[i - 1]))) {
            throw std::invalid_argument(
                "confinement_report: radii must be nonnegative and strictly increasing");
        }
    }

    ConfinementReport rep;
    rep.label = v.label;
    rep.kappa = v.kappa;
    rep.gamma = v.gamma;
    rep.grid_id = spec.id();
    rep.radii = radii;
    for (double r : radii) {
        rep.bad_measures.push_back(bad_set_measure(v, spec, r));
    }
    rep.total_bad_measure = bad_set_measure(v, spec, 0.0);

    const double r0 = radii.back();
    const double box_reach = spec.half_width();
    auto violates = [&](const Point& x) {
        return v.kappa * std::pow(norm(x), v.gamma) > 1.0 && v.is_bad(x);
    };

    if (!v.wells.empty()) {
        for (const Well& w : v.wells) {
            if (w.center[0] > box_reach) {
                break;
            }
            if (2.0 * w.radius < spec.spacing()) {
                rep.sub_resolution_wells.push_back(w.index);
            }
            if (norm(w.center) - w.radius >= r0 && violates(w.center)) {
                rep.violation_witness = w.center;
            }
        }
    } else {
        double farthest = -1.0;
        for (std::size_t i = 0; i < spec.size(); ++i) {
            const Point x = spec.node(i);
            const double r = norm(x);
            if (r >= r0 && r > farthest && violates(x)) {
                farthest = r;
                rep.violation_witness = x;
            }
        }
    }
    rep.classically_confining = !rep.violation_witness.has_value();
    return rep;
}

void to_json(nlohmann::json& j, const ConfinementReport& r)
{
    j = nlohmann::json{{"label", r.label},
                       {"kappa", r.kappa},
                       {"gamma", r.gamma},
                       {"grid", r.grid_id},
                       {"R_grid", r.radii},
                       {"bad_measures", r.bad_measures},
                       {"total_bad_measure", r.total_bad_measure},
                       {"classically_confining", r.classically_confining},
                       {"sub_resolution_wells", r.sub_resolution_wells}};
    if (r.violation_witness) {
        j["violation_witness"] = *r.violation_witness;
    } else {
        j["violation_witness"] = nullptr;
    }
}

}  // namespace plab
