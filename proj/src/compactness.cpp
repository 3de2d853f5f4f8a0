#include "plab/compactness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace plab {

namespace {

constexpr const char* kDecaying = "decaying";
constexpr const char* kNotObserved = "not observed";

std::string verdict(const std::vector<MapPoint>& map, double threshold)
{
    const bool below = std::any_of(map.begin(), map.end(),
                                   [&](const MapPoint& m) { return m.value < threshold; });
    return below ? kDecaying : kNotObserved;
}

void require_grid(const std::vector<double>& g, const char* what)
{
    if (g.empty()) {
        throw std::invalid_argument(std::string(what) + " must be nonempty");
    }
}

}  // namespace

void FunctionFamily::validate() const
{
    if (members.empty()) {
        throw std::invalid_argument("FunctionFamily: family must be nonempty");
    }
    for (const auto& m : members) {
        require_same_spec(members.front().spec(), m.spec(), "FunctionFamily");
    }
}

void to_json(nlohmann::json& j, const MapPoint& m)
{
    j = nlohmann::json::array({m.at, m.value});
}

void to_json(nlohmann::json& j, const FamilyReport& r)
{
    j = nlohmann::json{{"label", r.label},
                       {"p", r.p},
                       {"eps", r.eps},
                       {"translation_modulus", r.translation_modulus},
                       {"tails", r.tails},
                       {"superlevels", r.superlevels},
                       {"verdicts",
                        {{"translation", r.translation_verdict},
                         {"tails", r.tail_verdict},
                         {"superlevels", r.superlevel_verdict}}}};
    if (r.has_ark) {
        j["ark"] = {{"q", r.q},
                    {"C", r.ark_bound},
                    {"tail_hypothesis", r.ark_tail_verdict},
                    {"consistent", r.ark_consistent}};
    }
}

GridFunction maximal(const GridFunction& u)
{
    const GridSpec& spec = u.spec();
    const int n = spec.dim();
    const long m = static_cast<long>(spec.points());
    const double h = spec.spacing();
    const long bins = static_cast<long>(
        std::ceil(2.0 * spec.half_width() * std::sqrt(static_cast<double>(n)) / h - 1e-9));

    // bin_of[s] = ceil(sqrt(s)) for squared integer distances s.
    const long max_sq = static_cast<long>(n) * (m - 1) * (m - 1);
    std::vector<long> bin_of(static_cast<std::size_t>(max_sq + 1));
    long b = 0;
    for (long s = 0; s <= max_sq; ++s) {
        while (b * b < s) ++b;
        bin_of[static_cast<std::size_t>(s)] = b;
    }

    std::vector<double> mass(static_cast<std::size_t>(bins + 1));
    std::vector<double> measure(static_cast<std::size_t>(bins + 1));
    std::vector<double> out(spec.size());
    for (std::size_t x = 0; x < spec.size(); ++x) {
        std::fill(mass.begin(), mass.end(), 0.0);
        std::fill(measure.begin(), measure.end(), 0.0);
        const auto ix = spec.unravel(x);
        for (std::size_t z = 0; z < spec.size(); ++z) {
            const auto iz = spec.unravel(z);
            long s = 0;
            for (int d = 0; d < n; ++d) {
                const long dd = static_cast<long>(ix[d]) - static_cast<long>(iz[d]);
                s += dd * dd;
            }
            const auto bin = static_cast<std::size_t>(std::min(bin_of[static_cast<std::size_t>(s)], bins));
            const double w = spec.weight(z);
            mass[bin] += w * std::abs(u[z]);
            measure[bin] += w;
        }
        double best = 0.0;
        double cm = mass[0];
        double cw = measure[0];
        for (std::size_t r = 1; r < mass.size(); ++r) {
            cm += mass[r];
            cw += measure[r];
            best = std::max(best, cm / cw);
        }
        out[x] = best;
    }
    return GridFunction(spec, std::move(out));
}

std::array<long, 3> lattice_shift(const GridSpec& spec, const Point& y)
{
    std::array<long, 3> s{0, 0, 0};
    for (int d = 0; d < spec.dim(); ++d) {
        s[d] = std::lround(y[d] / spec.spacing());
    }
    return s;
}

double translation_defect(const GridFunction& u, const Point& y, double p)
{
    const GridSpec& spec = u.spec();
    const int n = spec.dim();
    const long m = static_cast<long>(spec.points());
    const auto s = lattice_shift(spec, y);
    for (int d = 0; d < n; ++d) {
        if (std::abs(s[d]) >= m) {
            throw std::invalid_argument("translation_defect: shift exceeds the box");
        }
    }
    auto value_at = [&](const std::array<long, 3>& idx) {
        std::array<std::size_t, 3> j{0, 0, 0};
        for (int d = 0; d < n; ++d) {
            if (idx[d] < 0 || idx[d] >= m) return 0.0;
            j[d] = static_cast<std::size_t>(idx[d]);
        }
        return u[spec.ravel(j)];
    };
    auto clip = [p](double a) { return std::pow(std::min(std::abs(a), 1.0), p); };

    double sum = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto ui = spec.unravel(i);
        std::array<long, 3> x{0, 0, 0}, shifted{0, 0, 0}, back{0, 0, 0};
        bool back_inside = true;
        for (int d = 0; d < n; ++d) {
            x[d] = static_cast<long>(ui[d]);
            shifted[d] = x[d] + s[d];
            back[d] = x[d] - s[d];
            back_inside = back_inside && back[d] >= 0 && back[d] < m;
        }
        // Lattice points x in the box.
        sum += clip(value_at(shifted) - u[i]);
        // Lattice points x - s outside the box, where u(x - s) = 0.
        if (!back_inside) sum += clip(u[i]);
    }
    return sum * spec.cell_volume();
}

EstimateReport maximal_translation_check(const GridFunction& u, const Point& y,
                                         const std::vector<std::size_t>& sample_nodes)
{
    const GridSpec& spec = u.spec();
    const int n = spec.dim();
    const long m = static_cast<long>(spec.points());
    const auto s = lattice_shift(spec, y);
    Point y_lat{0.0, 0.0, 0.0};
    for (int d = 0; d < n; ++d) y_lat[d] = static_cast<double>(s[d]) * spec.spacing();
    const double ylen = norm(y_lat);

    const GridFunction mg = maximal(gradient(u).magnitude());
    double c_emp = 0.0;
    std::size_t flagged = 0;
    std::size_t used = 0;
    std::size_t outside = 0;
    for (std::size_t x : sample_nodes) {
        if (x >= spec.size()) {
            throw std::invalid_argument("maximal_translation_check: sample node out of range");
        }
        const auto ix = spec.unravel(x);
        std::array<std::size_t, 3> jx{0, 0, 0};
        bool inside = true;
        for (int d = 0; d < n; ++d) {
            const long v = static_cast<long>(ix[d]) + s[d];
            inside = inside && v >= 0 && v < m;
            jx[d] = static_cast<std::size_t>(std::max(v, 0L));
        }
        if (!inside) {
            ++outside;
            continue;
        }
        const std::size_t xs = spec.ravel(jx);
        const double num = std::abs(u[xs] - u[x]);
        const double den = ylen * (mg[xs] + mg[x]);
        if (den == 0.0) {
            if (num != 0.0) ++flagged;
            else ++used;
            continue;
        }
        ++used;
        c_emp = std::max(c_emp, num / den);
    }
    EstimateReport r = make_report("maximal_translation", c_emp, c_emp, 0.0,
                                   {{"shift", y_lat},
                                    {"samples_used", used},
                                    {"flagged_zero_denominator", flagged},
                                    {"samples_outside_box", outside},
                                    {"grid", spec.id()}});
    r.pass = std::isfinite(c_emp);
    return r;
}

EstimateReport maximal_refinement_check(const EstimateReport& coarse, const EstimateReport& fine)
{
    const double a = coarse.lhs;
    const double b = fine.lhs;
    double ratio = 1.0;
    if (a > 0.0 && b > 0.0) {
        ratio = std::max(a / b, b / a);
    } else if (a != b) {
        ratio = std::numeric_limits<double>::infinity();
    }
    EstimateReport r = make_report("maximal_refinement", std::isfinite(ratio) ? ratio : 1e300, 2.0,
                                   0.0, {{"C_coarse", a}, {"C_fine", b}});
    r.pass = r.pass && coarse.pass && fine.pass;
    return r;
}

FamilyReport kr_report(const FunctionFamily& fam, double p, const std::vector<double>& shift_grid,
                       const std::vector<double>& R_grid, const std::vector<double>& K_grid,
                       double eps)
{
    fam.validate();
    require_grid(shift_grid, "kr_report: shift_grid");
    require_grid(R_grid, "kr_report: R_grid");
    require_grid(K_grid, "kr_report: K_grid");
    if (!(eps > 0.0)) {
        throw std::invalid_argument("kr_report: eps must be positive");
    }
    const int n = fam.members.front().spec().dim();
    FamilyReport rep;
    rep.label = fam.label;
    rep.p = p;
    rep.eps = eps;
    for (double a : shift_grid) {
        double sup = 0.0;
        for (int d = 0; d < n; ++d) {
            Point y{0.0, 0.0, 0.0};
            y[d] = a;
            for (const auto& f : fam.members) sup = std::max(sup, translation_defect(f, y, p));
        }
        rep.translation_modulus.push_back({a, sup});
    }
    for (double R : R_grid) {
        double sup = 0.0;
        for (const auto& f : fam.members) sup = std::max(sup, tail_lambda(f, R, p));
        rep.tails.push_back({R, sup});
    }
    for (double K : K_grid) {
        double sup = 0.0;
        for (const auto& f : fam.members) sup = std::max(sup, superlevel_measure(f, K));
        rep.superlevels.push_back({K, sup});
    }
    const double eps_p = std::pow(eps, p);
    rep.translation_verdict = verdict(rep.translation_modulus, eps_p);
    rep.tail_verdict = verdict(rep.tails, eps_p);
    rep.superlevel_verdict = verdict(rep.superlevels, eps);
    return rep;
}

FamilyReport ark_check(const FunctionFamily& fam, double p, double q,
                       const std::vector<double>& shift_grid, const std::vector<double>& R_grid,
                       const std::vector<double>& K_grid, double eps)
{
    if (!(q > 1.0)) {
        throw std::invalid_argument("ark_check: q must exceed 1");
    }
    FamilyReport rep = kr_report(fam, p, shift_grid, R_grid, K_grid, eps);
    rep.has_ark = true;
    rep.q = q;
    double c = 0.0;
    for (const auto& f : fam.members) {
        c = std::max(c, lp_norm(f, p) + weak_lq_quasinorm(gradient(f).magnitude(), q));
    }
    rep.ark_bound = c;
    rep.ark_tail_verdict = rep.tail_verdict;
    rep.ark_consistent = std::isfinite(c) && rep.ark_tail_verdict == kDecaying &&
                         rep.translation_verdict == kDecaying &&
                         rep.superlevel_verdict == kDecaying;
    return rep;
}

std::vector<std::size_t> epsilon_net(const FunctionFamily& fam, double p, double eps)
{
    fam.validate();
    if (!(eps > 0.0)) {
        throw std::invalid_argument("epsilon_net: eps must be positive");
    }
    const auto& mem = fam.members;
    std::vector<std::size_t> net{0};
    std::vector<double> dist(mem.size());
    for (std::size_t i = 0; i < mem.size(); ++i) dist[i] = lambda_dist(mem[i], mem[0], p);
    while (true) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < mem.size(); ++i) {
            if (dist[i] > dist[far]) far = i;
        }
        if (dist[far] <= eps) break;
        net.push_back(far);
        for (std::size_t i = 0; i < mem.size(); ++i) {
            dist[i] = std::min(dist[i], lambda_dist(mem[i], mem[far], p));
        }
    }
    return net;
}

double net_coverage(const FunctionFamily& fam, double p, const std::vector<std::size_t>& net)
{
    fam.validate();
    if (net.empty()) {
        throw std::invalid_argument("net_coverage: net must be nonempty");
    }
    double worst = 0.0;
    for (const auto& f : fam.members) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j : net) best = std::min(best, lambda_dist(f, fam.members.at(j), p));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace plab
