#include "plab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace plab {

namespace {

void require_positive(double x, const char* what)
{
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
    }
}

void require_nonempty(const std::vector<double>& g, const char* what)
{
    if (g.empty()) {
        throw std::invalid_argument(std::string("SchemeConfig: ") + what + " must be nonempty");
    }
    for (double x : g) {
        require_positive(x, what);
    }
}

double l1(const GridFunction& f)
{
    return integrate(f.map([](double x) { return std::abs(x); }));
}

/// ||T_t w||_X^p with the chain-rule gradient of T_t.
double truncated_x_energy(const GridFunction& w, const GridFunction& potential, double p, double t)
{
    const VectorField g = chain_rule_gradient(w, gradient(w), t);
    return std::pow(x_norm(truncate(w, t), g, potential, p), p);
}

}  // namespace

void SchemeConfig::validate() const
{
    require_nonempty(k_list, "k_list");
    require_nonempty(t_grid, "t_grid");
    require_nonempty(alpha_grid, "alpha_grid");
    require_nonempty(R_grid, "R_grid");
    require_nonempty(eps_grid, "eps_grid");
    for (std::size_t i = 1; i < k_list.size(); ++i) {
        if (!(k_list[i] > k_list[i - 1])) {
            throw std::invalid_argument("SchemeConfig: k_list must be strictly increasing");
        }
    }
    if (!(tol >= 0.0)) {
        throw std::invalid_argument("SchemeConfig: tol must be nonnegative");
    }
    require_positive(stability_scale, "stability_scale");
}

GridFunction regularize_datum(const GridFunction& f, double k)
{
    require_positive(k, "regularize_datum: k");
    const GridSpec& spec = f.spec();
    std::vector<double> out(spec.size(), 0.0);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (norm(spec.node(i)) < k) {
            out[i] = truncate(f[i], k);
        }
    }
    return GridFunction(spec, std::move(out));
}

GridFunction regularize_datum_mollified(const GridFunction& f, double k)
{
    const GridFunction base = regularize_datum(f, k);
    const GridSpec& spec = f.spec();
    const double h = spec.spacing();
    const double radius = 1.0 / k;
    const long reach = static_cast<long>(std::floor(radius / h));
    if (reach < 1) {
        return base;
    }

    // Kernel stencil over the offsets in [-reach, reach]^n.
    const int n = spec.dim();
    std::vector<std::array<long, 3>> offsets;
    std::vector<double> weights;
    const long span = 2 * reach + 1;
    long count = 1;
    for (int d = 0; d < n; ++d) count *= span;
    for (long c = 0; c < count; ++c) {
        std::array<long, 3> o{0, 0, 0};
        long rem = c;
        double r2 = 0.0;
        for (int d = n - 1; d >= 0; --d) {
            o[d] = rem % span - reach;
            rem /= span;
            r2 += static_cast<double>(o[d] * o[d]) * h * h;
        }
        const double r = std::sqrt(r2);
        if (r < radius) {
            offsets.push_back(o);
            weights.push_back(1.0 + std::cos(std::numbers::pi * r / radius));
        }
    }
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;

    const long m = static_cast<long>(spec.points());
    std::vector<double> out(spec.size(), 0.0);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (spec.on_boundary(i)) {
            continue;
        }
        const auto idx = spec.unravel(i);
        double acc = 0.0;
        for (std::size_t s = 0; s < offsets.size(); ++s) {
            std::array<std::size_t, 3> j{0, 0, 0};
            bool inside = true;
            for (int d = 0; d < n; ++d) {
                const long v = static_cast<long>(idx[d]) + offsets[s][d];
                inside = inside && v >= 0 && v < m;
                j[d] = static_cast<std::size_t>(std::max(v, 0L));
            }
            if (inside) {
                acc += weights[s] * base[spec.ravel(j)];
            }
        }
        out[i] = acc;
    }
    return GridFunction(spec, std::move(out));
}

EstimateReport check_energy_estimate(const SolveResult& res, const Problem& prob, double t,
                                     double f_ref_l1, double tol)
{
    require_positive(t, "check_energy_estimate: t");
    const double lhs = truncated_x_energy(res.u, prob.potential, prob.p, t);
    return make_report("energy_estimate", lhs, t * f_ref_l1, tol,
                       {{"t", t}, {"p", prob.p}, {"f_l1", f_ref_l1}});
}

EstimateReport check_tail_bound(const SolveResult& res, const Problem& prob, const Potential& v,
                                double t, double radius, double f_ref_l1, double tol)
{
    require_positive(t, "check_tail_bound: t");
    if (!(radius > 0.0) || !(radius < prob.spec.half_width())) {
        throw std::invalid_argument("check_tail_bound: R must lie in (0, L)");
    }
    const double lhs = tail_lambda(truncate(res.u, t), radius, prob.p);
    const double bad = bad_set_measure(v, prob.spec, radius);
    const double decay = t * f_ref_l1 / (v.kappa * std::pow(radius, v.gamma));
    return make_report("tail_bound", lhs, bad + decay, tol,
                       {{"t", t},
                        {"R", radius},
                        {"bad_set_measure", bad},
                        {"kappa", v.kappa},
                        {"gamma", v.gamma},
                        {"potential", v.label}});
}

EstimateReport check_stability(const SolveResult& res_k, const SolveResult& res_l,
                               const GridFunction& f_k, const GridFunction& f_l,
                               const Problem& prob, double t, double tol, double scale)
{
    if (!(prob.p >= 2.0)) {
        throw std::invalid_argument("check_stability: requires p >= 2");
    }
    require_positive(t, "check_stability: t");
    require_same_spec(res_k.u.spec(), res_l.u.spec(), "check_stability");
    const double c_p = std::pow(2.0, prob.p - 2.0);
    const double lhs = truncated_x_energy(res_k.u - res_l.u, prob.potential, prob.p, t);
    const double df = l1(f_k - f_l);
    return make_report("stability", lhs, scale * c_p * t * df, tol,
                       {{"t", t}, {"p", prob.p}, {"C_p", c_p}, {"scale", scale}, {"f_diff_l1", df}});
}

EstimateReport check_superlevel_bound(const SolveResult& res, const Problem& prob, double level,
                                      double f_ref_l1, double tol)
{
    require_positive(level, "check_superlevel_bound: level");
    const double lhs = superlevel_measure(res.u, level);
    return make_report("superlevel_bound", lhs, std::pow(level, 1.0 - prob.p) * f_ref_l1, tol,
                       {{"level", level}, {"p", prob.p}});
}

GridFunction localized_test_function(const GridFunction& u, const GridFunction& phi, double alpha,
                                     double t)
{
    require_same_spec(u.spec(), phi.spec(), "localized_test_function");
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double ua = truncate(u[i], alpha);
        out[i] = truncate(ua - phi[i], t) - truncate(ua, t);
    }
    return GridFunction(u.spec(), std::move(out));
}

EstimateReport check_localized_identity(const SolveResult& res, const Problem& prob,
                                        const GridFunction& phi, double alpha, double t,
                                        double c_budget, double tol, int subdivisions)
{
    if (subdivisions < 1) {
        throw std::invalid_argument("check_localized_identity: subdivisions must be positive");
    }
    const GridSpec& spec = prob.spec;
    require_same_spec(phi.spec(), spec, "check_localized_identity");
    require_positive(t, "check_localized_identity: t");
    if (!(alpha > t + phi.max_abs())) {
        throw std::invalid_argument("check_localized_identity: requires alpha > t + max|phi|");
    }
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (spec.on_boundary(i) && phi[i] != 0.0) {
            throw std::invalid_argument(
                "check_localized_identity: phi must vanish on the box boundary");
        }
    }

    const int n = spec.dim();
    const double p = prob.p;
    const double h = spec.spacing();
    const std::size_t m = spec.points();
    const int corners = 1 << n;
    const int q = subdivisions;
    int sub_count = 1;
    for (int d = 0; d < n; ++d) sub_count *= q;
    const double sub_vol = std::pow(h / q, n);

    // Adds the integrand of LHS - RHS at one point with quadrature weight w.
    double identity = 0.0;
    double scale = 0.0;
    auto accumulate = [&](double w, double u, const std::array<double, 3>& gu, double ph,
                          const std::array<double, 3>& gphi, double vv, double ff) {
        const double ua = truncate(u, alpha);
        const bool in_alpha = std::abs(u) < alpha;
        const double big_phi = truncate(ua - ph, t) - truncate(ua, t);
        const bool in_shift = std::abs(ua - ph) < t;
        const bool in_plain = std::abs(ua) < t;
        double g2 = 0.0;
        for (int d = 0; d < n; ++d) {
            const double ga = in_alpha ? gu[d] : 0.0;
            g2 += ga * ga;
        }
        const double a = g2 > 0.0 ? std::pow(g2, 0.5 * (p - 2.0)) : 0.0;
        double flux_term = 0.0;
        for (int d = 0; d < n; ++d) {
            const double ga = in_alpha ? gu[d] : 0.0;
            const double gPhi = (in_shift ? ga - gphi[d] : 0.0) - (in_plain ? ga : 0.0);
            flux_term += a * ga * gPhi;
        }
        const double load = ff * big_phi;
        identity += w * (flux_term + vv * p_flux(ua, p) * big_phi - load);
        scale += w * std::abs(load);
    };

    static constexpr std::array<double, 5> gauss_x{-0.9061798459386640, -0.5384693101056831, 0.0,
                                                   0.5384693101056831, 0.9061798459386640};
    static constexpr std::array<double, 5> gauss_w{0.2369268850561891, 0.4786286704993665,
                                                   0.5688888888888889, 0.4786286704993665,
                                                   0.2369268850561891};

    // The solver's own discretization of the same identity, split by cell:
    // forward-difference flux term plus the corner share of the lumped mass.
    auto discrete_cell = [&](const std::array<double, 8>& u_c, const std::array<double, 8>& phi_big,
                             const std::array<double, 8>& v_c, const std::array<double, 8>& f_c) {
        double g2 = 0.0;
        std::array<double, 3> du{}, dphi{};
        for (int d = 0; d < n; ++d) {
            du[d] = (u_c[1 << d] - u_c[0]) / h;
            dphi[d] = (phi_big[1 << d] - phi_big[0]) / h;
            g2 += du[d] * du[d];
        }
        const double a = g2 > 0.0 ? std::pow(g2, 0.5 * (p - 2.0)) : 0.0;
        double flux = 0.0;
        for (int d = 0; d < n; ++d) flux += a * du[d] * dphi[d];
        double lumped = 0.0;
        for (int k = 0; k < corners; ++k) {
            lumped += (v_c[k] * p_flux(truncate(u_c[k], alpha), p) - f_c[k]) * phi_big[k];
        }
        const double vol = std::pow(h, n);
        return vol * flux + vol / corners * lumped;
    };

    double discrete = 0.0;
    double defect = 0.0;
    std::array<double, 8> cu{}, cphi{}, cv{}, cf{}, cbig{};
    std::vector<double> cuts;
    for (std::size_t c = 0; c < spec.size(); ++c) {
        const auto idx = spec.unravel(c);
        bool lower = true;
        for (int d = 0; d < n; ++d) lower = lower && idx[d] < m - 1;
        if (!lower) continue;
        bool active = false;
        for (int k = 0; k < corners; ++k) {
            std::size_t j = c;
            for (int d = 0; d < n; ++d) {
                if (k >> d & 1) j += spec.stride(d);
            }
            cu[k] = res.u[j];
            cphi[k] = phi[j];
            cv[k] = prob.potential[j];
            cf[k] = prob.datum[j];
            const double ua = truncate(cu[k], alpha);
            cbig[k] = truncate(ua - cphi[k], t) - truncate(ua, t);
            active = active || cphi[k] != 0.0;
        }
        // Phi vanishes wherever the interpolated phi does.
        if (!active) continue;
        const double before = identity;
        const double disc = discrete_cell(cu, cbig, cv, cf);
        discrete += disc;

        if (n == 1) {
            // Every truncation threshold is the root of a linear function on
            // the cell; Gauss-Legendre on the pieces between roots is then
            // free of the kink error.
            cuts.assign({0.0, 1.0});
            auto add_root = [&](double a0, double a1, double level) {
                const double da = a1 - a0;
                if (da == 0.0) return;
                const double r = (level - a0) / da;
                if (r > 0.0 && r < 1.0) cuts.push_back(r);
            };
            for (double level : {alpha, -alpha, t, -t, 0.0}) add_root(cu[0], cu[1], level);
            for (double level : {t, -t}) {
                add_root(cu[0] - cphi[0], cu[1] - cphi[1], level);
                add_root(alpha - cphi[0], alpha - cphi[1], level);
                add_root(-alpha - cphi[0], -alpha - cphi[1], level);
            }
            std::sort(cuts.begin(), cuts.end());
            const std::array<double, 3> gu{(cu[1] - cu[0]) / h, 0.0, 0.0};
            const std::array<double, 3> gphi{(cphi[1] - cphi[0]) / h, 0.0, 0.0};
            for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
                const double lo = cuts[piece];
                const double len = cuts[piece + 1] - lo;
                if (len <= 0.0) continue;
                for (std::size_t g = 0; g < gauss_x.size(); ++g) {
                    const double x = lo + 0.5 * len * (1.0 + gauss_x[g]);
                    auto lerp = [x](const std::array<double, 8>& v) {
                        return (1.0 - x) * v[0] + x * v[1];
                    };
                    accumulate(0.5 * len * gauss_w[g] * h, lerp(cu), gu, lerp(cphi), gphi,
                               lerp(cv), lerp(cf));
                }
            }
            defect += std::abs(identity - before - disc);
            continue;
        }

        for (int s = 0; s < sub_count; ++s) {
            std::array<double, 3> xi{};
            int rem = s;
            for (int d = 0; d < n; ++d) {
                xi[d] = (rem % q + 0.5) / q;
                rem /= q;
            }
            double u = 0.0, ph = 0.0, vv = 0.0, ff = 0.0;
            std::array<double, 3> gu{}, gphi{};
            for (int k = 0; k < corners; ++k) {
                double w = 1.0;
                for (int d = 0; d < n; ++d) w *= (k >> d & 1) ? xi[d] : 1.0 - xi[d];
                u += w * cu[k];
                ph += w * cphi[k];
                vv += w * cv[k];
                ff += w * cf[k];
                for (int d = 0; d < n; ++d) {
                    double dw = ((k >> d & 1) ? 1.0 : -1.0) / h;
                    for (int e = 0; e < n; ++e) {
                        if (e != d) dw *= (k >> e & 1) ? xi[e] : 1.0 - xi[e];
                    }
                    gu[d] += dw * cu[k];
                    gphi[d] += dw * cphi[k];
                }
            }
            accumulate(sub_vol, u, gu, ph, gphi, vv, ff);
        }
        defect += std::abs(identity - before - disc);
    }

    bool support_ok = true;
    const GridFunction nodal = localized_test_function(res.u, phi, alpha, t);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (phi[i] == 0.0 && nodal[i] != 0.0) support_ok = false;
    }
    // Cellwise defect: an upper bound for |LHS - RHS| that does not benefit
    // from cancellation between cells.
    const double lhs = defect + std::abs(discrete);
    return make_report("localized_identity", lhs, c_budget * h, tol,
                       {{"alpha", alpha},
                        {"signed_residual", identity},
                        {"discrete_identity", discrete},
                        {"t", t},
                        {"h", h},
                        {"c_budget", c_budget},
                        {"load_scale", scale},
                        {"subdivisions", q},
                        {"support_inclusion", support_ok},
                        {"grid", spec.id()}});
}

IdentityStudy localized_identity_study(const std::vector<GridSpec>& grids,
                                       const std::function<double(const Point&)>& datum,
                                       const Potential& v, double p,
                                       const std::function<double(const Point&)>& phi,
                                       double alpha, double t, SolverOptions options)
{
    if (grids.size() < 2) {
        throw std::invalid_argument("localized_identity_study: needs at least two grids");
    }
    IdentityStudy study;
    std::vector<EstimateReport> raw;
    const double h0 = grids.front().spacing();
    for (const GridSpec& spec : grids) {
        // Truncation kinks make the integrand discontinuous inside cells; a
        // sub-cell width shrinking like h^2 keeps that quadrature error O(h^2).
        const int q = static_cast<int>(std::lround(8.0 * h0 / spec.spacing()));
        const Problem prob = make_problem(sample_potential(v, spec), sample(spec, datum), p, options);
        const SolveResult res = solve(prob);
        const GridFunction ph = sample(spec, phi);
        raw.push_back(check_localized_identity(res, prob, ph, alpha, t, 0.0, 0.0, std::max(q, 8)));
        study.spacings.push_back(spec.spacing());
        study.residuals.push_back(raw.back().lhs);
    }
    study.c_budget = study.residuals[0] / study.spacings[0];
    for (std::size_t j = 0; j < grids.size(); ++j) {
        EstimateReport r = raw[j];
        r = make_report("localized_identity", r.lhs, study.c_budget * study.spacings[j], 0.0,
                        r.context);
        r.context["c_budget"] = study.c_budget;
        study.reports.push_back(r);
        nlohmann::json supp{{"grid", grids[j].id()}};
        study.reports.push_back(make_report(
            "localized_support", r.context["support_inclusion"].get<bool>() ? 0.0 : 1.0, 0.0, 0.0,
            supp));
        if (j + 1 < grids.size()) {
            study.reports.push_back(make_report(
                "localized_identity_rate", 2.0 * study.residuals[j + 1], study.residuals[j], 0.0,
                {{"h_coarse", study.spacings[j]}, {"h_fine", study.spacings[j + 1]}}));
        }
    }
    return study;
}

double distributional_residual(const GridFunction& u, const VectorField& grad, const Problem& prob,
                               const GridFunction& psi)
{
    const GridSpec& spec = prob.spec;
    require_same_spec(u.spec(), spec, "distributional_residual");
    require_same_spec(psi.spec(), spec, "distributional_residual");
    const VectorField gpsi = gradient(psi);
    const int n = spec.dim();
    double sum = 0.0;
    std::vector<double> xi(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (psi[i] == 0.0 && [&] {
                for (int d = 0; d < n; ++d)
                    if (gpsi.at(d, i) != 0.0) return false;
                return true;
            }()) {
            continue;
        }
        for (int d = 0; d < n; ++d) xi[static_cast<std::size_t>(d)] = grad.at(d, i);
        const auto flux = p_flux(xi, prob.p);
        double term = 0.0;
        for (int d = 0; d < n; ++d) term += flux[static_cast<std::size_t>(d)] * gpsi.at(d, i);
        term += prob.potential[i] * p_flux(u[i], prob.p) * psi[i] - prob.datum[i] * psi[i];
        sum += spec.weight(i) * term;
    }
    return std::abs(sum);
}

bool SchemeResult::all_pass() const
{
    if (!nonconverged.empty()) return false;
    return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
}

SchemeResult run_scheme(const GridFunction& f, const Potential& v, double p, const SchemeConfig& cfg)
{
    cfg.validate();
    if (!(p >= 2.0)) {
        throw std::invalid_argument("run_scheme: requires p >= 2");
    }
    const GridSpec& spec = f.spec();
    const GridFunction potential = sample_potential(v, spec);
    const std::size_t nk = cfg.k_list.size();

    SchemeResult out;
    out.spec = spec;
    out.p = p;
    out.k_list = cfg.k_list;
    out.eps_grid = cfg.eps_grid;
    out.alpha_grid = cfg.alpha_grid;

    std::vector<Problem> problems;
    for (double k : cfg.k_list) {
        out.data.push_back(cfg.regularization == Regularization::canonical
                               ? regularize_datum(f, k)
                               : regularize_datum_mollified(f, k));
        problems.push_back(make_problem(potential, out.data.back(), p, cfg.solver));
    }

    // Independent solves in batches of at most `threads`; results land by index.
    const std::size_t batch = std::max(1u, cfg.threads);
    std::vector<std::optional<SolveResult>> solved(nk);
    for (std::size_t start = 0; start < nk; start += batch) {
        std::vector<std::future<SolveResult>> jobs;
        const std::size_t stop = std::min(nk, start + batch);
        for (std::size_t i = start; i < stop; ++i) {
            jobs.push_back(std::async(batch == 1 ? std::launch::deferred : std::launch::async,
                                      [&problems, i] { return solve(problems[i]); }));
        }
        for (std::size_t i = start; i < stop; ++i) {
            solved[i] = jobs[i - start].get();
        }
    }
    for (auto& s : solved) out.solutions.push_back(std::move(*s));

    std::vector<bool> ok(nk);
    for (std::size_t i = 0; i < nk; ++i) {
        ok[i] = out.solutions[i].converged;
        if (!ok[i]) out.nonconverged.push_back(i);
    }

    const double f_l1 = l1(f);
    auto tagged = [](EstimateReport r, const nlohmann::json& extra) {
        for (auto it = extra.begin(); it != extra.end(); ++it) r.context[it.key()] = it.value();
        return r;
    };
    for (std::size_t i = 0; i < nk; ++i) {
        if (!ok[i]) continue;
        const double k = cfg.k_list[i];
        const double fk_l1 = l1(out.data[i]);
        for (double t : cfg.t_grid) {
            out.reports.push_back(tagged(
                check_energy_estimate(out.solutions[i], problems[i], t, fk_l1, cfg.tol), {{"k", k}}));
        }
        for (double t : cfg.t_grid) {
            for (double R : cfg.R_grid) {
                out.reports.push_back(tagged(
                    check_tail_bound(out.solutions[i], problems[i], v, t, R, f_l1, cfg.tol),
                    {{"k", k}}));
            }
        }
        for (double level : cfg.t_grid) {
            out.reports.push_back(tagged(
                check_superlevel_bound(out.solutions[i], problems[i], level, f_l1, cfg.tol),
                {{"k", k}}));
        }
    }
    for (std::size_t i = 0; i < nk; ++i) {
        for (std::size_t j = i + 1; j < nk; ++j) {
            if (!ok[i] || !ok[j]) continue;
            for (double t : cfg.t_grid) {
                out.reports.push_back(
                    tagged(check_stability(out.solutions[i], out.solutions[j], out.data[i],
                                           out.data[j], problems[i], t, cfg.tol,
                                           cfg.stability_scale),
                           {{"k", cfg.k_list[i]}, {"l", cfg.k_list[j]}}));
            }
        }
    }

    out.pairwise_lambda.assign(nk, std::vector<double>(nk, 0.0));
    out.measure_diag.assign(cfg.eps_grid.size(),
                            std::vector<std::vector<double>>(nk, std::vector<double>(nk, 0.0)));
    for (std::size_t i = 0; i < nk; ++i) {
        for (std::size_t j = i + 1; j < nk; ++j) {
            const GridFunction diff = out.solutions[i].u - out.solutions[j].u;
            const double d = lambda_fnorm(diff, p);
            out.pairwise_lambda[i][j] = out.pairwise_lambda[j][i] = d;
            for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
                const double mu = superlevel_measure(diff, cfg.eps_grid[e]);
                out.measure_diag[e][i][j] = out.measure_diag[e][j][i] = mu;
            }
        }
    }

    const GridFunction& ref = out.solutions.back().u;
    const double half = 0.5 * spec.half_width();
    std::vector<bool> sub_box(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const Point x = spec.node(i);
        bool inside = true;
        for (int d = 0; d < spec.dim(); ++d) inside = inside && std::abs(x[d]) <= half;
        sub_box[i] = inside;
    }
    const VectorField ref_grad = gradient(ref);
    for (double alpha : cfg.alpha_grid) {
        std::vector<double> xd, gap;
        const VectorField ref_trunc = chain_rule_gradient(ref, ref_grad, alpha);
        for (std::size_t i = 0; i < nk; ++i) {
            const GridFunction& u = out.solutions[i].u;
            const GridFunction diff = u - ref;
            const VectorField dg = chain_rule_gradient(diff, gradient(diff), alpha);
            xd.push_back(x_norm(truncate(diff, alpha), dg, potential, p));

            const VectorField ug = chain_rule_gradient(u, gradient(u), alpha);
            double acc = 0.0;
            for (std::size_t node = 0; node < spec.size(); ++node) {
                if (!sub_box[node]) continue;
                double s2 = 0.0;
                for (int d = 0; d < spec.dim(); ++d) {
                    const double e = ug.at(d, node) - ref_trunc.at(d, node);
                    s2 += e * e;
                }
                acc += spec.weight(node) * std::pow(s2, 0.5 * p);
            }
            gap.push_back(std::pow(acc, 1.0 / p));
        }
        out.x_distance_to_ref.push_back(std::move(xd));
        out.local_gradient_gap.push_back(std::move(gap));
    }
    return out;
}

namespace {

std::string fmt(double x)
{
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

std::string k_tag(double k)
{
    std::ostringstream os;
    os << k;
    return os.str();
}

}  // namespace

void write_scheme_result(const SchemeResult& res, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const std::size_t nk = res.k_list.size();
    nlohmann::json solves = nlohmann::json::array();
    for (std::size_t i = 0; i < nk; ++i) {
        write_grid_function(res.solutions[i].u, dir / ("u_k" + k_tag(res.k_list[i])));
        nlohmann::json d = diagnostics_json(res.solutions[i]);
        d["k"] = res.k_list[i];
        solves.push_back(d);
    }
    std::ofstream(dir / "reports.json") << nlohmann::json(res.reports).dump(2) << '\n';

    std::ofstream csv(dir / "distances.csv");
    csv << "k";
    for (double k : res.k_list) csv << ',' << k_tag(k);
    csv << '\n';
    for (std::size_t i = 0; i < nk; ++i) {
        csv << k_tag(res.k_list[i]);
        for (std::size_t j = 0; j < nk; ++j) csv << ',' << fmt(res.pairwise_lambda[i][j]);
        csv << '\n';
    }

    nlohmann::json diag{{"grid", res.spec.id()},
                        {"p", res.p},
                        {"k_list", res.k_list},
                        {"solves", solves},
                        {"nonconverged", res.nonconverged},
                        {"eps_grid", res.eps_grid},
                        {"measure_diag", res.measure_diag},
                        {"alpha_grid", res.alpha_grid},
                        {"x_distance_to_ref", res.x_distance_to_ref},
                        {"local_gradient_gap", res.local_gradient_gap},
                        {"caveat", res.caveat},
                        {"all_pass", res.all_pass()}};
    std::ofstream(dir / "diagnostics.json") << diag.dump(2) << '\n';
}

double two_bump(const Point& x)
{
    auto sq = [&](double cx) {
        double s = (x[0] - cx) * (x[0] - cx);
        s += x[1] * x[1] + x[2] * x[2];
        return s;
    };
    return 12.0 * std::exp(-sq(1.5)) - 6.0 * std::exp(-sq(-3.0));
}

}  // namespace plab
