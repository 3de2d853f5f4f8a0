#include "plab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace plab {

namespace {

/// Energy, gradient and Hessian of the eps-regularized functional. With
/// eps = 0 this is exactly J.
class DiscreteEnergy {
public:
    DiscreteEnergy(const Problem& prob, double eps) : prob_(prob), spec_(prob.spec), eps_(eps)
    {
        const std::size_t m = spec_.points();
        for (std::size_t i = 0; i < spec_.size(); ++i) {
            const auto idx = spec_.unravel(i);
            bool lower = true;
            for (int d = 0; d < spec_.dim(); ++d) {
                lower = lower && idx[d] < m - 1;
            }
            if (lower) {
                cells_.push_back(i);
            }
        }
        unknown_.assign(spec_.size(), -1);
        for (std::size_t i = 0; i < spec_.size(); ++i) {
            if (!spec_.on_boundary(i)) {
                unknown_[i] = static_cast<long>(interior_.size());
                interior_.push_back(i);
            }
        }
        for (int d = 0; d < spec_.dim(); ++d) {
            strides_.push_back(spec_.stride(d));
        }
    }

    std::size_t unknowns() const { return interior_.size(); }
    const std::vector<std::size_t>& interior() const { return interior_; }

    double value(std::span<const double> v) const
    {
        const double p = prob_.p;
        const double h = spec_.spacing();
        const double vol = spec_.cell_volume();
        const double eps_p = std::pow(eps_, p);
        double grad_part = 0.0;
        for (std::size_t c : cells_) {
            double s = eps_ * eps_;
            for (std::size_t st : strides_) {
                const double g = (v[c + st] - v[c]) / h;
                s += g * g;
            }
            grad_part += std::pow(s, 0.5 * p) - eps_p;
        }
        double zero_part = 0.0;
        double load = 0.0;
        for (std::size_t i = 0; i < spec_.size(); ++i) {
            const double w = spec_.weight(i);
            zero_part += w * prob_.potential[i] * (std::pow(v[i] * v[i] + eps_ * eps_, 0.5 * p) - eps_p);
            load += w * prob_.datum[i] * v[i];
        }
        return (vol * grad_part + zero_part) / p - load;
    }

    /// Full nodal gradient dJ/dv (boundary entries included).
    std::vector<double> gradient(std::span<const double> v) const
    {
        const double p = prob_.p;
        const double h = spec_.spacing();
        const double vol = spec_.cell_volume();
        std::vector<double> out(spec_.size(), 0.0);
        std::array<double, 3> g{};
        for (std::size_t c : cells_) {
            double s = eps_ * eps_;
            for (std::size_t d = 0; d < strides_.size(); ++d) {
                g[d] = (v[c + strides_[d]] - v[c]) / h;
                s += g[d] * g[d];
            }
            const double a = flux_weight(s, p);
            for (std::size_t d = 0; d < strides_.size(); ++d) {
                const double flux = vol * a * g[d] / h;
                out[c + strides_[d]] += flux;
                out[c] -= flux;
            }
        }
        for (std::size_t i = 0; i < spec_.size(); ++i) {
            const double w = spec_.weight(i);
            const double s = v[i] * v[i] + eps_ * eps_;
            out[i] += w * (prob_.potential[i] * flux_weight(s, p) * v[i] - prob_.datum[i]);
        }
        return out;
    }

    Eigen::SparseMatrix<double> hessian(std::span<const double> v) const
    {
        const double p = prob_.p;
        const double h = spec_.spacing();
        const double vol = spec_.cell_volume();
        const std::size_t nd = strides_.size();
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(cells_.size() * (nd + 1) * (nd + 1) + interior_.size());

        std::array<double, 3> g{};
        std::array<std::size_t, 4> nodes{};
        // Coefficient of node j in the gradient component d: D[d][j].
        std::array<std::array<double, 4>, 3> D{};
        for (std::size_t c : cells_) {
            double s = eps_ * eps_;
            nodes[0] = c;
            for (std::size_t d = 0; d < nd; ++d) {
                nodes[d + 1] = c + strides_[d];
                g[d] = (v[c + strides_[d]] - v[c]) / h;
                s += g[d] * g[d];
                D[d].fill(0.0);
                D[d][0] = -1.0 / h;
                D[d][d + 1] = 1.0 / h;
            }
            const double a = flux_weight(s, p);
            const double b = flux_curvature(s, p);
            for (std::size_t j = 0; j <= nd; ++j) {
                const long rj = unknown_[nodes[j]];
                if (rj < 0) {
                    continue;
                }
                for (std::size_t k = 0; k <= nd; ++k) {
                    const long rk = unknown_[nodes[k]];
                    if (rk < 0) {
                        continue;
                    }
                    double hjk = 0.0;
                    double gj = 0.0;
                    double gk = 0.0;
                    for (std::size_t d = 0; d < nd; ++d) {
                        hjk += a * D[d][j] * D[d][k];
                        gj += g[d] * D[d][j];
                        gk += g[d] * D[d][k];
                    }
                    hjk += b * gj * gk;
                    if (hjk != 0.0) {
                        trips.emplace_back(rj, rk, vol * hjk);
                    }
                }
            }
        }
        for (std::size_t r = 0; r < interior_.size(); ++r) {
            const std::size_t i = interior_[r];
            const double s = v[i] * v[i] + eps_ * eps_;
            const double w = spec_.weight(i);
            const double diag =
                w * prob_.potential[i] * (flux_weight(s, p) + flux_curvature(s, p) * v[i] * v[i]);
            trips.emplace_back(static_cast<long>(r), static_cast<long>(r), diag);
        }
        Eigen::SparseMatrix<double> H(static_cast<long>(interior_.size()),
                                      static_cast<long>(interior_.size()));
        H.setFromTriplets(trips.begin(), trips.end());
        return H;
    }

private:
    // s^{(p-2)/2}; s = |g|^2 + eps^2.
    static double flux_weight(double s, double p)
    {
        if (p == 2.0) {
            return 1.0;
        }
        return s > 0.0 ? std::pow(s, 0.5 * (p - 2.0)) : 0.0;
    }

    // (p-2) s^{(p-4)/2}, the rank-one part of the Hessian of s^{p/2}/p.
    static double flux_curvature(double s, double p)
    {
        if (p == 2.0 || s <= 0.0) {
            return 0.0;
        }
        return (p - 2.0) * std::pow(s, 0.5 * (p - 4.0));
    }

    const Problem& prob_;
    GridSpec spec_;
    double eps_;
    std::vector<std::size_t> cells_;
    std::vector<std::size_t> interior_;
    std::vector<long> unknown_;
    std::vector<std::size_t> strides_;
};

void require_zero_boundary(const GridFunction& v, const char* what)
{
    const GridSpec& spec = v.spec();
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (spec.on_boundary(i) && v[i] != 0.0) {
            throw std::invalid_argument(std::string(what) +
                                        ": function must vanish on the box boundary (node " +
                                        std::to_string(i) + ")");
        }
    }
}

double interior_sup(const std::vector<double>& grad, const GridSpec& spec,
                    const std::vector<std::size_t>& interior)
{
    double sup = 0.0;
    for (std::size_t i : interior) {
        sup = std::max(sup, std::abs(grad[i] / spec.weight(i)));
    }
    return sup;
}

}  // namespace

Problem make_problem(GridFunction potential, GridFunction datum, double p, SolverOptions options)
{
    if (!(p >= 2.0) || !std::isfinite(p)) {
        throw std::invalid_argument(
            "solver: p must satisfy p >= 2 (the existence/uniqueness theory assumes p >= 2)");
    }
    require_same_spec(potential.spec(), datum.spec(), "make_problem");
    for (std::size_t i = 0; i < potential.size(); ++i) {
        if (potential[i] < 1.0) {
            throw std::invalid_argument("make_problem: potential below 1 at node " +
                                        std::to_string(i));
        }
    }
    const double fmax = datum.max_abs();
    double eps = options.eps_reg;
    if (eps < 0.0) {
        eps = 1e-8 * std::max(1.0, std::pow(fmax, 1.0 / (p - 1.0)));
    }
    double tol = options.tol_residual;
    if (tol < 0.0) {
        tol = 1e-8 * std::max(fmax, 1e-300);
        if (fmax == 0.0) {
            tol = 1e-8;
        }
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("make_problem: tol_residual must be positive");
    }
    if (options.max_iters == 0) {
        throw std::invalid_argument("make_problem: max_iters must be positive");
    }
    const GridSpec spec = datum.spec();
    return Problem{spec, p, std::move(potential), std::move(datum), eps, tol, options.max_iters};
}

double energy(const GridFunction& v, const Problem& prob)
{
    require_same_spec(v.spec(), prob.spec, "energy");
    require_zero_boundary(v, "energy");
    return DiscreteEnergy(prob, 0.0).value(v.values());
}

GridFunction residual(const GridFunction& v, const Problem& prob)
{
    require_same_spec(v.spec(), prob.spec, "residual");
    require_zero_boundary(v, "residual");
    const DiscreteEnergy model(prob, 0.0);
    const auto grad = model.gradient(v.values());
    std::vector<double> out(prob.spec.size(), 0.0);
    for (std::size_t i : model.interior()) {
        out[i] = grad[i] / prob.spec.weight(i);
    }
    return GridFunction(prob.spec, std::move(out));
}

double residual_sup(const GridFunction& v, const Problem& prob)
{
    return residual(v, prob).max_abs();
}

SolveResult solve(const Problem& prob, const std::optional<GridFunction>& initial)
{
    const GridSpec& spec = prob.spec;
    const DiscreteEnergy exact(prob, 0.0);
    const DiscreteEnergy model(prob, prob.eps_reg);
    const auto& interior = model.interior();

    std::vector<double> v(spec.size(), 0.0);
    if (initial) {
        require_same_spec(initial->spec(), spec, "solve");
        require_zero_boundary(*initial, "solve");
        v.assign(initial->values().begin(), initial->values().end());
    } else if (prob.p > 2.0 && prob.datum.max_abs() > 0.0) {
        // Warm start from the linear (p = 2) problem with the same data.
        Problem linear = prob;
        linear.p = 2.0;
        linear.max_iters = 4;
        const SolveResult warm = solve(linear, std::nullopt);
        v.assign(warm.u.values().begin(), warm.u.values().end());
        // J(s v) = s^p A/p - s B is minimized at s = (B/A)^{1/(p-1)}.
        const double B = [&] {
            double b = 0.0;
            for (std::size_t i = 0; i < spec.size(); ++i) {
                b += spec.weight(i) * prob.datum[i] * v[i];
            }
            return b;
        }();
        const double A = prob.p * (exact.value(v) + B);
        if (A > 0.0 && B > 0.0) {
            const double s = std::pow(B / A, 1.0 / (prob.p - 1.0));
            for (double& x : v) {
                x *= s;
            }
        } else {
            std::fill(v.begin(), v.end(), 0.0);
        }
    }

    SolveResult res{GridFunction::zeros(spec), 0, 0.0, 0.0, {}, false, ""};
    double J = model.value(v);
    res.energy_trace.push_back(J);

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool pattern_ready = false;
    std::vector<double> trial(spec.size(), 0.0);

    std::size_t iter = 0;
    for (;; ++iter) {
        const double rsup = interior_sup(exact.gradient(v), spec, interior);
        res.residual_sup = rsup;
        if (rsup <= prob.tol_residual) {
            res.converged = true;
            res.status = "converged";
            break;
        }
        if (iter >= prob.max_iters) {
            res.status = "max_iters exceeded";
            break;
        }

        const auto grad = model.gradient(v);
        Eigen::VectorXd g(static_cast<long>(interior.size()));
        for (std::size_t r = 0; r < interior.size(); ++r) {
            g[static_cast<long>(r)] = grad[interior[r]];
        }

        const Eigen::SparseMatrix<double> H = model.hessian(v);
        if (!pattern_ready) {
            ldlt.analyzePattern(H);
            pattern_ready = true;
        }
        ldlt.factorize(H);
        Eigen::VectorXd dir;
        bool newton = ldlt.info() == Eigen::Success;
        if (newton) {
            dir = -ldlt.solve(g);
            newton = ldlt.info() == Eigen::Success && dir.allFinite() && g.dot(dir) < 0.0;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            if (!newton || attempt == 1) {
                // Steepest descent in the lumped-mass metric.
                dir.resize(g.size());
                for (std::size_t r = 0; r < interior.size(); ++r) {
                    dir[static_cast<long>(r)] = -g[static_cast<long>(r)] / spec.weight(interior[r]);
                }
                if (attempt == 0) {
                    attempt = 1;
                }
            }
            const double slope = g.dot(dir);
            double alpha = 1.0;
            for (int bt = 0; bt < 80; ++bt, alpha *= 0.5) {
                trial = v;
                for (std::size_t r = 0; r < interior.size(); ++r) {
                    trial[interior[r]] += alpha * dir[static_cast<long>(r)];
                }
                const double Jt = model.value(trial);
                if (!std::isfinite(Jt)) {
                    continue;
                }
                if (Jt <= J + 1e-4 * alpha * slope || (alpha == 1.0 && Jt <= J)) {
                    v.swap(trial);
                    J = Jt;
                    accepted = true;
                    break;
                }
                // Near the minimizer energy differences drop below rounding.
                // Along the line the functional is convex, so a nonpositive
                // slope at the trial point certifies J(trial) <= J(v).
                const auto gt = model.gradient(trial);
                double trial_slope = 0.0;
                for (std::size_t r = 0; r < interior.size(); ++r) {
                    trial_slope += gt[interior[r]] * dir[static_cast<long>(r)];
                }
                if (trial_slope <= 0.0) {
                    v.swap(trial);
                    J = std::min(Jt, J);
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) {
            res.status = "line search stalled";
            break;
        }
        res.energy_trace.push_back(J);
    }

    res.iterations = iter;
    res.u = GridFunction(spec, v);
    res.energy = exact.value(v);
    return res;
}

nlohmann::json diagnostics_json(const SolveResult& res)
{
    return nlohmann::json{{"iterations", res.iterations},     {"residual_sup", res.residual_sup},
                          {"energy", res.energy},             {"energy_trace", res.energy_trace},
                          {"converged", res.converged},       {"status", res.status}};
}

double p_flux(double s, double p)
{
    const double a = std::abs(s);
    return a == 0.0 ? 0.0 : std::pow(a, p - 2.0) * s;
}

std::vector<double> p_flux(std::span<const double> xi, double p)
{
    double len2 = 0.0;
    for (double x : xi) {
        len2 += x * x;
    }
    const double scale = len2 == 0.0 ? 0.0 : std::pow(len2, 0.5 * (p - 2.0));
    std::vector<double> out(xi.begin(), xi.end());
    for (double& x : out) {
        x *= scale;
    }
    return out;
}

}  // namespace plab
