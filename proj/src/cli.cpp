#include "plab/cli.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "plab/compactness.hpp"
#include "plab/pipeline.hpp"
#include "plab/potentials.hpp"
#include "plab/solver.hpp"

namespace plab::cli {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

class NotConverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- config reading ---------------------------------------------------------

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!ok.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

json block(const json& obj, const char* key)
{
    return obj.contains(key) ? obj.at(key) : json::object();
}

double number(const json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
    if (!obj.at(key).is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
    return obj.at(key).get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where)
{
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

std::vector<double> numbers_or(const json& obj, const char* key, std::vector<double> fallback,
                               const std::string& where)
{
    if (!obj.contains(key)) return fallback;
    const auto& a = obj.at(key);
    if (!a.is_array()) throw ConfigError(where + ": '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : a) {
        if (!x.is_number()) throw ConfigError(where + ": '" + key + "' must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::string string_or(const json& obj, const char* key, std::string fallback, const std::string& where)
{
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) throw ConfigError(where + ": '" + key + "' must be a string");
    return obj.at(key).get<std::string>();
}

std::filesystem::path out_dir(const json& c)
{
    return string_or(c, "out", "plab_out", "config");
}

unsigned threads_of(const json& c)
{
    const double t = number_or(c, "threads", 1.0, "config");
    if (!(t >= 1.0) || t != std::floor(t)) throw ConfigError("config: 'threads' must be a positive integer");
    return static_cast<unsigned>(t);
}

std::optional<std::uint64_t> seed_of(const json& c)
{
    if (!c.contains("seed")) return std::nullopt;
    const auto& s = c.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
        throw ConfigError("config: 'seed' must be a nonnegative integer");
    }
    return c.at("seed").get<std::uint64_t>();
}

GridSpec parse_grid(const json& c)
{
    const json g = block(c, "grid");
    check_keys(g, {"dim", "half_width", "points"}, "grid");
    const double dim = number_or(g, "dim", 1.0, "grid");
    const double pts = number_or(g, "points", 513.0, "grid");
    if (dim != std::floor(dim) || pts != std::floor(pts) || pts < 0.0) {
        throw ConfigError("grid: 'dim' and 'points' must be integers");
    }
    try {
        return GridSpec(static_cast<int>(dim), number_or(g, "half_width", 8.0, "grid"),
                        static_cast<std::size_t>(pts));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
}

double parse_p(double p)
{
    if (!std::isfinite(p) || p < 2.0) {
        std::ostringstream msg;
        msg << "p = " << p
            << " rejected: existence and uniqueness of energy solutions require p >= 2";
        throw ConfigError(msg.str());
    }
    return p;
}

Potential constant_potential(double value)
{
    if (!(value >= 1.0)) throw ConfigError("potential: constant value must be >= 1");
    return custom_potential("constant", [value](const Point&) { return value; }, 1.0, 1.0);
}

Potential potential_kind(const std::string& kind, double kappa, double gamma)
{
    if (!(kappa > 0.0) || !(gamma > 0.0)) throw ConfigError("potential: kappa and gamma must be positive");
    if (kind == "polynomial_trap") return polynomial_trap(gamma, kappa);
    if (kind == "sparse_wells") return sparse_wells(gamma, kappa);
    throw ConfigError("potential: unknown kind '" + kind + "'");
}

// Default is the confining trap 1 + |x|^2 with kappa = 1.
Potential parse_potential(const json& c)
{
    if (!c.contains("potential")) return polynomial_trap(2.0, 1.0);
    const json v = c.at("potential");
    check_keys(v, {"kind", "kappa", "gamma", "value"}, "potential");
    const std::string kind = string_or(v, "kind", "", "potential");
    if (kind == "constant") return constant_potential(number_or(v, "value", 1.0, "potential"));
    return potential_kind(kind, number(v, "kappa", "potential"), number(v, "gamma", "potential"));
}

bool is_unit_constant(const json& c)
{
    if (!c.contains("potential")) return false;
    const json& v = c.at("potential");
    return v.value("kind", "") == "constant" && v.value("value", 1.0) == 1.0;
}

struct Datum {
    std::string kind;
    std::function<double(const Point&)> field;
    std::function<double(const Point&)> exact;  // set for the manufactured datum
};

Datum parse_datum(const json& c, int dim)
{
    const json d = c.contains("datum") ? c.at("datum") : json{{"kind", "two_bump"}};
    check_keys(d, {"kind", "value"}, "datum");
    const std::string kind = string_or(d, "kind", "", "datum");
    if (kind == "zero") return {kind, [](const Point&) { return 0.0; }, {}};
    if (kind == "two_bump") return {kind, two_bump, {}};
    if (kind == "constant") {
        const double value = number(d, "value", "datum");
        return {kind, [value](const Point&) { return value; }, {}};
    }
    if (kind == "manufactured") {
        // u* = exp(-|x|^2) solves -Lap u + u = f for p = 2, V = 1.
        const double n = dim;
        auto r2 = [](const Point& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; };
        return {kind,
                [n, r2](const Point& x) { return (1.0 + 2.0 * n - 4.0 * r2(x)) * std::exp(-r2(x)); },
                [r2](const Point& x) { return std::exp(-r2(x)); }};
    }
    throw ConfigError("datum: unknown kind '" + kind + "'");
}

SolverOptions parse_solver(const json& c)
{
    const json s = block(c, "solver");
    check_keys(s, {"eps_reg", "tol_residual", "max_iters"}, "solver");
    SolverOptions o;
    o.eps_reg = number_or(s, "eps_reg", o.eps_reg, "solver");
    o.tol_residual = number_or(s, "tol_residual", o.tol_residual, "solver");
    const double it = number_or(s, "max_iters", static_cast<double>(o.max_iters), "solver");
    if (!(it >= 1.0) || it != std::floor(it)) throw ConfigError("solver: 'max_iters' must be a positive integer");
    o.max_iters = static_cast<std::size_t>(it);
    return o;
}

// ---- output -----------------------------------------------------------------

void write_json(const std::filesystem::path& file, const json& j)
{
    std::ofstream os(file);
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("cannot write " + file.string());
}

json versions()
{
    return json{{"plab", kVersion},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                              "." + std::to_string(EIGEN_MINOR_VERSION)},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                {"compiler", __VERSION__},
                {"cplusplus", __cplusplus}};
}

class Manifest {
public:
    Manifest(std::string subcommand, json config)
        : subcommand_(std::move(subcommand)), config_(std::move(config)),
          start_(std::chrono::steady_clock::now())
    {
    }

    void write(const std::filesystem::path& dir, int exit_code) const
    {
        const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start_;
        json seed = config_.contains("seed") ? config_.at("seed") : json(nullptr);
        write_json(dir / "manifest.json", json{{"subcommand", subcommand_},
                                               {"config", config_},
                                               {"versions", versions()},
                                               {"seed", seed},
                                               {"exit_code", exit_code},
                                               {"wall_time_seconds", wall.count()}});
    }

private:
    std::string subcommand_;
    json config_;
    std::chrono::steady_clock::time_point start_;
};

std::string pass_word(bool pass) { return pass ? "PASS" : "FAIL"; }

std::string tag(double x)
{
    std::ostringstream os;
    os << x;
    return os.str();
}

// ---- families ---------------------------------------------------------------

double bump(const Point& x, const Point& c, double radius, double height)
{
    double r2 = 0.0;
    for (int d = 0; d < 3; ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
    r2 /= radius * radius;
    return r2 < 1.0 ? height * std::pow(1.0 - r2, 3) : 0.0;
}

FunctionFamily translating_bumps(const GridSpec& spec, int count, double radius, double height)
{
    FunctionFamily fam{"translating_bumps", {}};
    const double reach = spec.half_width() - radius;
    for (int j = 0; j < count; ++j) {
        const Point c{-reach + 2.0 * reach * j / (count - 1), 0.0, 0.0};
        fam.members.push_back(sample(spec, [=](const Point& x) { return bump(x, c, radius, height); }));
    }
    return fam;
}

// {T_t(u_k)} from the scheme with default settings on the given data.
FunctionFamily truncated_solutions(const GridFunction& f, const Potential& v, double p, double t,
                                   const std::vector<double>& k_list, const SolverOptions& solver,
                                   unsigned threads)
{
    SchemeConfig cfg;
    cfg.k_list = k_list;
    cfg.solver = solver;
    cfg.threads = threads;
    const auto run = run_scheme(f, v, p, cfg);
    if (!run.nonconverged.empty()) throw NotConverged("family: a solve did not converge");
    FunctionFamily fam{"truncated_solutions", {}};
    for (const auto& s : run.solutions) fam.members.push_back(truncate(s.u, t));
    return fam;
}

// ---- verification suites ----------------------------------------------------

GridFunction random_function(const GridSpec& spec, std::mt19937_64& rng, double scale)
{
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> v(spec.size());
    for (auto& x : v) x = dist(rng);
    return GridFunction(spec, std::move(v));
}

double l1(const GridFunction& f)
{
    return integrate(f.map([](double x) { return std::abs(x); }));
}

std::vector<EstimateReport> suite_monotonicity(std::uint64_t seed)
{
    std::vector<EstimateReport> out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    const std::size_t pairs = 100000;
    for (double p : {2.0, 2.5, 3.0, 4.0}) {
        const double cp = std::pow(2.0, 2.0 - p);
        double worst_vec = 0.0, worst_scalar = 0.0;
        for (std::size_t i = 0; i < pairs; ++i) {
            const std::vector<double> xi{dist(rng), dist(rng), dist(rng)};
            const std::vector<double> eta{dist(rng), dist(rng), dist(rng)};
            const auto a = p_flux(xi, p), b = p_flux(eta, p);
            double lhs = 0.0, d2 = 0.0;
            for (int d = 0; d < 3; ++d) {
                lhs += (a[d] - b[d]) * (xi[d] - eta[d]);
                d2 += (xi[d] - eta[d]) * (xi[d] - eta[d]);
            }
            if (lhs > 0.0) worst_vec = std::max(worst_vec, cp * std::pow(d2, 0.5 * p) / lhs);
            const double s = dist(rng), r = dist(rng);
            const double slhs = (p_flux(s, p) - p_flux(r, p)) * (s - r);
            if (slhs > 0.0) worst_scalar = std::max(worst_scalar, cp * std::pow(std::abs(s - r), p) / slhs);
        }
        // lhs: worst c_p |a-b|^p / <A(a)-A(b), a-b>, which must not exceed 1.
        out.push_back(make_report("monotonicity_vector", worst_vec, 1.0, kAlgebraicTol,
                                  json{{"p", p}, {"c_p", cp}, {"pairs", pairs}}));
        out.push_back(make_report("monotonicity_scalar", worst_scalar, 1.0, kAlgebraicTol,
                                  json{{"p", p}, {"c_p", cp}, {"pairs", pairs}}));
    }
    return out;
}

std::vector<EstimateReport> suite_metric(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const GridSpec spec(2, 2.0, 11);
    std::vector<EstimateReport> out;
    for (double p : {1.0, 2.0, 3.0}) {
        double worst_tri = 0.0, worst_sym = 0.0, worst_self = 0.0, min_sep = 1e300;
        for (int i = 0; i < 2000; ++i) {
            const auto u = random_function(spec, rng, 2.0);
            const auto v = random_function(spec, rng, 2.0);
            const auto w = random_function(spec, rng, 2.0);
            const double uv = lambda_dist(u, v, p), vw = lambda_dist(v, w, p), uw = lambda_dist(u, w, p);
            worst_tri = std::max(worst_tri, uw / (uv + vw));
            worst_sym = std::max(worst_sym, std::abs(uv - lambda_dist(v, u, p)));
            worst_self = std::max(worst_self, lambda_dist(u, u, p));
            min_sep = std::min(min_sep, uv);
        }
        const json ctx{{"p", p}, {"triples", 2000}};
        out.push_back(make_report("metric_triangle", worst_tri, 1.0, kAlgebraicTol, ctx));
        out.push_back(make_report("metric_symmetry", worst_sym, 0.0, 0.0, ctx));
        out.push_back(make_report("metric_identity", worst_self, 0.0, 0.0, ctx));
        // Distinct random functions are at positive distance.
        out.push_back(make_report("metric_separation", 0.0, min_sep, 0.0, ctx));
    }
    return out;
}

std::vector<EstimateReport> suite_nesting(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const GridSpec spec(2, 2.0, 11);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto u = random_function(spec, rng, 3.0);
        const double p = 1.0 + (i % 5) * 0.5;
        const double q = p + 0.25 + (i % 3);
        worst = std::max(worst, std::pow(lambda_fnorm(u, q), q) / std::pow(lambda_fnorm(u, p), p));
    }
    return {make_report("nesting", worst, 1.0, kAlgebraicTol, json{{"samples", 10000}})};
}

std::vector<EstimateReport> suite_embedding()
{
    // Model function |x|^{-1/p} cut off near 0: int min(|u|,1)^q -> 2q/(q-p), ||u||_{p,inf}^p -> 2.
    const double p = 1.0, q = 2.0, r0 = 0.02;
    const GridSpec spec(1, 200.0, 40001);
    const auto u = sample(spec, [&](const Point& x) {
        const double r = std::abs(x[0]);
        return r < r0 ? 0.0 : std::pow(r, -1.0 / p);
    });
    const double lhs = std::pow(lambda_fnorm(u, q), q);
    const double bound = q / (q - p) * std::pow(weak_lq_quasinorm(u, p), p);
    const json ctx{{"p", p}, {"q", q}, {"grid", spec.id()}, {"constant", q / (q - p)}};
    return {make_report("embedding_bound", lhs, bound, kDiscretizationTol, ctx),
            make_report("embedding_sharpness", std::abs(lhs / bound - 1.0), kDiscretizationTol, 0.0, ctx)};
}

std::vector<EstimateReport> suite_truncation(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const GridSpec spec(2, 2.0, 11);
    double worst_lip = 0.0, worst_tri = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto u = random_function(spec, rng, 3.0);
        const auto v = random_function(spec, rng, 3.0);
        const double p = 1.0 + (i % 5) * 0.5;
        const double alpha = 0.1 + 0.3 * (i % 6);
        const double d = lambda_dist(u, v, p);
        worst_lip = std::max(worst_lip, lambda_dist(truncate(u, alpha), truncate(v, alpha), p) / d);
        worst_tri = std::max(worst_tri, lambda_fnorm(u + v, p) / (lambda_fnorm(u, p) + lambda_fnorm(v, p)));
    }
    return {make_report("truncation_lipschitz", worst_lip, 1.0, kAlgebraicTol, json{{"pairs", 10000}}),
            make_report("fnorm_triangle", worst_tri, 1.0, kAlgebraicTol, json{{"pairs", 10000}})};
}

std::vector<EstimateReport> suite_manufactured()
{
    auto ustar = [](const Point& x) { return std::exp(-x[0] * x[0]); };
    auto fstar = [](const Point& x) { return (3.0 - 4.0 * x[0] * x[0]) * std::exp(-x[0] * x[0]); };
    std::vector<double> errors;
    std::vector<EstimateReport> out;
    for (std::size_t m : {129u, 257u, 513u}) {
        const GridSpec spec(1, 8.0, m);
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = solve(make_problem(sample_potential(constant_potential(1.0), spec),
                                            sample(spec, fstar), 2.0));
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        errors.push_back((res.u - sample(spec, ustar)).max_abs());
        out.push_back(make_report("manufactured_converged", res.converged ? 0.0 : 1.0, 0.0, 0.0,
                                  json{{"grid", spec.id()}, {"sup_error", errors.back()}}));
        // Wall time is checked but kept out of the report for reproducibility.
        out.push_back(make_report("manufactured_time_budget", dt.count() < 5.0 ? 0.0 : 1.0, 0.0, 0.0,
                                  json{{"grid", spec.id()}, {"budget_seconds", 5.0}}));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) {
        out.push_back(make_report("manufactured_rate", 3.0, errors[i - 1] / errors[i], 0.0,
                                  json{{"coarse_error", errors[i - 1]}, {"fine_error", errors[i]}}));
    }
    return out;
}

std::vector<EstimateReport> suite_pipeline(double tol, unsigned threads)
{
    const GridSpec spec(1, 8.0, 513);
    const auto f = sample(spec, two_bump);
    std::vector<EstimateReport> out;
    for (double p : {2.0, 3.0}) {
        SchemeConfig cfg;
        cfg.tol = tol;
        cfg.threads = threads;
        const auto res = run_scheme(f, polynomial_trap(2.0), p, cfg);
        out.push_back(make_report("pipeline_converged", static_cast<double>(res.nonconverged.size()), 0.0, 0.0,
                                  json{{"p", p}}));
        for (auto r : res.reports) {
            r.context["p"] = p;
            out.push_back(std::move(r));
        }
        if (p == 2.0) {
            double c2 = -1.0;
            for (const auto& r : res.reports)
                if (r.name == "stability") c2 = r.context.at("C_p").get<double>();
            out.push_back(make_report("stability_constant_p2", std::abs(c2 - 1.0), 0.0, 0.0,
                                      json{{"C_p", c2}}));
        }
    }
    return out;
}

std::vector<EstimateReport> suite_confinement()
{
    std::vector<EstimateReport> out;
    const auto v = sparse_wells(2.0);
    const GridSpec spec(1, 40.0, 2000001);
    auto rel = [](double got, double want) { return std::abs(got - want) / want; };
    const double e3 = bad_set_measure(v, spec, 3.0);
    const double total = bad_set_measure(v, spec, 0.0);
    // Wells k >= 2 lie beyond R = 3: sum 2 * 4^{-k} = 1/6. All wells: 2/3.
    out.push_back(make_report("sparse_wells_tail_R3", rel(e3, 1.0 / 6.0), 0.02, 0.0, json{{"measure", e3}}));
    out.push_back(make_report("sparse_wells_total", rel(total, 2.0 / 3.0), 0.02, 0.0, json{{"measure", total}}));
    const std::vector<double> radii{1.0, 3.0, 6.0, 12.0, 24.0};
    const auto rep = confinement_report(v, spec, radii);
    const bool witness_beyond = rep.violation_witness && norm(*rep.violation_witness) > radii.back();
    out.push_back(make_report("classical_confinement_violated",
                              rep.classically_confining || !witness_beyond ? 1.0 : 0.0, 0.0, 0.0,
                              json{{"witness", rep.violation_witness ? json(*rep.violation_witness) : json()}}));
    for (std::size_t i = 1; i < radii.size(); ++i) {
        out.push_back(make_report("bad_measure_decreasing", rep.bad_measures[i], rep.bad_measures[i - 1], 0.0,
                                  json{{"R", radii[i]}}));
    }
    const auto trap = confinement_report(polynomial_trap(2.0), GridSpec(1, 8.0, 513), {2.0, 4.0, 6.0});
    for (std::size_t i = 0; i < trap.radii.size(); ++i) {
        out.push_back(make_report("trap_bad_measure_zero", trap.bad_measures[i], 0.0, 0.0,
                                  json{{"R", trap.radii[i]}}));
    }
    return out;
}

std::vector<EstimateReport> suite_compactness(unsigned threads)
{
    std::vector<EstimateReport> out;
    const GridSpec box(1, 8.0, 641);
    const auto moving = translating_bumps(box, 15, 0.5, 2.0);
    const auto kr = kr_report(moving, 2.0, {0.025, 0.05, 0.5, 1.0}, {2.0, 4.0, 6.0}, {0.5, 1.0, 4.0}, 0.2);
    out.push_back(make_report("translating_tails_not_observed", kr.tail_verdict == "not observed" ? 0.0 : 1.0,
                              0.0, 0.0, json(kr)));

    const GridSpec spec(1, 8.0, 513);
    const auto f = sample(spec, two_bump);
    const double f_l1 = l1(f);
    const double t = 0.1, eps = 0.5;
    for (double p : {2.0, 3.0}) {
        const auto fam = truncated_solutions(f, polynomial_trap(2.0), p, t, SchemeConfig{}.k_list, {}, threads);
        double sup_lp = 0.0;
        for (const auto& m : fam.members) sup_lp = std::max(sup_lp, lp_norm(m, p));
        // Radius from the tail estimate, level from Chebyshev.
        const double r_pred = std::sqrt(t * f_l1 / std::pow(eps, p)) * 1.01;
        const double k_pred = sup_lp * std::pow(eps, -1.0 / p) * 1.01;
        const auto ark = ark_check(fam, p, p, {spec.spacing(), 0.5}, {r_pred}, {k_pred}, eps);
        out.push_back(make_report("truncated_family_ark", ark.ark_consistent ? 0.0 : 1.0, 0.0, 0.0, json(ark)));
        out.push_back(make_report("truncated_family_ark_bound", ark.ark_bound,
                                  2.0 * std::pow(t * f_l1, 1.0 / p), kDiscretizationTol, json{{"p", p}}));
        const double net_eps = 0.05;
        const auto net = epsilon_net(fam, p, net_eps);
        out.push_back(make_report("epsilon_net_size", static_cast<double>(net.size()),
                                  static_cast<double>(fam.members.size()), 0.0, json{{"p", p}, {"net", net}}));
        out.push_back(make_report("epsilon_net_coverage", net_coverage(fam, p, net), net_eps, 0.0,
                                  json{{"p", p}}));
    }
    return out;
}

double identity_phi(const Point& x) { return bump(x, {-2.5, 0.0, 0.0}, 1.5, 0.5); }

std::vector<EstimateReport> suite_localized_identity()
{
    std::vector<EstimateReport> out;
    const std::vector<GridSpec> grids{GridSpec(1, 8.0, 257), GridSpec(1, 8.0, 513), GridSpec(1, 8.0, 1025)};
    for (double p : {2.0, 3.0}) {
        auto study = localized_identity_study(grids, two_bump, polynomial_trap(2.0), p, identity_phi, 1.6, 1.0);
        for (auto r : study.reports) {
            r.context["p"] = p;
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<EstimateReport> suite_uniqueness(unsigned threads)
{
    std::vector<EstimateReport> out;
    const GridSpec spec(1, 8.0, 513);
    const auto f = sample(spec, two_bump);
    for (double p : {2.0, 3.0}) {
        SchemeConfig cfg;
        cfg.threads = threads;
        const auto canon = run_scheme(f, polynomial_trap(2.0), p, cfg);
        cfg.regularization = Regularization::mollified;
        const auto moll = run_scheme(f, polynomial_trap(2.0), p, cfg);
        const double d = lambda_dist(canon.solutions.back().u, moll.solutions.back().u, p);
        out.push_back(make_report("regularization_independence", d, 1e-3, 0.0,
                                  json{{"p", p}, {"k_ref", canon.k_list.back()}}));
    }
    return out;
}

}  // namespace

// ---- public -----------------------------------------------------------------

bool SuiteResult::pass() const
{
    return std::all_of(reports.begin(), reports.end(), [](const EstimateReport& r) { return r.pass; });
}

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names{
        "monotonicity", "metric",   "nesting",     "embedding",   "truncation",         "manufactured",
        "pipeline",     "confinement", "compactness", "localized_identity", "uniqueness"};
    return names;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed, double tol, unsigned threads)
{
    SuiteResult r{name, {}};
    if (name == "monotonicity") r.reports = suite_monotonicity(seed);
    else if (name == "metric") r.reports = suite_metric(seed);
    else if (name == "nesting") r.reports = suite_nesting(seed);
    else if (name == "embedding") r.reports = suite_embedding();
    else if (name == "truncation") r.reports = suite_truncation(seed);
    else if (name == "manufactured") r.reports = suite_manufactured();
    else if (name == "pipeline") r.reports = suite_pipeline(tol, threads);
    else if (name == "confinement") r.reports = suite_confinement();
    else if (name == "compactness") r.reports = suite_compactness(threads);
    else if (name == "localized_identity") r.reports = suite_localized_identity();
    else if (name == "uniqueness") r.reports = suite_uniqueness(threads);
    else throw ConfigError("unknown suite '" + name + "'");
    return r;
}

nlohmann::json load_config(const std::optional<std::filesystem::path>& path)
{
    if (!path) return json::object();
    std::ifstream is(*path);
    if (!is) throw ConfigError("cannot open config file " + path->string());
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path->string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    return j;
}

nlohmann::json apply_overrides(nlohmann::json c, const Overrides& o)
{
    if (o.out) c["out"] = o.out->string();
    if (o.seed) c["seed"] = *o.seed;
    if (o.tol) c["tol"] = *o.tol;
    if (o.threads) c["threads"] = *o.threads;
    if (o.halve_stability_constant) c["debug"]["halve_stability_constant"] = true;
    if (o.suite) c["suite"] = *o.suite;
    return c;
}

int cmd_solve(const json& c, std::ostream& log)
{
    check_keys(c, {"grid", "potential", "datum", "p", "solver", "out", "seed", "tol", "threads"}, "solve");
    const GridSpec spec = parse_grid(c);
    const double p = parse_p(number_or(c, "p", 2.0, "solve"));
    const Potential v = parse_potential(c);
    const Datum datum = parse_datum(c, spec.dim());
    SolverOptions opts = parse_solver(c);
    if (c.contains("tol")) opts.tol_residual = number(c, "tol", "solve");
    threads_of(c);
    if (datum.exact && (p != 2.0 || !is_unit_constant(c))) {
        throw ConfigError("datum: the manufactured datum needs p = 2 and potential {kind: constant, value: 1}");
    }
    const auto dir = out_dir(c);
    Manifest manifest("solve", c);

    const auto prob = make_problem(sample_potential(v, spec), sample(spec, datum.field), p, opts);
    const auto res = solve(prob);

    std::filesystem::create_directories(dir);
    write_grid_function(res.u, dir / "u");
    json diag = diagnostics_json(res);
    diag["grid"] = spec.id();
    diag["p"] = p;
    diag["potential"] = v.label;
    diag["datum"] = datum.kind;
    if (datum.exact) diag["sup_error"] = (res.u - sample(spec, datum.exact)).max_abs();
    write_json(dir / "diagnostics.json", diag);

    log << std::setprecision(6) << "solve " << spec.id() << " p=" << p << ": " << res.status
        << ", iterations " << res.iterations << ", residual " << res.residual_sup << ", energy "
        << res.energy;
    if (datum.exact) log << ", sup error " << diag["sup_error"].get<double>();
    log << '\n';
    const int code = res.converged ? kOk : kNotConverged;
    manifest.write(dir, code);
    return code;
}

int cmd_pipeline(const json& c, std::ostream& log)
{
    check_keys(c, {"grid", "potential", "datum", "p", "scheme", "solver", "out", "seed", "tol", "threads", "debug"},
               "pipeline");
    const GridSpec spec = parse_grid(c);
    const Potential v = parse_potential(c);
    const Datum datum = parse_datum(c, spec.dim());
    std::vector<double> ps;
    if (c.contains("p") && c.at("p").is_array()) ps = numbers_or(c, "p", {}, "pipeline");
    else ps = {number_or(c, "p", 2.0, "pipeline")};
    if (ps.empty()) throw ConfigError("pipeline: 'p' must not be empty");
    for (double p : ps) parse_p(p);

    SchemeConfig cfg;
    const json s = block(c, "scheme");
    check_keys(s, {"k_list", "t_grid", "alpha_grid", "R_grid", "eps_grid", "regularization"}, "scheme");
    cfg.k_list = numbers_or(s, "k_list", cfg.k_list, "scheme");
    cfg.t_grid = numbers_or(s, "t_grid", cfg.t_grid, "scheme");
    cfg.alpha_grid = numbers_or(s, "alpha_grid", cfg.alpha_grid, "scheme");
    cfg.R_grid = numbers_or(s, "R_grid", cfg.R_grid, "scheme");
    cfg.eps_grid = numbers_or(s, "eps_grid", cfg.eps_grid, "scheme");
    const std::string reg = string_or(s, "regularization", "canonical", "scheme");
    if (reg == "canonical") cfg.regularization = Regularization::canonical;
    else if (reg == "mollified") cfg.regularization = Regularization::mollified;
    else throw ConfigError("scheme: regularization must be 'canonical' or 'mollified'");
    cfg.tol = number_or(c, "tol", cfg.tol, "pipeline");
    cfg.solver = parse_solver(c);
    cfg.threads = threads_of(c);
    const json dbg = block(c, "debug");
    check_keys(dbg, {"halve_stability_constant"}, "debug");
    if (dbg.value("halve_stability_constant", false)) cfg.stability_scale = 0.5;
    for (double R : cfg.R_grid) {
        if (!(R > 0.0 && R < spec.half_width())) throw ConfigError("scheme: R_grid entries must lie in (0, L)");
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("scheme: ") + e.what());
    }
    const auto dir = out_dir(c);
    Manifest manifest("pipeline", c);

    const auto f = sample(spec, datum.field);
    json summary = json::array();
    bool all_pass = true, all_converged = true;
    std::vector<SchemeResult> results;
    for (double p : ps) results.push_back(run_scheme(f, v, p, cfg));

    for (const auto& res : results) {
        const auto sub = dir / ("p" + tag(res.p));
        write_scheme_result(res, sub);
        std::size_t passed = 0;
        json failures = json::array();
        double worst = 0.0;
        for (const auto& r : res.reports) {
            if (r.pass) ++passed;
            else failures.push_back(r);
            if (r.rhs > 0.0) worst = std::max(worst, r.lhs / r.rhs);
        }
        all_pass = all_pass && res.all_pass();
        all_converged = all_converged && res.nonconverged.empty();
        summary.push_back(json{{"p", res.p},
                               {"reports", res.reports.size()},
                               {"passed", passed},
                               {"worst_ratio", worst},
                               {"nonconverged_k", res.nonconverged},
                               {"failures", failures}});
        log << "pipeline " << spec.id() << " p=" << res.p << ": " << passed << "/" << res.reports.size()
            << " checks pass, worst lhs/rhs " << std::setprecision(4) << worst;
        if (!res.nonconverged.empty()) log << ", " << res.nonconverged.size() << " solves did not converge";
        log << '\n';
        for (const auto& r : res.reports) {
            if (!r.pass) log << "  FAIL " << r.name << " " << r.context.dump() << '\n';
        }
    }
    std::filesystem::create_directories(dir);
    write_json(dir / "summary.json", summary);
    const int code = !all_converged ? kNotConverged : all_pass ? kOk : kCheckFailed;
    manifest.write(dir, code);
    return code;
}

int cmd_confinement(const json& c, std::ostream& log)
{
    check_keys(c, {"grid", "potential", "R_grid", "mc", "out", "seed", "tol", "threads"}, "confinement");
    const GridSpec spec = parse_grid(c);
    if (!c.contains("potential")) throw ConfigError("confinement: missing 'potential'");
    const json pv = c.at("potential");
    check_keys(pv, {"kind", "kappa", "gamma", "pairs"}, "potential");
    const std::string kind = string_or(pv, "kind", "", "potential");
    std::vector<Potential> potentials;
    if (pv.contains("pairs")) {
        if (pv.contains("kappa") || pv.contains("gamma")) {
            throw ConfigError("potential: give either 'pairs' or 'kappa'/'gamma', not both");
        }
        if (!pv.at("pairs").is_array() || pv.at("pairs").empty()) {
            throw ConfigError("potential: 'pairs' must be a nonempty array");
        }
        for (const auto& pair : pv.at("pairs")) {
            check_keys(pair, {"kappa", "gamma"}, "potential.pairs");
            potentials.push_back(potential_kind(kind, number(pair, "kappa", "potential.pairs"),
                                                number(pair, "gamma", "potential.pairs")));
        }
    } else {
        potentials.push_back(potential_kind(kind, number(pv, "kappa", "potential"), number(pv, "gamma", "potential")));
    }
    const auto radii = numbers_or(c, "R_grid", {1.0, 2.0, 4.0, 6.0}, "confinement");
    if (radii.empty()) throw ConfigError("confinement: empty R_grid");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < 0.0 || radii[i] > spec.half_width() * std::sqrt(spec.dim()) ||
            (i > 0 && !(radii[i] > radii[i - 1]))) {
            throw ConfigError("confinement: R_grid must be increasing and inside the box");
        }
    }
    std::size_t mc_samples = 0;
    std::uint64_t seed = 0;
    if (c.contains("mc")) {
        const json mc = c.at("mc");
        check_keys(mc, {"samples"}, "mc");
        const double n = number(mc, "samples", "mc");
        if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("mc: 'samples' must be a positive integer");
        mc_samples = static_cast<std::size_t>(n);
        const auto s = seed_of(c);
        if (!s) throw ConfigError("confinement: the Monte Carlo cross-check needs a 'seed'");
        seed = *s;
    }
    threads_of(c);
    const auto dir = out_dir(c);
    Manifest manifest("confinement", c);

    json reports = json::array();
    for (const auto& v : potentials) {
        const auto rep = confinement_report(v, spec, radii);
        json j = rep;
        log << rep.label << " on " << spec.id() << " (kappa " << rep.kappa << ", gamma " << rep.gamma << ")\n";
        log << std::setw(10) << "R" << std::setw(16) << "|E_R|";
        if (mc_samples) log << std::setw(16) << "|E_R| (MC)";
        log << '\n';
        json mc = json::array();
        for (std::size_t i = 0; i < radii.size(); ++i) {
            log << std::setw(10) << radii[i] << std::setw(16) << std::setprecision(8) << rep.bad_measures[i];
            if (mc_samples) {
                const double est = bad_set_measure_mc(v, spec, radii[i], mc_samples, seed);
                mc.push_back(est);
                log << std::setw(16) << est;
            }
            log << '\n';
        }
        if (mc_samples) j["bad_measures_mc"] = mc;
        if (rep.violation_witness) {
            const auto& w = *rep.violation_witness;
            log << "  classical confinement violated at well center (" << w[0] << ", " << w[1] << ", " << w[2]
                << ")\n";
        } else {
            log << "  no classical-confinement violation found\n";
        }
        if (!rep.sub_resolution_wells.empty()) {
            log << "  " << rep.sub_resolution_wells.size() << " wells are narrower than the grid spacing\n";
        }
        reports.push_back(j);
    }
    std::filesystem::create_directories(dir);
    write_json(dir / "confinement.json", reports);
    manifest.write(dir, kOk);
    return kOk;
}

int cmd_compactness(const json& c, std::ostream& log)
{
    check_keys(c, {"grid", "family", "p", "q", "ark", "eps", "net_eps", "shift_grid", "R_grid", "K_grid", "out",
                   "seed", "tol", "threads"},
               "compactness");
    const GridSpec spec = parse_grid(c);
    const double p = number_or(c, "p", 2.0, "compactness");
    if (!(p >= 1.0)) throw ConfigError("compactness: p must be >= 1");
    const bool ark = c.value("ark", false) || c.contains("q");
    const double q = number_or(c, "q", p, "compactness");
    if (ark && !(q > 1.0)) throw ConfigError("compactness: q must exceed 1");
    const double eps = number_or(c, "eps", 0.2, "compactness");
    const double net_eps = number_or(c, "net_eps", eps, "compactness");
    if (!(eps > 0.0) || !(net_eps > 0.0)) throw ConfigError("compactness: eps must be positive");
    const double h = spec.spacing();
    const auto shifts = numbers_or(c, "shift_grid", {h, 2 * h, 4 * h, 0.5, 1.0}, "compactness");
    const auto radii = numbers_or(c, "R_grid", {2.0, 4.0, 6.0}, "compactness");
    const auto levels = numbers_or(c, "K_grid", {0.5, 1.0, 4.0}, "compactness");
    const unsigned threads = threads_of(c);

    if (!c.contains("family")) throw ConfigError("compactness: missing 'family'");
    const json fj = c.at("family");
    const std::string kind = string_or(fj, "kind", "", "family");
    std::function<FunctionFamily()> build;
    if (kind == "translating_bumps") {
        check_keys(fj, {"kind", "count", "radius", "height"}, "family");
        const int count = static_cast<int>(number_or(fj, "count", 15.0, "family"));
        const double radius = number_or(fj, "radius", 0.5, "family");
        const double height = number_or(fj, "height", 2.0, "family");
        if (count < 2) throw ConfigError("family: translating_bumps needs count >= 2");
        if (!(radius > 0.0) || radius >= spec.half_width()) throw ConfigError("family: radius must lie in (0, L)");
        build = [=] { return translating_bumps(spec, count, radius, height); };
    } else if (kind == "truncated_solutions") {
        check_keys(fj, {"kind", "potential", "datum", "t", "k_list", "solver"}, "family");
        parse_p(p);
        const Potential v = parse_potential(fj);
        const Datum datum = parse_datum(fj, spec.dim());
        const double t = number(fj, "t", "family");
        if (!(t > 0.0)) throw ConfigError("family: t must be positive");
        const auto k_list = numbers_or(fj, "k_list", SchemeConfig{}.k_list, "family");
        const SolverOptions solver = parse_solver(fj);
        build = [=] {
            return truncated_solutions(sample(spec, datum.field), v, p, t, k_list, solver, threads);
        };
    } else {
        throw ConfigError("family: unknown kind '" + kind + "'");
    }
    const auto dir = out_dir(c);
    Manifest manifest("compactness", c);

    const FunctionFamily fam = build();
    const FamilyReport rep = ark ? ark_check(fam, p, q, shifts, radii, levels, eps)
                                 : kr_report(fam, p, shifts, radii, levels, eps);
    const auto net = epsilon_net(fam, p, net_eps);
    const double coverage = net_coverage(fam, p, net);

    auto table = [&](const char* title, const char* col, const std::vector<MapPoint>& pts, const std::string& verdict) {
        log << title << " (" << verdict << ")\n" << std::setw(12) << col << std::setw(16) << "sup" << '\n';
        for (const auto& m : pts) log << std::setw(12) << m.at << std::setw(16) << std::setprecision(6) << m.value << '\n';
    };
    log << fam.label << ": " << fam.members.size() << " members on " << spec.id() << ", p = " << p << ", eps = " << eps
        << '\n';
    table("(i) translation modulus", "|y|", rep.translation_modulus, rep.translation_verdict);
    table("(ii) tails", "R", rep.tails, rep.tail_verdict);
    table("(iii) superlevels", "K", rep.superlevels, rep.superlevel_verdict);
    if (ark) {
        log << "hypotheses: C = " << rep.ark_bound << ", tail " << rep.ark_tail_verdict << ", consistent "
            << (rep.ark_consistent ? "yes" : "no") << '\n';
    }
    log << "eps-net: " << net.size() << " members, coverage " << coverage << " (target " << net_eps << ")\n";

    std::filesystem::create_directories(dir);
    write_json(dir / "compactness.json",
               json{{"report", rep}, {"net", net}, {"net_eps", net_eps}, {"coverage", coverage}});
    const int code = coverage <= net_eps ? kOk : kCheckFailed;
    manifest.write(dir, code);
    return code;
}

int cmd_verify(const json& c, std::ostream& log)
{
    check_keys(c, {"out", "seed", "tol", "threads", "suite"}, "verify");
    const auto seed = seed_of(c);
    if (!seed) throw ConfigError("verify: a 'seed' is required for the randomized suites");
    const double tol = number_or(c, "tol", kDiscretizationTol, "verify");
    const unsigned threads = threads_of(c);
    std::vector<std::string> selected = suite_names();
    if (c.contains("suite")) {
        const std::string only = string_or(c, "suite", "", "verify");
        if (std::find(selected.begin(), selected.end(), only) == selected.end()) {
            throw ConfigError("verify: unknown suite '" + only + "'");
        }
        selected = {only};
    }
    const auto dir = out_dir(c);
    Manifest manifest("verify", c);

    std::vector<SuiteResult> results;
    for (const auto& name : selected) results.push_back(run_suite(name, *seed, tol, threads));

    std::filesystem::create_directories(dir);
    json summary = json::object();
    bool all = true;
    for (const auto& r : results) {
        write_json(dir / (r.name + ".json"), json(r.reports));
        const std::size_t passed =
            std::count_if(r.reports.begin(), r.reports.end(), [](const EstimateReport& e) { return e.pass; });
        summary[r.name] = json{{"pass", r.pass()}, {"checks", r.reports.size()}, {"passed", passed}};
        log << pass_word(r.pass()) << "  " << r.name << " (" << passed << "/" << r.reports.size() << ")\n";
        all = all && r.pass();
    }
    write_json(dir / "summary.json", summary);
    const int code = all ? kOk : kCheckFailed;
    manifest.write(dir, code);
    return code;
}

int run(const std::string& subcommand, const json& config, std::ostream& log)
{
    try {
        if (subcommand == "solve") return cmd_solve(config, log);
        if (subcommand == "pipeline") return cmd_pipeline(config, log);
        if (subcommand == "confinement") return cmd_confinement(config, log);
        if (subcommand == "compactness") return cmd_compactness(config, log);
        if (subcommand == "verify") return cmd_verify(config, log);
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const NotConverged& e) {
        log << "error: " << e.what() << '\n';
        return kNotConverged;
    }
}

}  // namespace plab::cli
