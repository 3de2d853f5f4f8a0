#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "plab/asymptotic_space.hpp"

using namespace plab;

namespace {

GridFunction random_function(const GridSpec& spec, std::mt19937_64& rng, double scale)
{
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> v(spec.size());
    for (auto& x : v) x = dist(rng);
    return GridFunction(spec, std::move(v));
}

// Brute-force sup over a dense lambda grid of lambda * |{|u| > lambda}|^{1/q}.
double weak_norm_by_lambda_grid(const GridFunction& u, double q, double lambda_max, int steps)
{
    double best = 0.0;
    for (int s = 1; s <= steps; ++s) {
        const double lambda = lambda_max * s / steps;
        double measure = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (std::abs(u[i]) > lambda) measure += u.spec().weight(i);
        }
        best = std::max(best, lambda * std::pow(measure, 1.0 / q));
    }
    return best;
}

}  // namespace

TEST_CASE("exponent")
{
    CHECK_THROWS_AS(ExponentP(0.5), std::invalid_argument);
    CHECK_THROWS_AS(ExponentP(1.5, true), std::invalid_argument);
    CHECK(ExponentP(3.0).conjugate() == doctest::Approx(1.5));
    CHECK_THROWS(ExponentP(1.0).conjugate());
}

TEST_CASE("estimate report verdict")
{
    const auto r = make_report("x", 1.04, 1.0, 0.05, {{"t", 2.0}});
    CHECK(r.pass);
    CHECK(r.slack == doctest::Approx(-0.04));
    CHECK_FALSE(make_report("x", 1.06, 1.0, 0.05).pass);
    nlohmann::json j = r;
    for (const char* key : {"name", "lhs", "rhs", "slack", "pass", "tol", "context"}) {
        CHECK(j.contains(key));
    }
    CHECK(j.get<EstimateReport>().context["t"] == 2.0);
}

TEST_CASE("truncation")
{
    CHECK(truncate(3.0, 2.0) == 2.0);
    CHECK(truncate(-5.0, 2.0) == -2.0);
    CHECK(truncate(0.5, 1.0) == 0.5);
    CHECK_THROWS_AS(truncate(GridFunction::zeros(GridSpec(1, 1.0, 3)), 0.0), std::invalid_argument);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    std::uniform_real_distribution<double> lev(0.01, 5.0);
    for (int i = 0; i < 100000; ++i) {
        const double a = dist(rng), b = dist(rng), alpha = lev(rng);
        const double lhs = std::abs(truncate(a, alpha) - truncate(b, alpha));
        REQUIRE(lhs <= std::min(std::abs(a - b), 2.0 * alpha) * (1 + 1e-15) + 1e-15);
    }
}

TEST_CASE("lambda F-norm")
{
    // Nodes -2..2 (h = 1, weights .5,1,1,1,.5): the indicator of all nodes has measure 4.
    const GridSpec spec(1, 2.0, 5);
    const GridFunction chi(spec, {1, 1, 1, 1, 1});
    CHECK(lambda_fnorm(chi, 2.0) == doctest::Approx(2.0));
    CHECK(lambda_fnorm(5.0 * chi, 2.0) == doctest::Approx(2.0));
    CHECK(lambda_fnorm(GridFunction::zeros(spec), 2.0) == 0.0);

    const auto x = sample(GridSpec(1, 1.0, 2001), [](const Point& p) { return p[0]; });
    CHECK(lambda_fnorm(x, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("lambda metric axioms on random triples")
{
    std::mt19937_64 rng(3);
    const GridSpec spec(1, 3.0, 41);
    for (int i = 0; i < 10000; ++i) {
        const double p = 1.0 + 3.0 * (i % 7) / 6.0;
        const auto u = random_function(spec, rng, 2.0);
        const auto v = random_function(spec, rng, 2.0);
        const auto w = random_function(spec, rng, 2.0);
        REQUIRE(lambda_dist(u, u, p) == 0.0);
        REQUIRE(lambda_dist(u, v, p) == lambda_dist(v, u, p));
        REQUIRE(lambda_dist(u, w, p) <= lambda_dist(u, v, p) + lambda_dist(v, w, p) + 1e-12);
        if (i % 100 == 0) {
            CHECK(lambda_dist(u + w, v + w, p) == doctest::Approx(lambda_dist(u, v, p)).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(lambda_dist(GridFunction::zeros(spec), GridFunction::zeros(GridSpec(1, 3.0, 5)), 2.0),
                    std::invalid_argument);
}

TEST_CASE("X-norm")
{
    const GridSpec spec(1, 1.0, 4001);
    const auto one = sample(spec, [](const Point&) { return 1.0; });
    const auto zero = GridFunction::zeros(spec);
    CHECK(x_norm(zero, gradient(zero), one, 2.0) == 0.0);

    const auto x = sample(spec, [](const Point& p) { return p[0]; });
    CHECK(x_norm(x, gradient(x), one, 2.0) == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-6));

    CHECK_THROWS_AS(x_norm(x, gradient(x), 0.5 * one, 2.0), std::invalid_argument);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pot(1.0, 10.0);
    const GridSpec small(2, 1.0, 9);
    for (int i = 0; i < 100; ++i) {
        const auto u = random_function(small, rng, 3.0);
        std::vector<double> vv(small.size());
        for (auto& s : vv) s = pot(rng);
        const GridFunction V(small, vv);
        for (double p : {1.0, 2.0, 3.5}) {
            CHECK(x_norm(u, gradient(u), V, p) >= lp_norm(u, p));
        }
    }
}

TEST_CASE("weak L^q quasi-norm")
{
    const GridSpec spec(1, 2.0, 5);  // weights .5, 1, 1, 1, .5
    CHECK(weak_lq_quasinorm(GridFunction::zeros(spec), 1.0) == 0.0);

    // 2 on a set of measure 1.
    const GridFunction step(spec, {0, 0, 2, 0, 0});
    CHECK(weak_lq_quasinorm(step, 1.0) == doctest::Approx(2.0));
    CHECK(weak_norm_by_lambda_grid(step, 1.0, 3.0, 300000) == doctest::Approx(2.0).epsilon(1e-4));

    // 2 on measure 1, 1 on a further measure 2: sup approached as lambda -> 1-.
    const GridFunction two_steps(spec, {0, 1, 2, 1, 0});
    CHECK(weak_lq_quasinorm(two_steps, 1.0) == doctest::Approx(3.0));
    CHECK(weak_norm_by_lambda_grid(two_steps, 1.0, 3.0, 300000) == doctest::Approx(3.0).epsilon(1e-4));

    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) {
        const auto u = random_function(GridSpec(1, 1.0, 21), rng, 4.0);
        const double q = 1.0 + i * 0.2;
        const double exact = weak_lq_quasinorm(u, q);
        const double brute = weak_norm_by_lambda_grid(u, q, 4.0, 400000);
        CHECK(brute <= exact * (1 + 1e-12));
        CHECK(brute == doctest::Approx(exact).epsilon(1e-3));
    }
}

TEST_CASE("tails and superlevels")
{
    const GridSpec spec(1, 2.0, 5);
    const GridFunction one(spec, {1, 1, 1, 1, 1});
    CHECK(tail_lambda(one, 1.0, 2.0) == doctest::Approx(1.0));
    const GridFunction inside(spec, {0, 3, 3, 3, 0});
    CHECK(tail_lambda(inside, 1.0, 2.0) == 0.0);

    CHECK(superlevel_measure(3.0 * one, 2.0) == doctest::Approx(4.0));
    CHECK(superlevel_measure(inside, 3.0) == 0.0);
    CHECK(superlevel_measure(inside, 2.0) == doctest::Approx(3.0));

    std::mt19937_64 rng(13);
    const GridSpec big(2, 4.0, 21);
    for (int i = 0; i < 50; ++i) {
        const auto u = random_function(big, rng, 3.0);
        double prev = tail_lambda(u, 0.0, 2.0);
        for (double R = 0.25; R < 6.0; R += 0.25) {
            const double t = tail_lambda(u, R, 2.0);
            CHECK(t <= prev);
            prev = t;
        }
        for (double K : {0.5, 1.0, 2.0}) {
            for (double p : {1.0, 2.0, 3.0}) {
                CHECK(superlevel_measure(u, K) <= std::pow(lp_norm(u, p), p) / std::pow(K, p) * (1 + 1e-12));
            }
        }
    }
}

TEST_CASE("structural properties of the asymptotic space")
{
    std::mt19937_64 rng(17);
    const GridSpec spec(2, 2.0, 11);
    for (int i = 0; i < 500; ++i) {
        const auto u = random_function(spec, rng, 3.0);
        const auto v = random_function(spec, rng, 3.0);
        const double p = 1.0 + (i % 5) * 0.5;
        const double q = p + 0.25 + (i % 3);
        // F-norm subadditivity.
        CHECK(lambda_fnorm(u + v, p) <= lambda_fnorm(u, p) + lambda_fnorm(v, p) + 1e-12);
        // Nesting: pointwise integrand monotonicity.
        CHECK(std::pow(lambda_fnorm(u, q), q) <= std::pow(lambda_fnorm(u, p), p) * (1 + 1e-12));
        // Truncation at level >= 1 leaves min(|u|,1) unchanged.
        const double t = 1.0 + (i % 4);
        CHECK(lambda_fnorm(truncate(u, t), p) == lambda_fnorm(u, p));
        // Truncation is 1-Lipschitz in the metric.
        const double alpha = 0.1 + 0.3 * (i % 6);
        CHECK(lambda_dist(truncate(u, alpha), truncate(v, alpha), p) <= lambda_dist(u, v, p) + 1e-12);
    }
}

TEST_CASE("weak-L^p embedding constant is sharp for the model function")
{
    // u = |x|^{-1/p} on |x| >= r0 (0 inside), 1-D: ||u||_{p,inf}^p -> 2 and
    // int min(|u|,1)^q -> 2 q/(q-p) as r0 -> 0, L -> infinity.
    const double p = 1.0;
    const double q = 2.0;
    const double r0 = 0.02;
    const GridSpec spec(1, 200.0, 40001);
    const auto u = sample(spec, [&](const Point& x) {
        const double r = std::abs(x[0]);
        return r < r0 ? 0.0 : std::pow(r, -1.0 / p);
    });
    const double lhs = std::pow(lambda_fnorm(u, q), q);
    const double rhs = q / (q - p) * std::pow(weak_lq_quasinorm(u, p), p);
    CHECK(lhs <= rhs * 1.05);
    CHECK(lhs >= rhs * 0.95);
}
