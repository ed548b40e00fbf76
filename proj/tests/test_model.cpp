#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "arsim/arsim.hpp"

using namespace arsim;
using Catch::Approx;

namespace {

// Composite-Simpson quadrature, the independent oracle for integral-defined
// constitutive functions.
template <class F>
double simpson(F&& f, double a, double b, int intervals) {
    if (intervals % 2) ++intervals;
    double h = (b - a) / intervals;
    double acc = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

ScalarField constant_field(const Grid& g, double c) {
    ScalarField f(g);
    for (auto& x : f.v) x = c;
    return f;
}

}  // namespace

TEST_CASE("pressure: power law evaluation") {
    REQUIRE(model::pressure(2.0, 2.0) == Approx(4.0).epsilon(1e-15));
    REQUIRE(model::pressure(0.0, 1.0) == 0.0);
    REQUIRE(model::pressure(0.0, 1.7) == 0.0);
    // frozen from an exp(gamma ln rho) reference evaluation at 30 digits
    REQUIRE(model::pressure(1.5, 1.4) == Approx(1.764118533787010359).epsilon(1e-15));
}

TEST_CASE("pressure: negative density is a domain error naming the grid index") {
    Grid g{1, 8};
    ScalarField rho = constant_field(g, 1.0);
    rho.v[5] = -0.25;
    REQUIRE_THROWS_WITH(model::pressure(rho, 2.0),
                        Catch::Matchers::ContainsSubstring("index 5"));
}

TEST_CASE("internal_energy: closed forms and quadrature oracle") {
    REQUIRE(model::internal_energy(1.0, 1.0) == Approx(0.5).epsilon(1e-15));
    REQUIRE(model::internal_energy(0.0, 2.0) == 0.0);

    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        double rho = 3.0 * (rng() >> 11) * 0x1p-53;
        double expected = simpson([](double s) { return s * s; }, 0.0, rho, 400);
        REQUIRE(model::internal_energy(rho, 2.0) == Approx(expected).margin(1e-10));
    }
}

TEST_CASE("q_flux: anchored primitive of sqrt(rho) p'(rho)") {
    REQUIRE(model::q_flux(1.0, 1.0) == Approx(2.0 / 3.0).epsilon(1e-15));
    REQUIRE(model::q_flux(0.0, 2.0) == 0.0);

    // central-difference oracle for Q' = sqrt(rho) p'(rho)
    double h = 1e-5, rho = 2.0, gamma = 2.0;
    double diff = (model::q_flux(rho + h, gamma) - model::q_flux(rho - h, gamma)) / (2.0 * h);
    double expected = std::sqrt(rho) * model::pressure_prime(rho, gamma);
    REQUIRE(diff == Approx(expected).epsilon(1e-6));
}

TEST_CASE("internal_energy satisfies E' = p under central differences") {
    for (double gamma : {1.0, 1.4, 2.0}) {
        for (double rho : {0.5, 1.0, 2.5}) {
            double h = 1e-5;
            double diff =
                (model::internal_energy(rho + h, gamma) - model::internal_energy(rho - h, gamma)) /
                (2.0 * h);
            REQUIRE(diff == Approx(model::pressure(rho, gamma)).epsilon(1e-6));
        }
    }
}

TEST_CASE("rho_truncated: bounds, limits and closeness to identity") {
    REQUIRE(model::rho_truncated(0.0, 0.1) == Approx(0.1 / 1.01).epsilon(1e-15));
    REQUIRE(model::rho_truncated(3.0, 0.0) == Approx(3.0).epsilon(1e-15));

    // rho -> infinity limit bounded by 1/kappa
    double big = model::rho_truncated(1e6, 0.5);
    REQUIRE(big <= 2.0);
    REQUIRE(big == Approx(2.0).margin(1e-4));

    // monotone nondecreasing in rho
    for (double kappa : {0.01, 0.1, 0.5}) {
        double prev = model::rho_truncated(0.0, kappa);
        for (int i = 1; i <= 300; ++i) {
            double cur = model::rho_truncated(10.0 * i / 300.0, kappa);
            REQUIRE(cur >= prev - 1e-15);
            prev = cur;
        }
    }

    // |rho_kappa - rho| <= kappa (1 + rho^2) on [0, 10]
    for (double kappa : {0.01, 0.1, 0.5}) {
        for (int i = 0; i <= 200; ++i) {
            double rho = 10.0 * i / 200.0;
            REQUIRE(std::abs(model::rho_truncated(rho, kappa) - rho) <=
                    kappa * (1.0 + rho * rho) + 1e-15);
        }
    }
}

TEST_CASE("velocity_from: congestion offset subtracts from the preferred velocity") {
    Grid g{1, 32};

    SECTION("constant density gives u = w") {
        VectorField w(g), gp(g);
        for (auto& x : w[0].v) x = 0.7;
        VectorField u = model::velocity_from(w, gp);
        for (double x : u[0].v) REQUIRE(x == Approx(0.7).epsilon(1e-15));
    }

    SECTION("w = 0 gives u = -grad p") {
        ScalarField rho(g);
        for (std::size_t i = 0; i < rho.size(); ++i)
            rho.v[i] = 1.0 + 0.25 * std::sin(2.0 * std::numbers::pi * g.coord(i, 0));
        VectorField grad_rho = gradient_physical(rho);
        VectorField gp = model::grad_pressure(rho, grad_rho, 2.0);
        VectorField u = model::velocity_from(VectorField(g), gp);
        for (std::size_t i = 0; i < u[0].size(); ++i)
            REQUIRE(u[0].v[i] == Approx(-gp[0].v[i]).margin(1e-15));
    }

    SECTION("one-mode sine density, gamma = 1: closed-form offset") {
        // gamma = 1: grad p = grad rho = 2 pi a cos(2 pi x)
        double a = 0.3;
        ScalarField rho(g);
        for (std::size_t i = 0; i < rho.size(); ++i)
            rho.v[i] = 1.0 + a * std::sin(2.0 * std::numbers::pi * g.coord(i, 0));
        VectorField w(g);
        for (auto& x : w[0].v) x = 0.5;
        VectorField grad_rho = gradient_physical(rho);
        VectorField gp = model::grad_pressure(rho, grad_rho, 1.0);
        VectorField u = model::velocity_from(w, gp);
        for (std::size_t i = 0; i < u[0].size(); ++i) {
            double x = g.coord(i, 0);
            double expected = 0.5 - 2.0 * std::numbers::pi * a *
                                        std::cos(2.0 * std::numbers::pi * x);
            REQUIRE(u[0].v[i] == Approx(expected).margin(1e-12));
        }
    }

    SECTION("dimension mismatch rejected") {
        VectorField w(Grid{1, 32}), gp(Grid{2, 32});
        REQUIRE_THROWS_AS(model::velocity_from(w, gp), std::invalid_argument);
    }
}

TEST_CASE("bregman_energy: closed forms, nonnegativity, coercivity") {
    REQUIRE(model::bregman_energy(1.3, 1.3, 2.0) == 0.0);
    // gamma = 1 collapses to (rho - ref)^2 / 2
    REQUIRE(model::bregman_energy(2.0, 1.0, 1.0) == Approx(0.5).epsilon(1e-15));

    std::mt19937_64 rng(7);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * ((rng() >> 11) * 0x1p-53);
    };
    // property sweep: nonnegative for gamma = 2 over 1e4 random pairs
    for (int i = 0; i < 10000; ++i) {
        double rho = uni(0.0, 5.0), ref = uni(0.0, 5.0);
        double b = model::bregman_energy(rho, ref, 2.0);
        REQUIRE(b >= 0.0);
        if (std::abs(rho - ref) > 1e-3) REQUIRE(b > 0.0);
    }

    // coercivity on a compact band: bregman >= c (rho - ref)^2 with fitted c > 0
    double r1 = 0.5, r2 = 2.5, ref = 1.2;
    double c_fit = 1e300;
    for (int i = 0; i <= 400; ++i) {
        double rho = r1 + (r2 - r1) * i / 400.0;
        if (std::abs(rho - ref) < 1e-6) continue;
        double ratio = model::bregman_energy(rho, ref, 2.0) / ((rho - ref) * (rho - ref));
        c_fit = std::min(c_fit, ratio);
    }
    REQUIRE(c_fit > 0.0);
    // for p = rho^2, E'' = 2 rho >= 2 r1 on the band, so c >= r1
    REQUIRE(c_fit >= r1 - 1e-12);
}

TEST_CASE("bregman_energy field version rejects negative input") {
    Grid g{1, 8};
    ScalarField rho = constant_field(g, -1.0), ref = constant_field(g, 1.0);
    REQUIRE_THROWS_AS(model::bregman_energy(rho, ref, 2.0), std::domain_error);
}
