#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "arsim/field.hpp"
#include "arsim/model.hpp"
#include "arsim/params.hpp"
#include "arsim/spectral.hpp"

namespace arsim {

/// One (rho, w) pair at a time instant.
struct State {
    double t = 0.0;
    ScalarField rho;
    VectorField w;

    State() = default;
    State(const Grid& g) : rho(g), w(g) {}

    bool finite() const { return rho.finite() && w.finite(); }
};

namespace initial {

/// Named generator parameters; unused keys are rejected by the config layer.
struct Spec {
    std::string type = "constant";  // constant | gaussian_blob | sine_mixture | random_smooth
    double rho_base = 1.0;
    double rho_amplitude = 0.3;
    double width = 0.15;            // gaussian_blob standard deviation
    std::vector<double> w_base;     // constant part of w (defaults to zeros)
    double w_amplitude = 0.0;       // oscillatory part of w
    int max_mode = 2;               // highest wave number used by random_smooth
    std::uint64_t seed = 1;
};

namespace detail {

/// Deterministic uniform in [-1, 1): fixed bit mapping, independent of any
/// library distribution so the same seed gives the same field everywhere.
inline double uniform_pm1(std::mt19937_64& rng) {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1p-53) - 1.0;
}

/// Periodized Gaussian bump centered at c (summed over neighbor images).
inline double periodic_gaussian(double x, double c, double sigma) {
    double s = 0.0;
    for (int im = -2; im <= 2; ++im) {
        double d = x - c + im;
        s += std::exp(-0.5 * d * d / (sigma * sigma));
    }
    return s;
}

}  // namespace detail

inline State make_constant(const Grid& g, const Spec& spec) {
    State s(g);
    for (auto& x : s.rho.v) x = spec.rho_base;
    for (int m = 0; m < g.dim; ++m) {
        double wm = m < static_cast<int>(spec.w_base.size()) ? spec.w_base[m] : 0.0;
        for (auto& x : s.w[m].v) x = wm;
    }
    return s;
}

inline State make_gaussian_blob(const Grid& g, const Spec& spec) {
    State s(g);
    const double c = 0.5;
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        double bump = 1.0;
        for (int a = 0; a < g.dim; ++a)
            bump *= detail::periodic_gaussian(g.coord(i, a), c, spec.width);
        s.rho.v[i] = spec.rho_base + spec.rho_amplitude * bump;
    }
    const double two_pi = 2.0 * std::numbers::pi;
    for (int m = 0; m < g.dim; ++m) {
        double wm = m < static_cast<int>(spec.w_base.size()) ? spec.w_base[m] : 0.0;
        for (std::size_t i = 0; i < s.w[m].size(); ++i) {
            double osc = std::sin(two_pi * g.coord(i, m) + 0.7 * m);
            s.w[m].v[i] = wm + spec.w_amplitude * osc;
        }
    }
    return s;
}

inline State make_sine_mixture(const Grid& g, const Spec& spec) {
    State s(g);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        double osc = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            double x = g.coord(i, a);
            osc += std::sin(two_pi * x) + 0.5 * std::cos(2.0 * two_pi * x + 0.3);
        }
        s.rho.v[i] = spec.rho_base + spec.rho_amplitude * osc / (1.5 * g.dim);
    }
    for (int m = 0; m < g.dim; ++m) {
        double wm = m < static_cast<int>(spec.w_base.size()) ? spec.w_base[m] : 0.0;
        for (std::size_t i = 0; i < s.w[m].size(); ++i) {
            double x = g.coord(i, m);
            double y = g.coord(i, (m + 1) % g.dim);
            double osc = std::cos(two_pi * x) * (g.dim > 1 ? std::sin(two_pi * y) : 1.0);
            s.w[m].v[i] = wm + spec.w_amplitude * osc;
        }
    }
    return s;
}

inline State make_random_smooth(const Grid& g, const Spec& spec) {
    State s(g);
    std::mt19937_64 rng(spec.seed);
    const double two_pi = 2.0 * std::numbers::pi;
    const int kmax = std::max(1, spec.max_mode);

    // Low-mode trigonometric mixture with geometrically damped amplitudes.
    auto fill = [&](ScalarField& f, double base, double amp) {
        struct Mode {
            int k[3];
            double a, phase[3];
        };
        std::vector<Mode> modes;
        for (int kx = 0; kx <= kmax; ++kx)
            for (int ky = 0; ky <= (g.dim > 1 ? kmax : 0); ++ky)
                for (int kz = 0; kz <= (g.dim > 2 ? kmax : 0); ++kz) {
                    if (kx + ky + kz == 0) continue;
                    Mode m;
                    m.k[0] = kx;
                    m.k[1] = ky;
                    m.k[2] = kz;
                    double damp = std::pow(0.5, kx + ky + kz - 1);
                    m.a = amp * damp * detail::uniform_pm1(rng);
                    for (int a = 0; a < 3; ++a)
                        m.phase[a] = std::numbers::pi * detail::uniform_pm1(rng);
                    modes.push_back(m);
                }
        for (std::size_t i = 0; i < f.size(); ++i) {
            double v = base;
            for (const auto& m : modes) {
                double prod = m.a;
                for (int a = 0; a < g.dim; ++a)
                    prod *= std::cos(two_pi * m.k[a] * g.coord(i, a) + m.phase[a]);
                v += prod;
            }
            f.v[i] = v;
        }
    };

    fill(s.rho, spec.rho_base, spec.rho_amplitude);
    for (int m = 0; m < g.dim; ++m) {
        double wm = m < static_cast<int>(spec.w_base.size()) ? spec.w_base[m] : 0.0;
        fill(s.w[m], wm, spec.w_amplitude);
    }
    return s;
}

/// Build the named initial state and verify it is admissible: rho strictly
/// positive and the initial energy integral(rho |w|^2 / 2 + E(rho)) finite.
inline State make_initial(const Grid& g, const Spec& spec, double gamma,
                          double* initial_energy = nullptr) {
    State s;
    if (spec.type == "constant")
        s = make_constant(g, spec);
    else if (spec.type == "gaussian_blob")
        s = make_gaussian_blob(g, spec);
    else if (spec.type == "sine_mixture")
        s = make_sine_mixture(g, spec);
    else if (spec.type == "random_smooth")
        s = make_random_smooth(g, spec);
    else
        throw std::invalid_argument("make_initial: unknown generator '" + spec.type +
                                    "' (expected constant, gaussian_blob, sine_mixture or "
                                    "random_smooth)");

    double mn = min_value(s.rho);
    if (!(mn > 0.0))
        throw std::invalid_argument("make_initial: generator '" + spec.type +
                                    "' produced rho <= 0 (min " + std::to_string(mn) + ")");
    if (!s.finite()) throw std::invalid_argument("make_initial: non-finite field");

    if (initial_energy) {
        ScalarField dens(g);
        for (std::size_t i = 0; i < dens.size(); ++i) {
            double w2 = 0.0;
            for (int m = 0; m < g.dim; ++m) w2 += s.w[m].v[i] * s.w[m].v[i];
            dens.v[i] = 0.5 * s.rho.v[i] * w2 + model::internal_energy(s.rho.v[i], gamma);
        }
        *initial_energy = integral(dens);
    }
    return s;
}

}  // namespace initial
}  // namespace arsim
