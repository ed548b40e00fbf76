#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "arsim/field.hpp"
#include "arsim/spectral.hpp"

namespace arsim {
namespace model {

namespace detail {

inline void check_nonnegative(const ScalarField& rho, const char* op) {
    for (std::size_t i = 0; i < rho.v.size(); ++i)
        if (!(rho.v[i] >= 0.0))
            throw std::domain_error(std::string(op) + ": negative density at grid index " +
                                    std::to_string(i) + " (value " + std::to_string(rho.v[i]) +
                                    ")");
}

/// x^g with fast paths for the exponents the solver hits in its inner loops.
inline double pow_pos(double x, double g) {
    if (g == 1.0) return x;
    if (g == 2.0) return x * x;
    if (g == 3.0) return x * x * x;
    if (g == 0.5) return std::sqrt(x);
    if (g == 1.5) return x * std::sqrt(x);
    if (g == 2.5) return x * x * std::sqrt(x);
    return std::pow(x, g);
}

}  // namespace detail

// --- pointwise constitutive laws (velocity cost p, energy E, flux Q) ---

/// Velocity cost / pressure p(rho) = rho^gamma.
inline double pressure(double rho, double gamma) { return detail::pow_pos(rho, gamma); }

/// p'(rho) = gamma rho^(gamma-1).
inline double pressure_prime(double rho, double gamma) {
    return gamma * detail::pow_pos(rho, gamma - 1.0);
}

/// Internal energy E(rho) = integral_0^rho p(s) ds = rho^(gamma+1)/(gamma+1).
inline double internal_energy(double rho, double gamma) {
    return detail::pow_pos(rho, gamma + 1.0) / (gamma + 1.0);
}

/// Q(rho), the primitive of Q'(rho) = sqrt(rho) p'(rho) anchored at Q(0) = 0:
/// Q(rho) = (2 gamma / (2 gamma + 1)) rho^(gamma + 1/2).
inline double q_flux(double rho, double gamma) {
    return (2.0 * gamma / (2.0 * gamma + 1.0)) * detail::pow_pos(rho, gamma + 0.5);
}

/// Q'(rho) = sqrt(rho) p'(rho) = gamma rho^(gamma - 1/2).
inline double q_flux_prime(double rho, double gamma) {
    return gamma * detail::pow_pos(rho, gamma - 0.5);
}

/// Bounded truncation rho_kappa = sqrt(rho^2+kappa^2) / (1 + kappa sqrt(rho^2+kappa^2)).
/// Identity for kappa = 0; range (0, 1/kappa] for kappa > 0.
inline double rho_truncated(double rho, double kappa) {
    double s = std::sqrt(rho * rho + kappa * kappa);
    return s / (1.0 + kappa * s);
}

/// Bregman divergence of E: E(rho) - E(ref) - p(ref)(rho - ref), >= 0 for
/// gamma >= 1. The gamma = 1 case collapses to (rho-ref)^2/2 exactly, which
/// avoids cancellation; the general case accumulates in extended precision.
inline double bregman_energy(double rho, double ref, double gamma) {
    if (gamma == 1.0) {
        double d = rho - ref;
        return 0.5 * d * d;
    }
    long double e = static_cast<long double>(internal_energy(rho, gamma));
    long double eref = static_cast<long double>(internal_energy(ref, gamma));
    long double pref = static_cast<long double>(pressure(ref, gamma));
    long double r = e - eref - pref * (static_cast<long double>(rho) - ref);
    return r < 0.0L ? 0.0 : static_cast<double>(r);
}

/// Bregman divergence of Q: Q(rho) - Q(ref) - Q'(ref)(rho - ref).
inline double bregman_q(double rho, double ref, double gamma) {
    long double q = static_cast<long double>(q_flux(rho, gamma));
    long double qref = static_cast<long double>(q_flux(ref, gamma));
    long double qpref = static_cast<long double>(q_flux_prime(ref, gamma));
    return static_cast<double>(q - qref - qpref * (static_cast<long double>(rho) - ref));
}

// --- field versions ---

inline ScalarField pressure(const ScalarField& rho, double gamma) {
    detail::check_nonnegative(rho, "pressure");
    return map_field(rho, [gamma](double r) { return pressure(r, gamma); });
}

inline ScalarField pressure_prime(const ScalarField& rho, double gamma) {
    detail::check_nonnegative(rho, "pressure_prime");
    return map_field(rho, [gamma](double r) { return pressure_prime(r, gamma); });
}

inline ScalarField internal_energy(const ScalarField& rho, double gamma) {
    detail::check_nonnegative(rho, "internal_energy");
    return map_field(rho, [gamma](double r) { return internal_energy(r, gamma); });
}

inline ScalarField q_flux(const ScalarField& rho, double gamma) {
    detail::check_nonnegative(rho, "q_flux");
    return map_field(rho, [gamma](double r) { return q_flux(r, gamma); });
}

inline ScalarField rho_truncated(const ScalarField& rho, double kappa) {
    if (kappa < 0.0) throw std::invalid_argument("rho_truncated: kappa must be >= 0");
    detail::check_nonnegative(rho, "rho_truncated");
    return map_field(rho, [kappa](double r) { return rho_truncated(r, kappa); });
}

/// Gradient of p(rho) by the chain rule p'(rho) grad(rho), with the gradient
/// of the primary field taken spectrally. Keeping one grad(rho) object shared
/// across all derived gradients makes the pointwise identities between
/// p-, Q- and E-gradients exact on the grid.
inline VectorField grad_pressure(const ScalarField& rho, const VectorField& grad_rho,
                                 double gamma) {
    ScalarField pp = pressure_prime(rho, gamma);
    VectorField g(rho.grid);
    for (int a = 0; a < rho.grid.dim; ++a) g[a] = pp * grad_rho[a];
    return g;
}

/// Gradient of Q(rho) as Q'(rho) grad(rho).
inline VectorField grad_q(const ScalarField& rho, const VectorField& grad_rho, double gamma) {
    ScalarField qp = map_field(rho, [gamma](double r) { return q_flux_prime(r, gamma); });
    VectorField g(rho.grid);
    for (int a = 0; a < rho.grid.dim; ++a) g[a] = qp * grad_rho[a];
    return g;
}

/// Actual transport velocity u = w - grad p(rho): the preferred velocity w
/// exceeds the realized one by the congestion cost gradient. This is the
/// convention under which the continuity equation carries forward
/// porous-medium diffusion and the energy identities close.
inline VectorField velocity_from(const VectorField& w, const VectorField& grad_p) {
    require_same_grid(w.grid, grad_p.grid, "velocity_from");
    return w - grad_p;
}

inline ScalarField bregman_energy(const ScalarField& rho, const ScalarField& ref, double gamma) {
    detail::check_nonnegative(rho, "bregman_energy");
    detail::check_nonnegative(ref, "bregman_energy(ref)");
    return zip_fields(rho, ref,
                      [gamma](double r, double rr) { return bregman_energy(r, rr, gamma); });
}

}  // namespace model
}  // namespace arsim
