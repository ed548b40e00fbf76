#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "arsim/fft.hpp"
#include "arsim/field.hpp"

namespace arsim {

inline SpectralField to_spectral(const ScalarField& f) { return fft_for(f.grid).forward(f); }
inline ScalarField to_physical(const SpectralField& F) { return fft_for(F.grid).backward(F); }

/// Largest wave number kept by the 2/3-rule dealiasing window: the biggest k
/// with 3k < N, so that aliases of quadratic products of kept modes land in
/// the zeroed band.
inline int dealias_cutoff(const Grid& g) { return (g.points - 1) / 3; }

namespace detail {

/// Apply a per-mode complex multiplier; the multiplier receives the integer
/// wave vector.
template <class F>
SpectralField mode_multiply(const SpectralField& in, F&& mult) {
    SpectralField out(in.grid);
    out.real_symmetric = in.real_symmetric;
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
        int k[3] = {0, 0, 0};
        for (int a = 0; a < in.grid.dim; ++a) k[a] = wavenumber(in.grid, i, a);
        out.c[i] = mult(k) * in.c[i];
    }
    return out;
}

}  // namespace detail

/// Spectral derivative along `axis`: multiply mode k by i*2*pi*k_axis.
/// The unmatched Nyquist mode is dropped (odd symmetry has no partner there).
inline SpectralField derivative(const SpectralField& F, int axis) {
    const int nyq = F.grid.points / 2;
    const double two_pi = 2.0 * std::numbers::pi;
    return detail::mode_multiply(F, [axis, nyq, two_pi](const int k[3]) {
        if (k[axis] == nyq) return std::complex<double>(0.0, 0.0);
        return std::complex<double>(0.0, two_pi * k[axis]);
    });
}

inline std::vector<SpectralField> gradient(const SpectralField& F) {
    std::vector<SpectralField> g;
    g.reserve(static_cast<std::size_t>(F.grid.dim));
    for (int a = 0; a < F.grid.dim; ++a) g.push_back(derivative(F, a));
    return g;
}

/// Gradient returned in physical space.
inline VectorField gradient_physical(const ScalarField& f) {
    SpectralField F = to_spectral(f);
    VectorField g(f.grid);
    for (int a = 0; a < f.grid.dim; ++a) g[a] = to_physical(derivative(F, a));
    return g;
}

inline SpectralField divergence(const std::vector<SpectralField>& V) {
    SpectralField out(V.at(0).grid);
    for (int a = 0; a < out.grid.dim; ++a) {
        SpectralField da = derivative(V[static_cast<std::size_t>(a)], a);
        for (std::size_t i = 0; i < out.size(); ++i) out.c[i] += da.c[i];
    }
    return out;
}

inline ScalarField divergence_physical(const VectorField& v) {
    SpectralField out(v.grid);
    for (int a = 0; a < v.grid.dim; ++a) {
        SpectralField da = derivative(to_spectral(v[a]), a);
        for (std::size_t i = 0; i < out.size(); ++i) out.c[i] += da.c[i];
    }
    return to_physical(out);
}

inline SpectralField laplacian(const SpectralField& F) {
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    return detail::mode_multiply(F, [&](const int k[3]) {
        double k2 = 0.0;
        for (int a = 0; a < 3; ++a) k2 += static_cast<double>(k[a]) * k[a];
        return std::complex<double>(-four_pi2 * k2, 0.0);
    });
}

/// Orthogonal projection P_n onto X_n: zero every mode with any |k_a| > n.
/// Idempotent and self-adjoint for the discrete L2 inner product.
inline SpectralField project_modes(const SpectralField& F, int n) {
    if (n < 0 || n > F.grid.points / 2)
        throw std::invalid_argument("project_modes: cutoff out of range");
    return detail::mode_multiply(F, [n](const int k[3]) {
        for (int a = 0; a < 3; ++a)
            if (std::abs(k[a]) > n) return std::complex<double>(0.0, 0.0);
        return std::complex<double>(1.0, 0.0);
    });
}

inline ScalarField project_modes(const ScalarField& f, int n) {
    return to_physical(project_modes(to_spectral(f), n));
}

/// Heat-kernel smoothing f -> f^kappa: multiply mode k by exp(-kappa|2pi k|^2).
/// Identity at kappa = 0; preserves the mean; positivity-preserving.
inline SpectralField mollify(const SpectralField& F, double kappa) {
    if (kappa < 0.0) throw std::invalid_argument("mollify: kappa must be >= 0");
    if (kappa == 0.0) return F;
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    return detail::mode_multiply(F, [&](const int k[3]) {
        double k2 = 0.0;
        for (int a = 0; a < 3; ++a) k2 += static_cast<double>(k[a]) * k[a];
        return std::complex<double>(std::exp(-kappa * four_pi2 * k2), 0.0);
    });
}

inline ScalarField mollify(const ScalarField& f, double kappa) {
    if (kappa == 0.0) return f;
    return to_physical(mollify(to_spectral(f), kappa));
}

/// Zero all modes outside the 2/3 dealiasing window.
inline SpectralField dealias(const SpectralField& F) {
    return project_modes(F, dealias_cutoff(F.grid));
}

inline ScalarField dealias(const ScalarField& f) {
    return to_physical(dealias(to_spectral(f)));
}

/// Pseudospectral product with 2/3-rule dealiasing of the result.
inline ScalarField dealias_product(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "dealias_product");
    return dealias(a * b);
}

}  // namespace arsim
