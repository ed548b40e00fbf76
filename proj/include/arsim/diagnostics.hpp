#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "arsim/field.hpp"
#include "arsim/initial.hpp"
#include "arsim/model.hpp"
#include "arsim/params.hpp"
#include "arsim/spectral.hpp"

namespace arsim {
namespace diagnostics {

/// One row of monitored functionals at time t. All integrals are dealiased
/// spectral quadratures (grid means), exact for trigonometric polynomials.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;              // integral rho
    double momentum_energy = 0.0;   // integral rho |w|^2
    std::vector<double> lp_moments; // integral rho |w|^p per configured p
    double internal_energy = 0.0;   // integral E(rho)
    double q_dissipation = 0.0;     // integral |grad Q(rho)|^2
    double cross_term = 0.0;        // integral w . sqrt(rho) grad Q(rho)
    double grad_w_norm = 0.0;       // integral |grad w|^2 (Frobenius)
    double min_rho = 0.0;
    double max_rho = 0.0;
    long floor_activations = 0;     // cumulative clip count (solver-supplied)
    bool flagged = false;           // NaN anywhere in the state
};

inline DiagnosticsRecord record(const State& s, const Params& p, long floor_activations = 0) {
    DiagnosticsRecord r;
    r.t = s.t;
    r.floor_activations = floor_activations;
    r.flagged = !s.finite();

    const Grid& g = s.rho.grid;
    const std::size_t n = s.rho.size();

    VectorField grad_rho = gradient_physical(s.rho);
    ScalarField qp = map_field(s.rho, [&](double x) { return model::q_flux_prime(x, p.gamma); });

    long double mass = 0, me = 0, ie = 0, qd = 0, ct = 0;
    std::vector<long double> lps(p.lp_moments.size(), 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        double rho = s.rho.v[i];
        double w2 = 0.0, wdotgq = 0.0;
        for (int m = 0; m < g.dim; ++m) {
            double wm = s.w[m].v[i];
            w2 += wm * wm;
            wdotgq += wm * qp.v[i] * grad_rho[m].v[i];
        }
        double gq2 = 0.0;
        for (int m = 0; m < g.dim; ++m) {
            double gq = qp.v[i] * grad_rho[m].v[i];
            gq2 += gq * gq;
        }
        mass += rho;
        me += rho * w2;
        ie += model::internal_energy(rho, p.gamma);
        qd += gq2;
        ct += std::sqrt(std::max(0.0, rho)) * wdotgq;
        for (std::size_t q = 0; q < lps.size(); ++q)
            lps[q] += rho * std::pow(std::sqrt(w2), p.lp_moments[q]);
    }
    const long double inv = 1.0L / static_cast<long double>(n);
    r.mass = static_cast<double>(mass * inv);
    r.momentum_energy = static_cast<double>(me * inv);
    r.internal_energy = static_cast<double>(ie * inv);
    r.q_dissipation = static_cast<double>(qd * inv);
    r.cross_term = static_cast<double>(ct * inv);
    r.lp_moments.resize(lps.size());
    for (std::size_t q = 0; q < lps.size(); ++q)
        r.lp_moments[q] = static_cast<double>(lps[q] * inv);

    long double gw = 0.0;
    for (int m = 0; m < g.dim; ++m) {
        VectorField gm = gradient_physical(s.w[m]);
        for (int a = 0; a < g.dim; ++a)
            for (std::size_t i = 0; i < n; ++i) gw += static_cast<long double>(gm[a].v[i]) * gm[a].v[i];
    }
    r.grad_w_norm = static_cast<double>(gw * inv);
    r.min_rho = min_value(s.rho);
    r.max_rho = max_value(s.rho);
    return r;
}

/// Per-interval residual of the momentum energy balance
///   d/dt integral rho|w|^2 + 2 delta integral |grad w|^2 = 0
/// (time-differentiated Galerkin momentum equation tested with w itself).
/// Trapezoid in time on the record cadence; O(dt) per interval.
inline std::vector<double> energy_balance_residual(const std::vector<DiagnosticsRecord>& recs,
                                                   const Params& p) {
    if (recs.size() < 2)
        throw std::invalid_argument("energy_balance_residual: need at least 2 records");
    std::vector<double> out;
    out.reserve(recs.size() - 1);
    for (std::size_t j = 0; j + 1 < recs.size(); ++j) {
        double dt = recs[j + 1].t - recs[j].t;
        double diss = 0.5 * (recs[j].grad_w_norm + recs[j + 1].grad_w_norm) * dt;
        out.push_back(recs[j + 1].momentum_energy - recs[j].momentum_energy +
                      2.0 * p.delta * diss);
    }
    return out;
}

/// Cumulative residual of the energy inequality
///   integral E(rho)(tau) + int_0^tau integral |grad Q|^2
///     <= integral E(rho_0) + int_0^tau integral w . sqrt(rho) grad Q.
/// Nonpositive residual means the inequality is satisfied.
inline std::vector<double> energy_inequality_residual(const std::vector<DiagnosticsRecord>& recs,
                                                      const Params&) {
    if (recs.size() < 2)
        throw std::invalid_argument("energy_inequality_residual: need at least 2 records");
    std::vector<double> out(recs.size(), 0.0);
    long double q_int = 0.0L, c_int = 0.0L;
    for (std::size_t j = 1; j < recs.size(); ++j) {
        double dt = recs[j].t - recs[j - 1].t;
        q_int += 0.5L * (recs[j - 1].q_dissipation + recs[j].q_dissipation) * dt;
        c_int += 0.5L * (recs[j - 1].cross_term + recs[j].cross_term) * dt;
        out[j] = static_cast<double>((recs[j].internal_energy - recs[0].internal_energy) +
                                     q_int - c_int);
    }
    return out;
}

/// Relative energy between a run state and a positive reference, its
/// dissipation distance, and the seven remainder integrals of the
/// strong-solution remainder identity.
struct RelativeEnergyReport {
    double t = 0.0;
    double rel_energy = 0.0;         // integral( rho|w-wref|^2/2 + Bregman(rho|rhoref) )
    double q_rel_dissipation = 0.0;  // integral |grad Q(rho) - sqrt(rho/rhoref) grad Q(rhoref)|^2
    std::array<double, 7> remainder{};  // T1..T7
    double gronwall_ratio = 1.0;     // rel_energy(t) / rel_energy(0), series context
    double remainder_sum() const {
        double s = 0.0;
        for (double x : remainder) s += x;
        return s;
    }
};

/// The derived fields shared by the relative-energy evaluation. Gradients of
/// nonlinear functions of rho are chain-rule products of a single spectral
/// grad(rho), so the pointwise identities between the p-, Q- and E-forms are
/// exact on the grid.
inline RelativeEnergyReport relative_energy(const State& s, const State& ref, const Params& p,
                                            double ref_lower_bound = 0.0) {
    require_same_grid(s.rho.grid, ref.rho.grid, "relative_energy");
    double bound = ref_lower_bound > 0.0 ? ref_lower_bound : p.rho_floor;
    for (std::size_t i = 0; i < ref.rho.size(); ++i)
        if (!(ref.rho.v[i] >= bound))
            throw std::domain_error("relative_energy: reference density below bound " +
                                    std::to_string(bound) + " at grid index " +
                                    std::to_string(i) + " (value " +
                                    std::to_string(ref.rho.v[i]) + ")");

    const Grid& g = s.rho.grid;
    const std::size_t n = g.size();
    const int d = g.dim;

    VectorField grad_rho = gradient_physical(s.rho);
    VectorField grad_rho_ref = gradient_physical(ref.rho);

    ScalarField sq = map_field(s.rho, [](double x) { return std::sqrt(std::max(0.0, x)); });
    ScalarField sq_ref = map_field(ref.rho, [](double x) { return std::sqrt(x); });

    VectorField grad_q = model::grad_q(s.rho, grad_rho, p.gamma);
    VectorField grad_q_ref = model::grad_q(ref.rho, grad_rho_ref, p.gamma);
    VectorField grad_p_ref = model::grad_pressure(ref.rho, grad_rho_ref, p.gamma);

    // Actual reference velocity and the flux sqrt(rhoref) uref whose
    // divergence drives T6.
    VectorField u_ref = model::velocity_from(ref.w, grad_p_ref);
    VectorField sq_u(g);
    for (int m = 0; m < d; ++m) sq_u[m] = sq_ref * u_ref[m];
    ScalarField div_sq_u = divergence_physical(sq_u);

    // grad of the reference preferred velocity, (m, a) -> d_a wref_m
    std::vector<VectorField> grad_w_ref;
    grad_w_ref.reserve(static_cast<std::size_t>(d));
    for (int m = 0; m < d; ++m) grad_w_ref.push_back(gradient_physical(ref.w[m]));

    RelativeEnergyReport rep;
    rep.t = s.t;

    long double rel = 0, qrel = 0;
    long double T1 = 0, T2 = 0, T3 = 0, T4 = 0, T5 = 0, T6 = 0, T7 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double rho = s.rho.v[i];
        double rref = ref.rho.v[i];
        double ratio = sq.v[i] / sq_ref.v[i];

        double W[3], G[3];
        double W2 = 0.0;
        for (int m = 0; m < d; ++m) {
            W[m] = s.w[m].v[i] - ref.w[m].v[i];
            G[m] = grad_q[m].v[i] - ratio * grad_q_ref[m].v[i];
            W2 += W[m] * W[m];
        }
        rel += 0.5 * rho * W2 + model::bregman_energy(rho, rref, p.gamma);
        for (int m = 0; m < d; ++m) qrel += static_cast<long double>(G[m]) * G[m];

        double WWgw = 0.0, WGgw = 0.0;
        for (int m = 0; m < d; ++m)
            for (int a = 0; a < d; ++a) {
                double dw = grad_w_ref[static_cast<std::size_t>(m)][a].v[i];
                WWgw += W[m] * W[a] * dw;
                WGgw += W[m] * G[a] * dw;
            }
        T1 -= rho * WWgw;
        T2 += sq.v[i] * WGgw;

        double WG = 0.0, wrefG = 0.0, gqrefG = 0.0, urefgqref = 0.0;
        for (int m = 0; m < d; ++m) {
            WG += W[m] * G[m];
            wrefG += ref.w[m].v[i] * G[m];
            gqrefG += grad_q_ref[m].v[i] * G[m];
            urefgqref += u_ref[m].v[i] * grad_q_ref[m].v[i];
        }
        T3 += sq.v[i] * WG;
        T4 += (sq.v[i] - sq_ref.v[i]) * wrefG;
        T5 += (1.0 - ratio) * gqrefG;
        T6 -= model::bregman_q(rho, rref, p.gamma) * div_sq_u.v[i];
        T7 -= (sq.v[i] - sq_ref.v[i] - (rho - rref) / (2.0 * sq_ref.v[i])) * urefgqref;
    }
    const long double inv = 1.0L / static_cast<long double>(n);
    rep.rel_energy = static_cast<double>(rel * inv);
    rep.q_rel_dissipation = static_cast<double>(qrel * inv);
    rep.remainder = {static_cast<double>(T1 * inv), static_cast<double>(T2 * inv),
                     static_cast<double>(T3 * inv), static_cast<double>(T4 * inv),
                     static_cast<double>(T5 * inv), static_cast<double>(T6 * inv),
                     static_cast<double>(T7 * inv)};
    return rep;
}

struct GronwallResult {
    bool coincidence_mode = false;  // rel_energy(0) below degeneracy threshold
    double rate = 0.0;              // fitted C from log-linear regression
    double margin = 0.0;
    bool passed = false;
    double worst_excess = 0.0;      // max of rel(t)/(rel(0) e^{(C+margin)t}) - 1
    double max_rel_energy = 0.0;
};

struct GronwallOptions {
    double margin = 0.5;             // additive allowance on the fitted rate
    double coincidence_tol = 1e-10;  // pass bound when initial distance is zero
    double degenerate_threshold = 1e-14;
};

/// Empirical weak-strong test: fit the exponential growth rate of the
/// relative energy and verify the whole series stays under the envelope
/// rel(0) exp((C+margin) t). Zero initial distance switches to the
/// exact-coincidence assertion rel(t) <= coincidence_tol.
inline GronwallResult gronwall_check(const std::vector<RelativeEnergyReport>& reports,
                                     const GronwallOptions& opt = {}) {
    if (reports.empty()) throw std::invalid_argument("gronwall_check: empty report sequence");
    GronwallResult res;
    res.margin = opt.margin;
    double rel0 = reports.front().rel_energy;
    for (const auto& r : reports) res.max_rel_energy = std::max(res.max_rel_energy, r.rel_energy);

    if (rel0 <= opt.degenerate_threshold) {
        res.coincidence_mode = true;
        res.passed = res.max_rel_energy <= opt.coincidence_tol;
        return res;
    }

    double t0 = reports.front().t;
    long double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t used = 0;
    for (const auto& r : reports) {
        if (!(r.rel_energy > 0.0)) continue;
        double t = r.t - t0;
        double y = std::log(r.rel_energy / rel0);
        st += t;
        sy += y;
        stt += static_cast<long double>(t) * t;
        sty += static_cast<long double>(t) * y;
        ++used;
    }
    if (used < 2) throw std::invalid_argument("gronwall_check: need at least 2 usable samples");
    long double denom = static_cast<long double>(used) * stt - st * st;
    res.rate = denom == 0.0L ? 0.0
                             : static_cast<double>((static_cast<long double>(used) * sty -
                                                    st * sy) / denom);

    res.passed = true;
    for (const auto& r : reports) {
        double envelope = rel0 * std::exp((res.rate + opt.margin) * (r.t - t0));
        double excess = r.rel_energy / envelope - 1.0;
        res.worst_excess = std::max(res.worst_excess, excess);
        if (excess > 0.0) res.passed = false;
    }
    return res;
}

/// Pointwise convexity gap mean(rho_i^alpha) - (mean rho_i)^alpha over an
/// ensemble of density fields, plus its spatial integral. Zero gap certifies
/// a concentrated (Dirac-like) ensemble.
inline std::pair<ScalarField, double> jensen_gap(const std::vector<ScalarField>& ensemble,
                                                 double alpha) {
    if (ensemble.empty()) throw std::invalid_argument("jensen_gap: empty ensemble");
    if (!(alpha > 1.0)) throw std::invalid_argument("jensen_gap: alpha must be > 1");
    const Grid& g = ensemble.front().grid;
    for (const auto& f : ensemble) require_same_grid(g, f.grid, "jensen_gap");

    ScalarField gap(g);
    const double inv = 1.0 / static_cast<double>(ensemble.size());
    for (std::size_t i = 0; i < gap.size(); ++i) {
        long double mean_pow = 0.0L, mean = 0.0L;
        for (const auto& f : ensemble) {
            double r = f.v[i];
            if (!(r >= 0.0))
                throw std::domain_error("jensen_gap: negative density at grid index " +
                                        std::to_string(i));
            mean_pow += std::pow(r, alpha);
            mean += r;
        }
        gap.v[i] = static_cast<double>(mean_pow * inv) -
                   std::pow(static_cast<double>(mean * inv), alpha);
    }
    return {gap, integral(gap)};
}

}  // namespace diagnostics
}  // namespace arsim
