#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "arsim/diagnostics.hpp"
#include "arsim/field.hpp"
#include "arsim/initial.hpp"
#include "arsim/mass_matrix.hpp"
#include "arsim/model.hpp"
#include "arsim/params.hpp"
#include "arsim/spectral.hpp"

namespace arsim {

/// Unrecoverable stepping failure; carries the (t, dt, norms) trace.
class SolverError : public std::runtime_error {
  public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invariant violation surfaced in strict mode.
class InvariantError : public std::runtime_error {
  public:
    explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

struct StepStats {
    double dt_used = 0.0;
    int halvings = 0;
    int picard_iters = 0;
    double picard_residual = 0.0;
    std::vector<double> picard_history;  // successive iterate distances
    int floor_hits = 0;
    int cg_iterations = 0;  // total over continuity + momentum solves
};

struct RunOptions {
    int cadence = 1;           // diagnostics row every N accepted steps
    bool keep_states = false;  // retain the state at every tick (compare needs this)
    bool strict = false;       // abort on first invariant violation
    std::function<void(const State&, const diagnostics::DiagnosticsRecord&)> on_record;
};

struct RunResult {
    State final_state;
    std::vector<diagnostics::DiagnosticsRecord> records;
    std::vector<State> tick_states;
    std::vector<std::string> invariant_failures;
    std::vector<std::string> quality_flags;
    long total_floor_hits = 0;
    long steps = 0;
    bool ok() const { return invariant_failures.empty(); }
};

namespace detail {

/// Diffusion coefficient of the regularized continuity equation:
/// eps + heat-mollified rho_kappa p'(rho_kappa), clipped at zero against
/// mollifier roundoff.
inline ScalarField diffusion_coefficient(const ScalarField& rho, const Params& p) {
    ScalarField ck = model::rho_truncated(rho, p.kappa);
    ScalarField cpp(rho.grid);
    for (std::size_t i = 0; i < rho.size(); ++i)
        cpp.v[i] = ck.v[i] * model::pressure_prime(ck.v[i], p.gamma);
    ScalarField sm = mollify(cpp, p.kappa);
    for (std::size_t i = 0; i < sm.size(); ++i)
        sm.v[i] = p.epsilon + std::max(0.0, sm.v[i]);
    return sm;
}

/// Spectral multiplier solve of (1 + dt*cbar*|2pi k|^2) x = r.
inline ScalarField helmholtz_precondition(const ScalarField& r, double dt, double cbar) {
    SpectralField R = to_spectral(r);
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    for (std::size_t i = 0; i < R.size(); ++i) {
        double k2 = 0.0;
        for (int a = 0; a < R.grid.dim; ++a) {
            double k = wavenumber(R.grid, i, a);
            k2 += k * k;
        }
        R.c[i] /= (1.0 + dt * cbar * four_pi2 * k2);
    }
    return to_physical(R);
}

}  // namespace detail

/// Right side of the regularized continuity equation,
///   -div(rho w) + div((eps + [rho_k p'(rho_k)]^kappa) grad rho),
/// with the transport flux dealiased. Throws SolverError on NaN.
inline ScalarField continuity_rhs(const State& s, const Params& p) {
    const Grid& g = s.rho.grid;
    ScalarField coef = detail::diffusion_coefficient(s.rho, p);
    VectorField grad_rho = gradient_physical(s.rho);
    VectorField flux(g);
    for (int a = 0; a < g.dim; ++a) {
        ScalarField transport = dealias_product(s.rho, s.w[a]);
        flux[a] = ScalarField(g);
        for (std::size_t i = 0; i < flux[a].size(); ++i)
            flux[a].v[i] = coef.v[i] * grad_rho[a].v[i] - transport.v[i];
    }
    ScalarField r = divergence_physical(flux);
    if (!r.finite()) throw SolverError("continuity_rhs: non-finite right side (step rejection)");
    return r;
}

/// Galerkin coefficient field (Riesz representative in X_n per component) of
/// the momentum right side r with A cdot = r:
///   r_m = P_n[ -div(rho w_m w) + div(coef w_m grad rho) ] + delta lap(w_m)
///         - P_n(drho_dt w_m).
inline VectorField momentum_rhs(const State& s, const ScalarField& drho_dt, const Params& p) {
    const Grid& g = s.rho.grid;
    require_same_grid(g, drho_dt.grid, "momentum_rhs");
    ScalarField coef = detail::diffusion_coefficient(s.rho, p);
    VectorField grad_rho = gradient_physical(s.rho);
    VectorField r(g);
    for (int m = 0; m < g.dim; ++m) {
        VectorField flux(g);
        for (int a = 0; a < g.dim; ++a) {
            flux[a] = ScalarField(g);
            for (std::size_t i = 0; i < flux[a].size(); ++i) {
                double wm = s.w[m].v[i];
                flux[a].v[i] =
                    coef.v[i] * wm * grad_rho[a].v[i] - s.rho.v[i] * wm * s.w[a].v[i];
            }
        }
        SpectralField div = to_spectral(flux[0]);
        div = derivative(div, 0);
        for (int a = 1; a < g.dim; ++a) {
            SpectralField da = derivative(to_spectral(flux[a]), a);
            for (std::size_t i = 0; i < div.size(); ++i) div.c[i] += da.c[i];
        }
        SpectralField wm_spec = to_spectral(s.w[m]);
        SpectralField lap = laplacian(wm_spec);
        ScalarField dtrho_w = drho_dt * s.w[m];
        SpectralField dtw = to_spectral(dtrho_w);
        for (std::size_t i = 0; i < div.size(); ++i)
            div.c[i] = div.c[i] + p.delta * lap.c[i] - dtw.c[i];
        r[m] = to_physical(project_modes(div, p.n_modes));
        if (!r[m].finite())
            throw SolverError("momentum_rhs: non-finite right side (step rejection)");
    }
    return r;
}

/// Time integrator: per-step Picard fixed point coupling the IMEX continuity
/// update (transport explicit, diffusion implicit with frozen coefficient) to
/// the Galerkin momentum solve (transport/drift explicit, delta-Laplacian and
/// mass operator implicit).
class Solver {
  public:
    explicit Solver(const Params& p) : p_(p) { p_.validate(); }

    const Params& params() const { return p_; }

    /// Largest stable transport step 0.4 dx / max|u| with u = w - grad p(rho).
    double cfl_dt(const State& s) const {
        VectorField grad_rho = gradient_physical(s.rho);
        VectorField grad_p = model::grad_pressure(s.rho, grad_rho, p_.gamma);
        double umax = 0.0;
        for (std::size_t i = 0; i < s.rho.size(); ++i) {
            double u2 = 0.0;
            for (int m = 0; m < s.rho.grid.dim; ++m) {
                double um = s.w[m].v[i] - grad_p[m].v[i];
                u2 += um * um;
            }
            umax = std::max(umax, u2);
        }
        umax = std::sqrt(umax);
        if (umax <= 0.0) return std::numeric_limits<double>::infinity();
        return p_.cfl_safety * s.rho.grid.dx() / umax;
    }

    /// One accepted step of size at most dt; on Picard failure the step is
    /// halved (up to 10 times) before giving up with a full trace.
    State step(const State& s, double dt, StepStats* stats = nullptr) {
        StepStats local;
        StepStats& st = stats ? *stats : local;
        std::string last_reason;
        double try_dt = dt;
        for (int h = 0; h <= 10; ++h) {
            st.halvings = h;
            try {
                State out = attempt(s, try_dt, st);
                st.dt_used = try_dt;
                return out;
            } catch (const StepReject& rej) {
                last_reason = rej.what();
                try_dt *= 0.5;
            }
        }
        std::ostringstream os;
        os << "solver: step failed after 10 halvings at t = " << s.t << ", last dt = "
           << (try_dt * 2.0) << ", |rho| = " << l2_norm(s.rho) << ", |w| = " << l2_norm(s.w)
           << ", picard residual = " << st.picard_residual << " (" << last_reason << ")";
        throw SolverError(os.str());
    }

    /// Advance to t_end, recording diagnostics at the observer cadence and
    /// monitoring the per-step invariants (mass, momentum-energy monotonicity,
    /// finiteness, floor activations).
    RunResult run(const State& initial, const RunOptions& opts = {}) {
        RunResult out;
        State cur = initial;
        const double t_end = p_.t_end;

        auto push_record = [&](const State& s) {
            auto rec = diagnostics::record(s, p_, out.total_floor_hits);
            out.records.push_back(rec);
            if (opts.keep_states) out.tick_states.push_back(s);
            if (opts.on_record) opts.on_record(s, rec);
            return rec;
        };

        auto rec0 = push_record(cur);
        const double mass0 = rec0.mass;
        double me_prev = rec0.momentum_energy;

        if (initial.t >= t_end) {
            out.final_state = cur;
            return out;
        }

        auto fail = [&](const std::string& msg) {
            out.invariant_failures.push_back(msg);
            if (opts.strict) throw InvariantError(msg);
        };

        const double t_tiny = 1e-12 * std::max(1.0, t_end);
        while (cur.t < t_end - t_tiny) {
            double dt_step = std::min({p_.dt, t_end - cur.t, cfl_dt(cur)});
            StepStats st;
            State next = step(cur, dt_step, &st);
            out.total_floor_hits += st.floor_hits;
            ++out.steps;

            if (!next.finite())
                throw SolverError("solver: non-finite state at t = " + std::to_string(next.t));
            double mass_now = integral(next.rho);
            if (std::abs(mass_now - mass0) > 1e-10 * std::abs(mass0))
                fail("mass conservation violated at t = " + std::to_string(next.t) +
                     " (relative drift " + std::to_string((mass_now - mass0) / mass0) + ")");
            double me_now = momentum_energy(next);
            if (me_now > me_prev + 1e-8)
                fail("momentum energy increased by " + std::to_string(me_now - me_prev) +
                     " at t = " + std::to_string(next.t));
            me_prev = me_now;
            cur = next;

            bool final_step = cur.t >= t_end - t_tiny;
            if (out.steps % opts.cadence == 0 || final_step) push_record(cur);
        }

        if (out.total_floor_hits > 0)
            out.quality_flags.push_back("density floor activated " +
                                        std::to_string(out.total_floor_hits) +
                                        " times (rho_floor = " + std::to_string(p_.rho_floor) +
                                        ")");
        out.final_state = cur;
        return out;
    }

  private:
    class StepReject : public std::runtime_error {
      public:
        explicit StepReject(const std::string& m) : std::runtime_error(m) {}
    };

    static double momentum_energy(const State& s) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < s.rho.size(); ++i) {
            double w2 = 0.0;
            for (int m = 0; m < s.rho.grid.dim; ++m) w2 += s.w[m].v[i] * s.w[m].v[i];
            acc += s.rho.v[i] * w2;
        }
        return static_cast<double>(acc / static_cast<long double>(s.rho.size()));
    }

    State attempt(const State& s, double dt, StepStats& st) {
        const Grid& g = s.rho.grid;
        const int d = g.dim;
        const double mass0 = integral(s.rho);
        st.picard_history.clear();
        st.floor_hits = 0;
        st.cg_iterations = 0;

        // conserved momentum functional P_n(rho_n w_n,m), fixed over the sweeps
        std::vector<ScalarField> b_time(static_cast<std::size_t>(d));
        for (int m = 0; m < d; ++m)
            b_time[static_cast<std::size_t>(m)] = apply_weighted_mass(s.rho, p_.n_modes, s.w[m]);

        ScalarField rho_it = s.rho;
        VectorField w_it = s.w;
        ScalarField rho_new = s.rho;
        VectorField w_new = s.w;

        bool converged = false;
        int sweep = 0;
        for (; sweep < p_.picard_max_iter; ++sweep) {
            ScalarField coef = detail::diffusion_coefficient(rho_it, p_);
            double cbar = integral(coef);

            // explicit transport at (rho_n, w_it)
            VectorField trans_flux(g);
            for (int a = 0; a < d; ++a) trans_flux[a] = dealias_product(s.rho, w_it[a]);
            ScalarField transport = divergence_physical(trans_flux);

            ScalarField rhs = s.rho - dt * transport;
            rho_new = rho_it;
            auto res_c = pcg(
                [&](const ScalarField& x) {
                    VectorField gx = gradient_physical(x);
                    VectorField fx(g);
                    for (int a = 0; a < d; ++a) fx[a] = coef * gx[a];
                    ScalarField div = divergence_physical(fx);
                    return zip_fields(x, div, [dt](double xi, double di) { return xi - dt * di; });
                },
                [&](const ScalarField& r) { return detail::helmholtz_precondition(r, dt, cbar); },
                rhs, rho_new, 1e-10, 500);
            st.cg_iterations += res_c.iterations;
            if (!res_c.converged)
                throw StepReject("continuity solve stalled (residual " +
                                 std::to_string(res_c.residual) + ")");
            if (!rho_new.finite()) throw StepReject("non-finite density iterate");

            // evolution is in divergence form; pin the mean against solver roundoff
            double shift = mass0 - integral(rho_new);
            for (auto& x : rho_new.v) x += shift;
            for (auto& x : rho_new.v)
                if (x < p_.rho_floor) {
                    x = p_.rho_floor;
                    ++st.floor_hits;
                }

            // momentum sweeps: (P_n rho_new P_n + dt delta (-lap)) w_new = b
            VectorField grad_rho_new = gradient_physical(rho_new);
            double rho_mean = integral(rho_new);
            double err2 = 0.0;
            for (int m = 0; m < d; ++m) {
                ScalarField weak =
                    momentum_explicit_rhs(rho_new, w_it, m, coef, grad_rho_new);
                ScalarField b = b_time[static_cast<std::size_t>(m)] + dt * weak;
                ScalarField x = w_it[m];
                auto res_m = pcg(
                    [&](const ScalarField& v) {
                        ScalarField mv = apply_weighted_mass(rho_new, p_.n_modes, v);
                        if (p_.delta > 0.0) {
                            SpectralField lv = laplacian(to_spectral(v));
                            ScalarField lvp = to_physical(project_modes(lv, p_.n_modes));
                            for (std::size_t i = 0; i < mv.size(); ++i)
                                mv.v[i] -= dt * p_.delta * lvp.v[i];
                        }
                        return mv;
                    },
                    [&](const ScalarField& r) {
                        return momentum_precondition(r, dt, rho_mean);
                    },
                    b, x, 1e-12, 500);
                st.cg_iterations += res_m.iterations;
                if (!res_m.converged)
                    throw StepReject("momentum solve stalled (residual " +
                                     std::to_string(res_m.residual) + ")");
                ScalarField diff = x - w_it[m];
                double dn = l2_norm(diff);
                err2 += dn * dn;
                w_new[m] = x;
            }
            double err = std::sqrt(err2);
            st.picard_history.push_back(err);
            st.picard_residual = err;
            rho_it = rho_new;
            w_it = w_new;
            if (err < p_.picard_tol) {
                converged = true;
                ++sweep;
                break;
            }
        }
        st.picard_iters = sweep;
        if (!converged)
            throw StepReject("picard iteration did not converge (residual " +
                             std::to_string(st.picard_residual) + " after " +
                             std::to_string(sweep) + " sweeps)");
        State out;
        out.t = s.t + dt;
        out.rho = rho_new;
        out.w = w_new;
        if (!out.finite()) throw StepReject("non-finite state after step");
        return out;
    }

    /// P_n[-div(rho w_m w) + div(coef w_m grad rho)] as a physical X_n field.
    ScalarField momentum_explicit_rhs(const ScalarField& rho, const VectorField& w, int m,
                                      const ScalarField& coef,
                                      const VectorField& grad_rho) const {
        const Grid& g = rho.grid;
        SpectralField div(g);
        for (int a = 0; a < g.dim; ++a) {
            ScalarField fa(g);
            for (std::size_t i = 0; i < fa.size(); ++i) {
                double wm = w[m].v[i];
                fa.v[i] = coef.v[i] * wm * grad_rho[a].v[i] - rho.v[i] * wm * w[a].v[i];
            }
            SpectralField da = derivative(to_spectral(fa), a);
            for (std::size_t i = 0; i < div.size(); ++i) div.c[i] += da.c[i];
        }
        return to_physical(project_modes(div, p_.n_modes));
    }

    ScalarField momentum_precondition(const ScalarField& r, double dt, double rho_mean) const {
        SpectralField R = to_spectral(r);
        const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
        for (std::size_t i = 0; i < R.size(); ++i) {
            double k2 = 0.0;
            bool keep = true;
            for (int a = 0; a < R.grid.dim; ++a) {
                int k = wavenumber(R.grid, i, a);
                if (std::abs(k) > p_.n_modes) keep = false;
                k2 += static_cast<double>(k) * k;
            }
            if (!keep) {
                R.c[i] = 0.0;
                continue;
            }
            R.c[i] /= (rho_mean + dt * p_.delta * four_pi2 * k2);
        }
        return to_physical(R);
    }

    Params p_;
};

/// One time step with the parameter file's dt (the fixed-point map as a
/// standalone operation).
inline State picard_step(const State& s, const Params& p, StepStats* stats = nullptr) {
    Solver solver(p);
    return solver.step(s, p.dt, stats);
}

}  // namespace arsim
