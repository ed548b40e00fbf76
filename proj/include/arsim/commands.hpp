#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>
#include <vector>

#include "arsim/config.hpp"
#include "arsim/diagnostics.hpp"
#include "arsim/snapshot.hpp"
#include "arsim/solver.hpp"

namespace arsim {
namespace commands {

// Exit codes: 0 ok, 1 invariant failure, 2 config error, 3 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string lp_suffix(double p) {
    std::ostringstream os;
    os << p;
    std::string s = os.str();
    std::replace(s.begin(), s.end(), '.', '_');
    return s;
}

}  // namespace detail

inline std::string diagnostics_header(const Params& p) {
    std::string h =
        "t,mass,momentum_energy,internal_energy,q_dissipation,cross_term,grad_w_norm,"
        "min_rho,max_rho,floor_activations";
    for (double q : p.lp_moments) h += ",lp_moment_p" + detail::lp_suffix(q);
    return h;
}

inline std::string diagnostics_row(const diagnostics::DiagnosticsRecord& r) {
    std::string row = detail::fmt(r.t) + "," + detail::fmt(r.mass) + "," +
                      detail::fmt(r.momentum_energy) + "," + detail::fmt(r.internal_energy) +
                      "," + detail::fmt(r.q_dissipation) + "," + detail::fmt(r.cross_term) +
                      "," + detail::fmt(r.grad_w_norm) + "," + detail::fmt(r.min_rho) + "," +
                      detail::fmt(r.max_rho) + "," + std::to_string(r.floor_activations);
    for (double v : r.lp_moments) row += "," + detail::fmt(v);
    return row;
}

inline void write_diagnostics_csv(const std::string& path, const Params& p,
                                  const std::vector<diagnostics::DiagnosticsRecord>& recs) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << diagnostics_header(p) << "\n";
    for (const auto& r : recs) out << diagnostics_row(r) << "\n";
}

/// Additive low-mode perturbation used by the weak-strong studies:
/// rho += a sin(2 pi x0) prod_{j>0} cos(2 pi xj), w_m += a cos(2 pi x_m),
/// then re-floored.
inline State perturb_state(const State& s, double amplitude, double rho_floor) {
    State out = s;
    const Grid& g = s.rho.grid;
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < out.rho.size(); ++i) {
        double pat = std::sin(two_pi * g.coord(i, 0));
        for (int a = 1; a < g.dim; ++a) pat *= std::cos(two_pi * g.coord(i, a));
        out.rho.v[i] = std::max(rho_floor, out.rho.v[i] + amplitude * pat);
    }
    for (int m = 0; m < g.dim; ++m)
        for (std::size_t i = 0; i < out.w[m].size(); ++i)
            out.w[m].v[i] += amplitude * std::cos(two_pi * g.coord(i, m));
    return out;
}

inline void write_run_meta(const std::string& path, const RunConfig& cfg, double initial_energy,
                           const RunResult& result) {
    std::ofstream out(path, std::ios::trunc);
    out << "gamma = " << cfg.params.gamma << "\n"
        << "gamma_equals_one = " << (cfg.params.gamma_is_marginal() ? "true" : "false") << "\n"
        << "epsilon = " << cfg.params.epsilon << "\n"
        << "delta = " << cfg.params.delta << "\n"
        << "kappa = " << cfg.params.kappa << "\n"
        << "dim = " << cfg.params.dim << "\n"
        << "grid_points = " << cfg.params.grid_points << "\n"
        << "n_modes = " << cfg.params.n_modes << "\n"
        << "dt = " << cfg.params.dt << "\n"
        << "t_end = " << cfg.params.t_end << "\n"
        << "initial_type = " << cfg.initial.type << "\n"
        << "initial_energy = " << detail::fmt(initial_energy) << "\n"
        << "steps = " << result.steps << "\n"
        << "floor_activations = " << result.total_floor_hits << "\n"
        << "invariants_ok = " << (result.ok() ? "true" : "false") << "\n";
    for (const auto& f : result.invariant_failures) out << "invariant_failure = " << f << "\n";
    for (const auto& f : result.quality_flags) out << "quality_flag = " << f << "\n";
}

struct RunArtifacts {
    RunResult result;
    double initial_energy = 0.0;
    std::string directory;
};

/// Execute one configured run, writing diagnostics.csv, snapshots and
/// run_meta.txt under cfg.out_dir.
inline RunArtifacts execute_run(const RunConfig& cfg, bool strict, bool keep_states = false) {
    namespace fs = std::filesystem;
    RunArtifacts art;
    art.directory = cfg.out_dir;
    fs::create_directories(art.directory);

    Solver solver(cfg.params);
    State init = initial::make_initial(cfg.params.grid(), cfg.initial, cfg.params.gamma,
                                       &art.initial_energy);

    std::ofstream csv(art.directory + "/diagnostics.csv", std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot open " + art.directory + "/diagnostics.csv");
    csv << diagnostics_header(cfg.params) << "\n";

    long tick = 0;
    RunOptions opts;
    opts.cadence = cfg.cadence;
    opts.strict = strict;
    opts.keep_states = keep_states;
    opts.on_record = [&](const State& s, const diagnostics::DiagnosticsRecord& rec) {
        csv << diagnostics_row(rec) << "\n";
        if (cfg.snapshot_cadence > 0 && tick % cfg.snapshot_cadence == 0) {
            std::ostringstream name;
            name << art.directory << "/snap_" << std::setfill('0') << std::setw(6) << tick
                 << ".snap";
            io::write_snapshot(name.str(), s, cfg.params.gamma);
        }
        ++tick;
    };

    art.result = solver.run(init, opts);
    io::write_snapshot(art.directory + "/final.snap", art.result.final_state, cfg.params.gamma);
    write_run_meta(art.directory + "/run_meta.txt", cfg, art.initial_energy, art.result);
    return art;
}

inline int cmd_run(const RunConfig& cfg, bool strict, std::ostream& out, std::ostream& err) {
    try {
        RunArtifacts art = execute_run(cfg, strict);
        const auto& last = art.result.records.back();
        out << "run: " << art.result.steps << " steps to t = " << last.t << ", mass " <<
            detail::fmt(last.mass) << ", momentum energy " << detail::fmt(last.momentum_energy)
            << "\n";
        for (const auto& f : art.result.quality_flags) out << "quality flag: " << f << "\n";
        if (!art.result.ok()) {
            for (const auto& f : art.result.invariant_failures)
                err << "invariant failure: " << f << "\n";
            return kExitInvariant;
        }
        out << "run: all invariants passed, artifacts in " << art.directory << "\n";
        return kExitOk;
    } catch (const InvariantError& e) {
        err << "invariant failure: " << e.what() << "\n";
        return kExitInvariant;
    }
}

// --- sweep ---

struct SweepRow {
    std::string label;
    double terminal_mass = 0.0;
    double terminal_internal_energy = 0.0;
    double cumulative_q_dissipation = 0.0;  // int_0^T integral |grad Q|^2
    double sup_momentum_energy = 0.0;
    double sqrt_delta_grad_w = 0.0;         // sqrt(delta int int |grad w|^2)
    double min_rho = 0.0;
    long floor_activations = 0;
    bool ok = false;
};

inline SweepRow summarize(const RunConfig& cfg, const RunResult& r) {
    SweepRow row;
    row.label = cfg.label;
    const auto& recs = r.records;
    row.terminal_mass = recs.back().mass;
    row.terminal_internal_energy = recs.back().internal_energy;
    long double q = 0.0L, gw = 0.0L;
    for (std::size_t j = 1; j < recs.size(); ++j) {
        double dt = recs[j].t - recs[j - 1].t;
        q += 0.5L * (recs[j - 1].q_dissipation + recs[j].q_dissipation) * dt;
        gw += 0.5L * (recs[j - 1].grad_w_norm + recs[j].grad_w_norm) * dt;
    }
    row.cumulative_q_dissipation = static_cast<double>(q);
    row.sqrt_delta_grad_w = std::sqrt(std::max(0.0, cfg.params.delta * static_cast<double>(gw)));
    row.min_rho = recs.front().min_rho;
    for (const auto& rec : recs) {
        row.sup_momentum_energy = std::max(row.sup_momentum_energy, rec.momentum_energy);
        row.min_rho = std::min(row.min_rho, rec.min_rho);
    }
    row.floor_activations = r.total_floor_hits;
    row.ok = r.ok();
    return row;
}

inline int cmd_sweep(const RunConfig& base, bool strict, std::ostream& out, std::ostream& err) {
    if (base.sweep.empty()) {
        err << "sweep: config has no [sweep] section\n";
        return kExitConfig;
    }
    std::vector<RunConfig> points = expand_sweep(base);
    for (auto& cfg : points) {
        std::string tag = cfg.label;
        std::replace(tag.begin(), tag.end(), ',', '_');
        std::replace(tag.begin(), tag.end(), '=', '_');
        cfg.out_dir = base.out_dir + "/sweep_" + tag;
    }

    std::vector<SweepRow> rows(points.size());
    std::vector<std::string> errors(points.size());
    std::size_t next = 0;
    std::mutex mtx;
    auto worker = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mtx);
                if (next >= points.size()) return;
                i = next++;
            }
            try {
                RunArtifacts art = execute_run(points[i], strict);
                rows[i] = summarize(points[i], art.result);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    unsigned nthreads = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                           static_cast<unsigned>(points.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ofstream summary(base.out_dir + "/summary.csv", std::ios::trunc);
    summary << "label,terminal_mass,terminal_internal_energy,cumulative_q_dissipation,"
               "sup_momentum_energy,sqrt_delta_grad_w,min_rho,floor_activations,ok\n";
    bool all_ok = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!errors[i].empty()) {
            err << "sweep point " << points[i].label << " failed: " << errors[i] << "\n";
            all_ok = false;
            continue;
        }
        const auto& r = rows[i];
        summary << r.label << "," << detail::fmt(r.terminal_mass) << ","
                << detail::fmt(r.terminal_internal_energy) << ","
                << detail::fmt(r.cumulative_q_dissipation) << ","
                << detail::fmt(r.sup_momentum_energy) << "," << detail::fmt(r.sqrt_delta_grad_w)
                << "," << detail::fmt(r.min_rho) << "," << r.floor_activations << ","
                << (r.ok ? "1" : "0") << "\n";
        out << "sweep " << r.label << ": mass " << r.terminal_mass << ", E(rho) "
            << r.terminal_internal_energy << ", int |grad Q|^2 " << r.cumulative_q_dissipation
            << (r.ok ? "" : "  [INVARIANT FAILURE]") << "\n";
        all_ok = all_ok && r.ok;
    }
    out << "sweep: summary written to " << base.out_dir << "/summary.csv\n";
    return all_ok ? kExitOk : kExitInvariant;
}

// --- compare ---

inline std::string relative_energy_header() {
    return "t,rel_energy,q_rel_dissipation,T1,T2,T3,T4,T5,T6,T7,gronwall_ratio";
}

inline std::string relative_energy_row(const diagnostics::RelativeEnergyReport& r) {
    std::string row = detail::fmt(r.t) + "," + detail::fmt(r.rel_energy) + "," +
                      detail::fmt(r.q_rel_dissipation);
    for (double tterm : r.remainder) row += "," + detail::fmt(tterm);
    row += "," + detail::fmt(r.gronwall_ratio);
    return row;
}

/// Load a reference trajectory: either a directory of snapshots written by a
/// previous run, or a config file to run now.
inline std::vector<State> load_reference(const std::string& ref, const Grid& expect_grid,
                                         std::string* what) {
    namespace fs = std::filesystem;
    std::vector<State> states;
    if (fs::is_directory(ref)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(ref))
            if (e.path().extension() == ".snap" &&
                e.path().filename().string().rfind("snap_", 0) == 0)
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) states.push_back(io::read_snapshot(f.string()));
        *what = "snapshot directory " + ref;
    } else {
        RunConfig rcfg = load_config(ref);
        rcfg.out_dir = rcfg.out_dir + "/reference";
        RunArtifacts art = execute_run(rcfg, false, /*keep_states=*/true);
        states = std::move(art.result.tick_states);
        *what = "reference run " + ref;
    }
    if (states.empty()) throw std::runtime_error("reference '" + ref + "' holds no states");
    for (const auto& s : states)
        if (s.rho.grid != expect_grid)
            throw ConfigError("compare: reference grid (" + std::to_string(s.rho.grid.dim) +
                              "d/" + std::to_string(s.rho.grid.points) +
                              ") is incompatible with the run grid (" +
                              std::to_string(expect_grid.dim) + "d/" +
                              std::to_string(expect_grid.points) + ")");
    return states;
}

inline int cmd_compare(const RunConfig& cfg, const std::string& ref, double perturb_amplitude,
                       bool strict, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);

    Solver solver(cfg.params);
    double e0 = 0.0;
    State init = initial::make_initial(cfg.params.grid(), cfg.initial, cfg.params.gamma, &e0);
    if (perturb_amplitude != 0.0)
        init = perturb_state(init, perturb_amplitude, cfg.params.rho_floor);

    RunOptions opts;
    opts.cadence = cfg.cadence;
    opts.strict = strict;
    opts.keep_states = true;
    RunResult run = solver.run(init, opts);

    std::string ref_what;
    std::vector<State> ref_states = load_reference(ref, cfg.params.grid(), &ref_what);

    // match observation times
    std::vector<std::pair<const State*, const State*>> pairs;
    std::size_t ri = 0;
    for (const auto& s : run.tick_states) {
        while (ri < ref_states.size() && ref_states[ri].t < s.t - 1e-9) ++ri;
        if (ri < ref_states.size() && std::abs(ref_states[ri].t - s.t) <= 1e-9)
            pairs.emplace_back(&s, &ref_states[ri]);
    }
    if (pairs.size() < 2) {
        err << "compare: fewer than 2 common observation times between run and " << ref_what
            << "\n";
        return kExitConfig;
    }

    std::vector<diagnostics::RelativeEnergyReport> reports;
    reports.reserve(pairs.size());
    for (const auto& [s, r] : pairs)
        reports.push_back(diagnostics::relative_energy(*s, *r, cfg.params));
    double rel0 = reports.front().rel_energy;
    for (auto& rep : reports) rep.gronwall_ratio = rel0 > 0.0 ? rep.rel_energy / rel0 : 1.0;

    std::ofstream csv(cfg.out_dir + "/rel_energy.csv", std::ios::trunc);
    csv << relative_energy_header() << "\n";
    for (const auto& rep : reports) csv << relative_energy_row(rep) << "\n";

    auto verdict = diagnostics::gronwall_check(reports);
    out << "compare: " << pairs.size() << " matched times against " << ref_what << "\n";
    out << "compare: rel_energy(0) = " << detail::fmt(rel0) << ", max rel_energy = "
        << detail::fmt(verdict.max_rel_energy) << "\n";
    if (verdict.coincidence_mode)
        out << "compare: coincident initial data, weak-strong bound "
            << (verdict.passed ? "HOLDS" : "VIOLATED") << " (max rel_energy "
            << detail::fmt(verdict.max_rel_energy) << ")\n";
    else
        out << "compare: fitted Gronwall rate C = " << verdict.rate << ", envelope "
            << (verdict.passed ? "HOLDS" : "VIOLATED") << " (worst excess "
            << detail::fmt(verdict.worst_excess) << ")\n";

    bool run_ok = run.ok();
    if (!run_ok)
        for (const auto& f : run.invariant_failures) err << "invariant failure: " << f << "\n";
    return (verdict.passed && run_ok) ? kExitOk : kExitInvariant;
}

// --- check ---

inline int cmd_check(const std::vector<std::string>& snapshots, std::ostream& out,
                     std::ostream& err) {
    if (snapshots.empty()) {
        err << "check: no snapshot paths given\n";
        return kExitConfig;
    }
    bool first = true;
    bool flagged = false;
    for (const auto& path : snapshots) {
        io::SnapshotHeader h;
        State s = io::read_snapshot(path, &h);
        Params p;
        p.gamma = h.gamma;
        p.dim = h.dim;
        p.grid_points = h.grid_points;
        p.n_modes = std::max(1, default_n_modes(h.grid_points));
        auto rec = diagnostics::record(s, p);
        if (first) {
            out << diagnostics_header(p) << "\n";
            first = false;
        }
        out << diagnostics_row(rec) << "\n";
        if (rec.flagged) {
            err << "check: " << path << " contains non-finite fields\n";
            flagged = true;
        }
    }
    return flagged ? kExitInvariant : kExitOk;
}

}  // namespace commands
}  // namespace arsim
