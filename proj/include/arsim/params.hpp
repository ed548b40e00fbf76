#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "arsim/field.hpp"

namespace arsim {

/// All model and scheme parameters.
struct Params {
    double gamma = 2.0;     // velocity-cost exponent, >= 1
    double epsilon = 0.0;   // artificial linear diffusion
    double delta = 0.0;     // momentum viscosity
    double kappa = 0.0;     // truncation / spatial mollification strength
    int n_modes = 21;       // Galerkin cutoff per dimension
    int dim = 2;            // spatial dimension, 1..3
    int grid_points = 64;   // collocation points per dimension
    double dt = 1e-3;
    double t_end = 1.0;
    double rho_floor = 1e-8;
    double picard_tol = 1e-10;
    int picard_max_iter = 50;
    std::vector<double> lp_moments = {2.0, 4.0};
    double cfl_safety = 0.4;

    Grid grid() const { return Grid{dim, grid_points}; }

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const {
        if (!(gamma >= 1.0))
            throw std::invalid_argument(
                "params: gamma = " + std::to_string(gamma) +
                " violates gamma >= 1 required by the power-law cost p(rho) = rho^gamma");
        if (epsilon < 0.0) throw std::invalid_argument("params: epsilon must be >= 0");
        if (delta < 0.0) throw std::invalid_argument("params: delta must be >= 0");
        if (kappa < 0.0) throw std::invalid_argument("params: kappa must be >= 0");
        if (n_modes < 1) throw std::invalid_argument("params: n_modes must be >= 1");
        if (dim < 1 || dim > 3) throw std::invalid_argument("params: dim must be 1, 2 or 3");
        if (grid_points < 2 * n_modes)
            throw std::invalid_argument("params: grid_points must be >= 2*n_modes (got " +
                                        std::to_string(grid_points) + " < " +
                                        std::to_string(2 * n_modes) + ")");
        if (!(dt > 0.0)) throw std::invalid_argument("params: dt must be > 0");
        if (!(t_end > 0.0)) throw std::invalid_argument("params: t_end must be > 0");
        if (!(rho_floor > 0.0 && rho_floor < 1.0))
            throw std::invalid_argument("params: rho_floor must lie in (0, 1)");
        if (!(picard_tol > 0.0)) throw std::invalid_argument("params: picard_tol must be > 0");
        if (picard_max_iter < 1)
            throw std::invalid_argument("params: picard_max_iter must be >= 1");
    }

    bool gamma_is_marginal() const { return gamma == 1.0; }
};

/// Default Galerkin cutoff for a grid: the integer-division grid/3 rule,
/// trimmed when necessary so quadratic products stay inside the dealias band.
inline int default_n_modes(int grid_points) {
    int n = grid_points / 3;
    if (3 * n >= grid_points) n -= 1;  // multiples of 3: keep 3n < grid
    return n < 1 ? 1 : n;
}

}  // namespace arsim
