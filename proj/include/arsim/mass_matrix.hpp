#pragma once

#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "arsim/field.hpp"
#include "arsim/spectral.hpp"

namespace arsim {

struct PcgResult {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Preconditioned conjugate gradients on ScalarField vectors. `apply` must be
/// self-adjoint positive definite for the discrete L2 inner product and
/// `precond` symmetric positive definite.
inline PcgResult pcg(const std::function<ScalarField(const ScalarField&)>& apply,
                     const std::function<ScalarField(const ScalarField&)>& precond,
                     const ScalarField& b, ScalarField& x, double rel_tol, int max_iter) {
    PcgResult res;
    ScalarField r = b - apply(x);
    double bnorm = l2_norm(b);
    if (bnorm == 0.0) bnorm = 1.0;
    ScalarField z = precond(r);
    ScalarField p = z;
    double rz = inner(r, z);
    for (int it = 0; it < max_iter; ++it) {
        double rnorm = l2_norm(r);
        res.residual = rnorm / bnorm;
        res.iterations = it;
        if (res.residual <= rel_tol) {
            res.converged = true;
            return res;
        }
        ScalarField ap = apply(p);
        double pap = inner(p, ap);
        if (!(pap > 0.0))
            throw std::runtime_error("pcg: operator lost positive definiteness (p.Ap = " +
                                     std::to_string(pap) + ")");
        double alpha = rz / pap;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x.v[i] += alpha * p.v[i];
            r.v[i] -= alpha * ap.v[i];
        }
        z = precond(r);
        double rz_new = inner(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i) p.v[i] = z.v[i] + beta * p.v[i];
    }
    res.residual = l2_norm(r) / bnorm;
    res.converged = res.residual <= rel_tol;
    return res;
}

/// rho-weighted Galerkin mass action: v in X_n maps to P_n(rho v). This is the
/// collocation-quadrature Gram operator, symmetric with spectrum inside
/// [min rho, max rho].
inline ScalarField apply_weighted_mass(const ScalarField& rho, int n, const ScalarField& v) {
    return project_modes(rho * v, n);
}

/// Real orthonormal trigonometric basis of X_n: per axis the (2n+1) functions
/// {1, sqrt2 cos(2 pi j x), sqrt2 sin(2 pi j x) : j = 1..n}, tensorized.
class TrigBasis {
  public:
    TrigBasis(const Grid& g, int n) : grid_(g), n_(n) {
        if (n < 0 || 2 * n >= g.points)
            throw std::invalid_argument("TrigBasis: need 2n < grid points");
        count_ = 1;
        for (int a = 0; a < g.dim; ++a) count_ *= static_cast<std::size_t>(2 * n + 1);
        // 1-D tables: table_[t][x] for t in [0, 2n]
        table_.assign(static_cast<std::size_t>(2 * n + 1),
                      std::vector<double>(static_cast<std::size_t>(g.points)));
        const double two_pi = 2.0 * std::numbers::pi;
        const double rt2 = std::numbers::sqrt2;
        for (int x = 0; x < g.points; ++x) {
            double xx = static_cast<double>(x) / g.points;
            table_[0][static_cast<std::size_t>(x)] = 1.0;
            for (int j = 1; j <= n; ++j) {
                table_[static_cast<std::size_t>(2 * j - 1)][static_cast<std::size_t>(x)] =
                    rt2 * std::cos(two_pi * j * xx);
                table_[static_cast<std::size_t>(2 * j)][static_cast<std::size_t>(x)] =
                    rt2 * std::sin(two_pi * j * xx);
            }
        }
    }

    std::size_t count() const { return count_; }
    const Grid& grid() const { return grid_; }
    int cutoff() const { return n_; }

    /// Value of basis function `i` at flat grid node `flat`.
    double value(std::size_t i, std::size_t flat) const {
        double prod = 1.0;
        std::size_t qi = i;
        std::size_t qx = flat;
        const std::size_t stride = static_cast<std::size_t>(2 * n_ + 1);
        for (int a = 0; a < grid_.dim; ++a) {
            std::size_t t = qi % stride;
            std::size_t x = qx % static_cast<std::size_t>(grid_.points);
            prod *= table_[t][x];
            qi /= stride;
            qx /= static_cast<std::size_t>(grid_.points);
        }
        return prod;
    }

  private:
    Grid grid_;
    int n_;
    std::size_t count_;
    std::vector<std::vector<double>> table_;
};

/// Dense rho-weighted mass matrix A_ij = <rho phi_i, phi_j> over X_n, used by
/// small problems and by the verification tests; the time stepper applies the
/// same operator matrix-free.
class MassMatrix {
  public:
    MassMatrix(const ScalarField& rho, int n, double spd_floor = 0.0)
        : basis_(rho.grid, n) {
        const std::size_t m = basis_.count();
        if (m > max_dense_size())
            throw std::invalid_argument("MassMatrix: dense assembly limited to " +
                                        std::to_string(max_dense_size()) +
                                        " basis functions; use the matrix-free path");
        const std::size_t ng = rho.grid.size();
        a_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i; j < m; ++j) {
                long double acc = 0.0L;
                for (std::size_t x = 0; x < ng; ++x)
                    acc += static_cast<long double>(rho.v[x]) * basis_.value(i, x) *
                           basis_.value(j, x);
                double aij = static_cast<double>(acc / static_cast<long double>(ng));
                a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = aij;
                a_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = aij;
            }
        }
        llt_.compute(a_);
        if (llt_.info() != Eigen::Success || min_eigenvalue() < spd_floor) {
            throw std::runtime_error(
                "MassMatrix: lost positive definiteness, min eigenvalue = " +
                std::to_string(min_eigenvalue()));
        }
    }

    static std::size_t max_dense_size() { return 4096; }

    const Eigen::MatrixXd& matrix() const { return a_; }
    const TrigBasis& basis() const { return basis_; }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    double symmetry_defect() const {
        return (a_ - a_.transpose()).cwiseAbs().maxCoeff();
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }

  private:
    TrigBasis basis_;
    Eigen::MatrixXd a_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace arsim
