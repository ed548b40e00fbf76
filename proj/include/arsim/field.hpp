#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace arsim {

/// Uniform collocation grid on the unit torus T^d (period 1 per axis),
/// x-fastest storage order: flat = x + n*(y + n*z).
struct Grid {
    int dim = 2;
    int points = 64;  // points per axis

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(points);
        return s;
    }
    double dx() const { return 1.0 / points; }

    /// Physical coordinate of grid node `idx` along axis `axis`.
    double coord(std::size_t flat, int axis) const {
        std::size_t q = flat;
        for (int a = 0; a < axis; ++a) q /= static_cast<std::size_t>(points);
        return static_cast<double>(q % static_cast<std::size_t>(points)) * dx();
    }

    bool operator==(const Grid& o) const { return dim == o.dim && points == o.points; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (a != b)
        throw std::invalid_argument(std::string(where) + ": grid mismatch (" +
                                    std::to_string(a.dim) + "d/" + std::to_string(a.points) +
                                    " vs " + std::to_string(b.dim) + "d/" +
                                    std::to_string(b.points) + ")");
}

/// Real samples of one scalar quantity on a Grid.
struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

    std::size_t size() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    bool finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

/// d scalar components sharing one grid.
struct VectorField {
    Grid grid;
    std::vector<ScalarField> comp;

    VectorField() = default;
    explicit VectorField(const Grid& g) : grid(g), comp(g.dim, ScalarField(g)) {}

    int dim() const { return grid.dim; }
    ScalarField& operator[](int m) { return comp[static_cast<std::size_t>(m)]; }
    const ScalarField& operator[](int m) const { return comp[static_cast<std::size_t>(m)]; }

    bool finite() const {
        for (const auto& c : comp)
            if (!c.finite()) return false;
        return true;
    }
};

// --- quadrature on the unit torus (exact for trigonometric polynomials) ---

/// Integral over T^d = grid mean (|T^d| = 1). Long-double accumulation.
inline double integral(const ScalarField& f) {
    long double acc = 0.0L;
    for (double x : f.v) acc += x;
    return static_cast<double>(acc / static_cast<long double>(f.v.size()));
}

inline double inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid, "inner");
    long double acc = 0.0L;
    for (std::size_t i = 0; i < a.v.size(); ++i)
        acc += static_cast<long double>(a.v[i]) * b.v[i];
    return static_cast<double>(acc / static_cast<long double>(a.v.size()));
}

inline double l2_norm(const ScalarField& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

inline double l2_norm(const VectorField& a) {
    long double acc = 0.0L;
    for (const auto& c : a.comp) {
        double n = l2_norm(c);
        acc += static_cast<long double>(n) * n;
    }
    return std::sqrt(static_cast<double>(acc));
}

inline double max_abs(const ScalarField& a) {
    double m = 0.0;
    for (double x : a.v) m = std::max(m, std::abs(x));
    return m;
}

inline double min_value(const ScalarField& a) {
    double m = a.v.empty() ? 0.0 : a.v[0];
    for (double x : a.v) m = std::min(m, x);
    return m;
}

inline double max_value(const ScalarField& a) {
    double m = a.v.empty() ? 0.0 : a.v[0];
    for (double x : a.v) m = std::max(m, x);
    return m;
}

// --- elementwise helpers used all over the solver and diagnostics ---

template <class F>
ScalarField map_field(const ScalarField& a, F&& f) {
    ScalarField r(a.grid);
    for (std::size_t i = 0; i < a.v.size(); ++i) r.v[i] = f(a.v[i]);
    return r;
}

template <class F>
ScalarField zip_fields(const ScalarField& a, const ScalarField& b, F&& f) {
    require_same_grid(a.grid, b.grid, "zip_fields");
    ScalarField r(a.grid);
    for (std::size_t i = 0; i < a.v.size(); ++i) r.v[i] = f(a.v[i], b.v[i]);
    return r;
}

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    return zip_fields(a, b, [](double x, double y) { return x + y; });
}
inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    return zip_fields(a, b, [](double x, double y) { return x - y; });
}
inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    return zip_fields(a, b, [](double x, double y) { return x * y; });
}
inline ScalarField operator*(double s, const ScalarField& a) {
    return map_field(a, [s](double x) { return s * x; });
}

inline VectorField operator+(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid, "VectorField+");
    VectorField r(a.grid);
    for (int m = 0; m < a.dim(); ++m) r[m] = a[m] + b[m];
    return r;
}
inline VectorField operator-(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid, "VectorField-");
    VectorField r(a.grid);
    for (int m = 0; m < a.dim(); ++m) r[m] = a[m] - b[m];
    return r;
}

}  // namespace arsim
