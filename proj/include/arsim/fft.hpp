#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "arsim/field.hpp"

namespace arsim {

/// Complex Fourier coefficients of a grid field, indexed by integer wave
/// vectors in FFT order (index j along an axis carries k = j <= n/2 ? j : j-n).
/// `real_symmetric` marks fields that are spectra of real data.
struct SpectralField {
    Grid grid;
    std::vector<std::complex<double>> c;
    bool real_symmetric = true;

    SpectralField() = default;
    explicit SpectralField(const Grid& g) : grid(g), c(g.size(), {0.0, 0.0}) {}

    std::size_t size() const { return c.size(); }
    std::complex<double>& operator[](std::size_t i) { return c[i]; }
    const std::complex<double>& operator[](std::size_t i) const { return c[i]; }
};

/// Integer wave number along `axis` for flat spectral index `flat`.
inline int wavenumber(const Grid& g, std::size_t flat, int axis) {
    std::size_t q = flat;
    for (int a = 0; a < axis; ++a) q /= static_cast<std::size_t>(g.points);
    int j = static_cast<int>(q % static_cast<std::size_t>(g.points));
    return j <= g.points / 2 ? j : j - g.points;
}

/// One FFT context per grid: owns FFTW plans and an aligned scratch buffer.
/// A context is single-threaded; distinct contexts may run concurrently.
class Fft {
  public:
    explicit Fft(const Grid& g) : grid_(g), n_(g.size()) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_));
        int dims[3] = {0, 0, 0};
        // FFTW is row-major (last dimension contiguous); our x axis is fastest,
        // so logical axis a maps to FFTW dimension dim-1-a.
        for (int a = 0; a < g.dim; ++a) dims[a] = g.points;
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd_ = fftw_plan_dft(g.dim, dims, buf_, buf_, FFTW_FORWARD, FFTW_MEASURE);
        bwd_ = fftw_plan_dft(g.dim, dims, buf_, buf_, FFTW_BACKWARD, FFTW_MEASURE);
    }

    ~Fft() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    /// Physical -> normalized spectrum: c_k = (1/N^d) sum_x f(x) e^{-2pi i k.x}.
    SpectralField forward(const ScalarField& f) {
        SpectralField out(f.grid);
        for (std::size_t i = 0; i < n_; ++i) {
            buf_[i][0] = f.v[i];
            buf_[i][1] = 0.0;
        }
        fftw_execute(fwd_);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i)
            out.c[i] = {buf_[i][0] * scale, buf_[i][1] * scale};
        return out;
    }

    /// Spectrum -> physical samples, real part (fields are real by contract).
    ScalarField backward(const SpectralField& F) {
        ScalarField out(F.grid);
        for (std::size_t i = 0; i < n_; ++i) {
            buf_[i][0] = F.c[i].real();
            buf_[i][1] = F.c[i].imag();
        }
        fftw_execute(bwd_);
        for (std::size_t i = 0; i < n_; ++i) out.v[i] = buf_[i][0];
        return out;
    }

    const Grid& grid() const { return grid_; }

  private:
    static std::mutex& planner_mutex() {
        static std::mutex m;  // FFTW planning is not thread-safe
        return m;
    }

    Grid grid_;
    std::size_t n_;
    fftw_complex* buf_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

/// Thread-local FFT context cache keyed by (dim, points).
inline Fft& fft_for(const Grid& g) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<Fft>> cache;
    auto key = std::make_pair(g.dim, g.points);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<Fft>(g)).first;
    return *it->second;
}

}  // namespace arsim
