#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "ncilw/errors.hpp"
#include "ncilw/geometry.hpp"

namespace ncilw {

/// Uniform periodic grid with 2N points x_j = j L / 2N, j = -N..N-1, and
/// modes k_n = 2 pi n / L, n = -N..N-1. Arrays are stored with index
/// i = j + N (resp. i = n + N).
struct GridSpec {
    double L = 0.0;
    int half_n = 0; // N; the grid has 2N points

    GridSpec() = default;
    GridSpec(double L_, int half_n_) : L(L_), half_n(half_n_) {
        if (!(L > 0.0)) throw config_error("GridSpec: L must be positive");
        if (half_n < 1 || (half_n & (half_n - 1)) != 0)
            throw config_error("GridSpec: grid size 2N must be a power of two");
    }

    int size() const { return 2 * half_n; }
    double dx() const { return L / size(); }
    double x(int i) const { return (i - half_n) * dx(); }
    int mode(int i) const { return i - half_n; }
    double k(int i) const { return 2.0 * pi * mode(i) / L; }

    bool operator==(const GridSpec& o) const { return L == o.L && half_n == o.half_n; }
};

/// Real-sampled (u, v) on a GridSpec at a fixed time.
struct FieldPair {
    GridSpec grid;
    double time = 0.0;
    std::vector<double> u;
    std::vector<double> v;

    FieldPair() = default;
    explicit FieldPair(const GridSpec& g, double t = 0.0)
        : grid(g), time(t), u(g.size(), 0.0), v(g.size(), 0.0) {}
};

/// Fourier coefficients of a FieldPair, modes n = -N..N-1 at index n + N.
struct SpectralPair {
    GridSpec grid;
    double time = 0.0;
    std::vector<cplx> uhat;
    std::vector<cplx> vhat;

    SpectralPair() = default;
    explicit SpectralPair(const GridSpec& g, double t = 0.0)
        : grid(g), time(t), uhat(g.size(), cplx(0.0)), vhat(g.size(), cplx(0.0)) {}
};

namespace detail {

// RAII wrapper around a pair of FFTW complex plans of fixed length.
// fftw planning is not thread-safe; execution on distinct plans is.
class Fft {
public:
    explicit Fft(int len) : len_(len) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        buf_ = fftw_alloc_complex(static_cast<std::size_t>(len_));
        out_ = fftw_alloc_complex(static_cast<std::size_t>(len_));
        if (!buf_ || !out_) throw std::bad_alloc();
        fwd_ = fftw_plan_dft_1d(len_, buf_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(len_, buf_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    ~Fft() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
        fftw_free(out_);
    }

    int length() const { return len_; }

    // Unnormalized transforms, standard FFT index order.
    void forward(const cplx* in, cplx* out) { run(fwd_, in, out); }
    void backward(const cplx* in, cplx* out) { run(bwd_, in, out); }

private:
    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }
    void run(fftw_plan plan, const cplx* in, cplx* out) {
        auto* b = reinterpret_cast<cplx*>(buf_);
        std::copy(in, in + len_, b);
        fftw_execute(plan);
        auto* o = reinterpret_cast<cplx*>(out_);
        std::copy(o, o + len_, out);
    }

    int len_;
    fftw_complex* buf_;
    fftw_complex* out_;
    fftw_plan fwd_, bwd_;
};

inline Fft& fft_for(int len) {
    thread_local std::map<int, std::unique_ptr<Fft>> cache;
    auto& slot = cache[len];
    if (!slot) slot = std::make_unique<Fft>(len);
    return *slot;
}

// Centered DFT: uhat_n = (1/M) sum_{j=-M/2}^{M/2-1} u_j e^{-2 pi i n j / M},
// realized by rotating both index sets by M/2 around the standard FFT.
inline void centered_forward(const std::vector<cplx>& in, std::vector<cplx>& out) {
    const int m = static_cast<int>(in.size());
    const int half = m / 2;
    std::vector<cplx> tmp(in.size()), res(in.size());
    for (int i = 0; i < m; ++i) tmp[i] = in[(i + half) % m];
    fft_for(m).forward(tmp.data(), res.data());
    out.resize(in.size());
    const double scale = 1.0 / m;
    for (int i = 0; i < m; ++i) out[i] = scale * res[(i + half) % m];
}

inline void centered_backward(const std::vector<cplx>& in, std::vector<cplx>& out) {
    const int m = static_cast<int>(in.size());
    const int half = m / 2;
    std::vector<cplx> tmp(in.size()), res(in.size());
    for (int i = 0; i < m; ++i) tmp[i] = in[(i + half) % m];
    fft_for(m).backward(tmp.data(), res.data());
    out.resize(in.size());
    for (int i = 0; i < m; ++i) out[i] = res[(i + half) % m];
}

} // namespace detail

/// Forward DFT of both fields; round trip with inverse_transform is the
/// identity to machine precision.
inline SpectralPair transform(const FieldPair& fields) {
    if (fields.u.size() != static_cast<std::size_t>(fields.grid.size()) ||
        fields.v.size() != static_cast<std::size_t>(fields.grid.size()))
        throw config_error("transform: field length does not match grid");
    SpectralPair s(fields.grid, fields.time);
    std::vector<cplx> tmp(fields.grid.size());
    for (int i = 0; i < fields.grid.size(); ++i) tmp[i] = fields.u[i];
    detail::centered_forward(tmp, s.uhat);
    for (int i = 0; i < fields.grid.size(); ++i) tmp[i] = fields.v[i];
    detail::centered_forward(tmp, s.vhat);
    return s;
}

/// Inverse DFT; discards the (machine-size) imaginary residue of conjugate
/// symmetric input.
inline FieldPair inverse_transform(const SpectralPair& spec) {
    if (spec.uhat.size() != static_cast<std::size_t>(spec.grid.size()) ||
        spec.vhat.size() != static_cast<std::size_t>(spec.grid.size()))
        throw config_error("inverse_transform: coefficient length does not match grid");
    FieldPair f(spec.grid, spec.time);
    std::vector<cplx> out;
    detail::centered_backward(spec.uhat, out);
    for (int i = 0; i < spec.grid.size(); ++i) f.u[i] = out[i].real();
    detail::centered_backward(spec.vhat, out);
    for (int i = 0; i < spec.grid.size(); ++i) f.v[i] = out[i].real();
    return f;
}

} // namespace ncilw
