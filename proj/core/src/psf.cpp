#include "turbmt/psf.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace turbmt::sim {

namespace {

std::vector<double> aperture_mask(int s, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw std::invalid_argument("psf_from_phase: aperture ratio in (0,1]");
    std::vector<double> mask(static_cast<size_t>(s) * s, 0.0);
    const double r = 0.5 * ratio * s;
    const double cy = 0.5 * (s - 1), cx = 0.5 * (s - 1);
    bool any = false;
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            const double dy = y - cy, dx = x - cx;
            if (dy * dy + dx * dx <= r * r) {
                mask[static_cast<size_t>(y) * s + x] = 1.0;
                any = true;
            }
        }
    if (!any) throw std::invalid_argument("psf_from_phase: degenerate all-zero aperture");
    return mask;
}

// fftshift + |.|^2 + unit-sum normalization of the spectrum
Grid finalize(int s, const std::vector<std::complex<double>>& spectrum) {
    Grid psf(s, s);
    double sum = 0.0;
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            const int sy = (y + s / 2) % s;
            const int sx = (x + s / 2) % s;
            const double v = std::norm(spectrum[static_cast<size_t>(y) * s + x]);
            psf(sy, sx) = v;
            sum += v;
        }
    for (double& v : psf.raw()) v /= sum;
    return psf;
}

std::mutex g_fftw_plan_mutex;  // FFTW planning is not thread-safe

}  // namespace

struct PsfEngine::Impl {
    std::vector<double> mask;
    double ratio;
    fftw_complex* in;
    fftw_complex* out;
    fftw_plan plan;
};

PsfEngine::PsfEngine(int kernel_size, double aperture_ratio) : s_(kernel_size) {
    if (kernel_size < 1) throw std::invalid_argument("PsfEngine: kernel size >= 1");
    impl_ = new Impl;
    impl_->ratio = aperture_ratio;
    impl_->mask = aperture_mask(kernel_size, aperture_ratio);
    const size_t n = static_cast<size_t>(s_) * s_;
    impl_->in = fftw_alloc_complex(n);
    impl_->out = fftw_alloc_complex(n);
    std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
    impl_->plan = fftw_plan_dft_2d(s_, s_, impl_->in, impl_->out, FFTW_FORWARD, FFTW_ESTIMATE);
}

PsfEngine::~PsfEngine() {
    {
        std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
        fftw_destroy_plan(impl_->plan);
    }
    fftw_free(impl_->in);
    fftw_free(impl_->out);
    delete impl_;
}

Grid PsfEngine::compute(const Grid& phase) const {
    if (phase.rows() != s_ || phase.cols() != s_)
        throw std::invalid_argument("PsfEngine: phase size mismatch");
    const size_t n = static_cast<size_t>(s_) * s_;
    for (size_t i = 0; i < n; ++i) {
        const double m = impl_->mask[i];
        const double p = phase.raw()[i];
        impl_->in[i][0] = m * std::cos(p);
        impl_->in[i][1] = m * std::sin(p);
    }
    fftw_execute(impl_->plan);
    std::vector<std::complex<double>> spectrum(n);
    for (size_t i = 0; i < n; ++i)
        spectrum[i] = {impl_->out[i][0], impl_->out[i][1]};
    return finalize(s_, spectrum);
}

Grid psf_from_phase(const Grid& phase, double aperture_ratio) {
    if (phase.rows() != phase.cols())
        throw std::invalid_argument("psf_from_phase: phase must be square");
    for (double v : phase.raw())
        if (!std::isfinite(v)) throw std::invalid_argument("psf_from_phase: non-finite phase");
    PsfEngine engine(phase.rows(), aperture_ratio);
    return engine.compute(phase);
}

Grid psf_from_phase_reference(const Grid& phase, double aperture_ratio) {
    if (phase.rows() != phase.cols())
        throw std::invalid_argument("psf_from_phase_reference: phase must be square");
    const int s = phase.rows();
    const auto mask = aperture_mask(s, aperture_ratio);

    std::vector<std::complex<double>> pupil(static_cast<size_t>(s) * s);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            const size_t i = static_cast<size_t>(y) * s + x;
            pupil[i] = std::polar(mask[i], phase(y, x));
        }

    std::vector<std::complex<double>> spectrum(static_cast<size_t>(s) * s);
    for (int ky = 0; ky < s; ++ky)
        for (int kx = 0; kx < s; ++kx) {
            std::complex<double> acc = 0.0;
            for (int y = 0; y < s; ++y)
                for (int x = 0; x < s; ++x) {
                    const double ang = -2.0 * M_PI * (static_cast<double>(ky) * y +
                                                      static_cast<double>(kx) * x) / s;
                    acc += pupil[static_cast<size_t>(y) * s + x] *
                           std::complex<double>(std::cos(ang), std::sin(ang));
                }
            spectrum[static_cast<size_t>(ky) * s + kx] = acc;
        }
    return finalize(s, spectrum);
}

}  // namespace turbmt::sim
