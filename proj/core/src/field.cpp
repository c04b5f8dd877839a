#include "turbmt/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "turbmt/rng.hpp"

namespace turbmt::field {

int kernel_size_from_norm(double v) {
    v = std::min(1.0, std::max(0.0, v));
    // [0,1] maps linearly onto odd sizes 3..99
    const int idx = static_cast<int>(std::lround(v * 48.0));
    return 3 + 2 * idx;
}

double norm_from_kernel_size(int ks) {
    if (ks < 3 || ks > 99 || ks % 2 == 0)
        throw std::invalid_argument("kernel size must be odd in 3..99");
    return (ks - 3) / 2 / 48.0;
}

int ZernikeField::kernel_size() const { return kernel_size_from_norm(kernel_size_norm()); }

std::vector<double> ZernikeField::noll_coeffs(int t, int y, int x, bool include_tilt) const {
    const int n = modes();
    std::vector<double> a(static_cast<size_t>(n) + 1, 0.0);  // Noll 1..n+1
    for (int ch = 0; ch < n; ++ch) {
        const bool tilt = ch < 2;
        if (tilt && !include_tilt) continue;
        a[static_cast<size_t>(ch) + 1] = coeffs(t, y, x, ch);  // channel ch -> Noll ch+2
    }
    return a;
}

void FieldCovarianceSpec::validate(int n_channels) const {
    if (static_cast<int>(per_mode_variance.size()) != n_channels)
        throw std::invalid_argument("FieldCovarianceSpec: variance length != channel count");
    for (double v : per_mode_variance)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("FieldCovarianceSpec: variances must be finite and >= 0");
    if (!(spatial_correlation_length > 0.0))
        throw std::invalid_argument("FieldCovarianceSpec: correlation length must be > 0");
    if (!(temporal_correlation >= 0.0 && temporal_correlation < 1.0))
        throw std::invalid_argument("FieldCovarianceSpec: temporal correlation in [0,1)");
    if (!(kernel_size_norm >= 0.0 && kernel_size_norm <= 1.0))
        throw std::invalid_argument("FieldCovarianceSpec: kernel_size_norm in [0,1]");
}

namespace {

// One unit-variance stationary draw: filter white noise by sqrt of the
// squared-exponential spectral density, amplitude normalized so the output
// marginal variance is exactly 1.
class GrfFilter {
public:
    GrfFilter(int h, int w, double corr_len) : h_(h), w_(w) {
        gain_.resize(static_cast<size_t>(h) * w);
        double sum_sq = 0.0;
        for (int ky = 0; ky < h; ++ky) {
            for (int kx = 0; kx < w; ++kx) {
                const double fy = (ky <= h / 2 ? ky : ky - h) / static_cast<double>(h);
                const double fx = (kx <= w / 2 ? kx : kx - w) / static_cast<double>(w);
                const double k2 = 4.0 * M_PI * M_PI * (fy * fy + fx * fx);
                // S(k) for C(d)=exp(-d^2/(2 l^2)) is prop. to exp(-k^2 l^2 / 2)
                const double g = std::exp(-0.25 * k2 * corr_len * corr_len);
                gain_[static_cast<size_t>(ky) * w + kx] = g;
                sum_sq += g * g;
            }
        }
        const double scale = std::sqrt(static_cast<double>(h) * w / sum_sq);
        for (double& g : gain_) g *= scale;

        in_ = fftw_alloc_complex(gain_.size());
        out_ = fftw_alloc_complex(gain_.size());
        fwd_ = fftw_plan_dft_2d(h, w, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(h, w, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ~GrfFilter() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(in_);
        fftw_free(out_);
    }

    GrfFilter(const GrfFilter&) = delete;
    GrfFilter& operator=(const GrfFilter&) = delete;

    // white: h*w standard normals; result overwritten in place
    void apply(std::vector<double>& white) {
        const size_t n = gain_.size();
        for (size_t i = 0; i < n; ++i) {
            in_[i][0] = white[i];
            in_[i][1] = 0.0;
        }
        fftw_execute(fwd_);
        for (size_t i = 0; i < n; ++i) {
            in_[i][0] = out_[i][0] * gain_[i];
            in_[i][1] = out_[i][1] * gain_[i];
        }
        fftw_execute(bwd_);
        const double inv = 1.0 / n;
        for (size_t i = 0; i < n; ++i) white[i] = out_[i][0] * inv;
    }

private:
    int h_, w_;
    std::vector<double> gain_;
    fftw_complex* in_;
    fftw_complex* out_;
    fftw_plan fwd_, bwd_;
};

}  // namespace

ZernikeField sample_zernike_field(const FieldCovarianceSpec& spec,
                                  int T, int H, int W, int N, uint64_t seed) {
    if (T <= 0 || H <= 0 || W <= 0 || N < 4)
        throw std::invalid_argument("sample_zernike_field: need T,H,W > 0 and N >= 4");
    spec.validate(N);

    ZernikeField field;
    field.coeffs = Tensor(T, H, W, N);
    Tensor& out = field.coeffs;

    GrfFilter filter(H, W, spec.spatial_correlation_length);
    const double rho = spec.temporal_correlation;
    const double innov = std::sqrt(1.0 - rho * rho);
    const size_t hw = static_cast<size_t>(H) * W;

    std::vector<double> state(hw), white(hw);
    for (int ch = 0; ch < N - 1; ++ch) {
        const double sigma = std::sqrt(spec.per_mode_variance[ch]);
        if (sigma == 0.0) continue;
        for (int t = 0; t < T; ++t) {
            Rng rng(derive_seed(seed, static_cast<uint64_t>(ch), static_cast<uint64_t>(t)));
            for (size_t i = 0; i < hw; ++i) white[i] = rng.next_gaussian();
            filter.apply(white);
            if (t == 0) {
                state = white;
            } else {
                for (size_t i = 0; i < hw; ++i) state[i] = rho * state[i] + innov * white[i];
            }
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x)
                    out(t, y, x, ch) = sigma * state[static_cast<size_t>(y) * W + x];
        }
    }

    // kernel-size channel is a global optical parameter, constant per sequence
    for (int t = 0; t < T; ++t)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                out(t, y, x, N - 1) = spec.kernel_size_norm;

    return field;
}

}  // namespace turbmt::field
