#include "turbmt/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "turbmt/psf.hpp"
#include "turbmt/rng.hpp"
#include "turbmt/warp.hpp"

namespace turbmt::sim {

namespace {

constexpr uint64_t kNoiseStream = 0x6e6f6973ULL;  // shared by both degrade paths

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

void add_noise(Tensor& img, double sigma, uint64_t seed) {
    if (sigma <= 0.0) return;
    Rng rng(derive_seed(seed, kNoiseStream));
    for (double& v : img.raw()) v += sigma * rng.next_gaussian();
}

}  // namespace

Tensor basis_blur(const Tensor& image, const Tensor& weights, const PsfBasis& basis) {
    if (weights.c() != basis.K)
        throw std::invalid_argument("basis_blur: weight channels != K");
    if (image.t() != weights.t() || image.h() != weights.h() || image.w() != weights.w())
        throw std::invalid_argument("basis_blur: image/weights dims mismatch");

    const int T = image.t(), H = image.h(), W = image.w(), C = image.c();
    const int s = basis.kernel_size, c0 = s / 2;
    const size_t s2 = static_cast<size_t>(s) * s;
    Tensor out(T, H, W, C);
    Tensor prod(T, H, W, C);

    for (int k = 0; k < basis.K; ++k) {
        const double* psi = basis.projection.data() + static_cast<size_t>(k) * s2;
        for (int t = 0; t < T; ++t)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    const double b = weights(t, y, x, k);
                    for (int c = 0; c < C; ++c) prod(t, y, x, c) = b * image(t, y, x, c);
                }
        // true convolution against the edge-replicated product
        for (int t = 0; t < T; ++t)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x)
                    for (int u = 0; u < s; ++u) {
                        const int sy = clampi(y + c0 - u, 0, H - 1);
                        for (int v = 0; v < s; ++v) {
                            const double pv = psi[static_cast<size_t>(u) * s + v];
                            if (pv == 0.0) continue;
                            const int sx = clampi(x + c0 - v, 0, W - 1);
                            for (int c = 0; c < C; ++c)
                                out(t, y, x, c) += pv * prod(t, sy, sx, c);
                        }
                    }
    }
    return out;
}

BasisBlurVjp basis_blur_vjp(const Tensor& image, const Tensor& weights,
                            const PsfBasis& basis, const Tensor& cot_out) {
    if (weights.c() != basis.K)
        throw std::invalid_argument("basis_blur_vjp: weight channels != K");
    if (image.t() != weights.t() || image.h() != weights.h() || image.w() != weights.w())
        throw std::invalid_argument("basis_blur_vjp: image/weights dims mismatch");
    require_same_shape(image, cot_out, "basis_blur_vjp");

    const int T = image.t(), H = image.h(), W = image.w(), C = image.c();
    const int s = basis.kernel_size, c0 = s / 2;
    const size_t s2 = static_cast<size_t>(s) * s;
    BasisBlurVjp vjp{Tensor(T, H, W, C), Tensor(T, H, W, basis.K)};
    Tensor cot_prod(T, H, W, C);

    for (int k = 0; k < basis.K; ++k) {
        const double* psi = basis.projection.data() + static_cast<size_t>(k) * s2;
        std::fill(cot_prod.raw().begin(), cot_prod.raw().end(), 0.0);
        for (int t = 0; t < T; ++t)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x)
                    for (int u = 0; u < s; ++u) {
                        const int sy = clampi(y + c0 - u, 0, H - 1);
                        for (int v = 0; v < s; ++v) {
                            const double pv = psi[static_cast<size_t>(u) * s + v];
                            if (pv == 0.0) continue;
                            const int sx = clampi(x + c0 - v, 0, W - 1);
                            for (int c = 0; c < C; ++c)
                                cot_prod(t, sy, sx, c) += pv * cot_out(t, y, x, c);
                        }
                    }
        for (int t = 0; t < T; ++t)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    const double b = weights(t, y, x, k);
                    double acc = 0.0;
                    for (int c = 0; c < C; ++c) {
                        vjp.cot_image(t, y, x, c) += b * cot_prod(t, y, x, c);
                        acc += image(t, y, x, c) * cot_prod(t, y, x, c);
                    }
                    vjp.cot_weights(t, y, x, k) = acc;
                }
    }
    return vjp;
}

double default_tilt_gain(int kernel_size) { return kernel_size / 4.0; }

Tensor tilt_from_field(const field::ZernikeField& field, double tilt_gain) {
    const Tensor& coeffs = field.coeffs;
    const double gain = tilt_gain > 0.0 ? tilt_gain : default_tilt_gain(field.kernel_size());
    Tensor tilt(coeffs.t(), coeffs.h(), coeffs.w(), 2);
    for (int t = 0; t < coeffs.t(); ++t)
        for (int y = 0; y < coeffs.h(); ++y)
            for (int x = 0; x < coeffs.w(); ++x) {
                tilt(t, y, x, 0) = gain * coeffs(t, y, x, 0);
                tilt(t, y, x, 1) = gain * coeffs(t, y, x, 1);
            }
    return tilt;
}

Tensor degrade_with_tilt(const Tensor& image, const Tensor& tilt,
                         const Tensor& weights, const PsfBasis& psf_basis,
                         double noise_sigma, uint64_t seed) {
    Tensor out = basis_blur(warp(image, tilt), weights, psf_basis);
    add_noise(out, noise_sigma, seed);
    return out;
}

Tensor degrade(const Tensor& image, const field::ZernikeField& field,
               const zernike::ZernikeBasis& zbasis, const PsfBasis& psf_basis,
               double noise_sigma, uint64_t seed, double tilt_gain) {
    const Tensor tilt = tilt_from_field(field, tilt_gain);
    const Tensor weights = blur_weights(field, zbasis, psf_basis);
    return degrade_with_tilt(image, tilt, weights, psf_basis, noise_sigma, seed);
}

DegradeVjp degrade_vjp(const Tensor& image, const Tensor& tilt,
                       const Tensor& weights, const PsfBasis& psf_basis,
                       const Tensor& cot_out) {
    const Tensor warped = warp(image, tilt);
    const BasisBlurVjp blur = basis_blur_vjp(warped, weights, psf_basis, cot_out);
    const WarpVjp wv = warp_vjp(image, tilt, blur.cot_image);
    return {wv.cot_image, wv.cot_tilt};
}

Tensor degrade_direct(const Tensor& image, const field::ZernikeField& field,
                      const zernike::ZernikeBasis& zbasis, double noise_sigma,
                      uint64_t seed, double tilt_gain, double aperture_ratio) {
    const int T = image.t(), H = image.h(), W = image.w(), C = image.c();
    if (H > kDirectSizeCap || W > kDirectSizeCap)
        throw std::invalid_argument("degrade_direct: size cap exceeded (H,W <= 128)");
    if (field.coeffs.t() != T || field.coeffs.h() != H || field.coeffs.w() != W)
        throw std::invalid_argument("degrade_direct: image/field dims mismatch");

    const int s = field.kernel_size(), c0 = s / 2;
    const size_t s2 = static_cast<size_t>(s) * s;
    const auto rt = zernike::resample_tables(zbasis, s);
    const Tensor warped = warp(image, tilt_from_field(field, tilt_gain));

    Tensor out(T, H, W, C);
    std::vector<double> psfs(static_cast<size_t>(H) * W * s2);
    for (int t = 0; t < T; ++t) {
        // exact per-pixel PSFs for this frame, plain-DFT path
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const auto a = field.noll_coeffs(t, y, x, /*include_tilt=*/false);
                const Grid psf = psf_from_phase_reference(
                    zernike::phase_from_resampled(rt, a), aperture_ratio);
                std::copy(psf.raw().begin(), psf.raw().end(),
                          psfs.begin() + (static_cast<size_t>(y) * W + x) * s2);
            }
        // gather with edge replication; source pixel clamp(sy,sx) contributes
        // with its own PSF, matching the low-rank padded-product convolution
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                for (int u = 0; u < s; ++u) {
                    const int sy = clampi(y + c0 - u, 0, H - 1);
                    for (int v = 0; v < s; ++v) {
                        const int sx = clampi(x + c0 - v, 0, W - 1);
                        const double pv =
                            psfs[(static_cast<size_t>(sy) * W + sx) * s2 + static_cast<size_t>(u) * s + v];
                        for (int c = 0; c < C; ++c)
                            out(t, y, x, c) += pv * warped(t, sy, sx, c);
                    }
                }
    }
    add_noise(out, noise_sigma, seed);
    return out;
}

}  // namespace turbmt::sim
