#pragma once

#include <cstdint>

#include "turbmt/field.hpp"
#include "turbmt/psf_basis.hpp"
#include "turbmt/tensor.hpp"

namespace turbmt::sim {

// out = sum_k psi_k (*) (beta_k . image), (*) = per-channel 2D convolution
// with edge-replication padding. weights: T x H x W x K.
Tensor basis_blur(const Tensor& image, const Tensor& weights, const PsfBasis& basis);

struct BasisBlurVjp {
    Tensor cot_image;
    Tensor cot_weights;
};
BasisBlurVjp basis_blur_vjp(const Tensor& image, const Tensor& weights,
                            const PsfBasis& basis, const Tensor& cot_out);

// Pixel shift per unit tilt coefficient; <= 0 selects the default
// kernel_size / 4.
double default_tilt_gain(int kernel_size);

// Tilt pixel-shift field extracted from field channels 0,1.
Tensor tilt_from_field(const field::ZernikeField& field, double tilt_gain = -1.0);

// Tilt-then-blur degradation: I = basis_blur(warp(J, tilt), beta) + noise.
Tensor degrade(const Tensor& image, const field::ZernikeField& field,
               const zernike::ZernikeBasis& zbasis, const PsfBasis& psf_basis,
               double noise_sigma, uint64_t seed, double tilt_gain = -1.0);

// Same composition with tilt and weights supplied explicitly (the
// differentiable surface used by the VJP and by inversion demos).
Tensor degrade_with_tilt(const Tensor& image, const Tensor& tilt,
                         const Tensor& weights, const PsfBasis& psf_basis,
                         double noise_sigma, uint64_t seed);

struct DegradeVjp {
    Tensor cot_image;
    Tensor cot_tilt;
};
DegradeVjp degrade_vjp(const Tensor& image, const Tensor& tilt,
                       const Tensor& weights, const PsfBasis& psf_basis,
                       const Tensor& cot_out);

// Brute-force reference: per-pixel PSF computed with the plain-DFT path and
// applied as a spatially varying convolution (scatter form matching the
// low-rank identity). Size-capped; the oracle for the low-rank path.
constexpr int kDirectSizeCap = 128;
Tensor degrade_direct(const Tensor& image, const field::ZernikeField& field,
                      const zernike::ZernikeBasis& zbasis, double noise_sigma,
                      uint64_t seed, double tilt_gain = -1.0,
                      double aperture_ratio = 1.0);

}  // namespace turbmt::sim
