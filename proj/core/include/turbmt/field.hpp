#pragma once

#include <cstdint>
#include <vector>

#include "turbmt/tensor.hpp"

namespace turbmt::field {

// Per-pixel Zernike coefficient field. Channel layout:
//   channel 0, 1      -> Noll indices 2, 3 (tilt pair)
//   channel 2 .. N-2  -> Noll indices 4, 5, ... (higher-order modes)
//   channel N-1       -> kernel-size channel, constant in [0,1]
struct ZernikeField {
    Tensor coeffs;  // T x H x W x N

    int modes() const { return coeffs.c() - 1; }  // excludes kernel-size channel
    double kernel_size_norm() const { return coeffs(0, 0, 0, coeffs.c() - 1); }
    int kernel_size() const;  // dequantized odd size in 3..99

    // Noll-aligned coefficient vector (index 1..modes+1) for one pixel,
    // piston slot zero. With tilt included, a[1]=ch0, a[2]=ch1, ...
    std::vector<double> noll_coeffs(int t, int y, int x, bool include_tilt) const;
};

int kernel_size_from_norm(double v);    // [0,1] -> nearest odd in 3..99
double norm_from_kernel_size(int ks);

struct FieldCovarianceSpec {
    std::vector<double> per_mode_variance;  // length N (last entry ignored)
    double spatial_correlation_length = 8.0;  // pixels
    double temporal_correlation = 0.0;        // AR(1) coefficient in [0,1)
    double kernel_size_norm = 0.25;           // constant kernel-size channel value

    void validate(int n_channels) const;
};

// Stationary Gaussian field per mode channel: frequency-domain filtering of
// white noise with a squared-exponential kernel, AR(1) chain across frames.
// Deterministic given seed.
ZernikeField sample_zernike_field(const FieldCovarianceSpec& spec,
                                  int T, int H, int W, int N, uint64_t seed);

}  // namespace turbmt::field
