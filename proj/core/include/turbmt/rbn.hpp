#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "turbmt/lpd.hpp"
#include "turbmt/tensor.hpp"

namespace turbmt::rbn {

// One convolution layer, no bias. Weights indexed [cout][cin][ky][kx].
struct ConvLayer {
    int cin = 0;
    int cout = 0;
    int k = 3;  // 1 or 3
    std::vector<double> w;

    double at(int co, int ci, int ky, int kx) const {
        return w[((static_cast<size_t>(co) * cin + ci) * k + ky) * k + kx];
    }
    size_t count() const { return static_cast<size_t>(cout) * cin * k * k; }
};

// Fixed-weight re-blurring network. A 3-level encoder-decoder over the
// tilt-corrected frame, with per-scale multiplicative modulation maps derived
// from the latent blur code. Bias-free and SiLU-activated throughout, with a
// residual output head, so an all-zero latent leaves the warped frame
// untouched exactly.
struct RbnWeights {
    int image_channels = 1;
    int latent_channels = 1;
    std::array<int, 4> widths{8, 12, 16, 16};

    std::array<ConvLayer, 4> enc;  // 3x3: image/skip path
    std::array<ConvLayer, 4> mod;  // 1x1: latent -> per-scale modulators
    std::array<ConvLayer, 3> dec;  // 3x3: coarse-to-fine
    ConvLayer head;                // 3x3: widths[0] -> image_channels

    double lipschitz = 0.0;  // filled on load / by estimate_latent_lipschitz

    void validate() const;
    size_t param_count() const;
    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);
};

// seed == 0 gives all-zero weights (the exact-identity network); otherwise a
// fan-in-scaled Gaussian init.
RbnWeights make_rbn_weights(int image_channels, int latent_channels,
                            std::array<int, 4> widths, uint64_t seed);

void save_rbn_weights(const RbnWeights& w, const std::string& path_prefix);
// Loads and fills the Lipschitz estimate.
RbnWeights load_rbn_weights(const std::string& path_prefix);

struct RbnResult {
    Tensor output;  // restored estimate of the clean sequence
    Tensor warped;  // tilt-corrected input (residual base)
    Tensor latent;  // the latent draw actually used
};

// Deterministic forward with an explicit latent code.
RbnResult rbn_forward_latent(const Tensor& image, const Tensor& tilt,
                             const Tensor& latent, const RbnWeights& w);

// Samples the latent from (mu, log_sigma) with `seed`, then runs the network.
RbnResult rbn_forward(const Tensor& image, const lpd::LatentPhaseDistortion& d,
                      const RbnWeights& w, uint64_t seed);

struct RbnVjp {
    Tensor cot_image;
    Tensor cot_tilt;
    Tensor cot_latent;
};
RbnVjp rbn_vjp(const Tensor& image, const Tensor& tilt, const Tensor& latent,
               const RbnWeights& w, const Tensor& cot_out);

// Chain a latent cotangent through the reparameterization
// a = mu + exp(log_sigma) * eps:  d/d mu = 1,  d/d log_sigma = (a - mu).
struct LatentStatsVjp {
    Tensor cot_mu;
    Tensor cot_log_sigma;
};
LatentStatsVjp latent_stats_vjp(const Tensor& cot_latent, const Tensor& latent,
                                const Tensor& mu);

// Empirical local Lipschitz constant of output w.r.t. the latent code,
// max over random probes of |f(a + da) - f(a)| / |da|.
double estimate_latent_lipschitz(const RbnWeights& w, int grid = 16,
                                 int probes = 4, uint64_t seed = 7);

}  // namespace turbmt::rbn
