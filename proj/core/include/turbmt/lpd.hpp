#pragma once

#include <cstdint>
#include <vector>

#include "turbmt/tensor.hpp"

namespace turbmt::lpd {

// Tilt pixel-shift field plus latent blur statistics. Channel layout follows
// tilt-first convention: the full map is (tilt.x, tilt.y, mu..., log_sigma...).
struct LatentPhaseDistortion {
    Tensor tilt;       // T x H x W x 2
    Tensor mu;         // T x H x W x C_b
    Tensor log_sigma;  // T x H x W x C_b

    void validate() const;
};

// Reparameterized draw: a = mu + exp(log_sigma) * eps, eps ~ N(0, I) seeded.
Tensor sample_latent(const Tensor& mu, const Tensor& log_sigma, uint64_t seed);

// Multi-scale elementwise modulation: out_i = features_i . mods_i
std::vector<Tensor> modulate(const std::vector<Tensor>& features,
                             const std::vector<Tensor>& mods);

struct ModulateVjp {
    std::vector<Tensor> cot_features;
    std::vector<Tensor> cot_mods;
};
ModulateVjp modulate_vjp(const std::vector<Tensor>& features,
                         const std::vector<Tensor>& mods,
                         const std::vector<Tensor>& cot_out);

}  // namespace turbmt::lpd
