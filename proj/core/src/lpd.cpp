#include "turbmt/lpd.hpp"

#include <cmath>
#include <stdexcept>

#include "turbmt/rng.hpp"

namespace turbmt::lpd {

void LatentPhaseDistortion::validate() const {
    if (tilt.c() != 2) throw std::invalid_argument("LPD: tilt needs 2 channels");
    require_same_shape(mu, log_sigma, "LPD");
    if (tilt.t() != mu.t() || tilt.h() != mu.h() || tilt.w() != mu.w())
        throw std::invalid_argument("LPD: tilt/latent dims mismatch");
    for (double v : log_sigma.raw())
        if (!std::isfinite(v)) throw std::invalid_argument("LPD: non-finite log_sigma");
}

Tensor sample_latent(const Tensor& mu, const Tensor& log_sigma, uint64_t seed) {
    require_same_shape(mu, log_sigma, "sample_latent");
    Tensor out(mu.t(), mu.h(), mu.w(), mu.c());
    Rng rng(derive_seed(seed, 0x1a7e47ULL));
    for (size_t i = 0; i < out.size(); ++i)
        out.raw()[i] = mu.raw()[i] + std::exp(log_sigma.raw()[i]) * rng.next_gaussian();
    return out;
}

std::vector<Tensor> modulate(const std::vector<Tensor>& features,
                             const std::vector<Tensor>& mods) {
    if (features.size() != mods.size())
        throw std::invalid_argument("modulate: scale count mismatch");
    std::vector<Tensor> out;
    out.reserve(features.size());
    for (size_t s = 0; s < features.size(); ++s) {
        require_same_shape(features[s], mods[s], "modulate");
        Tensor o(features[s].t(), features[s].h(), features[s].w(), features[s].c());
        for (size_t i = 0; i < o.size(); ++i)
            o.raw()[i] = features[s].raw()[i] * mods[s].raw()[i];
        out.push_back(std::move(o));
    }
    return out;
}

ModulateVjp modulate_vjp(const std::vector<Tensor>& features,
                         const std::vector<Tensor>& mods,
                         const std::vector<Tensor>& cot_out) {
    if (features.size() != mods.size() || features.size() != cot_out.size())
        throw std::invalid_argument("modulate_vjp: scale count mismatch");
    ModulateVjp vjp;
    for (size_t s = 0; s < features.size(); ++s) {
        require_same_shape(features[s], cot_out[s], "modulate_vjp");
        Tensor cf(features[s].t(), features[s].h(), features[s].w(), features[s].c());
        Tensor cm(features[s].t(), features[s].h(), features[s].w(), features[s].c());
        for (size_t i = 0; i < cf.size(); ++i) {
            cf.raw()[i] = cot_out[s].raw()[i] * mods[s].raw()[i];
            cm.raw()[i] = cot_out[s].raw()[i] * features[s].raw()[i];
        }
        vjp.cot_features.push_back(std::move(cf));
        vjp.cot_mods.push_back(std::move(cm));
    }
    return vjp;
}

}  // namespace turbmt::lpd
