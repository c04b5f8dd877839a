#pragma once

#include <span>
#include <vector>

#include "turbmt/tensor.hpp"

namespace turbmt::loss {

struct LossWeights {
    double alpha = 0.2;      // re-degradation weight
    double alpha_p = 0.01;   // perceptual weight (slot kept; term not computed here)
    double alpha_k = 0.001;  // KL weight
};

constexpr double kCharbonnierEps = 1e-3;

// mean of sqrt((a-b)^2 + eps^2)
double charbonnier(const Tensor& a, const Tensor& b, double eps = kCharbonnierEps);

// d charbonnier / d a, same shape as a
Tensor charbonnier_grad(const Tensor& a, const Tensor& b, double eps = kCharbonnierEps);

// Standard Gaussian KL against N(0, I): -0.5/(H*W) sum(log sigma^2 + 1 - mu^2
// - sigma^2), averaged over frames and latent channels. With linear_variant
// the un-squared printed form (... - mu - sigma) is evaluated instead.
double kl_loss(const Tensor& mu, const Tensor& log_sigma, bool linear_variant = false);

struct KlGrad {
    Tensor d_mu;
    Tensor d_log_sigma;
};
KlGrad kl_loss_grad(const Tensor& mu, const Tensor& log_sigma);

// L_c(tilt_hat pair) + L_c(returb pair) + alpha_k * KL
double returb_loss(const Tensor& tilt_warped_hat, const Tensor& tilt_warped_gt,
                   const Tensor& returb_hat, const Tensor& returb_gt,
                   const Tensor& mu, const Tensor& log_sigma,
                   const LossWeights& weights, double eps = kCharbonnierEps);

// total = restore + alpha * returb; the perceptual term is not computed (it
// needs a pretrained feature net) — its weight slot exists so the structure
// is complete, and `perceptual_skipped` reports the omission.
struct TotalLoss {
    double total = 0.0;
    double restore = 0.0;
    double returb = 0.0;
    bool perceptual_skipped = true;
};
TotalLoss total_loss(double restore_term, double returb_term, const LossWeights& weights);

constexpr double kPsnrCap = 99.0;  // returned for identical inputs
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

// Gaussian-window SSIM (window 11, sigma 1.5, k1 = 0.01, k2 = 0.03).
double ssim(const Tensor& a, const Tensor& b, double peak = 1.0);

// theta_t' = beta * theta_t + (1 - beta) * theta_s
std::vector<double> ema_update(std::span<const double> theta_t,
                               std::span<const double> theta_s, double beta);

}  // namespace turbmt::loss
