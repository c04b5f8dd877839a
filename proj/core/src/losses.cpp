#include "turbmt/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace turbmt::loss {

double charbonnier(const Tensor& a, const Tensor& b, double eps) {
    require_same_shape(a, b, "charbonnier");
    if (!(eps > 0.0)) throw std::invalid_argument("charbonnier: eps must be > 0");
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double r = a.raw()[i] - b.raw()[i];
        sum += std::sqrt(r * r + eps * eps);
    }
    return sum / a.size();
}

Tensor charbonnier_grad(const Tensor& a, const Tensor& b, double eps) {
    require_same_shape(a, b, "charbonnier_grad");
    Tensor g(a.t(), a.h(), a.w(), a.c());
    const double inv_n = 1.0 / a.size();
    for (size_t i = 0; i < a.size(); ++i) {
        const double r = a.raw()[i] - b.raw()[i];
        g.raw()[i] = inv_n * r / std::sqrt(r * r + eps * eps);
    }
    return g;
}

double kl_loss(const Tensor& mu, const Tensor& log_sigma, bool linear_variant) {
    require_same_shape(mu, log_sigma, "kl_loss");
    const double hw = static_cast<double>(mu.h()) * mu.w();
    const double tc = static_cast<double>(mu.t()) * mu.c();
    double sum = 0.0;
    for (size_t i = 0; i < mu.size(); ++i) {
        const double m = mu.raw()[i];
        const double ls = log_sigma.raw()[i];
        if (!std::isfinite(m) || !std::isfinite(ls))
            throw std::invalid_argument("kl_loss: non-finite input");
        const double sigma = std::exp(ls);
        sum += linear_variant ? (2.0 * ls + 1.0 - m - sigma)
                             : (2.0 * ls + 1.0 - m * m - sigma * sigma);
    }
    return -0.5 / hw * sum / tc;
}

KlGrad kl_loss_grad(const Tensor& mu, const Tensor& log_sigma) {
    require_same_shape(mu, log_sigma, "kl_loss_grad");
    KlGrad g{Tensor(mu.t(), mu.h(), mu.w(), mu.c()),
             Tensor(mu.t(), mu.h(), mu.w(), mu.c())};
    const double scale = -0.5 / (static_cast<double>(mu.h()) * mu.w()) /
                         (static_cast<double>(mu.t()) * mu.c());
    for (size_t i = 0; i < mu.size(); ++i) {
        const double m = mu.raw()[i];
        const double s2 = std::exp(2.0 * log_sigma.raw()[i]);
        g.d_mu.raw()[i] = scale * (-2.0 * m);
        g.d_log_sigma.raw()[i] = scale * (2.0 - 2.0 * s2);
    }
    return g;
}

double returb_loss(const Tensor& tilt_warped_hat, const Tensor& tilt_warped_gt,
                   const Tensor& returb_hat, const Tensor& returb_gt,
                   const Tensor& mu, const Tensor& log_sigma,
                   const LossWeights& weights, double eps) {
    return charbonnier(tilt_warped_hat, tilt_warped_gt, eps) +
           charbonnier(returb_hat, returb_gt, eps) +
           weights.alpha_k * kl_loss(mu, log_sigma);
}

TotalLoss total_loss(double restore_term, double returb_term, const LossWeights& weights) {
    TotalLoss t;
    t.restore = restore_term;
    t.returb = returb_term;
    t.total = restore_term + weights.alpha * returb_term;
    t.perceptual_skipped = true;
    return t;
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
    require_same_shape(a, b, "psnr");
    double mse = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double r = a.raw()[i] - b.raw()[i];
        mse += r * r;
    }
    mse /= a.size();
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

namespace {

std::vector<double> gaussian_window(int n, double sigma) {
    std::vector<double> w(n);
    const double c = (n - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        w[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace

double ssim(const Tensor& a, const Tensor& b, double peak) {
    require_same_shape(a, b, "ssim");
    constexpr int kWin = 11;
    const auto win = gaussian_window(kWin, 1.5);
    const double c1 = 0.01 * peak * 0.01 * peak;
    const double c2 = 0.03 * peak * 0.03 * peak;
    const int H = a.h(), W = a.w();
    if (H < kWin || W < kWin)
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");

    double total = 0.0;
    size_t count = 0;
    for (int t = 0; t < a.t(); ++t)
        for (int c = 0; c < a.c(); ++c)
            for (int y = 0; y + kWin <= H; ++y)
                for (int x = 0; x + kWin <= W; ++x) {
                    double ma = 0, mb = 0, va = 0, vb = 0, cov = 0;
                    for (int u = 0; u < kWin; ++u)
                        for (int v = 0; v < kWin; ++v) {
                            const double wgt = win[u] * win[v];
                            const double pa = a(t, y + u, x + v, c);
                            const double pb = b(t, y + u, x + v, c);
                            ma += wgt * pa;
                            mb += wgt * pb;
                            va += wgt * pa * pa;
                            vb += wgt * pb * pb;
                            cov += wgt * pa * pb;
                        }
                    va -= ma * ma;
                    vb -= mb * mb;
                    cov -= ma * mb;
                    total += (2 * ma * mb + c1) * (2 * cov + c2) /
                             ((ma * ma + mb * mb + c1) * (va + vb + c2));
                    ++count;
                }
    return total / count;
}

std::vector<double> ema_update(std::span<const double> theta_t,
                               std::span<const double> theta_s, double beta) {
    if (theta_t.size() != theta_s.size())
        throw std::invalid_argument("ema_update: length mismatch");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw std::invalid_argument("ema_update: beta in [0,1]");
    std::vector<double> out(theta_t.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = beta * theta_t[i] + (1.0 - beta) * theta_s[i];
    return out;
}

}  // namespace turbmt::loss
