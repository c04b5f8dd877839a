#include "turbmt/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "turbmt/losses.hpp"
#include "turbmt/lpd.hpp"
#include "turbmt/rbn.hpp"
#include "turbmt/rng.hpp"
#include "turbmt/scan_order.hpp"
#include "turbmt/ssm.hpp"
#include "turbmt/warp.hpp"
#include "turbmt/zernike.hpp"

namespace turbmt::check {

namespace {

std::string fmt(double measured, double bound) {
    std::ostringstream ss;
    ss << "measured " << measured << " vs bound " << bound;
    return ss.str();
}

void report(std::vector<CheckResult>& out, const std::string& suite,
            const std::string& name, bool pass, const std::string& detail) {
    out.push_back({suite, name, pass, detail});
}

// ---- scan suite -----------------------------------------------------------

void suite_scan(std::vector<CheckResult>& out, bool mutate) {
    const int T = 3, H = 16, W = 16;
    for (auto order : {scan::Order::SpaceFirst, scan::Order::TimeFirst, scan::Order::LocalHilbert}) {
        auto perm = scan::build_permutation(order, T, H, W, 8);
        if (mutate && order == scan::Order::LocalHilbert)
            std::swap(perm.inverse[0], perm.inverse[1]);  // injected fault
        std::vector<bool> seen(perm.inverse.size(), false);
        bool bijective = true;
        for (int g : perm.inverse) {
            if (g < 0 || g >= static_cast<int>(seen.size()) || seen[g]) bijective = false;
            else seen[g] = true;
        }
        // round trip through a random token sequence
        Rng rng(11 + static_cast<int>(order));
        std::vector<double> tokens(perm.inverse.size());
        for (double& v : tokens) v = rng.next_gaussian();
        const auto rt = scan::unapply(perm, scan::apply(perm, tokens));
        bool round_trip = rt == tokens;
        const char* names[] = {"space_first", "time_first", "local_hilbert"};
        report(out, "scan", std::string(names[static_cast<int>(order)]) + "_bijective",
               bijective, bijective ? "ok" : "duplicate or out-of-range grid index");
        report(out, "scan", std::string(names[static_cast<int>(order)]) + "_round_trip",
               round_trip, round_trip ? "bit-exact" : "mismatch after apply+unapply");
    }
    // Hilbert adjacency within tiles: 16x16 with block 8 has only full tiles,
    // so every within-frame step must be grid-adjacent.
    auto perm = scan::build_permutation(scan::Order::LocalHilbert, 1, 16, 16, 8);
    bool adjacent = true;
    for (size_t p = 1; p < perm.inverse.size(); ++p) {
        const int g0 = perm.inverse[p - 1], g1 = perm.inverse[p];
        const int dist = std::abs(g1 / 16 - g0 / 16) + std::abs(g1 % 16 - g0 % 16);
        if ((p % 64) != 0 && dist != 1) adjacent = false;  // tile-internal steps
    }
    report(out, "scan", "hilbert_tile_adjacency", adjacent,
           adjacent ? "all tile-internal steps are unit moves" : "non-adjacent step inside a tile");
    const double dh = scan::mean_consecutive_distance(perm);
    const double ds = scan::mean_consecutive_distance(
        scan::build_permutation(scan::Order::SpaceFirst, 1, 16, 16, 8));
    report(out, "scan", "hilbert_beats_raster", dh < ds, fmt(dh, ds));
}

// ---- ssm suite ------------------------------------------------------------

std::vector<ssm::StepParams> random_params(Rng& rng, int L, int N) {
    std::vector<ssm::StepParams> params(L);
    for (auto& p : params) {
        p.a_bar.resize(N);
        p.b_bar.resize(N);
        p.c.resize(N);
        for (int i = 0; i < N; ++i) {
            p.a_bar[i] = 0.2 + 0.75 * rng.next_unit();  // stable
            p.b_bar[i] = rng.next_gaussian();
            p.c[i] = rng.next_gaussian();
        }
        p.d = rng.next_gaussian();
    }
    return params;
}

double rel_err(std::span<const double> a, std::span<const double> b) {
    double num = 0, den = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-30);
}

void suite_ssm(std::vector<CheckResult>& out, bool mutate) {
    Rng rng(2024);
    double worst_scan = 0, worst_conv = 0;
    for (int it = 0; it < 25; ++it) {
        const int L = 8 + static_cast<int>(rng.next_unit() * 248);
        const int N = 1 + static_cast<int>(rng.next_unit() * 7);
        auto params = random_params(rng, L, N);
        std::vector<double> x(L);
        for (double& v : x) v = rng.next_gaussian();
        auto ref = ssm::recurrence(params, x);
        auto fast = ssm::parallel_scan(params, x, 32);
        if (mutate && it == 0) fast[L / 2] += 1e-3;
        worst_scan = std::max(worst_scan, rel_err(fast, ref));

        // time-invariant system for the kernel check
        auto ti = std::vector<ssm::StepParams>(L, params[0]);
        auto kernel = ssm::ssm_conv_kernel(params[0], L);
        auto conv = ssm::causal_conv(x, kernel, params[0].d);
        worst_conv = std::max(worst_conv, rel_err(conv, ssm::recurrence(ti, x)));
    }
    report(out, "ssm", "scan_matches_recurrence", worst_scan < 1e-6, fmt(worst_scan, 1e-6));
    report(out, "ssm", "conv_matches_recurrence", worst_conv < 1e-6, fmt(worst_conv, 1e-6));

    // zero guidance weights must be bit-compatible with the unguided path
    bool neutral_ok = true;
    for (int it = 0; it < 20 && neutral_ok; ++it) {
        const int L = 32, F = 3, G = 2, N = 4;
        ssm::SelectiveProjections proj;
        proj.state_dim = N;
        proj.a_diag.resize(N);
        for (double& a : proj.a_diag) a = -0.1 - rng.next_unit();
        proj.d = rng.next_gaussian();
        proj.s_delta = ssm::AffineMap::random(F, 1, rng.next_u64());
        proj.s_b = ssm::AffineMap::random(F, N, rng.next_u64());
        proj.s_c = ssm::AffineMap::random(F, N, rng.next_u64());
        std::vector<std::vector<double>> x(L, std::vector<double>(F));
        std::vector<std::vector<double>> g(L, std::vector<double>(G));
        for (auto& row : x)
            for (double& v : row) v = rng.next_gaussian();
        for (auto& row : g)
            for (double& v : row) v = rng.next_gaussian();
        auto base = ssm::selective_params(x, proj, nullptr);
        proj.g_delta = ssm::AffineMap::zeros(G, 1);
        proj.g_b = ssm::AffineMap::zeros(G, N);
        proj.g_c = ssm::AffineMap::zeros(G, N);
        auto guided = ssm::selective_params(x, proj, &g);
        for (int i = 0; i < L; ++i)
            if (guided[i].a_bar != base[i].a_bar || guided[i].b_bar != base[i].b_bar ||
                guided[i].c != base[i].c)
                neutral_ok = false;
    }
    report(out, "ssm", "neutral_guidance_bit_compatible", neutral_ok,
           neutral_ok ? "identical step parameters" : "guided path diverged");
}

// ---- grad suite -----------------------------------------------------------

// Central finite difference of a scalar functional along one coordinate.
double central_diff(const std::function<double(double)>& f, double x0, double h) {
    return (f(x0 + h) - f(x0 - h)) / (2 * h);
}

double dot(const Tensor& a, const Tensor& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a.raw()[i] * b.raw()[i];
    return s;
}

void suite_grad(std::vector<CheckResult>& out, bool mutate) {
    Rng rng(515);
    const double tol = 1e-3;

    // warp: d <w, warp(img, tilt)> / d tilt and / d img
    double worst_warp = 0;
    for (int it = 0; it < 10; ++it) {
        const int H = 9, W = 9;
        Tensor img(1, H, W, 1), tilt(1, H, W, 2), w(1, H, W, 1);
        for (double& v : img.raw()) v = rng.next_unit();
        for (double& v : w.raw()) v = rng.next_gaussian();
        for (double& v : tilt.raw()) v = 0.4 * rng.next_gaussian();
        auto vjp = sim::warp_vjp(img, tilt, w);
        if (mutate && it == 0) vjp.cot_tilt.raw()[0] += 1e-2;
        for (int probe = 0; probe < 6; ++probe) {
            // interior pixels only; edge clamping makes the FD one-sided there
            const int y = 2 + static_cast<int>(rng.next_unit() * (H - 5));
            const int x = 2 + static_cast<int>(rng.next_unit() * (W - 5));
            const int c = probe % 2;
            auto f = [&](double v) {
                Tensor t2 = tilt;
                t2(0, y, x, c) = v;
                return dot(w, sim::warp(img, t2));
            };
            const double fd = central_diff(f, tilt(0, y, x, c), 1e-5);
            const double an = vjp.cot_tilt(0, y, x, c);
            worst_warp = std::max(worst_warp, std::abs(fd - an) / std::max(1.0, std::abs(fd)));
        }
    }
    report(out, "grad", "warp_tilt_vjp", worst_warp < tol, fmt(worst_warp, tol));

    // modulate
    double worst_mod = 0;
    for (int it = 0; it < 10; ++it) {
        Tensor f0(1, 4, 4, 2), m0(1, 4, 4, 2), w(1, 4, 4, 2);
        for (double& v : f0.raw()) v = rng.next_gaussian();
        for (double& v : m0.raw()) v = rng.next_gaussian();
        for (double& v : w.raw()) v = rng.next_gaussian();
        auto vjp = lpd::modulate_vjp({f0}, {m0}, {w});
        const size_t i = static_cast<size_t>(rng.next_unit() * (f0.size() - 1));
        auto f = [&](double v) {
            Tensor f2 = f0;
            f2.raw()[i] = v;
            return dot(w, lpd::modulate({f2}, {m0})[0]);
        };
        const double fd = central_diff(f, f0.raw()[i], 1e-6);
        worst_mod = std::max(worst_mod,
                             std::abs(fd - vjp.cot_features[0].raw()[i]) / std::max(1.0, std::abs(fd)));
    }
    report(out, "grad", "modulate_vjp", worst_mod < tol, fmt(worst_mod, tol));

    // gated output
    double worst_gate = 0;
    for (int it = 0; it < 10; ++it) {
        const int L = 12, F = 3;
        std::vector<double> y(L);
        std::vector<std::vector<double>> xg(L, std::vector<double>(F));
        for (double& v : y) v = rng.next_gaussian();
        for (auto& row : xg)
            for (double& v : row) v = rng.next_gaussian();
        ssm::GateParams gp;
        gp.gate = ssm::AffineMap::random(F, 1, rng.next_u64());
        std::vector<double> w(L);
        for (double& v : w) v = rng.next_gaussian();
        auto vjp = ssm::gated_output_vjp(y, xg, gp, nullptr, w);
        const int i = static_cast<int>(rng.next_unit() * (L - 1));
        const int j = static_cast<int>(rng.next_unit() * (F - 1));
        auto f = [&](double v) {
            auto xg2 = xg;
            xg2[i][j] = v;
            auto o = ssm::gated_output(y, xg2, gp, nullptr);
            double s = 0;
            for (int k = 0; k < L; ++k) s += w[k] * o[k];
            return s;
        };
        const double fd = central_diff(f, xg[i][j], 1e-6);
        worst_gate = std::max(worst_gate,
                              std::abs(fd - vjp.cot_x_gate[i][j]) / std::max(1.0, std::abs(fd)));
    }
    report(out, "grad", "gated_output_vjp", worst_gate < tol, fmt(worst_gate, tol));

    // charbonnier + kl
    {
        Tensor a(1, 5, 5, 1), b(1, 5, 5, 1);
        for (double& v : a.raw()) v = rng.next_gaussian();
        for (double& v : b.raw()) v = rng.next_gaussian();
        auto g = loss::charbonnier_grad(a, b);
        double worst = 0;
        for (size_t i = 0; i < a.size(); i += 3) {
            auto f = [&](double v) {
                Tensor a2 = a;
                a2.raw()[i] = v;
                return loss::charbonnier(a2, b);
            };
            const double fd = central_diff(f, a.raw()[i], 1e-6);
            worst = std::max(worst, std::abs(fd - g.raw()[i]) / std::max(1.0, std::abs(fd)));
        }
        report(out, "grad", "charbonnier_grad", worst < tol, fmt(worst, tol));

        Tensor mu(1, 4, 4, 1), ls(1, 4, 4, 1);
        for (double& v : mu.raw()) v = rng.next_gaussian();
        for (double& v : ls.raw()) v = 0.3 * rng.next_gaussian();
        auto kg = loss::kl_loss_grad(mu, ls);
        double worst_kl = 0;
        for (size_t i = 0; i < mu.size(); i += 5) {
            auto f = [&](double v) {
                Tensor l2 = ls;
                l2.raw()[i] = v;
                return loss::kl_loss(mu, l2);
            };
            const double fd = central_diff(f, ls.raw()[i], 1e-6);
            worst_kl = std::max(worst_kl,
                                std::abs(fd - kg.d_log_sigma.raw()[i]) / std::max(1.0, std::abs(fd)));
        }
        report(out, "grad", "kl_grad", worst_kl < tol, fmt(worst_kl, tol));
    }

    // end-to-end rbn: latent cotangent vs finite differences
    {
        auto w = rbn::make_rbn_weights(1, 1, {4, 6, 8, 8}, 99);
        const int H = 16, W = 16;
        Tensor img(1, H, W, 1), tilt(1, H, W, 2), latent(1, H, W, 1), cot(1, H, W, 1);
        for (double& v : img.raw()) v = rng.next_unit();
        for (double& v : tilt.raw()) v = 0.3 * rng.next_gaussian();
        for (double& v : latent.raw()) v = 0.5 * rng.next_gaussian();
        for (double& v : cot.raw()) v = rng.next_gaussian();
        auto vjp = rbn::rbn_vjp(img, tilt, latent, w, cot);
        double worst = 0;
        for (int probe = 0; probe < 8; ++probe) {
            const size_t i = static_cast<size_t>(rng.next_unit() * (latent.size() - 1));
            auto f = [&](double v) {
                Tensor l2 = latent;
                l2.raw()[i] = v;
                return dot(cot, rbn::rbn_forward_latent(img, tilt, l2, w).output);
            };
            const double fd = central_diff(f, latent.raw()[i], 1e-5);
            worst = std::max(worst, std::abs(fd - vjp.cot_latent.raw()[i]) / std::max(1.0, std::abs(fd)));
        }
        report(out, "grad", "rbn_latent_vjp", worst < tol, fmt(worst, tol));
    }
}

// ---- kl suite -------------------------------------------------------------

void suite_kl(std::vector<CheckResult>& out, bool mutate) {
    Tensor mu(1, 2, 2, 1), ls(1, 2, 2, 1);  // mu = 0, sigma = 1
    double v0 = loss::kl_loss(mu, ls);
    if (mutate) v0 += 1e-6;
    report(out, "kl", "standard_normal_is_zero", v0 == 0.0, fmt(v0, 0.0));

    // the 1/(H*W) factor makes this a per-element average, so mu = 1
    // everywhere gives exactly 0.5
    for (double& v : mu.raw()) v = 1.0;
    const double v1 = loss::kl_loss(mu, ls);
    report(out, "kl", "unit_mean_half_nat", std::abs(v1 - 0.5) < 1e-9, fmt(v1, 0.5));

    // printed variant: -0.5 (1 - mu - sigma + log sigma^2), mu = sigma = 1 -> 0.5
    const double v2 = loss::kl_loss(mu, ls, true);
    report(out, "kl", "linear_variant_printed_form", std::abs(v2 - 0.5) < 1e-9,
           fmt(v2, 0.5));
}

// ---- zernike suite --------------------------------------------------------

void suite_zernike(std::vector<CheckResult>& out, bool mutate) {
    auto basis = zernike::build_zernike_basis(36, 128);
    double worst = 0;
    for (int i = 1; i <= 36; ++i)
        for (int j = i; j <= 36; ++j) {
            const double target = (i == j) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(basis.inner(i, j) - target));
        }
    if (mutate) worst += 0.1;
    report(out, "zernike", "gram_near_identity", worst < 2e-2, fmt(worst, 2e-2));

    double worst_mean = 0;
    for (int j = 2; j <= 36; ++j)
        worst_mean = std::max(worst_mean, std::abs(basis.disk_mean(j)));
    report(out, "zernike", "nonpiston_zero_mean", worst_mean < 1e-3, fmt(worst_mean, 1e-3));
}

// ---- ema suite ------------------------------------------------------------

void suite_ema(std::vector<CheckResult>& out, bool mutate) {
    const double beta = mutate ? 0.9989 : 0.999;
    const int n = 1000;
    std::vector<double> theta_t{1.0, -2.0, 0.5}, theta_s{0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) theta_t = loss::ema_update(theta_t, theta_s, beta);
    // with theta_s = 0 every update is an exact multiply by beta, so the
    // scalar contraction iterated the same way is the bit-exact oracle
    bool exact = true;
    const std::vector<double> init{1.0, -2.0, 0.5};
    for (size_t i = 0; i < theta_t.size(); ++i) {
        double v = init[i];
        for (int k = 0; k < n; ++k) v *= 0.999;
        if (theta_t[i] != v) exact = false;
    }
    report(out, "ema", "contraction_exact_beta_pow_n", exact,
           exact ? "|theta_t - theta_s| scaled by beta^n to machine precision"
                 : "contraction deviates from beta^n");
}

}  // namespace

std::vector<std::string> suite_names() { return {"scan", "ssm", "grad", "kl", "zernike", "ema"}; }

std::vector<CheckResult> run_suite(const std::string& suite, const std::string& mutate) {
    std::vector<CheckResult> out;
    const bool m = (mutate == suite);
    if (suite == "scan") suite_scan(out, m);
    else if (suite == "ssm") suite_ssm(out, m);
    else if (suite == "grad") suite_grad(out, m);
    else if (suite == "kl") suite_kl(out, m);
    else if (suite == "zernike") suite_zernike(out, m);
    else if (suite == "ema") suite_ema(out, m);
    else throw std::invalid_argument("unknown check suite: " + suite);
    return out;
}

std::vector<CheckResult> run_all(const std::string& mutate) {
    std::vector<CheckResult> out;
    for (const auto& s : suite_names()) {
        auto r = run_suite(s, mutate);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

}  // namespace turbmt::check
