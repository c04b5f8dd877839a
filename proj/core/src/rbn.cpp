#include "turbmt/rbn.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "turbmt/rng.hpp"
#include "turbmt/tensor_io.hpp"
#include "turbmt/warp.hpp"

namespace turbmt::rbn {

namespace {

double silu(double v) {
    const double s = 1.0 / (1.0 + std::exp(-v));
    return v * s;
}
double silu_grad(double v) {
    const double s = 1.0 / (1.0 + std::exp(-v));
    return s * (1.0 + v * (1.0 - s));
}

Tensor conv_fwd(const Tensor& in, const ConvLayer& l) {
    if (in.c() != l.cin) throw std::invalid_argument("rbn conv: channel mismatch");
    Tensor out(in.t(), in.h(), in.w(), l.cout);
    const int r = l.k / 2;
    for (int t = 0; t < in.t(); ++t)
        for (int y = 0; y < in.h(); ++y)
            for (int x = 0; x < in.w(); ++x)
                for (int co = 0; co < l.cout; ++co) {
                    double acc = 0.0;
                    for (int ky = 0; ky < l.k; ++ky) {
                        const int sy = y + ky - r;
                        if (sy < 0 || sy >= in.h()) continue;  // zero pad
                        for (int kx = 0; kx < l.k; ++kx) {
                            const int sx = x + kx - r;
                            if (sx < 0 || sx >= in.w()) continue;
                            for (int ci = 0; ci < l.cin; ++ci)
                                acc += l.at(co, ci, ky, kx) * in(t, sy, sx, ci);
                        }
                    }
                    out(t, y, x, co) = acc;
                }
    return out;
}

// cot_in for the layer above; mirrors conv_fwd's gather as a scatter.
Tensor conv_bwd(const Tensor& cot_out, const ConvLayer& l, int in_h, int in_w) {
    Tensor cot_in(cot_out.t(), in_h, in_w, l.cin);
    const int r = l.k / 2;
    for (int t = 0; t < cot_out.t(); ++t)
        for (int y = 0; y < cot_out.h(); ++y)
            for (int x = 0; x < cot_out.w(); ++x)
                for (int co = 0; co < l.cout; ++co) {
                    const double g = cot_out(t, y, x, co);
                    if (g == 0.0) continue;
                    for (int ky = 0; ky < l.k; ++ky) {
                        const int sy = y + ky - r;
                        if (sy < 0 || sy >= in_h) continue;
                        for (int kx = 0; kx < l.k; ++kx) {
                            const int sx = x + kx - r;
                            if (sx < 0 || sx >= in_w) continue;
                            for (int ci = 0; ci < l.cin; ++ci)
                                cot_in(t, sy, sx, ci) += l.at(co, ci, ky, kx) * g;
                        }
                    }
                }
    return cot_in;
}

Tensor down2(const Tensor& in) {
    if (in.h() % 2 || in.w() % 2)
        throw std::invalid_argument("rbn: spatial dims must be even to pool");
    Tensor out(in.t(), in.h() / 2, in.w() / 2, in.c());
    for (int t = 0; t < out.t(); ++t)
        for (int y = 0; y < out.h(); ++y)
            for (int x = 0; x < out.w(); ++x)
                for (int c = 0; c < out.c(); ++c)
                    out(t, y, x, c) = 0.25 * (in(t, 2 * y, 2 * x, c) + in(t, 2 * y, 2 * x + 1, c) +
                                              in(t, 2 * y + 1, 2 * x, c) + in(t, 2 * y + 1, 2 * x + 1, c));
    return out;
}

Tensor down2_bwd(const Tensor& cot_out) {
    Tensor cot_in(cot_out.t(), cot_out.h() * 2, cot_out.w() * 2, cot_out.c());
    for (int t = 0; t < cot_out.t(); ++t)
        for (int y = 0; y < cot_out.h(); ++y)
            for (int x = 0; x < cot_out.w(); ++x)
                for (int c = 0; c < cot_out.c(); ++c) {
                    const double g = 0.25 * cot_out(t, y, x, c);
                    cot_in(t, 2 * y, 2 * x, c) = g;
                    cot_in(t, 2 * y, 2 * x + 1, c) = g;
                    cot_in(t, 2 * y + 1, 2 * x, c) = g;
                    cot_in(t, 2 * y + 1, 2 * x + 1, c) = g;
                }
    return cot_in;
}

Tensor up2(const Tensor& in) {  // nearest neighbour
    Tensor out(in.t(), in.h() * 2, in.w() * 2, in.c());
    for (int t = 0; t < out.t(); ++t)
        for (int y = 0; y < out.h(); ++y)
            for (int x = 0; x < out.w(); ++x)
                for (int c = 0; c < out.c(); ++c) out(t, y, x, c) = in(t, y / 2, x / 2, c);
    return out;
}

Tensor up2_bwd(const Tensor& cot_out) {
    Tensor cot_in(cot_out.t(), cot_out.h() / 2, cot_out.w() / 2, cot_out.c());
    for (int t = 0; t < cot_out.t(); ++t)
        for (int y = 0; y < cot_out.h(); ++y)
            for (int x = 0; x < cot_out.w(); ++x)
                for (int c = 0; c < cot_out.c(); ++c)
                    cot_in(t, y / 2, x / 2, c) += cot_out(t, y, x, c);
    return cot_in;
}

Tensor map_silu(const Tensor& in) {
    Tensor out(in.t(), in.h(), in.w(), in.c());
    for (size_t i = 0; i < in.size(); ++i) out.raw()[i] = silu(in.raw()[i]);
    return out;
}

Tensor silu_bwd(const Tensor& pre, const Tensor& cot) {
    Tensor out(pre.t(), pre.h(), pre.w(), pre.c());
    for (size_t i = 0; i < pre.size(); ++i) out.raw()[i] = cot.raw()[i] * silu_grad(pre.raw()[i]);
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    Tensor out(a.t(), a.h(), a.w(), a.c());
    for (size_t i = 0; i < a.size(); ++i) out.raw()[i] = a.raw()[i] * b.raw()[i];
    return out;
}

void add_into(Tensor& dst, const Tensor& src) {
    for (size_t i = 0; i < dst.size(); ++i) dst.raw()[i] += src.raw()[i];
}

// Everything the backward pass needs, by level (1 = full resolution).
struct Trace {
    Tensor x0;                         // warped frame
    std::array<Tensor, 4> p, m;        // modulator pre-acts / maps
    std::array<Tensor, 4> z, f, g;     // encoder pre-acts / acts / modulated
    std::array<Tensor, 3> wv, u;       // decoder pre-acts / acts (index 0 = level 3)
};

Tensor forward_impl(const Tensor& x0, const Tensor& latent, const RbnWeights& w,
                    Trace* trace) {
    // modulator pyramid
    Tensor cur = latent;
    std::array<Tensor, 4> m;
    for (int i = 0; i < 4; ++i) {
        Tensor p = conv_fwd(cur, w.mod[i]);
        m[i] = map_silu(p);
        if (trace) {
            trace->p[i] = p;
            trace->m[i] = m[i];
        }
        if (i < 3) cur = down2(m[i]);
    }
    // encoder
    Tensor d = x0;
    std::array<Tensor, 4> g;
    for (int i = 0; i < 4; ++i) {
        Tensor z = conv_fwd(d, w.enc[i]);
        Tensor f = map_silu(z);
        g[i] = mul(f, m[i]);
        if (trace) {
            trace->z[i] = z;
            trace->f[i] = f;
            trace->g[i] = g[i];
        }
        if (i < 3) d = down2(g[i]);
    }
    // decoder with skip additions
    Tensor u = g[3];
    for (int i = 0; i < 3; ++i) {
        Tensor wv = conv_fwd(up2(u), w.dec[i]);
        add_into(wv, g[2 - i]);
        u = map_silu(wv);
        if (trace) {
            trace->wv[i] = wv;
            trace->u[i] = u;
        }
    }
    Tensor out = conv_fwd(u, w.head);
    add_into(out, x0);
    return out;
}

}  // namespace

void RbnWeights::validate() const {
    if (image_channels < 1 || latent_channels < 1)
        throw std::invalid_argument("RbnWeights: channel counts must be >= 1");
    for (int v : widths)
        if (v < 1) throw std::invalid_argument("RbnWeights: widths must be >= 1");
    auto check = [](const ConvLayer& l, int cin, int cout, int k, const char* what) {
        if (l.cin != cin || l.cout != cout || l.k != k || l.w.size() != l.count())
            throw std::invalid_argument(std::string("RbnWeights: bad layer ") + what);
    };
    for (int i = 0; i < 4; ++i) {
        check(enc[i], i == 0 ? image_channels : widths[i - 1], widths[i], 3, "enc");
        check(mod[i], i == 0 ? latent_channels : widths[i - 1], widths[i], 1, "mod");
    }
    for (int i = 0; i < 3; ++i) check(dec[i], widths[3 - i], widths[2 - i], 3, "dec");
    check(head, widths[0], image_channels, 3, "head");
}

size_t RbnWeights::param_count() const {
    size_t n = head.count();
    for (const auto& l : enc) n += l.count();
    for (const auto& l : mod) n += l.count();
    for (const auto& l : dec) n += l.count();
    return n;
}

std::vector<double> RbnWeights::flatten() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    auto push = [&](const ConvLayer& l) { flat.insert(flat.end(), l.w.begin(), l.w.end()); };
    for (const auto& l : enc) push(l);
    for (const auto& l : mod) push(l);
    for (const auto& l : dec) push(l);
    push(head);
    return flat;
}

void RbnWeights::unflatten(const std::vector<double>& flat) {
    if (flat.size() != param_count())
        throw std::invalid_argument("RbnWeights::unflatten: wrong parameter count");
    size_t off = 0;
    auto pull = [&](ConvLayer& l) {
        l.w.assign(flat.begin() + off, flat.begin() + off + l.count());
        off += l.count();
    };
    for (auto& l : enc) pull(l);
    for (auto& l : mod) pull(l);
    for (auto& l : dec) pull(l);
    pull(head);
}

RbnWeights make_rbn_weights(int image_channels, int latent_channels,
                            std::array<int, 4> widths, uint64_t seed) {
    RbnWeights w;
    w.image_channels = image_channels;
    w.latent_channels = latent_channels;
    w.widths = widths;
    Rng rng(derive_seed(seed, 0x7262ULL));
    auto fill = [&](ConvLayer& l, int cin, int cout, int k) {
        l.cin = cin;
        l.cout = cout;
        l.k = k;
        l.w.assign(l.count(), 0.0);
        if (seed != 0) {
            const double scale = 0.6 / std::sqrt(static_cast<double>(cin) * k * k);
            for (double& v : l.w) v = scale * rng.next_gaussian();
        }
    };
    for (int i = 0; i < 4; ++i) {
        fill(w.enc[i], i == 0 ? image_channels : widths[i - 1], widths[i], 3);
        fill(w.mod[i], i == 0 ? latent_channels : widths[i - 1], widths[i], 1);
    }
    for (int i = 0; i < 3; ++i) fill(w.dec[i], widths[3 - i], widths[2 - i], 3);
    fill(w.head, widths[0], image_channels, 3);
    w.validate();
    return w;
}

void save_rbn_weights(const RbnWeights& w, const std::string& path_prefix) {
    w.validate();
    const auto flat = w.flatten();
    io::write_raw(path_prefix + ".tsm", {static_cast<uint32_t>(flat.size())}, flat);
    nlohmann::json meta{{"format", "rbn-1"},
                        {"image_channels", w.image_channels},
                        {"latent_channels", w.latent_channels},
                        {"widths", w.widths},
                        {"param_count", flat.size()}};
    std::ofstream f(path_prefix + ".json", std::ios::trunc);
    if (!f) throw std::runtime_error("save_rbn_weights: cannot open " + path_prefix + ".json");
    f << meta.dump(2) << "\n";
}

RbnWeights load_rbn_weights(const std::string& path_prefix) {
    std::ifstream f(path_prefix + ".json");
    if (!f) throw std::runtime_error("load_rbn_weights: cannot open " + path_prefix + ".json");
    nlohmann::json meta = nlohmann::json::parse(f);
    if (meta.value("format", "") != "rbn-1")
        throw std::runtime_error("load_rbn_weights: unrecognized format tag");
    RbnWeights w = make_rbn_weights(meta.at("image_channels").get<int>(),
                                    meta.at("latent_channels").get<int>(),
                                    meta.at("widths").get<std::array<int, 4>>(), 0);
    auto [dims, data] = io::read_raw(path_prefix + ".tsm");
    if (dims.size() != 1 || data.size() != w.param_count())
        throw std::runtime_error("load_rbn_weights: payload does not match architecture");
    w.unflatten(data);
    w.lipschitz = estimate_latent_lipschitz(w);
    return w;
}

RbnResult rbn_forward_latent(const Tensor& image, const Tensor& tilt,
                             const Tensor& latent, const RbnWeights& w) {
    w.validate();
    if (image.h() % 8 || image.w() % 8 || image.h() < 8 || image.w() < 8)
        throw std::invalid_argument("rbn_forward: H and W must be multiples of 8");
    if (latent.c() != w.latent_channels || image.c() != w.image_channels)
        throw std::invalid_argument("rbn_forward: channel mismatch with weights");
    RbnResult r;
    r.warped = sim::warp(image, tilt);
    r.latent = latent;
    r.output = forward_impl(r.warped, latent, w, nullptr);
    return r;
}

RbnResult rbn_forward(const Tensor& image, const lpd::LatentPhaseDistortion& d,
                      const RbnWeights& w, uint64_t seed) {
    d.validate();
    return rbn_forward_latent(image, d.tilt, lpd::sample_latent(d.mu, d.log_sigma, seed), w);
}

RbnVjp rbn_vjp(const Tensor& image, const Tensor& tilt, const Tensor& latent,
               const RbnWeights& w, const Tensor& cot_out) {
    w.validate();
    Trace tr;
    tr.x0 = sim::warp(image, tilt);
    forward_impl(tr.x0, latent, w, &tr);
    require_same_shape(cot_out, tr.x0, "rbn_vjp");

    Tensor cot_x0 = cot_out;  // residual connection
    // decoder backward (output head, then levels 1..3 of the up path)
    std::array<Tensor, 4> cot_g;
    Tensor cot_u = conv_bwd(cot_out, w.head, tr.u[2].h(), tr.u[2].w());
    for (int i = 2; i >= 0; --i) {
        Tensor cot_wv = silu_bwd(tr.wv[i], cot_u);
        cot_g[2 - i] = cot_wv;  // skip addition
        Tensor prev = up2_bwd(conv_bwd(cot_wv, w.dec[i], tr.wv[i].h(), tr.wv[i].w()));
        if (i == 0)
            cot_g[3] = std::move(prev);
        else
            cot_u = std::move(prev);
    }
    // encoder backward, coarse to fine; cot_g[i-1] picks up the pooled path
    std::array<Tensor, 4> cot_m;
    for (int i = 3; i >= 0; --i) {
        cot_m[i] = mul(cot_g[i], tr.f[i]);
        Tensor cot_z = silu_bwd(tr.z[i], mul(cot_g[i], tr.m[i]));
        Tensor cot_d = conv_bwd(cot_z, w.enc[i], tr.z[i].h(), tr.z[i].w());
        if (i == 0)
            add_into(cot_x0, cot_d);
        else
            add_into(cot_g[i - 1], down2_bwd(cot_d));
    }
    // modulator backward
    Tensor cot_latent;
    for (int i = 3; i >= 0; --i) {
        Tensor cot_p = silu_bwd(tr.p[i], cot_m[i]);
        Tensor cot_in = conv_bwd(cot_p, w.mod[i], tr.p[i].h(), tr.p[i].w());
        if (i == 0)
            cot_latent = std::move(cot_in);
        else
            add_into(cot_m[i - 1], down2_bwd(cot_in));
    }

    auto wv = sim::warp_vjp(image, tilt, cot_x0);
    return RbnVjp{std::move(wv.cot_image), std::move(wv.cot_tilt), std::move(cot_latent)};
}

LatentStatsVjp latent_stats_vjp(const Tensor& cot_latent, const Tensor& latent,
                                const Tensor& mu) {
    require_same_shape(cot_latent, latent, "latent_stats_vjp");
    require_same_shape(latent, mu, "latent_stats_vjp");
    LatentStatsVjp v{cot_latent, Tensor(mu.t(), mu.h(), mu.w(), mu.c())};
    for (size_t i = 0; i < mu.size(); ++i)
        v.cot_log_sigma.raw()[i] = cot_latent.raw()[i] * (latent.raw()[i] - mu.raw()[i]);
    return v;
}

double estimate_latent_lipschitz(const RbnWeights& w, int grid, int probes, uint64_t seed) {
    const int H = grid, W = grid;
    Tensor zero_tilt(1, H, W, 2);
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        Rng rng(derive_seed(seed, 0x4c6970ULL, static_cast<uint64_t>(p)));
        Tensor img(1, H, W, w.image_channels);
        for (double& v : img.raw()) v = rng.next_unit();
        Tensor a(1, H, W, w.latent_channels), da(1, H, W, w.latent_channels);
        double norm2 = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            a.raw()[i] = 0.5 * rng.next_gaussian();
            da.raw()[i] = rng.next_gaussian();
            norm2 += da.raw()[i] * da.raw()[i];
        }
        const double step = 1e-3 / std::sqrt(norm2);
        Tensor a2 = a;
        for (size_t i = 0; i < a.size(); ++i) a2.raw()[i] += step * da.raw()[i];
        const Tensor y0 = rbn_forward_latent(img, zero_tilt, a, w).output;
        const Tensor y1 = rbn_forward_latent(img, zero_tilt, a2, w).output;
        double diff2 = 0.0;
        for (size_t i = 0; i < y0.size(); ++i) {
            const double d = y1.raw()[i] - y0.raw()[i];
            diff2 += d * d;
        }
        worst = std::max(worst, std::sqrt(diff2) / 1e-3);
    }
    return worst;
}

}  // namespace turbmt::rbn
