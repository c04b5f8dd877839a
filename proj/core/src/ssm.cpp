#include "turbmt/ssm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "turbmt/rng.hpp"

namespace turbmt::ssm {

double silu(double v) { return v / (1.0 + std::exp(-v)); }

namespace {

double softplus(double v) {
    if (v > 30.0) return v;
    return std::log1p(std::exp(v));
}

double silu_grad(double v) {
    const double s = 1.0 / (1.0 + std::exp(-v));
    return s * (1.0 + v * (1.0 - s));
}

void check_lengths(const std::vector<StepParams>& params, size_t lx) {
    if (params.size() != lx)
        throw std::invalid_argument("ssm: params/input length mismatch");
    for (const auto& p : params)
        if (p.a_bar.size() != p.b_bar.size() || p.a_bar.size() != p.c.size())
            throw std::invalid_argument("ssm: inconsistent state dims");
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>>
discretize_zoh(std::span<const double> a_diag, std::span<const double> b, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("discretize_zoh: delta must be > 0");
    if (a_diag.size() != b.size())
        throw std::invalid_argument("discretize_zoh: a/b length mismatch");
    const size_t n = a_diag.size();
    std::vector<double> a_bar(n), b_bar(n);
    for (size_t i = 0; i < n; ++i) {
        const double da = delta * a_diag[i];
        a_bar[i] = std::exp(da);
        // (da)^-1 (e^da - 1) * delta * b, with the A -> 0 limit = delta * b
        b_bar[i] = (std::abs(da) < 1e-9) ? delta * b[i]
                                         : (std::expm1(da) / da) * delta * b[i];
    }
    return {a_bar, b_bar};
}

std::vector<double> recurrence(const std::vector<StepParams>& params,
                               std::span<const double> x) {
    check_lengths(params, x.size());
    const size_t L = x.size();
    if (L == 0) return {};
    const size_t n = params[0].a_bar.size();
    std::vector<double> h(n, 0.0), y(L);
    for (size_t t = 0; t < L; ++t) {
        const StepParams& p = params[t];
        double out = p.d * x[t];
        for (size_t i = 0; i < n; ++i) {
            h[i] = p.a_bar[i] * h[i] + p.b_bar[i] * x[t];
            out += p.c[i] * h[i];
        }
        y[t] = out;
    }
    return y;
}

std::vector<double> parallel_scan(const std::vector<StepParams>& params,
                                  std::span<const double> x, int chunk) {
    check_lengths(params, x.size());
    if (chunk < 1) throw std::invalid_argument("parallel_scan: chunk >= 1");
    const size_t L = x.size();
    if (L == 0) return {};
    const size_t n = params[0].a_bar.size();

    std::vector<double> y(L);
    std::vector<double> carry(n, 0.0);  // state entering the current chunk
    // contiguous per-chunk staging so each StepParams is touched once per chunk
    std::vector<double> ag(n * static_cast<size_t>(chunk)), bg(n * static_cast<size_t>(chunk));
    std::vector<double> cg(n * static_cast<size_t>(chunk));

    for (size_t start = 0; start < L; start += chunk) {
        const size_t len = std::min<size_t>(chunk, L - start);
        for (size_t t = 0; t < len; ++t) {
            const StepParams& p = params[start + t];
            y[start + t] = p.d * x[start + t];
            for (size_t i = 0; i < n; ++i) {
                ag[i * len + t] = p.a_bar[i];
                bg[i * len + t] = p.b_bar[i] * x[start + t];
                cg[i * len + t] = p.c[i];
            }
        }

        for (size_t i = 0; i < n; ++i) {
            // elements of the scan monoid: (a, b) with h -> a*h + b
            double* a = ag.data() + i * len;
            double* b = bg.data() + i * len;
            const double* c = cg.data() + i * len;
            // Blelloch up-sweep (inclusive result reconstructed on down-sweep)
            size_t stride;
            for (stride = 1; stride < len; stride <<= 1) {
                for (size_t t = 2 * stride - 1; t < len; t += 2 * stride) {
                    // combine (t - stride) then t:  (a1,b1) o (a2,b2) = (a2 a1, a2 b1 + b2)
                    b[t] = a[t] * b[t - stride] + b[t];
                    a[t] = a[t] * a[t - stride];
                }
            }
            // down-sweep: propagate prefixes into the remaining slots
            for (stride >>= 1; stride >= 1; stride >>= 1) {
                for (size_t t = 3 * stride - 1; t < len; t += 2 * stride) {
                    b[t] = a[t] * b[t - stride] + b[t];
                    a[t] = a[t] * a[t - stride];
                }
                if (stride == 1) break;
            }
            // fold in the carry from previous chunks and emit
            for (size_t t = 0; t < len; ++t) {
                const double h = a[t] * carry[i] + b[t];
                y[start + t] += c[t] * h;
                if (t + 1 == len) carry[i] = h;
            }
        }
    }
    return y;
}

std::vector<double> ssm_conv_kernel(const StepParams& p, int L) {
    const size_t n = p.a_bar.size();
    std::vector<double> k(L, 0.0);
    std::vector<double> pow_b = p.b_bar;  // A_bar^t * B_bar
    for (int t = 0; t < L; ++t) {
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) acc += p.c[i] * pow_b[i];
        k[t] = acc;
        for (size_t i = 0; i < n; ++i) pow_b[i] *= p.a_bar[i];
    }
    return k;
}

std::vector<double> causal_conv(std::span<const double> x,
                                std::span<const double> kernel, double d) {
    std::vector<double> y(x.size(), 0.0);
    for (size_t t = 0; t < x.size(); ++t) {
        double acc = d * x[t];
        const size_t kmax = std::min(t + 1, kernel.size());
        for (size_t k = 0; k < kmax; ++k) acc += kernel[k] * x[t - k];
        y[t] = acc;
    }
    return y;
}

std::vector<double> AffineMap::apply(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != in_dim)
        throw std::invalid_argument("AffineMap: input dim mismatch");
    std::vector<double> out(bias.begin(), bias.end());
    for (int o = 0; o < out_dim; ++o) {
        const double* row = weight.data() + static_cast<size_t>(o) * in_dim;
        double acc = 0.0;
        for (int i = 0; i < in_dim; ++i) acc += row[i] * v[i];
        out[o] += acc;
    }
    return out;
}

AffineMap AffineMap::zeros(int in_dim, int out_dim) {
    AffineMap m;
    m.in_dim = in_dim;
    m.out_dim = out_dim;
    m.weight.assign(static_cast<size_t>(in_dim) * out_dim, 0.0);
    m.bias.assign(out_dim, 0.0);
    return m;
}

AffineMap AffineMap::random(int in_dim, int out_dim, uint64_t seed, double scale) {
    AffineMap m = zeros(in_dim, out_dim);
    Rng rng(derive_seed(seed, 0xaff1));
    const double s = scale / std::sqrt(static_cast<double>(in_dim));
    for (double& w : m.weight) w = s * rng.next_gaussian();
    for (double& b : m.bias) b = 0.1 * scale * rng.next_gaussian();
    return m;
}

std::vector<StepParams> selective_params(const std::vector<std::vector<double>>& x,
                                         const SelectiveProjections& proj,
                                         const std::vector<std::vector<double>>* guidance) {
    const int n = proj.state_dim;
    if (static_cast<int>(proj.a_diag.size()) != n)
        throw std::invalid_argument("selective_params: a_diag dim mismatch");
    if (guidance && guidance->size() != x.size())
        throw std::invalid_argument("selective_params: guidance token count mismatch");
    if (guidance && (!proj.g_delta || !proj.g_b || !proj.g_c))
        throw std::invalid_argument("selective_params: guidance given but no guidance maps");

    std::vector<StepParams> out(x.size());
    for (size_t t = 0; t < x.size(); ++t) {
        auto dv = proj.s_delta.apply(x[t]);
        auto bv = proj.s_b.apply(x[t]);
        auto cv = proj.s_c.apply(x[t]);
        if (guidance) {
            const auto gd = proj.g_delta->apply((*guidance)[t]);
            const auto gb = proj.g_b->apply((*guidance)[t]);
            const auto gc = proj.g_c->apply((*guidance)[t]);
            for (size_t i = 0; i < dv.size(); ++i) dv[i] += gd[i];
            for (size_t i = 0; i < bv.size(); ++i) bv[i] += gb[i];
            for (size_t i = 0; i < cv.size(); ++i) cv[i] += gc[i];
        }
        if (static_cast<int>(bv.size()) != n || static_cast<int>(cv.size()) != n || dv.size() != 1)
            throw std::invalid_argument("selective_params: projection output dims");
        const double delta = softplus(dv[0]);
        auto [a_bar, b_bar] = discretize_zoh(proj.a_diag, bv, delta);
        out[t] = StepParams{std::move(a_bar), std::move(b_bar), std::move(cv), proj.d};
    }
    return out;
}

namespace {

double gate_preact(const std::vector<std::vector<double>>& x_gate, size_t t,
                   const GateParams& gp,
                   const std::vector<std::vector<double>>* guidance) {
    double pre = gp.gate.apply(x_gate[t])[0];
    if (guidance) {
        if (!gp.guide) throw std::invalid_argument("gated_output: guidance given but no map");
        pre *= gp.guide->apply((*guidance)[t])[0];
    }
    return pre;
}

}  // namespace

std::vector<double> gated_output(std::span<const double> y,
                                 const std::vector<std::vector<double>>& x_gate,
                                 const GateParams& gp,
                                 const std::vector<std::vector<double>>* guidance) {
    if (y.size() != x_gate.size())
        throw std::invalid_argument("gated_output: token layout mismatch");
    if (guidance && guidance->size() != y.size())
        throw std::invalid_argument("gated_output: guidance token count mismatch");
    std::vector<double> out(y.size());
    for (size_t t = 0; t < y.size(); ++t)
        out[t] = y[t] * silu(gate_preact(x_gate, t, gp, guidance));
    return out;
}

GatedVjp gated_output_vjp(std::span<const double> y,
                          const std::vector<std::vector<double>>& x_gate,
                          const GateParams& gp,
                          const std::vector<std::vector<double>>* guidance,
                          std::span<const double> cot_out) {
    if (cot_out.size() != y.size())
        throw std::invalid_argument("gated_output_vjp: cotangent size mismatch");
    GatedVjp vjp;
    vjp.cot_y.resize(y.size());
    vjp.cot_x_gate.assign(y.size(), std::vector<double>(gp.gate.in_dim, 0.0));
    for (size_t t = 0; t < y.size(); ++t) {
        const double pre = gate_preact(x_gate, t, gp, guidance);
        vjp.cot_y[t] = cot_out[t] * silu(pre);
        double dpre = cot_out[t] * y[t] * silu_grad(pre);
        if (guidance) dpre *= gp.guide->apply((*guidance)[t])[0];
        for (int i = 0; i < gp.gate.in_dim; ++i)
            vjp.cot_x_gate[t][i] = dpre * gp.gate.weight[i];
    }
    return vjp;
}

std::vector<double> bidirectional_ssm(std::span<const double> x,
                                      const std::vector<StepParams>& params_fwd,
                                      const std::vector<StepParams>& params_bwd) {
    if (params_fwd.size() != x.size() || params_bwd.size() != x.size())
        throw std::invalid_argument("bidirectional_ssm: length mismatch");
    std::vector<double> xr(x.rbegin(), x.rend());
    std::vector<double> yf = parallel_scan(params_fwd, x);
    std::vector<double> yb = parallel_scan(params_bwd, xr);
    for (size_t t = 0; t < x.size(); ++t) yf[t] += yb[x.size() - 1 - t];
    return yf;
}

std::vector<double> attention_baseline(std::span<const double> x) {
    const size_t L = x.size();
    std::vector<double> y(L, 0.0);
    for (size_t i = 0; i < L; ++i) {
        double norm = 0.0, acc = 0.0;
        for (size_t j = 0; j < L; ++j) {
            const double w = 1.0 / (1.0 + (x[i] - x[j]) * (x[i] - x[j]));
            norm += w;
            acc += w * x[j];
        }
        y[i] = acc / norm;
    }
    return y;
}

}  // namespace turbmt::ssm
