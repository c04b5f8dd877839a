#include "turbmt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "turbmt/degrade.hpp"
#include "turbmt/field.hpp"
#include "turbmt/psf_basis.hpp"
#include "turbmt/rng.hpp"
#include "turbmt/ssm.hpp"
#include "turbmt/zernike.hpp"

namespace turbmt::bench {

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

double time_call(const std::function<void()>& fn, double min_total) {
    std::vector<double> samples;
    double total = 0.0;
    do {
        const double t0 = now_s();
        fn();
        const double dt = now_s() - t0;
        samples.push_back(dt);
        total += dt;
    } while (total < min_total && samples.size() < 64);
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(points.size());
    for (const auto& [x, y] : points) {
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

DegradeBench bench_degrade(int size, int rank, int kernel_size, uint64_t seed) {
    DegradeBench r;
    r.size = size;
    r.rank = rank;
    r.kernel_size = kernel_size;

    const int modes = 14;
    auto zbasis = zernike::build_zernike_basis(modes + 1, 128);

    field::FieldCovarianceSpec spec;
    spec.per_mode_variance.assign(modes + 1, 0.05);
    spec.kernel_size_norm = field::norm_from_kernel_size(kernel_size);
    auto fld = field::sample_zernike_field(spec, 1, size, size, modes + 1, seed);

    auto psf_basis = sim::build_psf_basis({fld}, zbasis, rank, derive_seed(seed, 1));

    Rng rng(derive_seed(seed, 2));
    Tensor img(1, size, size, 1);
    for (double& v : img.raw()) v = rng.next_unit();

    r.lowrank_seconds = time_call(
        [&] { (void)sim::degrade(img, fld, zbasis, psf_basis, 0.0, seed); });
    r.direct_seconds = time_call(
        [&] { (void)sim::degrade_direct(img, fld, zbasis, 0.0, seed); }, 0.0);
    r.speedup = r.direct_seconds / r.lowrank_seconds;
    return r;
}

ScalingBench bench_scaling(uint64_t seed, int scan_lo, int scan_hi, int attn_lo,
                           int attn_hi) {
    ScalingBench out;
    Rng rng(derive_seed(seed, 3));

    const int N = 8;
    {
        const int L_max = 1 << scan_hi;
        // one parameter set, reused as a prefix for every ladder length
        std::vector<ssm::StepParams> params(L_max);
        for (auto& p : params) {
            p.a_bar.resize(N);
            p.b_bar.resize(N);
            p.c.resize(N);
            for (int i = 0; i < N; ++i) {
                p.a_bar[i] = 0.3 + 0.65 * rng.next_unit();
                p.b_bar[i] = rng.next_gaussian();
                p.c[i] = rng.next_gaussian();
            }
            p.d = 0.5;
        }
        std::vector<double> x(L_max);
        for (double& v : x) v = rng.next_gaussian();

        std::vector<std::pair<double, double>> pts;
        for (int p = scan_lo; p <= scan_hi; ++p) {
            const int L = 1 << p;
            std::vector<ssm::StepParams> sub(params.begin(), params.begin() + L);
            const double t = time_call([&] {
                (void)ssm::parallel_scan(sub, std::span<const double>(x.data(), L));
            }, 0.2);
            out.rows.push_back({"scan", L, t});
            pts.emplace_back(L, t);
        }
        out.scan_slope = fit_loglog_slope(pts);
    }
    {
        std::vector<double> x(1 << attn_hi);
        for (double& v : x) v = rng.next_gaussian();
        std::vector<std::pair<double, double>> pts;
        for (int p = attn_lo; p <= attn_hi; ++p) {
            const int L = 1 << p;
            const double t = time_call([&] {
                (void)ssm::attention_baseline(std::span<const double>(x.data(), L));
            }, 0.2);
            out.rows.push_back({"attention", L, t});
            pts.emplace_back(L, t);
        }
        out.attention_slope = fit_loglog_slope(pts);
    }
    return out;
}

}  // namespace turbmt::bench
