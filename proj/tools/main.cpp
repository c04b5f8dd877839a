// turbmt command line front end.
//
// Exit codes: 0 ok, 1 check failure, 2 unreadable input, 3 invalid config,
// 4 divergence during inversion.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef TURBMT_HAVE_OPENMP
#include <omp.h>
#endif

#include "turbmt/bench.hpp"
#include "turbmt/config.hpp"
#include "turbmt/degrade.hpp"
#include "turbmt/field.hpp"
#include "turbmt/losses.hpp"
#include "turbmt/lpd.hpp"
#include "turbmt/png_io.hpp"
#include "turbmt/psf_basis.hpp"
#include "turbmt/rbn.hpp"
#include "turbmt/rng.hpp"
#include "turbmt/scan_order.hpp"
#include "turbmt/selfcheck.hpp"
#include "turbmt/ssm.hpp"
#include "turbmt/tensor_io.hpp"
#include "turbmt/warp.hpp"
#include "turbmt/zernike.hpp"

namespace fs = std::filesystem;
using namespace turbmt;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitBadConfig = 3;
constexpr int kExitDiverged = 4;

void apply_thread_override() {
#ifdef TURBMT_HAVE_OPENMP
    if (const char* env = std::getenv("TURBMT_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
#endif
}

Tensor synthetic_sequence(int T, int H, int W, uint64_t seed) {
    // Smooth deterministic test pattern with enough texture for warping to be
    // observable everywhere.
    Tensor out(T, H, W, 1);
    Rng rng(derive_seed(seed, 0x73796eULL));
    const double ph1 = rng.next_unit() * 6.28, ph2 = rng.next_unit() * 6.28;
    for (int t = 0; t < T; ++t)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const double fy = static_cast<double>(y) / H, fx = static_cast<double>(x) / W;
                double v = 0.5 + 0.2 * std::sin(9.0 * fx * 6.28 + ph1 + 0.08 * t) *
                                     std::cos(7.0 * fy * 6.28 + ph2) +
                           0.15 * std::sin((fx + fy) * 23.0 + 0.05 * t) +
                           0.1 * std::cos(fx * 41.0) * std::sin(fy * 37.0);
                out(t, y, x, 0) = std::clamp(v, 0.0, 1.0);
            }
    return out;
}

// Loads a PNG file, a directory of PNG frames, or a TSM1 tensor.
Tensor load_input(const fs::path& path) {
    if (fs::is_directory(path)) {
        std::vector<fs::path> frames;
        for (const auto& e : fs::directory_iterator(path))
            if (e.path().extension() == ".png") frames.push_back(e.path());
        if (frames.empty()) throw std::runtime_error("no .png frames in " + path.string());
        std::sort(frames.begin(), frames.end());
        Tensor first = io::read_png(frames[0]);
        Tensor seq(static_cast<int>(frames.size()), first.h(), first.w(), first.c());
        for (size_t t = 0; t < frames.size(); ++t) {
            Tensor f = io::read_png(frames[t]);
            if (f.h() != first.h() || f.w() != first.w() || f.c() != first.c())
                throw std::runtime_error("frame size mismatch at " + frames[t].string());
            std::copy(f.raw().begin(), f.raw().end(),
                      seq.raw().begin() + static_cast<long>(t) * f.size());
        }
        return seq;
    }
    if (path.extension() == ".png") return io::read_png(path);
    return io::read_tensor(path);
}

int cmd_simulate(const std::string& config_path, const std::string& input_path,
                 const std::string& out_dir, int64_t seed_override, bool self_check) {
    cfg::RunConfig cfg;
    try {
        cfg = cfg::load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    auto& tc = cfg.turbulence;
    if (seed_override >= 0) tc.seed = static_cast<uint64_t>(seed_override);
    if (tc.height > 512 || tc.width > 512 || tc.frames > 32) {
        std::cerr << "error: config: dims exceed the CLI size caps (512x512, 32 frames)\n";
        return kExitBadConfig;
    }

    Tensor input;
    try {
        input = input_path.empty()
                    ? synthetic_sequence(tc.frames, tc.height, tc.width, tc.seed)
                    : load_input(input_path);
    } catch (const std::exception& e) {
        std::cerr << "error: input: " << e.what() << "\n";
        return kExitBadInput;
    }
    if (input.h() > 512 || input.w() > 512 || input.t() > 32) {
        std::cerr << "error: input exceeds the CLI size caps\n";
        return kExitBadInput;
    }
    if (input.h() % 2 || input.w() % 2) {
        std::cerr << "error: input dims must be even\n";
        return kExitBadInput;
    }

    const int modes = tc.modes;
    auto zbasis = zernike::build_zernike_basis(modes + 1, tc.basis_grid);

    field::FieldCovarianceSpec spec;
    spec.per_mode_variance = cfg.mode_variance_vector();
    spec.per_mode_variance.push_back(0.0);  // kernel-size channel
    spec.spatial_correlation_length = tc.spatial_correlation_length;
    spec.temporal_correlation = tc.temporal_correlation;
    spec.kernel_size_norm = tc.kernel_size_norm;
    auto fld = field::sample_zernike_field(spec, input.t(), input.h(), input.w(),
                                           modes + 1, tc.seed);

    auto basis = sim::build_psf_basis({fld}, zbasis, cfg.basis.rank,
                                      derive_seed(tc.seed, 0xba5e),
                                      tc.aperture_ratio);
    Tensor degraded = sim::degrade(input, fld, zbasis, basis, tc.noise_sigma, tc.seed);

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    io::write_tensor(out / "input.tsm", input);
    io::write_tensor(out / "degraded.tsm", degraded);
    io::write_tensor(out / "field.tsm", fld.coeffs);
    for (int t = 0; t < degraded.t(); ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "degraded_%03d.png", t);
        io::write_png_frame(out / name, degraded, t);
    }
    const double psnr_io = loss::psnr(input, degraded);
    nlohmann::json meta{{"frames", input.t()},
                        {"height", input.h()},
                        {"width", input.w()},
                        {"seed", tc.seed},
                        {"kernel_size", fld.kernel_size()},
                        {"basis_rank", basis.K},
                        {"basis_mean_recon_error", basis.mean_recon_error},
                        {"basis_worst_recon_error", basis.worst_recon_error},
                        {"psnr_input_vs_degraded", psnr_io}};
    std::ofstream mf(out / "metadata.json");
    mf << meta.dump(2) << "\n";
    std::cout << "simulate: wrote " << degraded.t() << " frames to " << out_dir
              << " (psnr " << psnr_io << " dB)\n";

    if (self_check) {
        bool zero_var = true;
        for (double v : cfg.mode_variance_vector()) zero_var = zero_var && v == 0.0;
        if (zero_var && tc.noise_sigma == 0.0 && psnr_io < 40.0) {
            std::cerr << "self-check failed: zero-variance run degraded the input ("
                      << psnr_io << " dB)\n";
            return kExitCheckFailed;
        }
        std::cout << "self-check: ok\n";
    }
    return 0;
}

int cmd_bench(const std::string& out_dir, int size, int rank, int kernel,
              int64_t seed, bool skip_degrade, bool quick) {
    std::ostringstream csv;
    csv << "series,param,value\n";
    if (!skip_degrade) {
        auto d = bench::bench_degrade(size, rank, kernel,
                                      seed >= 0 ? static_cast<uint64_t>(seed) : 7);
        csv << "degrade_lowrank_seconds," << d.size << "," << d.lowrank_seconds << "\n";
        csv << "degrade_direct_seconds," << d.size << "," << d.direct_seconds << "\n";
        csv << "degrade_speedup," << d.size << "," << d.speedup << "\n";
        std::cout << "degrade " << d.size << "x" << d.size << " K=" << d.rank
                  << " kernel=" << d.kernel_size << ": lowrank " << d.lowrank_seconds
                  << " s, direct " << d.direct_seconds << " s, speedup " << d.speedup
                  << "x\n";
    }
    auto s = quick ? bench::bench_scaling(11, 10, 16, 8, 11)
                   : bench::bench_scaling(11);
    for (const auto& r : s.rows) csv << r.series << "," << r.length << "," << r.seconds << "\n";
    csv << "slope,scan," << s.scan_slope << "\n";
    csv << "slope,attention," << s.attention_slope << "\n";
    std::cout << "scan slope " << s.scan_slope << ", attention slope "
              << s.attention_slope << "\n";

    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "bench.csv");
    f << csv.str();
    return 0;
}

int cmd_invert(const std::string& config_path, const std::string& degraded_path,
               const std::string& clean_path, const std::string& out_dir,
               int64_t seed_override, uint64_t weights_seed) {
    cfg::RunConfig cfg;
    try {
        cfg = cfg::load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    uint64_t seed = cfg.turbulence.seed;
    if (seed_override >= 0) seed = static_cast<uint64_t>(seed_override);

    Tensor degraded, clean;
    try {
        degraded = load_input(degraded_path);
        clean = load_input(clean_path);
    } catch (const std::exception& e) {
        std::cerr << "error: input: " << e.what() << "\n";
        return kExitBadInput;
    }
    if (!clean.same_shape(degraded)) {
        std::cerr << "error: clean and degraded shapes differ\n";
        return kExitBadInput;
    }
    if (clean.h() > 64 || clean.w() > 64 || clean.t() > 4 || clean.h() % 8 || clean.w() % 8) {
        std::cerr << "error: config: invert needs dims <= 64x64, T <= 4, multiples of 8\n";
        return kExitBadConfig;
    }

    auto w = rbn::make_rbn_weights(clean.c(), 1, {8, 12, 16, 16}, weights_seed);
    const int T = clean.t(), H = clean.h(), W = clean.w();
    Tensor tilt(T, H, W, 2), mu(T, H, W, 1), log_sigma(T, H, W, 1, -3.0);
    // one fixed noise draw so every step optimizes the same objective
    Tensor eps(T, H, W, 1);
    {
        Rng rng(derive_seed(seed, 0x657073ULL));
        for (double& v : eps.raw()) v = rng.next_gaussian();
    }
    auto make_latent = [&] {
        Tensor a = mu;
        for (size_t i = 0; i < a.size(); ++i)
            a.raw()[i] += std::exp(log_sigma.raw()[i]) * eps.raw()[i];
        return a;
    };
    auto objective = [&](const Tensor& out) {
        return loss::charbonnier(out, degraded) +
               cfg.loss.alpha_k * loss::kl_loss(mu, log_sigma);
    };

    double step = cfg.invert.step_size;
    std::ostringstream curve;
    curve << "step,loss,step_size\n";
    Tensor latent = make_latent();
    auto fwd = rbn::rbn_forward_latent(clean, tilt, latent, w);
    double prev = objective(fwd.output);
    double first = prev, last = prev;
    curve << 0 << "," << prev << "," << step << "\n";

    for (int it = 1; it <= cfg.invert.steps; ++it) {
        auto g_out = loss::charbonnier_grad(fwd.output, degraded);
        auto vjp = rbn::rbn_vjp(clean, tilt, latent, w, g_out);
        auto stats = rbn::latent_stats_vjp(vjp.cot_latent, latent, mu);
        auto klg = loss::kl_loss_grad(mu, log_sigma);

        Tensor tilt2 = tilt, mu2 = mu, ls2 = log_sigma;
        for (size_t i = 0; i < tilt.size(); ++i)
            tilt2.raw()[i] -= step * vjp.cot_tilt.raw()[i];
        for (size_t i = 0; i < mu.size(); ++i) {
            mu2.raw()[i] -= step * (stats.cot_mu.raw()[i] + cfg.loss.alpha_k * klg.d_mu.raw()[i]);
            ls2.raw()[i] -= step * (stats.cot_log_sigma.raw()[i] +
                                    cfg.loss.alpha_k * klg.d_log_sigma.raw()[i]);
        }
        Tensor tilt_save = tilt, mu_save = mu, ls_save = log_sigma;
        tilt = tilt2;
        mu = mu2;
        log_sigma = ls2;
        latent = make_latent();
        fwd = rbn::rbn_forward_latent(clean, tilt, latent, w);
        double cur = objective(fwd.output);
        if (!std::isfinite(cur)) {
            std::cerr << "error: loss diverged to non-finite at step " << it << "\n";
            return kExitDiverged;
        }
        if (cur > prev) {  // fixed step with halving on increase
            tilt = tilt_save;
            mu = mu_save;
            log_sigma = ls_save;
            latent = make_latent();
            fwd = rbn::rbn_forward_latent(clean, tilt, latent, w);
            step *= 0.5;
            cur = prev;
        }
        prev = cur;
        last = cur;
        curve << it << "," << cur << "," << step << "\n";
    }

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    std::ofstream cf(out / "convergence.csv");
    cf << curve.str();
    io::write_tensor(out / "tilt.tsm", tilt);
    io::write_tensor(out / "mu.tsm", mu);
    io::write_tensor(out / "log_sigma.tsm", log_sigma);
    std::cout << "invert: loss " << first << " -> " << last << " over "
              << cfg.invert.steps << " steps (ratio " << (last > 0 ? first / last : 0)
              << ")\n";
    if (last > 0.5 * first) {
        std::cerr << "warning: descent did not reach half the initial loss\n";
        return kExitCheckFailed;
    }
    return 0;
}

int cmd_check(const std::vector<std::string>& suites, const std::string& mutate) {
    if (suites.empty()) {
        std::cerr << "error: config: no check suites requested\n";
        return kExitBadConfig;
    }
    std::vector<check::CheckResult> results;
    try {
        for (const auto& s : suites) {
            auto r = (s == "all") ? check::run_all(mutate) : check::run_suite(s, mutate);
            results.insert(results.end(), r.begin(), r.end());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    bool all = true;
    std::cout << "suite,check,pass,detail\n";
    for (const auto& r : results) {
        std::cout << r.suite << "," << r.name << "," << (r.pass ? "pass" : "FAIL") << ",\""
                  << r.detail << "\"\n";
        all = all && r.pass;
    }
    std::cout << (all ? "all checks passed" : "CHECK FAILURES PRESENT") << "\n";
    return all ? 0 : kExitCheckFailed;
}

int cmd_scan_order_dump(const std::string& order_name, int T, int H, int W, int block,
                        const std::string& out_path) {
    scan::Order order;
    if (order_name == "space_first") order = scan::Order::SpaceFirst;
    else if (order_name == "time_first") order = scan::Order::TimeFirst;
    else if (order_name == "local_hilbert") order = scan::Order::LocalHilbert;
    else {
        std::cerr << "error: config: unknown order " << order_name << "\n";
        return kExitBadConfig;
    }
    scan::ScanPermutation perm;
    try {
        perm = scan::build_permutation(order, T, H, W, block);
    } catch (const std::exception& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kExitBadConfig;
    }
    std::ostringstream csv;
    csv << "seq_pos,t,y,x\n";
    for (size_t p = 0; p < perm.inverse.size(); ++p) {
        const int g = perm.inverse[p];
        csv << p << "," << g / (H * W) << "," << (g % (H * W)) / W << "," << g % W << "\n";
    }
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(out_path);
        f << csv.str();
    }
    return 0;
}

int cmd_ssm_check(int instances, int64_t seed_opt, const std::string& out_path) {
    const uint64_t seed = seed_opt >= 0 ? static_cast<uint64_t>(seed_opt) : 404;
    Rng rng(seed);
    std::ostringstream csv;
    csv << "instance,L,N,scan_rel_err,conv_rel_err,pass\n";
    bool all = true;
    for (int i = 0; i < instances; ++i) {
        const int L = 16 + static_cast<int>(rng.next_unit() * 496);
        const int N = 1 + static_cast<int>(rng.next_unit() * 15);
        std::vector<ssm::StepParams> params(L);
        for (auto& p : params) {
            p.a_bar.resize(N);
            p.b_bar.resize(N);
            p.c.resize(N);
            for (int j = 0; j < N; ++j) {
                p.a_bar[j] = 0.2 + 0.75 * rng.next_unit();
                p.b_bar[j] = rng.next_gaussian();
                p.c[j] = rng.next_gaussian();
            }
            p.d = rng.next_gaussian();
        }
        std::vector<double> x(L);
        for (double& v : x) v = rng.next_gaussian();
        auto ref = ssm::recurrence(params, x);
        auto fast = ssm::parallel_scan(params, x, 64);
        auto norm = [](std::span<const double> a, std::span<const double> b) {
            double n = 0, d = 0;
            for (size_t k = 0; k < a.size(); ++k) {
                n += (a[k] - b[k]) * (a[k] - b[k]);
                d += b[k] * b[k];
            }
            return std::sqrt(n) / std::max(std::sqrt(d), 1e-30);
        };
        const double scan_err = norm(fast, ref);
        std::vector<ssm::StepParams> ti(L, params[0]);
        auto conv = ssm::causal_conv(x, ssm::ssm_conv_kernel(params[0], L), params[0].d);
        const double conv_err = norm(conv, ssm::recurrence(ti, x));
        const bool pass = scan_err < 1e-6 && conv_err < 1e-6;
        all = all && pass;
        csv << i << "," << L << "," << N << "," << scan_err << "," << conv_err << ","
            << (pass ? "pass" : "FAIL") << "\n";
    }
    if (out_path.empty()) std::cout << csv.str();
    else {
        std::ofstream f(out_path);
        f << csv.str();
    }
    std::cout << (all ? "ssm-check: ok" : "ssm-check: FAILURES") << "\n";
    return all ? 0 : kExitCheckFailed;
}

int cmd_gen_weights(const std::string& out_prefix, uint64_t seed, int image_channels,
                    int latent_channels) {
    auto w = rbn::make_rbn_weights(image_channels, latent_channels, {8, 12, 16, 16}, seed);
    rbn::save_rbn_weights(w, out_prefix);
    const double lip = rbn::estimate_latent_lipschitz(w);
    std::cout << "gen-weights: wrote " << out_prefix << ".tsm/.json ("
              << w.param_count() << " params, latent Lipschitz est " << lip << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_override();
    CLI::App app{"turbulence degradation simulator and sequence-model toolkit"};
    app.require_subcommand(1);

    // simulate
    std::string sim_config, sim_input, sim_out = "out";
    int64_t sim_seed = -1;
    bool sim_self_check = false;
    auto* sim = app.add_subcommand("simulate", "sample a turbulence field and degrade a sequence");
    sim->add_option("--config", sim_config, "JSON config path")->required();
    sim->add_option("--input", sim_input, "PNG file, PNG directory, or .tsm tensor");
    sim->add_option("--out-dir", sim_out, "output directory");
    sim->add_option("--seed", sim_seed, "seed override");
    sim->add_flag("--self-check", sim_self_check, "assert the zero-variance identity");

    // bench
    std::string bench_out = "out";
    int bench_size = 128, bench_rank = 100, bench_kernel = 33;
    int64_t bench_seed = -1;
    bool bench_skip_degrade = false, bench_quick = false;
    auto* ben = app.add_subcommand("bench", "degrade speed and scan scaling benchmarks");
    ben->add_option("--out-dir", bench_out, "output directory");
    ben->add_option("--size", bench_size, "degrade benchmark image size");
    ben->add_option("--rank", bench_rank, "PSF basis rank");
    ben->add_option("--kernel", bench_kernel, "PSF kernel size");
    ben->add_option("--seed", bench_seed, "seed override");
    ben->add_flag("--skip-degrade", bench_skip_degrade, "only run the scaling ladders");
    ben->add_flag("--quick", bench_quick, "shorter ladders");

    // invert
    std::string inv_config, inv_degraded, inv_clean, inv_out = "out";
    int64_t inv_seed = -1;
    uint64_t inv_weights_seed = 0;
    auto* inv = app.add_subcommand("invert", "gradient-descent recovery of tilt and latent");
    inv->add_option("--config", inv_config, "JSON config path")->required();
    inv->add_option("--degraded", inv_degraded, "degraded input (.tsm or .png)")->required();
    inv->add_option("--clean", inv_clean, "clean input (.tsm or .png)")->required();
    inv->add_option("--out-dir", inv_out, "output directory");
    inv->add_option("--seed", inv_seed, "seed override");
    inv->add_option("--weights-seed", inv_weights_seed,
                    "network weight seed (0 = identity network)");

    // check
    std::vector<std::string> check_suites;
    std::string check_mutate;
    auto* chk = app.add_subcommand("check", "run the property suites");
    chk->add_option("--suite", check_suites, "suite name (repeatable) or 'all'");
    chk->add_option("--mutate", check_mutate, "inject a fault into the named suite");

    // scan-order dump
    auto* so = app.add_subcommand("scan-order", "scan order utilities");
    so->require_subcommand(1);
    std::string so_order = "space_first", so_out;
    int so_t = 2, so_h = 16, so_w = 16, so_block = 8;
    auto* sod = so->add_subcommand("dump", "dump a permutation as CSV");
    sod->add_option("--order", so_order, "space_first | time_first | local_hilbert");
    sod->add_option("--frames", so_t, "T");
    sod->add_option("--height", so_h, "H");
    sod->add_option("--width", so_w, "W");
    sod->add_option("--block", so_block, "Hilbert tile size");
    sod->add_option("--out", so_out, "output CSV path (stdout when omitted)");

    // ssm-check
    int ssm_instances = 50;
    int64_t ssm_seed = -1;
    std::string ssm_out;
    auto* ssc = app.add_subcommand("ssm-check", "scan vs recurrence consistency report");
    ssc->add_option("--instances", ssm_instances, "number of random systems");
    ssc->add_option("--seed", ssm_seed, "seed override");
    ssc->add_option("--out", ssm_out, "output CSV path (stdout when omitted)");

    // gen-weights
    std::string gw_out = "rbn_weights";
    uint64_t gw_seed = 42;
    int gw_img_c = 1, gw_lat_c = 1;
    auto* gw = app.add_subcommand("gen-weights", "generate and save network weights");
    gw->add_option("--out", gw_out, "output path prefix");
    gw->add_option("--seed", gw_seed, "weight seed (0 = identity)");
    gw->add_option("--image-channels", gw_img_c, "image channel count");
    gw->add_option("--latent-channels", gw_lat_c, "latent channel count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(sim_config, sim_input, sim_out, sim_seed, sim_self_check);
        if (ben->parsed())
            return cmd_bench(bench_out, bench_size, bench_rank, bench_kernel, bench_seed,
                             bench_skip_degrade, bench_quick);
        if (inv->parsed())
            return cmd_invert(inv_config, inv_degraded, inv_clean, inv_out, inv_seed,
                              inv_weights_seed);
        if (chk->parsed()) return cmd_check(check_suites, check_mutate);
        if (so->parsed())
            return cmd_scan_order_dump(so_order, so_t, so_h, so_w, so_block, so_out);
        if (ssc->parsed()) return cmd_ssm_check(ssm_instances, ssm_seed, ssm_out);
        if (gw->parsed()) return cmd_gen_weights(gw_out, gw_seed, gw_img_c, gw_lat_c);
    } catch (const cfg::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return 0;
}
