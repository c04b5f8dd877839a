#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "turbmt/lpd.hpp"
#include "turbmt/rbn.hpp"
#include "turbmt/rng.hpp"
#include "turbmt/warp.hpp"

using namespace turbmt;

TEST_CASE("latent sampling is deterministic and reparameterized") {
    Tensor mu(1, 4, 4, 2), ls(1, 4, 4, 2);
    Rng rng(1);
    for (double& v : mu.raw()) v = rng.next_gaussian();
    auto a1 = lpd::sample_latent(mu, ls, 5);
    auto a2 = lpd::sample_latent(mu, ls, 5);
    auto a3 = lpd::sample_latent(mu, ls, 6);
    CHECK(a1.raw() == a2.raw());
    CHECK(a1.raw() != a3.raw());

    // shifting mu shifts the draw exactly (same eps)
    Tensor mu2 = mu;
    for (double& v : mu2.raw()) v += 0.7;
    auto a4 = lpd::sample_latent(mu2, ls, 5);
    for (size_t i = 0; i < a1.size(); ++i)
        CHECK(a4.raw()[i] == doctest::Approx(a1.raw()[i] + 0.7).epsilon(1e-12));

    // log_sigma -> -inf direction: sigma scales the spread around mu
    Tensor tiny(1, 4, 4, 2, -40.0);
    auto a5 = lpd::sample_latent(mu, tiny, 5);
    for (size_t i = 0; i < a5.size(); ++i)
        CHECK(a5.raw()[i] == doctest::Approx(mu.raw()[i]).epsilon(1e-12));
}

TEST_CASE("lpd validation catches malformed fields") {
    lpd::LatentPhaseDistortion d;
    d.tilt = Tensor(1, 8, 8, 2);
    d.mu = Tensor(1, 8, 8, 1);
    d.log_sigma = Tensor(1, 8, 8, 1);
    CHECK_NOTHROW(d.validate());
    d.tilt = Tensor(1, 8, 8, 3);
    CHECK_THROWS(d.validate());
    d.tilt = Tensor(1, 8, 8, 2);
    d.log_sigma = Tensor(1, 8, 4, 1);
    CHECK_THROWS(d.validate());
    d.log_sigma = Tensor(1, 8, 8, 1);
    d.log_sigma.raw()[3] = std::nan("");
    CHECK_THROWS(d.validate());
}

TEST_CASE("modulate multiplies per scale and its vjp is exact") {
    Tensor f(1, 2, 2, 1), m(1, 2, 2, 1);
    f(0, 0, 0, 0) = 2.0;
    m(0, 0, 0, 0) = 3.0;
    f(0, 1, 1, 0) = -1.5;
    m(0, 1, 1, 0) = 0.5;
    auto out = lpd::modulate({f}, {m});
    CHECK(out[0](0, 0, 0, 0) == 6.0);
    CHECK(out[0](0, 1, 1, 0) == -0.75);

    Tensor cot(1, 2, 2, 1, 1.0);
    auto vjp = lpd::modulate_vjp({f}, {m}, {cot});
    CHECK(vjp.cot_features[0](0, 0, 0, 0) == 3.0);
    CHECK(vjp.cot_mods[0](0, 0, 0, 0) == 2.0);

    CHECK_THROWS(lpd::modulate({f}, {}));
}

TEST_CASE("zero weights make the network an exact identity on the warped frame") {
    auto w = rbn::make_rbn_weights(1, 1, {8, 12, 16, 16}, 0);
    Rng rng(9);
    Tensor img(2, 16, 16, 1), tilt(2, 16, 16, 2), latent(2, 16, 16, 1);
    for (double& v : img.raw()) v = rng.next_unit();
    for (double& v : tilt.raw()) v = 0.5 * rng.next_gaussian();
    for (double& v : latent.raw()) v = rng.next_gaussian();
    auto r = rbn::rbn_forward_latent(img, tilt, latent, w);
    CHECK(r.output.raw() == r.warped.raw());
    CHECK(r.warped.raw() == sim::warp(img, tilt).raw());
}

TEST_CASE("an all-zero latent leaves the warped frame untouched, exactly") {
    auto w = rbn::make_rbn_weights(1, 1, {8, 12, 16, 16}, 1234);  // non-trivial weights
    Rng rng(10);
    Tensor img(1, 24, 24, 1), tilt(1, 24, 24, 2), latent(1, 24, 24, 1);
    for (double& v : img.raw()) v = rng.next_unit();
    for (double& v : tilt.raw()) v = 0.3 * rng.next_gaussian();
    auto r = rbn::rbn_forward_latent(img, tilt, latent, w);
    CHECK(r.output.raw() == r.warped.raw());

    // and a non-zero latent does change the output
    for (double& v : latent.raw()) v = 0.5;
    auto r2 = rbn::rbn_forward_latent(img, tilt, latent, w);
    CHECK(r2.output.raw() != r.output.raw());
}

TEST_CASE("forward rejects sizes that do not pool cleanly") {
    auto w = rbn::make_rbn_weights(1, 1, {4, 4, 4, 4}, 3);
    Tensor img(1, 20, 16, 1), tilt(1, 20, 16, 2), latent(1, 20, 16, 1);
    CHECK_THROWS(rbn::rbn_forward_latent(img, tilt, latent, w));  // 20 % 8 != 0
}

TEST_CASE("latent and tilt vjps match finite differences") {
    auto w = rbn::make_rbn_weights(1, 1, {4, 6, 8, 8}, 77);
    Rng rng(12);
    const int H = 16, W = 16;
    Tensor img(1, H, W, 1), tilt(1, H, W, 2), latent(1, H, W, 1), cot(1, H, W, 1);
    for (double& v : img.raw()) v = rng.next_unit();
    for (double& v : tilt.raw()) v = 0.3 * rng.next_gaussian();
    for (double& v : latent.raw()) v = 0.4 * rng.next_gaussian();
    for (double& v : cot.raw()) v = rng.next_gaussian();
    auto vjp = rbn::rbn_vjp(img, tilt, latent, w, cot);
    auto score = [&](const Tensor& t2, const Tensor& l2) {
        auto out = rbn::rbn_forward_latent(img, t2, l2, w).output;
        double s = 0;
        for (size_t i = 0; i < out.size(); ++i) s += cot.raw()[i] * out.raw()[i];
        return s;
    };
    for (int probe = 0; probe < 5; ++probe) {
        const size_t i = (probe * 83 + 17) % latent.size();
        Tensor lp = latent, lm = latent;
        lp.raw()[i] += 1e-5;
        lm.raw()[i] -= 1e-5;
        const double fd = (score(tilt, lp) - score(tilt, lm)) / 2e-5;
        CHECK(vjp.cot_latent.raw()[i] == doctest::Approx(fd).epsilon(1e-4));
    }
    for (int probe = 0; probe < 5; ++probe) {
        // interior tilt coordinates, away from the clamped border
        const int y = 3 + (probe * 2) % 10, x = 4 + (probe * 3) % 9, c = probe % 2;
        Tensor tp = tilt, tm = tilt;
        tp(0, y, x, c) += 1e-5;
        tm(0, y, x, c) -= 1e-5;
        const double fd = (score(tp, latent) - score(tm, latent)) / 2e-5;
        CHECK(vjp.cot_tilt(0, y, x, c) == doctest::Approx(fd).epsilon(2e-3));
    }
}

TEST_CASE("latent stats chain rule is exact") {
    Rng rng(13);
    Tensor mu(1, 4, 4, 1), ls(1, 4, 4, 1), cot(1, 4, 4, 1);
    for (double& v : mu.raw()) v = rng.next_gaussian();
    for (double& v : ls.raw()) v = 0.2 * rng.next_gaussian();
    for (double& v : cot.raw()) v = rng.next_gaussian();
    auto latent = lpd::sample_latent(mu, ls, 3);
    auto v = rbn::latent_stats_vjp(cot, latent, mu);
    CHECK(v.cot_mu.raw() == cot.raw());
    for (size_t i = 0; i < cot.size(); ++i)
        CHECK(v.cot_log_sigma.raw()[i] ==
              doctest::Approx(cot.raw()[i] * (latent.raw()[i] - mu.raw()[i])).epsilon(1e-12));
}

TEST_CASE("weights survive a save/load round trip and pick up a Lipschitz estimate") {
    auto w = rbn::make_rbn_weights(1, 2, {4, 6, 8, 8}, 31);
    rbn::save_rbn_weights(w, "/tmp/turbmt_rbnw");
    auto loaded = rbn::load_rbn_weights("/tmp/turbmt_rbnw");
    CHECK(loaded.image_channels == 1);
    CHECK(loaded.latent_channels == 2);
    CHECK(loaded.widths == w.widths);
    const auto a = w.flatten(), b = loaded.flatten();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-6));  // f32 storage
    CHECK(loaded.lipschitz > 0.0);
    std::remove("/tmp/turbmt_rbnw.tsm");
    std::remove("/tmp/turbmt_rbnw.json");
}

TEST_CASE("weight construction validates shapes") {
    auto w = rbn::make_rbn_weights(1, 1, {4, 4, 4, 4}, 3);
    CHECK_NOTHROW(w.validate());
    w.enc[0].w.pop_back();
    CHECK_THROWS(w.validate());
    CHECK_THROWS(rbn::make_rbn_weights(0, 1, {4, 4, 4, 4}, 3));
    CHECK_THROWS(rbn::make_rbn_weights(1, 1, {4, 0, 4, 4}, 3));
}

TEST_CASE("rbn_forward samples its latent from the lpd statistics") {
    auto w = rbn::make_rbn_weights(1, 1, {4, 6, 8, 8}, 55);
    Rng rng(14);
    Tensor img(1, 16, 16, 1);
    for (double& v : img.raw()) v = rng.next_unit();
    lpd::LatentPhaseDistortion d;
    d.tilt = Tensor(1, 16, 16, 2);
    d.mu = Tensor(1, 16, 16, 1, 0.3);
    d.log_sigma = Tensor(1, 16, 16, 1, -1.0);
    auto r1 = rbn::rbn_forward(img, d, w, 8);
    auto r2 = rbn::rbn_forward(img, d, w, 8);
    CHECK(r1.output.raw() == r2.output.raw());
    CHECK(r1.latent.raw() == lpd::sample_latent(d.mu, d.log_sigma, 8).raw());
}
