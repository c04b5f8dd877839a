#include <doctest.h>

#include <cmath>

#include "turbmt/losses.hpp"
#include "turbmt/rng.hpp"

using namespace turbmt;

TEST_CASE("charbonnier reduces to the 3-4-5 triangle with a large eps") {
    Tensor a(1, 1, 1, 1), b(1, 1, 1, 1);
    a(0, 0, 0, 0) = 3.0;
    b(0, 0, 0, 0) = 0.0;
    CHECK(loss::charbonnier(a, b, 4.0) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("charbonnier approaches the L1 mean for small eps") {
    Tensor a(1, 2, 2, 1), b(1, 2, 2, 1);
    a.raw() = {1.0, -2.0, 0.5, 0.0};
    CHECK(loss::charbonnier(a, b, 1e-8) == doctest::Approx(3.5 / 4.0).epsilon(1e-6));
    CHECK_THROWS(loss::charbonnier(a, b, 0.0));
}

TEST_CASE("charbonnier gradient is the smoothed sign") {
    Tensor a(1, 1, 2, 1), b(1, 1, 2, 1);
    a.raw() = {0.5, -0.5};
    auto g = loss::charbonnier_grad(a, b, 1e-6);
    CHECK(g.raw()[0] == doctest::Approx(0.5).epsilon(1e-6));   // 1/N * sign
    CHECK(g.raw()[1] == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("kl closed forms") {
    Tensor mu(2, 3, 3, 1), ls(2, 3, 3, 1);
    CHECK(loss::kl_loss(mu, ls) == 0.0);  // N(0,1) against itself, exactly

    for (double& v : mu.raw()) v = 1.0;
    CHECK(loss::kl_loss(mu, ls) == doctest::Approx(0.5).epsilon(1e-12));

    // sigma = e, mu = 0: -0.5 (2 + 1 - 0 - e^2) per element
    for (double& v : mu.raw()) v = 0.0;
    for (double& v : ls.raw()) v = 1.0;
    const double expect = -0.5 * (2.0 + 1.0 - std::exp(2.0));
    CHECK(loss::kl_loss(mu, ls) == doctest::Approx(expect).epsilon(1e-12));

    Tensor bad = mu;
    bad.raw()[0] = std::nan("");
    CHECK_THROWS(loss::kl_loss(bad, ls));
}

TEST_CASE("linear variant evaluates the un-squared form") {
    Tensor mu(1, 2, 2, 1), ls(1, 2, 2, 1);
    for (double& v : mu.raw()) v = 0.5;
    // -0.5 (0 + 1 - 0.5 - 1) = 0.25
    CHECK(loss::kl_loss(mu, ls, true) == doctest::Approx(0.25).epsilon(1e-12));
    // differs from the standard form at the same point
    CHECK(loss::kl_loss(mu, ls, false) != loss::kl_loss(mu, ls, true));
}

TEST_CASE("loss weights default to the published constants") {
    loss::LossWeights w;
    CHECK(w.alpha == 0.2);
    CHECK(w.alpha_p == 0.01);
    CHECK(w.alpha_k == 0.001);
}

TEST_CASE("total loss composes restore and re-degradation terms") {
    loss::LossWeights w;
    auto t = loss::total_loss(1.0, 0.5, w);
    CHECK(t.total == doctest::Approx(1.0 + 0.2 * 0.5));
    CHECK(t.perceptual_skipped);
}

TEST_CASE("returb loss adds both charbonnier terms and the weighted kl") {
    Rng rng(3);
    Tensor a(1, 4, 4, 1), b(1, 4, 4, 1), c(1, 4, 4, 1), d(1, 4, 4, 1);
    Tensor mu(1, 4, 4, 1), ls(1, 4, 4, 1);
    for (double& v : a.raw()) v = rng.next_unit();
    for (double& v : b.raw()) v = rng.next_unit();
    for (double& v : c.raw()) v = rng.next_unit();
    for (double& v : d.raw()) v = rng.next_unit();
    for (double& v : mu.raw()) v = rng.next_gaussian();
    loss::LossWeights w;
    const double expect = loss::charbonnier(a, b) + loss::charbonnier(c, d) +
                          0.001 * loss::kl_loss(mu, ls);
    CHECK(loss::returb_loss(a, b, c, d, mu, ls, w) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("psnr oracle values") {
    Tensor a(1, 10, 10, 1), b(1, 10, 10, 1);
    CHECK(loss::psnr(a, b) == 99.0);  // identical -> capped

    // MSE = peak^2 / 100 -> exactly 20 dB
    for (double& v : b.raw()) v = 0.1;
    CHECK(loss::psnr(a, b, 1.0) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("ssim is one for identical images and degrades with noise") {
    Rng rng(5);
    Tensor a(1, 16, 16, 1);
    for (double& v : a.raw()) v = rng.next_unit();
    CHECK(loss::ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    Tensor noisy = a;
    for (double& v : noisy.raw()) v += 0.2 * rng.next_gaussian();
    const double s = loss::ssim(a, noisy);
    CHECK(s < 0.95);
    CHECK(s > -1.0);

    Tensor small(1, 8, 8, 1);
    CHECK_THROWS(loss::ssim(small, small));
}

TEST_CASE("ema update blends teacher and student") {
    std::vector<double> t{1.0, 2.0}, s{0.0, 4.0};
    auto out = loss::ema_update(t, s, 0.9);
    CHECK(out[0] == doctest::Approx(0.9));
    CHECK(out[1] == doctest::Approx(0.9 * 2.0 + 0.1 * 4.0));
    CHECK_THROWS(loss::ema_update(t, std::vector<double>{1.0}, 0.9));
    CHECK_THROWS(loss::ema_update(t, s, 1.5));
}

TEST_CASE("ema iteration contracts towards the student geometrically") {
    std::vector<double> t{2.0}, s{1.0};
    for (int i = 0; i < 100; ++i) t = loss::ema_update(t, s, 0.999);
    double gap = 1.0;  // |t - s| scaled by beta^100
    for (int i = 0; i < 100; ++i) gap *= 0.999;
    CHECK(t[0] - s[0] == doctest::Approx(gap).epsilon(1e-12));
}
