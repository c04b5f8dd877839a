#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "turbmt/zernike.hpp"

using namespace turbmt;
using namespace turbmt::zernike;

TEST_CASE("noll indexing walks the classic table") {
    auto m1 = noll_mode(1);
    CHECK(m1.n == 0);
    CHECK(m1.m == 0);

    auto m2 = noll_mode(2);  // tip
    CHECK(m2.n == 1);
    CHECK(m2.m == 1);
    CHECK_FALSE(m2.is_sin);  // even index -> cos

    auto m3 = noll_mode(3);  // tilt
    CHECK(m3.n == 1);
    CHECK(m3.m == 1);
    CHECK(m3.is_sin);

    auto m4 = noll_mode(4);  // defocus
    CHECK(m4.n == 2);
    CHECK(m4.m == 0);

    auto m11 = noll_mode(11);  // primary spherical
    CHECK(m11.n == 4);
    CHECK(m11.m == 0);

    auto m36 = noll_mode(36);
    CHECK(m36.n == 7);
    CHECK(m36.m == 7);
}

TEST_CASE("builder rejects bad arguments") {
    CHECK_THROWS(build_zernike_basis(0, 64));
    CHECK_THROWS(build_zernike_basis(kMaxNollIndex + 1, 64));
    CHECK_THROWS(build_zernike_basis(4, 7));
}

TEST_CASE("defocus center value is -sqrt(3)") {
    auto basis = build_zernike_basis(4, 65);  // odd grid so a pixel sits at rho = 0
    const auto& z4 = basis.tables[3];
    CHECK(z4(32, 32) == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("tip table is antisymmetric in x") {
    auto basis = build_zernike_basis(4, 64);
    const auto& z2 = basis.tables[1];
    for (int y = 20; y < 44; y += 3)
        for (int x = 20; x < 32; x += 3)
            CHECK(z2(y, x) == doctest::Approx(-z2(y, 63 - x)).epsilon(1e-9));
}

TEST_CASE("gram matrix is near identity and non-piston modes have zero mean") {
    auto basis = build_zernike_basis(15, 128);
    for (int i = 1; i <= 15; ++i)
        for (int j = i; j <= 15; ++j) {
            const double target = (i == j) ? 1.0 : 0.0;
            CHECK(std::abs(basis.inner(i, j) - target) < 2e-2);
        }
    for (int j = 2; j <= 15; ++j) CHECK(std::abs(basis.disk_mean(j)) < 1e-3);
}

TEST_CASE("zero coefficients give a zero phase map") {
    auto basis = build_zernike_basis(6, 64);
    std::vector<double> a(6, 0.0);  // a[i] weights Noll mode i+1; all zero
    auto phi = phase_from_coeffs(basis, a, 17);
    REQUIRE(phi.rows() == 17);
    for (double v : phi.raw()) CHECK(v == 0.0);
}

TEST_CASE("phase is linear in the coefficients") {
    auto basis = build_zernike_basis(8, 64);
    std::vector<double> a(8, 0.0), b(8, 0.0), ab(8, 0.0);
    for (int j = 2; j <= 8; ++j) {  // a[j-1] weights Noll mode j
        a[j - 1] = 0.1 * j;
        b[j - 1] = -0.07 * j + 0.2;
        ab[j - 1] = a[j - 1] + b[j - 1];
    }
    auto pa = phase_from_coeffs(basis, a, 15);
    auto pb = phase_from_coeffs(basis, b, 15);
    auto pab = phase_from_coeffs(basis, ab, 15);
    for (size_t i = 0; i < pab.size(); ++i)
        CHECK(pab.raw()[i] == doctest::Approx(pa.raw()[i] + pb.raw()[i]).epsilon(1e-10));
}

TEST_CASE("pre-resampled tables reproduce phase_from_coeffs") {
    auto basis = build_zernike_basis(10, 64);
    auto rt = resample_tables(basis, 21);
    std::vector<double> a(10, 0.0);
    for (int j = 2; j <= 10; ++j) a[j - 1] = std::sin(0.7 * j);
    auto p1 = phase_from_coeffs(basis, a, 21);
    auto p2 = phase_from_resampled(rt, a);
    REQUIRE(p1.size() == p2.size());
    for (size_t i = 0; i < p1.size(); ++i)
        CHECK(p1.raw()[i] == doctest::Approx(p2.raw()[i]).epsilon(1e-12));
}

TEST_CASE("resample to the same size is the identity") {
    Grid g(9, 9);
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c) g(r, c) = 0.3 * r - 0.5 * c + 0.01 * r * c;
    auto h = resample(g, 9);
    for (size_t i = 0; i < g.size(); ++i)
        CHECK(h.raw()[i] == doctest::Approx(g.raw()[i]).epsilon(1e-12));
}
