#include "turbmt/zernike.hpp"

#include <cmath>
#include <stdexcept>

namespace turbmt::zernike {

namespace {

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// R_n^m(rho), m >= 0
double radial(int n, int m, double rho) {
    double r = 0.0;
    for (int k = 0; k <= (n - m) / 2; ++k) {
        const double c = ((k & 1) ? -1.0 : 1.0) * factorial(n - k) /
                         (factorial(k) * factorial((n + m) / 2 - k) * factorial((n - m) / 2 - k));
        r += c * std::pow(rho, n - 2 * k);
    }
    return r;
}

}  // namespace

NollMode noll_mode(int j) {
    if (j < 1 || j > kMaxNollIndex)
        throw std::invalid_argument("noll_mode: index out of range");
    int jj = 1, n = 0;
    while (true) {
        // row n: m ascending; m = 0 takes one slot, m > 0 takes two
        for (int m = (n % 2 == 0) ? 0 : 1; m <= n; m += 2) {
            if (m == 0) {
                if (jj == j) return {n, 0, false};
                ++jj;
            } else {
                // even index carries cos, odd carries sin
                if (jj == j) return {n, m, jj % 2 == 1};
                if (jj + 1 == j) return {n, m, (jj + 1) % 2 == 1};
                jj += 2;
            }
        }
        ++n;
    }
}

ZernikeBasis build_zernike_basis(int max_index, int grid_size) {
    if (max_index < 1) throw std::invalid_argument("build_zernike_basis: max_index >= 1");
    if (max_index > kMaxNollIndex)
        throw std::invalid_argument("build_zernike_basis: max_index exceeds implemented cap " +
                                    std::to_string(kMaxNollIndex));
    if (grid_size < 8) throw std::invalid_argument("build_zernike_basis: grid_size >= 8");

    ZernikeBasis basis;
    basis.max_index = max_index;
    basis.grid_size = grid_size;
    basis.coverage = Grid(grid_size, grid_size);

    // in-disk area fraction per pixel from 4x4 subsampling
    constexpr int kSub = 4;
    for (int y = 0; y < grid_size; ++y) {
        for (int x = 0; x < grid_size; ++x) {
            int in = 0;
            for (int sy = 0; sy < kSub; ++sy)
                for (int sx = 0; sx < kSub; ++sx) {
                    const double py = ((y + (sy + 0.5) / kSub) / grid_size) * 2.0 - 1.0;
                    const double px = ((x + (sx + 0.5) / kSub) / grid_size) * 2.0 - 1.0;
                    if (px * px + py * py <= 1.0) ++in;
                }
            basis.coverage(y, x) = static_cast<double>(in) / (kSub * kSub);
        }
    }

    basis.tables.reserve(max_index);
    for (int j = 1; j <= max_index; ++j) {
        const NollMode mode = noll_mode(j);
        const double norm = (mode.m == 0) ? std::sqrt(static_cast<double>(mode.n + 1))
                                          : std::sqrt(2.0 * (mode.n + 1));
        Grid table(grid_size, grid_size);
        for (int y = 0; y < grid_size; ++y) {
            for (int x = 0; x < grid_size; ++x) {
                if (basis.coverage(y, x) == 0.0) continue;
                const double py = ((y + 0.5) / grid_size) * 2.0 - 1.0;
                const double px = ((x + 0.5) / grid_size) * 2.0 - 1.0;
                // boundary pixel centers can sit just outside the disk; clamp rho
                const double rho = std::min(1.0, std::sqrt(px * px + py * py));
                double v = norm * radial(mode.n, mode.m, rho);
                if (mode.m > 0) {
                    const double th = std::atan2(py, px);
                    v *= mode.is_sin ? std::sin(mode.m * th) : std::cos(mode.m * th);
                }
                table(y, x) = v;
            }
        }
        basis.tables.push_back(std::move(table));
    }
    return basis;
}

double ZernikeBasis::inner(int i, int j) const {
    if (i < 1 || i > max_index || j < 1 || j > max_index)
        throw std::invalid_argument("ZernikeBasis::inner: index out of range");
    const Grid& a = tables[i - 1];
    const Grid& b = tables[j - 1];
    double num = 0.0, den = 0.0;
    for (int y = 0; y < grid_size; ++y)
        for (int x = 0; x < grid_size; ++x) {
            const double w = coverage(y, x);
            num += w * a(y, x) * b(y, x);
            den += w;
        }
    return num / den;
}

double ZernikeBasis::disk_mean(int j) const {
    if (j < 1 || j > max_index)
        throw std::invalid_argument("ZernikeBasis::disk_mean: index out of range");
    const Grid& a = tables[j - 1];
    double num = 0.0, den = 0.0;
    for (int y = 0; y < grid_size; ++y)
        for (int x = 0; x < grid_size; ++x) {
            num += coverage(y, x) * a(y, x);
            den += coverage(y, x);
        }
    return num / den;
}

Grid resample(const Grid& src, int size) {
    if (size < 1) throw std::invalid_argument("resample: size >= 1");
    Grid out(size, size);
    const double sr = static_cast<double>(src.rows()) / size;
    const double sc = static_cast<double>(src.cols()) / size;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            // map pixel centers, clamp to the source sample lattice
            double fy = (y + 0.5) * sr - 0.5;
            double fx = (x + 0.5) * sc - 0.5;
            fy = std::min(std::max(fy, 0.0), static_cast<double>(src.rows() - 1));
            fx = std::min(std::max(fx, 0.0), static_cast<double>(src.cols() - 1));
            const int y0 = static_cast<int>(fy);
            const int x0 = static_cast<int>(fx);
            const int y1 = std::min(y0 + 1, src.rows() - 1);
            const int x1 = std::min(x0 + 1, src.cols() - 1);
            const double wy = fy - y0, wx = fx - x0;
            out(y, x) = (1 - wy) * ((1 - wx) * src(y0, x0) + wx * src(y0, x1)) +
                        wy * ((1 - wx) * src(y1, x0) + wx * src(y1, x1));
        }
    }
    return out;
}

Grid phase_from_coeffs(const ZernikeBasis& basis, std::span<const double> a,
                       int kernel_size) {
    if (static_cast<int>(a.size()) > basis.max_index)
        throw std::invalid_argument("phase_from_coeffs: more coefficients than basis modes");
    Grid acc(basis.grid_size, basis.grid_size);
    bool any = false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        any = true;
        const Grid& z = basis.tables[i];
        for (size_t p = 0; p < acc.size(); ++p) acc.raw()[p] += a[i] * z.raw()[p];
    }
    if (!any) return Grid(kernel_size, kernel_size);
    return resample(acc, kernel_size);
}

ResampledTables resample_tables(const ZernikeBasis& basis, int kernel_size) {
    ResampledTables rt;
    rt.kernel_size = kernel_size;
    rt.tables.reserve(basis.tables.size());
    for (const auto& t : basis.tables) rt.tables.push_back(resample(t, kernel_size));
    return rt;
}

Grid phase_from_resampled(const ResampledTables& rt, std::span<const double> a) {
    if (a.size() > rt.tables.size())
        throw std::invalid_argument("phase_from_resampled: more coefficients than basis modes");
    Grid acc(rt.kernel_size, rt.kernel_size);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        const Grid& z = rt.tables[i];
        for (size_t p = 0; p < acc.size(); ++p) acc.raw()[p] += a[i] * z.raw()[p];
    }
    return acc;
}

}  // namespace turbmt::zernike
