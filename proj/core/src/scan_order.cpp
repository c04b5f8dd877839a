#include "turbmt/scan_order.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace turbmt::scan {

void hilbert_d2xy(int n, int d, int& x, int& y) {
    int rx, ry, t = d;
    x = y = 0;
    for (int s = 1; s < n; s *= 2) {
        rx = 1 & (t / 2);
        ry = 1 & (t ^ rx);
        if (ry == 0) {  // rotate quadrant
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
    }
}

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Cell visit order of one frame under the local Hilbert scheme.
std::vector<std::pair<int, int>> frame_order_hilbert(int H, int W, int block) {
    std::vector<std::pair<int, int>> cells;
    cells.reserve(static_cast<size_t>(H) * W);
    const int th = H / block, tw = W / block;  // full tiles

    for (int ty = 0; ty < th; ++ty)
        for (int tx = 0; tx < tw; ++tx)
            for (int d = 0; d < block * block; ++d) {
                int cx, cy;
                hilbert_d2xy(block, d, cx, cy);
                cells.emplace_back(ty * block + cy, tx * block + cx);
            }
    // right remainder strip: serpentine down each partial row region
    const int rw = W - tw * block;
    if (rw > 0)
        for (int y = 0; y < th * block; ++y) {
            const bool rev = y % 2 == 1;
            for (int i = 0; i < rw; ++i)
                cells.emplace_back(y, tw * block + (rev ? rw - 1 - i : i));
        }
    // bottom remainder strip (full width), serpentine
    const int rh = H - th * block;
    if (rh > 0)
        for (int y = th * block; y < H; ++y) {
            const bool rev = (y - th * block) % 2 == 1;
            for (int i = 0; i < W; ++i) cells.emplace_back(y, rev ? W - 1 - i : i);
        }
    return cells;
}

}  // namespace

ScanPermutation build_permutation(Order order, int T, int H, int W, int block) {
    if (T <= 0 || H <= 0 || W <= 0)
        throw std::invalid_argument("build_permutation: dims must be positive");
    const size_t n = static_cast<size_t>(T) * H * W;
    ScanPermutation perm;
    perm.order = order;
    perm.t = T;
    perm.h = H;
    perm.w = W;
    perm.forward.assign(n, -1);
    perm.inverse.assign(n, -1);

    auto grid_index = [&](int t, int y, int x) {
        return (static_cast<size_t>(t) * H + y) * W + x;
    };

    size_t pos = 0;
    switch (order) {
        case Order::SpaceFirst:
            for (int t = 0; t < T; ++t)
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x) perm.inverse[pos++] = static_cast<int>(grid_index(t, y, x));
            break;
        case Order::TimeFirst:
            for (int x = 0; x < W; ++x)
                for (int y = 0; y < H; ++y)
                    for (int t = 0; t < T; ++t) perm.inverse[pos++] = static_cast<int>(grid_index(t, y, x));
            break;
        case Order::LocalHilbert: {
            if (!is_pow2(block) || block > std::min(H, W))
                throw std::invalid_argument("build_permutation: block must be a power of two <= min(H, W)");
            perm.block = block;
            const auto cells = frame_order_hilbert(H, W, block);
            for (int t = 0; t < T; ++t)
                for (const auto& [y, x] : cells) perm.inverse[pos++] = static_cast<int>(grid_index(t, y, x));
            break;
        }
    }
    for (size_t p = 0; p < n; ++p) perm.forward[perm.inverse[p]] = static_cast<int>(p);
    return perm;
}

std::vector<double> apply(const ScanPermutation& perm, std::span<const double> tokens) {
    if (tokens.size() != perm.forward.size())
        throw std::invalid_argument("scan::apply: token count mismatch");
    std::vector<double> out(tokens.size());
    for (size_t p = 0; p < out.size(); ++p) out[p] = tokens[perm.inverse[p]];
    return out;
}

std::vector<double> unapply(const ScanPermutation& perm, std::span<const double> tokens) {
    if (tokens.size() != perm.forward.size())
        throw std::invalid_argument("scan::unapply: token count mismatch");
    std::vector<double> out(tokens.size());
    for (size_t g = 0; g < out.size(); ++g) out[g] = tokens[perm.forward[g]];
    return out;
}

double mean_consecutive_distance(const ScanPermutation& perm) {
    const int hw = perm.h * perm.w;
    double sum = 0.0;
    size_t count = 0;
    for (size_t p = 1; p < perm.inverse.size(); ++p) {
        const int g0 = perm.inverse[p - 1], g1 = perm.inverse[p];
        if (g0 / hw != g1 / hw) continue;  // frame boundary
        const int y0 = (g0 % hw) / perm.w, x0 = g0 % perm.w;
        const int y1 = (g1 % hw) / perm.w, x1 = g1 % perm.w;
        sum += std::abs(y1 - y0) + std::abs(x1 - x0);
        ++count;
    }
    return count ? sum / count : 0.0;
}

}  // namespace turbmt::scan
