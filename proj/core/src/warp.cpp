#include "turbmt/warp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace turbmt::sim {

namespace {

void check_dims(const Tensor& image, const Tensor& tilt) {
    if (tilt.c() != 2) throw std::invalid_argument("warp: tilt needs 2 channels");
    if (image.t() != tilt.t() || image.h() != tilt.h() || image.w() != tilt.w())
        throw std::invalid_argument("warp: image/tilt dims mismatch");
}

struct Sample {
    int y0, x0, y1, x1;
    double wy, wx;
    bool clamped_y, clamped_x;
};

Sample locate(double fy, double fx, int h, int w) {
    Sample s;
    s.clamped_y = fy <= 0.0 || fy >= h - 1;
    s.clamped_x = fx <= 0.0 || fx >= w - 1;
    fy = std::min(std::max(fy, 0.0), static_cast<double>(h - 1));
    fx = std::min(std::max(fx, 0.0), static_cast<double>(w - 1));
    s.y0 = static_cast<int>(fy);
    s.x0 = static_cast<int>(fx);
    s.y1 = std::min(s.y0 + 1, h - 1);
    s.x1 = std::min(s.x0 + 1, w - 1);
    s.wy = fy - s.y0;
    s.wx = fx - s.x0;
    return s;
}

}  // namespace

Tensor warp(const Tensor& image, const Tensor& tilt) {
    check_dims(image, tilt);
    const int T = image.t(), H = image.h(), W = image.w(), C = image.c();
    Tensor out(T, H, W, C);
    for (int t = 0; t < T; ++t)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const Sample s = locate(y + tilt(t, y, x, 1), x + tilt(t, y, x, 0), H, W);
                for (int c = 0; c < C; ++c) {
                    const double top = (1 - s.wx) * image(t, s.y0, s.x0, c) + s.wx * image(t, s.y0, s.x1, c);
                    const double bot = (1 - s.wx) * image(t, s.y1, s.x0, c) + s.wx * image(t, s.y1, s.x1, c);
                    out(t, y, x, c) = (1 - s.wy) * top + s.wy * bot;
                }
            }
    return out;
}

WarpVjp warp_vjp(const Tensor& image, const Tensor& tilt, const Tensor& cot_out) {
    check_dims(image, tilt);
    require_same_shape(image, cot_out, "warp_vjp");
    const int T = image.t(), H = image.h(), W = image.w(), C = image.c();
    WarpVjp vjp{Tensor(T, H, W, C), Tensor(T, H, W, 2)};
    for (int t = 0; t < T; ++t)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const Sample s = locate(y + tilt(t, y, x, 1), x + tilt(t, y, x, 0), H, W);
                double g_fx = 0.0, g_fy = 0.0;
                for (int c = 0; c < C; ++c) {
                    const double g = cot_out(t, y, x, c);
                    if (g == 0.0) continue;
                    vjp.cot_image(t, s.y0, s.x0, c) += g * (1 - s.wy) * (1 - s.wx);
                    vjp.cot_image(t, s.y0, s.x1, c) += g * (1 - s.wy) * s.wx;
                    vjp.cot_image(t, s.y1, s.x0, c) += g * s.wy * (1 - s.wx);
                    vjp.cot_image(t, s.y1, s.x1, c) += g * s.wy * s.wx;
                    const double d_wx = (1 - s.wy) * (image(t, s.y0, s.x1, c) - image(t, s.y0, s.x0, c)) +
                                        s.wy * (image(t, s.y1, s.x1, c) - image(t, s.y1, s.x0, c));
                    const double d_wy = (1 - s.wx) * (image(t, s.y1, s.x0, c) - image(t, s.y0, s.x0, c)) +
                                        s.wx * (image(t, s.y1, s.x1, c) - image(t, s.y0, s.x1, c));
                    g_fx += g * d_wx;
                    g_fy += g * d_wy;
                }
                // clamped samples have zero sensitivity to the shift
                vjp.cot_tilt(t, y, x, 0) = s.clamped_x ? 0.0 : g_fx;
                vjp.cot_tilt(t, y, x, 1) = s.clamped_y ? 0.0 : g_fy;
            }
    return vjp;
}

}  // namespace turbmt::sim
