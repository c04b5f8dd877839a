#pragma once

#include "turbmt/tensor.hpp"

namespace turbmt::sim {

// Backward warp with bilinear interpolation. The shift field gives, per
// output pixel, the source offset to sample from:
//   out(y, x) = in(y + dy, x + dx)
// Out-of-bounds source samples clamp to the edge.
//
// tilt: T x H x W x 2, channel 0 = dx (columns), channel 1 = dy (rows).
Tensor warp(const Tensor& image, const Tensor& tilt);

struct WarpVjp {
    Tensor cot_image;  // same shape as image
    Tensor cot_tilt;   // same shape as tilt
};

// Vector-Jacobian products of warp w.r.t. both inputs.
WarpVjp warp_vjp(const Tensor& image, const Tensor& tilt, const Tensor& cot_out);

}  // namespace turbmt::sim
