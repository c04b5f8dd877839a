#pragma once

#include <filesystem>

#include "turbmt/tensor.hpp"

namespace turbmt::io {

// Writes frame `t` of the sequence as an 8-bit PNG (1 or 3 channels).
// Values are clamped to [0,1] and quantized with round-half-even; the
// TSM1 tensor file is the lossless record, PNG is for viewing.
void write_png_frame(const std::filesystem::path& path, const Tensor& seq, int t);

// Reads a PNG as a 1-frame tensor (grayscale -> c=1, RGB/RGBA -> c=3).
Tensor read_png(const std::filesystem::path& path);

}  // namespace turbmt::io
