#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "turbmt/tensor.hpp"

namespace turbmt::io {

// "TSM1" tensor file: magic, u32 rank, u32 dims[rank], u32 dtype code
// (1 = f32), then raw little-endian row-major f32 payload.
constexpr uint32_t kDtypeF32 = 1;

void write_tensor(const std::filesystem::path& path, const Tensor& t);
void write_grid(const std::filesystem::path& path, const Grid& g);
void write_raw(const std::filesystem::path& path,
               const std::vector<uint32_t>& dims, const std::vector<double>& data);

Tensor read_tensor(const std::filesystem::path& path);
Grid read_grid(const std::filesystem::path& path);
// Generic read: returns dims + data, any rank 1..4.
std::pair<std::vector<uint32_t>, std::vector<double>>
read_raw(const std::filesystem::path& path);

}  // namespace turbmt::io
