#pragma once

#include <span>
#include <vector>

#include "turbmt/tensor.hpp"

namespace turbmt::zernike {

// Highest supported Noll index (radial order n <= 10).
constexpr int kMaxNollIndex = 66;

struct NollMode {
    int n;        // radial order
    int m;        // azimuthal order magnitude
    bool is_sin;  // sin term when true, cos (or m == 0) otherwise
};

// Noll index -> (n, m, trig). j is 1-based.
NollMode noll_mode(int j);

// Precomputed Noll-normalized basis images over the unit disk, sampled at
// pixel centers. `coverage` holds the in-disk area fraction of each pixel
// (from 4x4 subsampling) and is the quadrature weight for disk averages;
// tables are zero wherever coverage is zero.
struct ZernikeBasis {
    int max_index = 0;
    int grid_size = 0;
    std::vector<Grid> tables;  // tables[j-1] is Z_j
    Grid coverage;

    // disk-averaged <Z_i, Z_j>
    double inner(int i, int j) const;
    double disk_mean(int j) const;
};

ZernikeBasis build_zernike_basis(int max_index, int grid_size);

// phi = sum_i a[i-1] * Z_i, resampled (bilinear) to kernel_size x kernel_size.
// `a` is Noll-aligned starting at index 1; the field's kernel-size channel is
// never part of this sum.
Grid phase_from_coeffs(const ZernikeBasis& basis, std::span<const double> a,
                       int kernel_size);

// Bilinear resample of a square table to size x size (unit-square mapping).
Grid resample(const Grid& src, int size);

// Tables pre-resampled to a fixed kernel size. Summing these per pixel is
// algebraically identical to phase_from_coeffs (resampling is linear) and is
// what the per-pixel hot loops use.
struct ResampledTables {
    int kernel_size = 0;
    std::vector<Grid> tables;
};

ResampledTables resample_tables(const ZernikeBasis& basis, int kernel_size);
Grid phase_from_resampled(const ResampledTables& rt, std::span<const double> a);

}  // namespace turbmt::zernike
