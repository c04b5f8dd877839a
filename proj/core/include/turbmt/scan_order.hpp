#pragma once

#include <span>
#include <vector>

#include "turbmt/tensor.hpp"

namespace turbmt::scan {

enum class Order { SpaceFirst, TimeFirst, LocalHilbert };

struct ScanPermutation {
    Order order = Order::SpaceFirst;
    int t = 0, h = 0, w = 0;
    int block = 0;  // Hilbert tile size (power of two), LocalHilbert only
    // forward[grid linear index (t*H + y)*W + x] = sequence position
    std::vector<int> forward;
    std::vector<int> inverse;  // inverse[seq position] = grid linear index
};

// SpaceFirst: raster width -> height -> time (width fastest).
// TimeFirst: time -> height -> width (time fastest).
// LocalHilbert: per frame, block x block tiles in raster order, each tile
// traversed by a 2D Hilbert curve; non-power-of-two remainder strips go in
// serpentine order; frames in time order.
ScanPermutation build_permutation(Order order, int T, int H, int W, int block = 8);

std::vector<double> apply(const ScanPermutation& perm, std::span<const double> tokens);
std::vector<double> unapply(const ScanPermutation& perm, std::span<const double> tokens);

// Hilbert curve position -> (x, y) on an n x n grid, n a power of two.
void hilbert_d2xy(int n, int d, int& x, int& y);

// Mean Manhattan distance between successive tokens of the flattening,
// within-frame steps only.
double mean_consecutive_distance(const ScanPermutation& perm);

}  // namespace turbmt::scan
