#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace turbmt::bench {

// Median-of-repeats wall time for one call of fn, in seconds. Repeats until
// the total measured time reaches min_total so short calls are not pure noise.
double time_call(const std::function<void()>& fn, double min_total = 0.02);

// Least-squares slope of log(t) against log(x).
double fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

struct DegradeBench {
    int size = 0, rank = 0, kernel_size = 0;
    double lowrank_seconds = 0.0;
    double direct_seconds = 0.0;
    double speedup = 0.0;
};

// Times the low-rank degradation against the brute-force per-pixel reference
// on one frame of a sampled turbulence field.
DegradeBench bench_degrade(int size, int rank, int kernel_size, uint64_t seed);

struct ScalingRow {
    std::string series;  // "scan" or "attention"
    int length = 0;
    double seconds = 0.0;
};

struct ScalingBench {
    std::vector<ScalingRow> rows;
    double scan_slope = 0.0;
    double attention_slope = 0.0;
};

// Runtime ladders for the linear-vs-quadratic complexity comparison:
// parallel_scan over L = 2^scan_lo .. 2^scan_hi, attention baseline over
// L = 2^attn_lo .. 2^attn_hi.
ScalingBench bench_scaling(uint64_t seed, int scan_lo = 10, int scan_hi = 20,
                           int attn_lo = 8, int attn_hi = 13);

}  // namespace turbmt::bench
