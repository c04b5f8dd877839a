#pragma once

#include <optional>
#include <span>
#include <vector>

#include "turbmt/tensor.hpp"

namespace turbmt::ssm {

// Discretized diagonal state-space parameters for one step.
struct StepParams {
    std::vector<double> a_bar;  // N, exp(delta * A) elementwise
    std::vector<double> b_bar;  // N
    std::vector<double> c;      // N
    double d = 0.0;
};

// ZOH: A_bar = exp(delta A), B_bar = (delta A)^-1 (exp(delta A) - 1) delta B,
// with the removable singularity at A -> 0 evaluated as delta B.
std::pair<std::vector<double>, std::vector<double>>
discretize_zoh(std::span<const double> a_diag, std::span<const double> b, double delta);

// h_t = A_bar_t h_{t-1} + B_bar_t x_t,  y_t = c_t . h_t + d x_t,  h_{-1} = 0
std::vector<double> recurrence(const std::vector<StepParams>& params,
                               std::span<const double> x);

// Same contract via the associative operator
//   (a1, b1) o (a2, b2) = (a2 a1, a2 b1 + b2)
// with a work-efficient Blelloch scan, executed in chunks.
std::vector<double> parallel_scan(const std::vector<StepParams>& params,
                                  std::span<const double> x, int chunk = 256);

// Time-invariant kernel K = (c.B_bar, c.A_bar B_bar, ..., c.A_bar^{L-1} B_bar).
// Causal convolution with K plus d*x reproduces the recurrence.
std::vector<double> ssm_conv_kernel(const StepParams& p, int L);
std::vector<double> causal_conv(std::span<const double> x,
                                std::span<const double> kernel, double d);

// Affine map from a feature vector to an output vector (row-major W).
struct AffineMap {
    int in_dim = 0, out_dim = 0;
    std::vector<double> weight;  // out_dim x in_dim
    std::vector<double> bias;    // out_dim

    std::vector<double> apply(std::span<const double> v) const;
    static AffineMap zeros(int in_dim, int out_dim);
    static AffineMap random(int in_dim, int out_dim, uint64_t seed, double scale = 0.5);
};

// Input-dependent (S6-style) parameterization; guidance enters additively so
// zero guidance weights reduce bit-compatibly to the unguided form. The delta
// projection output passes through softplus.
struct SelectiveProjections {
    int state_dim = 0;
    std::vector<double> a_diag;  // N, continuous-time diagonal (Re <= 0)
    double d = 0.0;
    AffineMap s_delta, s_b, s_c;                              // from x features
    std::optional<AffineMap> g_delta, g_b, g_c;               // from guidance
};

// x: L x F row-major. guidance (if present): L x G row-major.
std::vector<StepParams> selective_params(const std::vector<std::vector<double>>& x,
                                         const SelectiveProjections& proj,
                                         const std::vector<std::vector<double>>* guidance);

// y' = y . silu(affine(x_gate) [. affine(guidance)]). Gate maps produce one
// scalar per step; the guidance map is multiplicative (ones = neutral).
struct GateParams {
    AffineMap gate;                      // from x_gate features to scalar
    std::optional<AffineMap> guide;      // from guidance features to scalar
};
std::vector<double> gated_output(std::span<const double> y,
                                 const std::vector<std::vector<double>>& x_gate,
                                 const GateParams& gp,
                                 const std::vector<std::vector<double>>* guidance);

struct GatedVjp {
    std::vector<double> cot_y;
    std::vector<std::vector<double>> cot_x_gate;
};
GatedVjp gated_output_vjp(std::span<const double> y,
                          const std::vector<std::vector<double>>& x_gate,
                          const GateParams& gp,
                          const std::vector<std::vector<double>>* guidance,
                          std::span<const double> cot_out);

// y = scan_fwd(x) + reverse(scan_bwd(reverse(x)))
std::vector<double> bidirectional_ssm(std::span<const double> x,
                                      const std::vector<StepParams>& params_fwd,
                                      const std::vector<StepParams>& params_bwd);

// Quadratic-cost baseline for the complexity benchmark: similarity-weighted
// aggregation over all pairs.
std::vector<double> attention_baseline(std::span<const double> x);

double silu(double v);

}  // namespace turbmt::ssm
