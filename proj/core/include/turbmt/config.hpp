#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace turbmt::cfg {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TurbulenceCfg {
    int frames = 4;
    int height = 64;
    int width = 64;
    int modes = 14;  // Zernike channels ahead of the kernel-size channel
    double variance = 0.05;
    std::vector<double> mode_variances;  // optional per-mode override
    double spatial_correlation_length = 8.0;
    double temporal_correlation = 0.0;
    double kernel_size_norm = 0.25;
    double noise_sigma = 0.0;
    double aperture_ratio = 1.0;
    int basis_grid = 128;
    uint64_t seed = 1234;
};

struct BasisCfg {
    int rank = 8;
    int samples = 1000;
};

struct SsmCfg {
    int state_dim = 16;
    int length = 4096;
    int chunk = 256;
};

struct ScanCfg {
    std::string order = "space_first";  // space_first | time_first | local_hilbert
    int block = 8;
};

struct LossCfg {
    double alpha = 0.2;
    double alpha_p = 0.01;
    double alpha_k = 0.001;
};

struct InvertCfg {
    int steps = 200;
    double step_size = 2000.0;
};

struct RunConfig {
    TurbulenceCfg turbulence;
    BasisCfg basis;
    SsmCfg ssm;
    ScanCfg scan;
    LossCfg loss;
    InvertCfg invert;

    void validate() const;  // throws ConfigError
    std::vector<double> mode_variance_vector() const;
};

RunConfig load_config(const std::string& path);       // throws ConfigError
RunConfig parse_config(const std::string& json_text); // throws ConfigError

}  // namespace turbmt::cfg
