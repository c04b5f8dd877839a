#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "turbmt/field.hpp"
#include "turbmt/tensor.hpp"
#include "turbmt/zernike.hpp"

namespace turbmt::sim {

// Low-rank PSF basis: kernels psi_k from the top-K left singular vectors of a
// stack of sampled PSFs, projection of a PSF onto them giving weights beta_k.
struct PsfBasis {
    int K = 0;
    int kernel_size = 0;
    double aperture_ratio = 1.0;
    // projection matrix, row-major K x s^2; rows are the orthonormal psi_k
    // flattened, so beta = P * vec(psf) and reconstruction is P^T * beta.
    std::vector<double> projection;
    double mean_recon_error = 0.0;   // mean relative L2 error over the sample
    double worst_recon_error = 0.0;  // worst case over the sample

    Grid kernel(int k) const;                       // psi_k as s x s grid
    std::vector<double> project(const Grid& psf) const;
    Grid reconstruct(const std::vector<double>& beta) const;
};

// Builds the basis from PSFs generated at a random subsample of pixels of the
// given fields (higher-order modes only). Requires at least 10*K samples.
PsfBasis build_psf_basis(const std::vector<field::ZernikeField>& sample_fields,
                         const zernike::ZernikeBasis& basis, int K,
                         uint64_t seed = 0, double aperture_ratio = 1.0);

// Per-pixel projection weights: phase from the higher-order modes (tilt
// excluded), PSF via FFT, beta by orthogonal projection.
Tensor blur_weights(const field::ZernikeField& field,
                    const zernike::ZernikeBasis& basis, const PsfBasis& psf_basis);

void save_psf_basis(const std::filesystem::path& tensor_path,
                    const std::filesystem::path& json_path, const PsfBasis& b);
PsfBasis load_psf_basis(const std::filesystem::path& tensor_path,
                        const std::filesystem::path& json_path);

}  // namespace turbmt::sim
