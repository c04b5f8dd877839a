#include "turbmt/psf_basis.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "turbmt/psf.hpp"
#include "turbmt/rng.hpp"
#include "turbmt/tensor_io.hpp"

namespace turbmt::sim {

Grid PsfBasis::kernel(int k) const {
    if (k < 0 || k >= K) throw std::invalid_argument("PsfBasis::kernel: index out of range");
    Grid g(kernel_size, kernel_size);
    const size_t s2 = static_cast<size_t>(kernel_size) * kernel_size;
    for (size_t i = 0; i < s2; ++i) g.raw()[i] = projection[k * s2 + i];
    return g;
}

std::vector<double> PsfBasis::project(const Grid& psf) const {
    const size_t s2 = static_cast<size_t>(kernel_size) * kernel_size;
    if (psf.size() != s2) throw std::invalid_argument("PsfBasis::project: size mismatch");
    std::vector<double> beta(K, 0.0);
    for (int k = 0; k < K; ++k) {
        double acc = 0.0;
        const double* row = projection.data() + static_cast<size_t>(k) * s2;
        for (size_t i = 0; i < s2; ++i) acc += row[i] * psf.raw()[i];
        beta[k] = acc;
    }
    return beta;
}

Grid PsfBasis::reconstruct(const std::vector<double>& beta) const {
    if (static_cast<int>(beta.size()) != K)
        throw std::invalid_argument("PsfBasis::reconstruct: weight count mismatch");
    Grid g(kernel_size, kernel_size);
    const size_t s2 = g.size();
    for (int k = 0; k < K; ++k) {
        const double* row = projection.data() + static_cast<size_t>(k) * s2;
        for (size_t i = 0; i < s2; ++i) g.raw()[i] += beta[k] * row[i];
    }
    return g;
}

PsfBasis build_psf_basis(const std::vector<field::ZernikeField>& sample_fields,
                         const zernike::ZernikeBasis& basis, int K,
                         uint64_t seed, double aperture_ratio) {
    if (K < 1) throw std::invalid_argument("build_psf_basis: K >= 1");
    if (sample_fields.empty()) throw std::invalid_argument("build_psf_basis: no sample fields");

    const int ks = sample_fields.front().kernel_size();
    size_t available = 0;
    for (const auto& f : sample_fields) {
        if (f.kernel_size() != ks)
            throw std::invalid_argument("build_psf_basis: mixed kernel sizes in sample set");
        available += static_cast<size_t>(f.coeffs.t()) * f.coeffs.h() * f.coeffs.w();
    }
    const size_t want = std::max<size_t>(static_cast<size_t>(K) * 10, 64);
    if (available < want)
        throw std::invalid_argument("build_psf_basis: need at least 10*K sample PSFs");
    const size_t n_samples = std::min<size_t>(available, std::max<size_t>(want, 1000));

    PsfEngine engine(ks, aperture_ratio);
    const auto rt = zernike::resample_tables(basis, ks);
    const size_t s2 = static_cast<size_t>(ks) * ks;
    Eigen::MatrixXd stack(s2, n_samples);

    Rng rng(derive_seed(seed, 0xb5f));
    for (size_t i = 0; i < n_samples; ++i) {
        const auto& f = sample_fields[rng.next_u64() % sample_fields.size()];
        const int t = static_cast<int>(rng.next_u64() % f.coeffs.t());
        const int y = static_cast<int>(rng.next_u64() % f.coeffs.h());
        const int x = static_cast<int>(rng.next_u64() % f.coeffs.w());
        const auto a = f.noll_coeffs(t, y, x, /*include_tilt=*/false);
        const Grid psf = engine.compute(zernike::phase_from_resampled(rt, a));
        for (size_t p = 0; p < s2; ++p) stack(p, i) = psf.raw()[p];
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(stack, Eigen::ComputeThinU);
    const int rank = static_cast<int>(svd.matrixU().cols());
    if (K > rank) throw std::invalid_argument("build_psf_basis: K exceeds sample rank");

    PsfBasis out;
    out.K = K;
    out.kernel_size = ks;
    out.aperture_ratio = aperture_ratio;
    out.projection.resize(static_cast<size_t>(K) * s2);
    for (int k = 0; k < K; ++k)
        for (size_t p = 0; p < s2; ++p)
            out.projection[k * s2 + p] = svd.matrixU()(p, k);

    // in-sample reconstruction error, relative L2
    double worst = 0.0, mean = 0.0;
    for (size_t i = 0; i < n_samples; ++i) {
        Eigen::VectorXd v = stack.col(i);
        Eigen::VectorXd beta(K);
        for (int k = 0; k < K; ++k) {
            double acc = 0.0;
            for (size_t p = 0; p < s2; ++p) acc += out.projection[k * s2 + p] * v(p);
            beta(k) = acc;
        }
        Eigen::VectorXd recon = Eigen::VectorXd::Zero(s2);
        for (int k = 0; k < K; ++k)
            for (size_t p = 0; p < s2; ++p) recon(p) += beta(k) * out.projection[k * s2 + p];
        const double err = (v - recon).norm() / v.norm();
        worst = std::max(worst, err);
        mean += err;
    }
    out.worst_recon_error = worst;
    out.mean_recon_error = mean / n_samples;
    return out;
}

Tensor blur_weights(const field::ZernikeField& field,
                    const zernike::ZernikeBasis& basis, const PsfBasis& psf_basis) {
    const Tensor& coeffs = field.coeffs;
    if (field.kernel_size() != psf_basis.kernel_size)
        throw std::invalid_argument("blur_weights: field kernel size != basis kernel size");
    const int T = coeffs.t(), H = coeffs.h(), W = coeffs.w();
    Tensor weights(T, H, W, psf_basis.K);

    PsfEngine engine(psf_basis.kernel_size, psf_basis.aperture_ratio);
    const auto rt = zernike::resample_tables(basis, psf_basis.kernel_size);
    for (int t = 0; t < T; ++t)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const auto a = field.noll_coeffs(t, y, x, /*include_tilt=*/false);
                const Grid psf = engine.compute(zernike::phase_from_resampled(rt, a));
                const auto beta = psf_basis.project(psf);
                for (int k = 0; k < psf_basis.K; ++k) weights(t, y, x, k) = beta[k];
            }
    return weights;
}

void save_psf_basis(const std::filesystem::path& tensor_path,
                    const std::filesystem::path& json_path, const PsfBasis& b) {
    io::write_raw(tensor_path,
                  {static_cast<uint32_t>(b.K), static_cast<uint32_t>(b.kernel_size),
                   static_cast<uint32_t>(b.kernel_size)},
                  b.projection);
    nlohmann::json meta{{"K", b.K},
                        {"kernel_size", b.kernel_size},
                        {"aperture_ratio", b.aperture_ratio},
                        {"mean_recon_error", b.mean_recon_error},
                        {"worst_recon_error", b.worst_recon_error}};
    std::ofstream f(json_path);
    if (!f) throw std::runtime_error("cannot write " + json_path.string());
    f << meta.dump(2) << "\n";
}

PsfBasis load_psf_basis(const std::filesystem::path& tensor_path,
                        const std::filesystem::path& json_path) {
    auto [dims, data] = io::read_raw(tensor_path);
    if (dims.size() != 3 || dims[1] != dims[2])
        throw std::runtime_error("load_psf_basis: unexpected tensor shape");
    std::ifstream f(json_path);
    if (!f) throw std::runtime_error("cannot read " + json_path.string());
    nlohmann::json meta = nlohmann::json::parse(f);

    PsfBasis b;
    b.K = static_cast<int>(dims[0]);
    b.kernel_size = static_cast<int>(dims[1]);
    b.projection = std::move(data);
    b.aperture_ratio = meta.at("aperture_ratio").get<double>();
    b.mean_recon_error = meta.at("mean_recon_error").get<double>();
    b.worst_recon_error = meta.at("worst_recon_error").get<double>();
    if (meta.at("K").get<int>() != b.K || meta.at("kernel_size").get<int>() != b.kernel_size)
        throw std::runtime_error("load_psf_basis: sidecar/tensor mismatch");
    return b;
}

}  // namespace turbmt::sim
