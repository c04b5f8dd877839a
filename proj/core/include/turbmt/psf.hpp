#pragma once

#include "turbmt/tensor.hpp"

namespace turbmt::sim {

// PSF = |DFT(P . exp(j phi))|^2, zero-frequency shifted to the center,
// normalized to unit sum. P is a circular aperture mask of the given
// diameter ratio over the phase-map support.
Grid psf_from_phase(const Grid& phase, double aperture_ratio = 1.0);

// Same contract evaluated with a plain quadruple-loop DFT. Independent of
// the FFT path; used as the brute-force reference and by degrade_direct.
Grid psf_from_phase_reference(const Grid& phase, double aperture_ratio = 1.0);

// Batched FFT evaluation sharing one plan. Thread-safe for distinct calls.
class PsfEngine {
public:
    explicit PsfEngine(int kernel_size, double aperture_ratio = 1.0);
    ~PsfEngine();
    PsfEngine(const PsfEngine&) = delete;
    PsfEngine& operator=(const PsfEngine&) = delete;

    int kernel_size() const { return s_; }
    Grid compute(const Grid& phase) const;

private:
    struct Impl;
    Impl* impl_;
    int s_;
};

}  // namespace turbmt::sim
