#pragma once

#include "triphoton/witness.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace triphoton {

/// One amplification/detection chain. noise_photons is the operational added
/// noise N_N measured by the OFF records (it absorbs the heterodyne vacuum
/// unit, so values near 1 represent a quantum-limited chain); the 0.5 quantum
/// bound is deliberately not enforced (phenomenological model).
struct ChannelChain {
    double gain = 1.0;
    double noise_photons = 0.0;
    double frequency_GHz = 5.0;
    double thermal_occupation = 0.0;  // N_T during OFF
};

/// Bose-Einstein occupation 1/(e^{hf/kT} - 1).
double bose_einstein(double frequency_GHz, double temperature_mK);

/// Interleaved ON/OFF filtered samples per channel, chopped into segments of
/// equal length (the segment statistics provide the sample covariance).
struct InterleavedRun {
    std::size_t n_segments = 0;
    std::size_t samples_per_segment = 0;
    std::array<std::vector<std::complex<double>>, 3> on, off;
    double interleave_period_s = 1.0;

    std::size_t total_samples() const { return n_segments * samples_per_segment; }
};

/// ON-OFF moment extraction with amplifier-noise and thermal corrections;
/// the covariance comes from segment-level chopping.
MomentSet extract_moments(const InterleavedRun& run, const std::array<ChannelChain, 3>& chains);

/// Draws records whose extracted moments converge to `target`: a mean-zero
/// gaussian bed plus pair-correlated components and a common-phase triplet
/// component with a tunable third-order cumulant. This is a moment-matching
/// surrogate, not a physical state model; matching is exact for first and
/// second moments and exact to O(pair^2/Delta) for the fourth-order excess.
InterleavedRun synthesize_records(const MomentSet& target,
                                  const std::array<ChannelChain, 3>& chains,
                                  std::size_t n_samples, std::uint64_t seed,
                                  std::size_t n_segments = 64);

}  // namespace triphoton
