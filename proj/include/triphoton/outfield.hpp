#pragma once

#include "triphoton/device.hpp"
#include "triphoton/pulses.hpp"

#include <array>
#include <complex>

namespace triphoton {

/// One pass of the ordered-simplex quadrature: n_points nodes per axis over
/// [0, t_max], nodes strictly ordered t1 < t2 < ... inside each cell.
struct OrderedSimplexGrid {
    double t_max = 0.0;
    int n_points = 0;
    int dimension = 2;
};

struct QuadratureOptions {
    int initial_panels = 2048;
    double rel_tol = 1e-7;
    int max_refinements = 4;
};

/// Steady-state two-time correlator <a_i†(t'')a_i(t')> for separation
/// dt_sep = t'' - t' >= 0 (Kerr neglected). The gamma_j+gamma_k = gamma_i
/// degeneracy is evaluated through its exact limit (dt_sep/2) e^{-g_i dt/2}.
std::complex<double> two_time_correlator(const DeviceModel& model, int i, double dt_sep);

/// <N_i> = 2 gamma_ext,i  double-ordered integral of f f <a†a>_ss. Scales as g^2.
double output_mean_photon(const DeviceModel& model, int mode_index, const TemporalMode& f,
                          const QuadratureOptions& opts = {});

/// Complex <A1 A2 A3>: triple ordered integral of the first-order kernel summed
/// over all 6 mode-index permutations. Purely imaginary for real f; scales as g.
std::complex<double> output_triple(const DeviceModel& model, const TemporalMode& f,
                                   const QuadratureOptions& opts = {});

/// <N_j N_k> from the three lowest-order four-time kernels over the ordered
/// 4-simplex. Near the gamma_i = gamma_j + gamma_k pole the (regular) kernel
/// sum is evaluated at gamma_i(1 +- delta) and averaged.
double output_number_number(const DeviceModel& model, int j, int k, const TemporalMode& f,
                            const QuadratureOptions& opts = {});

/// All output correlators for one filter; nn indexed by the complementary mode.
struct OutputCorrelators {
    std::complex<double> triple;
    std::array<double, 3> n_out{};
    std::array<double, 3> nn_out{};
};

OutputCorrelators output_correlators(const DeviceModel& model, const TemporalMode& f,
                                     const QuadratureOptions& opts = {});

}  // namespace triphoton
