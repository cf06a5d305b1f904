#pragma once

#include "triphoton/device.hpp"
#include "triphoton/fock.hpp"

#include <array>

namespace triphoton {

/// Closed-form second-order steady-state expansion coefficients. chi_c is the
/// population coefficient of |001><001| (named to avoid a clash with the Kerr
/// matrix chi).
struct PTCoefficients {
    double lambda = 0.0;           // g / gamma_T
    double first_order_amp = 0.0;  // 2g / gamma_T
    double beta = 0.0;             // |111><111|
    double delta = 0.0;            // |222><000| + h.c., equals -sqrt(2)*beta
    double epsilon = 0.0;          // |011><011|
    double theta = 0.0;            // |101><101|
    double psi = 0.0;              // |110><110|
    double kappa = 0.0;            // |100><100|
    double xi = 0.0;               // |010><010|
    double chi_c = 0.0;            // |001><001|
};

PTCoefficients pt_coefficients(const DeviceModel& model);

/// Leading-order steady-state cavity correlators. nn is indexed by the
/// complementary mode: nn[i] = <n_j n_k> with {i,j,k} = {0,1,2}.
struct CavityCorrelators {
    double triple_abs = 0.0;
    std::array<double, 3> n{};
    std::array<double, 3> nn{};
};

/// triple = 2g/gT, n_i = (2g/gT)^2 gT/g_i, nn_jk = (2g/gT)^2 gT/(g_j+g_k).
/// Warns (stderr) above lambda = 0.1, throws above 0.5. Kerr terms are ignored.
CavityCorrelators pt_cavity_correlators(const DeviceModel& model);

/// Assembles the expansion |000><000| + i(2g/gT)(|000><111| - |111><000|) +
/// second-order populations/coherences. Raw expansion by default (trace
/// 1 + O(lambda^2)); renormalize divides by the trace.
DensityMatrix pt_density_matrix(const DeviceModel& model, const SpacePtr& space,
                                bool renormalize = false);

/// Sparse Liouvillian of the model (vectorized, column-major vec(rho)).
SparseMat build_liouvillian(const DeviceModel& model, const SpacePtr& space);

/// Brute-force steady state: solves L[rho] = 0 with one row replaced by the
/// trace constraint, sparse LU. Exact oracle for the perturbative results.
DensityMatrix liouvillian_steady_state(const DeviceModel& model, const SpacePtr& space);

/// Correlators evaluated on an arbitrary density matrix (same layout as the
/// perturbative ones); used to compare oracle against closed forms.
CavityCorrelators cavity_correlators(const DensityMatrix& rho);

}  // namespace triphoton
