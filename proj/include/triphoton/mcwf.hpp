#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace triphoton {

using RowSparse = Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor>;
using TimeCoeff = std::function<double(double)>;

/// Generators of a Monte-Carlo wavefunction unraveling with linear drift
///   dpsi/dt = [D0 + sum_j c_j(t) D1_j + c_j(t)^2 diag(D2_j)] psi,
/// where D0 already contains -iH_static - (1/2) sum L†L (static parts) and the
/// jump channels are L_c(t) = sum_p coeff_{c,p}(t) Op_{c,p}.
struct McwfGenerators {
    Eigen::Index dim = 0;
    RowSparse drift_static;
    std::vector<RowSparse> drift_linear;
    std::vector<Eigen::VectorXd> drift_quadratic;  // applied as c^2 * diag
    std::vector<TimeCoeff> coeff;                  // one per linear/quadratic channel

    struct JumpChannel {
        std::vector<RowSparse> parts;
        std::vector<TimeCoeff> part_coeff;  // empty entry -> constant 1
    };
    std::vector<JumpChannel> jumps;

    void apply_drift(double t, const Eigen::VectorXcd& psi, Eigen::VectorXcd& out) const;
    void apply_jump(std::size_t channel, double t, const Eigen::VectorXcd& psi,
                    Eigen::VectorXcd& out) const;
};

struct IntegratorOptions {
    double rtol = 1e-8;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_min = 1e-11;
    double h_max = 0.05;
    int psi_stride = 1;  // store full state every stride-th accepted step
};

/// Deterministic no-jump evolution with stored checkpoints; norm^2 decays
/// monotonically and serves as the jump-time inverse CDF.
struct NoJumpPath {
    std::vector<double> t;
    std::vector<double> norm2;
    std::vector<Eigen::VectorXcd> psi;  // checkpoints (stride from options)
    std::vector<int> psi_index;         // step index of each checkpoint
    const Eigen::VectorXcd& final_state() const { return psi.back(); }
};

NoJumpPath integrate_no_jump(const McwfGenerators& gen, const Eigen::VectorXcd& psi0, double t0,
                             double t1, const IntegratorOptions& opts,
                             const std::vector<double>& break_times = {});

struct TrajectoryOutcome {
    Eigen::VectorXcd psi_end;  // normalized
    int n_jumps = 0;
};

/// Draws one trajectory against a shared root no-jump path: survivors reuse the
/// cached endpoint, jumpers bisect the stored norm curve to 1e-8 in the jump
/// time, apply the selected channel and continue on a fresh branch.
TrajectoryOutcome sample_trajectory(const McwfGenerators& gen, const NoJumpPath& root, double t0,
                                    double t1, std::mt19937_64& rng,
                                    const IntegratorOptions& opts,
                                    const std::vector<double>& break_times = {});

/// Deterministic RNG stream for trajectory `index` of run `seed`.
std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index);

/// Fixed-step RK4 master-equation integration built from the same generators:
/// drho/dt = D rho + rho D† + sum_c L_c rho L_c†. Oracle-grade, small systems.
Eigen::MatrixXcd integrate_master_equation(const McwfGenerators& gen,
                                           const Eigen::MatrixXcd& rho0, double t0, double t1,
                                           int n_steps);

}  // namespace triphoton
