#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace triphoton {

/// Shot-noise tunnel junction output power model:
///   P(V) = G * BW * kB * { T_N + S(f_s, V, T) + r * S(f_i, V, T) },
/// with S the symmetrized coth bracket
///   S(f, V, T) = (1/2)[u+ coth(u+/T) + u- coth(u-/T)],  u± = (eV ± hf)/(2 kB).
/// V in microvolts, frequencies in GHz, temperatures in kelvin, P in watts.
struct SntjModel {
    double gain = 1.0;             // linear power gain G
    double bandwidth_MHz = 1.0;    // BW
    double t_noise_K = 0.0;        // amplifier noise temperature T_N
    double t_phys_K = 0.05;        // junction physical temperature T
    double f_signal_GHz = 5.0;
    double f_idler_GHz = 0.0;
    double idler_ratio = 0.0;      // r = G_idler->signal / G_signal->signal
};

double sntj_power(double v_uV, const SntjModel& model);

/// (V, P) samples of a calibration sweep.
struct SntjCurve {
    std::vector<double> v_uV;
    std::vector<double> p_W;
};

SntjCurve synthesize_sntj_curve(const SntjModel& model, const std::vector<double>& v_uV,
                                double relative_noise, std::uint64_t seed);

/// Gain compression profile lambda(V) in (0, 1], linearly interpolated.
struct CompressionProfile {
    std::vector<double> v_uV;
    std::vector<double> lambda;
    double operator()(double v) const;
};

/// Divides the measured power pointwise by lambda(V) before fitting.
SntjCurve apply_compression(const SntjCurve& curve, const CompressionProfile& profile);

struct SntjFitOptions {
    bool fit_idler = true;  // when false, r is pinned to 0
    int max_iterations = 400;
    double rel_tol = 1e-14;
};

struct SntjFit {
    SntjModel model;
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();  // (G, T_N, T, r)
    double rss = 0.0;
    int iterations = 0;
    bool identifiable = true;  // V range crosses the quantum/shot transition
};

/// Damped Gauss-Newton (Levenberg-Marquardt) with the analytic Jacobian of the
/// coth bracket; init provides frequencies, bandwidth and starting values.
SntjFit fit_sntj(const SntjCurve& curve, const SntjModel& init,
                 const SntjFitOptions& opts = {});

/// SNTJ CSV files: two columns V_uV, P_W with a '#'-comment header.
void write_sntj_csv(const std::string& path, const SntjCurve& curve, const std::string& header);
SntjCurve read_sntj_csv(const std::string& path);

}  // namespace triphoton
