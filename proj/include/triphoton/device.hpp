#pragma once

#include "triphoton/fock.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>

namespace triphoton {

/// Rate convention for values entering from configs. Internally everything is
/// angular rad/us; cyclic MHz values are multiplied by exactly 2*pi.
enum class RateUnit { cyclic_MHz, angular_rad_per_us };

double to_angular(double value, RateUnit unit);

struct ModeParams {
    double frequency_GHz = 0.0;
    double gamma_ext = 0.0;  // rad/us
    double gamma_int = 0.0;  // rad/us
    double thermal_occupation = 0.0;

    double gamma_total() const { return gamma_ext + gamma_int; }
};

/// Physical model of the three-mode device: three-photon drive g and Kerr
/// matrix chi, all angular rad/us. The Hamiltonian uses the symmetrized Kerr
/// matrix (K + K^T)/2.
struct DeviceModel {
    std::array<ModeParams, 3> modes;
    double g = 0.0;               // rad/us
    Eigen::Matrix3d kerr = Eigen::Matrix3d::Zero();  // rad/us
    double pump_detuning = 0.0;   // rad/us, omega_p - sum(omega_i)

    double gamma(int i) const { return modes.at(i).gamma_total(); }
    Eigen::Matrix3d kerr_sym() const { return 0.5 * (kerr + kerr.transpose()); }

    DeviceModel with_g(double g_new) const {
        DeviceModel m = *this;
        m.g = g_new;
        return m;
    }
    DeviceModel without_kerr() const {
        DeviceModel m = *this;
        m.kerr.setZero();
        return m;
    }
};

/// Sum of the three total decay rates, rad/us.
double gamma_total(const DeviceModel& model);

/// H = g(a1 a2 a3 + h.c.) - sum_nm chi_sym,nm an† am† an am - (delta/3) sum_i n_i,
/// time independent in the interaction frame, rad/us with hbar = 1.
Operator build_hamiltonian(const DeviceModel& model, const SpacePtr& space);

/// Zero-temperature collapse operators {sqrt(gamma_ext,i) a_i, sqrt(gamma_int,i) a_i};
/// internal channels omitted when gamma_int,i = 0.
std::vector<Operator> collapse_operators(const DeviceModel& model, const SpacePtr& space);

/// Key/value device config. Recognized keys (see configs/device.cfg):
/// modeK.frequency_GHz, modeK.gamma_ext, modeK.gamma_int, modeK.unit (K = 1..3),
/// g, g_unit, kerr_matrix_kHz (9 row-major entries), dims, pump_detuning.
struct DeviceConfig {
    DeviceModel model;
    std::vector<int> dims = {4, 4, 4};
};

DeviceConfig parse_device_config(const std::string& text);
DeviceConfig load_device_config(const std::string& path);

/// Measured parameter set of the three-mode device used throughout the bundled
/// configs and tests: rates quoted cyclic (MHz), Kerr matrix in kHz.
DeviceModel reference_device();

}  // namespace triphoton
