#include "triphoton/device.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace triphoton {

double to_angular(double value, RateUnit unit) {
    switch (unit) {
        case RateUnit::cyclic_MHz: return 2.0 * std::numbers::pi * value;
        case RateUnit::angular_rad_per_us: return value;
    }
    throw std::invalid_argument("to_angular: unknown unit");
}

double gamma_total(const DeviceModel& model) {
    double sum = 0.0;
    for (const auto& m : model.modes) {
        if (m.gamma_ext <= 0.0) throw std::invalid_argument("gamma_ext must be > 0");
        if (m.gamma_int < 0.0) throw std::invalid_argument("gamma_int must be >= 0");
        sum += m.gamma_total();
    }
    return sum;
}

Operator build_hamiltonian(const DeviceModel& model, const SpacePtr& space) {
    if (space->num_modes() != 3)
        throw std::invalid_argument("build_hamiltonian: space must have exactly 3 modes");

    const Operator a1 = annihilation(space, 0);
    const Operator a2 = annihilation(space, 1);
    const Operator a3 = annihilation(space, 2);

    Operator triple = a1 * a2 * a3;
    Operator h = Complex(model.g) * (triple + triple.adjoint());

    const Eigen::Matrix3d chi = model.kerr_sym();
    std::array<Operator, 3> num{number_operator(space, 0), number_operator(space, 1),
                                number_operator(space, 2)};
    for (int n = 0; n < 3; ++n) {
        for (int m = 0; m < 3; ++m) {
            if (chi(n, m) == 0.0) continue;
            // an† am† an am = n_n n_m for n != m, n(n-1) for n == m.
            Operator term = (n == m) ? num[n] * num[n] - num[n] : num[n] * num[m];
            h = h - Complex(chi(n, m)) * term;
        }
    }
    if (model.pump_detuning != 0.0) {
        // Detuning split equally over the three rotating frames.
        const double d = model.pump_detuning / 3.0;
        h = h - Complex(d) * (num[0] + num[1] + num[2]);
    }
    return h;
}

std::vector<Operator> collapse_operators(const DeviceModel& model, const SpacePtr& space) {
    std::vector<Operator> ops;
    for (int i = 0; i < 3; ++i) {
        const ModeParams& m = model.modes[i];
        if (m.gamma_ext <= 0.0 || m.gamma_int < 0.0)
            throw std::invalid_argument("collapse_operators: negative rates");
        if (m.thermal_occupation != 0.0)
            throw std::invalid_argument(
                "collapse_operators: only the zero-temperature model is supported");
        ops.push_back(Complex(std::sqrt(m.gamma_ext)) * annihilation(space, i));
        if (m.gamma_int > 0.0)
            ops.push_back(Complex(std::sqrt(m.gamma_int)) * annihilation(space, i));
    }
    return ops;
}

namespace {

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

RateUnit parse_unit(const std::string& s) {
    if (s == "cyclic_MHz") return RateUnit::cyclic_MHz;
    if (s == "angular_rad_per_us") return RateUnit::angular_rad_per_us;
    throw std::invalid_argument("config: unknown rate unit '" + s + "'");
}

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

}  // namespace

DeviceConfig parse_device_config(const std::string& text) {
    const auto kv = parse_key_values(text);
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::invalid_argument("config: missing key '" + key + "'");
        return it->second;
    };

    DeviceConfig cfg;
    for (int i = 0; i < 3; ++i) {
        const std::string p = "mode" + std::to_string(i + 1) + ".";
        const RateUnit unit = parse_unit(get(p + "unit"));
        ModeParams& m = cfg.model.modes[i];
        m.frequency_GHz = std::stod(get(p + "frequency_GHz"));
        m.gamma_ext = to_angular(std::stod(get(p + "gamma_ext")), unit);
        m.gamma_int = to_angular(std::stod(get(p + "gamma_int")), unit);
        if (m.frequency_GHz <= 0.0) throw std::invalid_argument("config: frequency must be > 0");
    }
    cfg.model.g = to_angular(std::stod(get("g")), parse_unit(get("g_unit")));
    if (auto it = kv.find("pump_detuning"); it != kv.end())
        cfg.model.pump_detuning = std::stod(it->second);

    const auto kerr_kHz = parse_numbers(get("kerr_matrix_kHz"));
    if (kerr_kHz.size() != 9)
        throw std::invalid_argument("config: kerr_matrix_kHz needs 9 entries");
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            cfg.model.kerr(r, c) = to_angular(kerr_kHz[3 * r + c] * 1e-3, RateUnit::cyclic_MHz);

    const auto dims = parse_numbers(get("dims"));
    cfg.dims.clear();
    for (double d : dims) cfg.dims.push_back(static_cast<int>(d));
    if (cfg.dims.size() != 3) throw std::invalid_argument("config: dims needs 3 entries");
    return cfg;
}

DeviceConfig load_device_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_device_config(ss.str());
}

DeviceModel reference_device() {
    DeviceModel m;
    const double f[3] = {5.560, 6.831, 7.902};
    const double ge[3] = {0.604, 1.242, 0.746};   // cyclic MHz
    const double gi[3] = {0.035, 0.097, 0.308};   // cyclic MHz
    for (int i = 0; i < 3; ++i) {
        m.modes[i].frequency_GHz = f[i];
        m.modes[i].gamma_ext = to_angular(ge[i], RateUnit::cyclic_MHz);
        m.modes[i].gamma_int = to_angular(gi[i], RateUnit::cyclic_MHz);
    }
    m.g = to_angular(0.03, RateUnit::cyclic_MHz);
    Eigen::Matrix3d kerr_kHz;
    kerr_kHz << 36.4, 70.1, 136.0,
                45.4, 28.7, 107.4,
                139.5, 172.6, 160.3;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            m.kerr(r, c) = to_angular(kerr_kHz(r, c) * 1e-3, RateUnit::cyclic_MHz);
    return m;
}

}  // namespace triphoton
