#include "triphoton/sntj.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace triphoton {

namespace {

// CODATA constants to 6 digits.
constexpr double kBoltzmann = 1.38065e-23;               // J/K
constexpr double kEoverTwoKb_K_per_uV = 5.80191e-3;      // e*1uV / (2 kB), kelvin
constexpr double kHoverTwoKb_K_per_GHz = 2.39962e-2;     // h*1GHz / (2 kB), kelvin

// x coth(x/T) -> T as x -> 0; series keeps it smooth through the origin.
double u_coth(double u, double t) {
    const double x = u / t;
    if (std::abs(x) < 1e-6) return t + u * x / 3.0;
    if (std::abs(x) > 350.0) return std::abs(u);
    return u * std::cosh(x) / std::sinh(x);
}

// d/dT [u coth(u/T)] = (u/T)^2 / sinh^2(u/T) -> 1 as u -> 0.
double du_coth_dT(double u, double t) {
    const double x = u / t;
    if (std::abs(x) < 1e-6) return 1.0 - x * x / 3.0;
    if (std::abs(x) > 350.0) return 0.0;
    const double s = x / std::sinh(x);
    return s * s;
}

double bracket(double f_GHz, double v_uV, double t_K) {
    const double up = kEoverTwoKb_K_per_uV * v_uV + kHoverTwoKb_K_per_GHz * f_GHz;
    const double um = kEoverTwoKb_K_per_uV * v_uV - kHoverTwoKb_K_per_GHz * f_GHz;
    return 0.5 * (u_coth(up, t_K) + u_coth(um, t_K));
}

double bracket_dT(double f_GHz, double v_uV, double t_K) {
    const double up = kEoverTwoKb_K_per_uV * v_uV + kHoverTwoKb_K_per_GHz * f_GHz;
    const double um = kEoverTwoKb_K_per_uV * v_uV - kHoverTwoKb_K_per_GHz * f_GHz;
    return 0.5 * (du_coth_dT(up, t_K) + du_coth_dT(um, t_K));
}

}  // namespace

double sntj_power(double v_uV, const SntjModel& m) {
    if (m.t_phys_K <= 0.0) throw std::invalid_argument("sntj_power: temperature must be > 0");
    double s = m.t_noise_K + bracket(m.f_signal_GHz, v_uV, m.t_phys_K);
    if (m.idler_ratio != 0.0) s += m.idler_ratio * bracket(m.f_idler_GHz, v_uV, m.t_phys_K);
    return m.gain * m.bandwidth_MHz * 1e6 * kBoltzmann * s;
}

SntjCurve synthesize_sntj_curve(const SntjModel& model, const std::vector<double>& v_uV,
                                double relative_noise, std::uint64_t seed) {
    SntjCurve c;
    c.v_uV = v_uV;
    c.p_W.reserve(v_uV.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double v : v_uV)
        c.p_W.push_back(sntj_power(v, model) * (1.0 + relative_noise * gauss(rng)));
    return c;
}

double CompressionProfile::operator()(double v) const {
    if (v_uV.size() < 2) throw std::invalid_argument("compression profile needs >= 2 points");
    const auto it = std::lower_bound(v_uV.begin(), v_uV.end(), v);
    std::size_t hi = std::clamp<std::size_t>(std::distance(v_uV.begin(), it), 1, v_uV.size() - 1);
    const double frac = (v - v_uV[hi - 1]) / (v_uV[hi] - v_uV[hi - 1]);
    return lambda[hi - 1] + std::clamp(frac, 0.0, 1.0) * (lambda[hi] - lambda[hi - 1]);
}

SntjCurve apply_compression(const SntjCurve& curve, const CompressionProfile& profile) {
    SntjCurve out;
    out.v_uV = curve.v_uV;
    out.p_W.reserve(curve.p_W.size());
    for (std::size_t i = 0; i < curve.v_uV.size(); ++i) {
        const double l = profile(curve.v_uV[i]);
        if (l <= 0.0 || l > 1.0 + 1e-12)
            throw std::invalid_argument("apply_compression: lambda must be in (0, 1]");
        out.p_W.push_back(curve.p_W[i] / l);
    }
    return out;
}

SntjFit fit_sntj(const SntjCurve& curve, const SntjModel& init, const SntjFitOptions& opts) {
    const std::size_t m = curve.v_uV.size();
    if (m < 5) throw std::invalid_argument("fit_sntj: too few points");
    const int np = opts.fit_idler ? 4 : 3;

    // The onset of shot noise over quantum noise pins T and r; without
    // coverage of |eV| ~ hf the fit cannot separate them from T_N.
    double vmax = 0.0;
    for (double v : curve.v_uV) vmax = std::max(vmax, std::abs(v));
    const double v_transition =
        2.0 * kHoverTwoKb_K_per_GHz * init.f_signal_GHz / (2.0 * kEoverTwoKb_K_per_uV);
    const bool identifiable = vmax > v_transition;

    SntjModel model = init;
    if (!opts.fit_idler) model.idler_ratio = 0.0;

    auto residuals = [&](const SntjModel& mm, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        const double pref = mm.bandwidth_MHz * 1e6 * kBoltzmann;
        for (std::size_t i = 0; i < m; ++i) {
            const double v = curve.v_uV[i];
            const double bs = bracket(mm.f_signal_GHz, v, mm.t_phys_K);
            const double bi = mm.f_idler_GHz > 0.0 ? bracket(mm.f_idler_GHz, v, mm.t_phys_K) : 0.0;
            const double s = mm.t_noise_K + bs + mm.idler_ratio * bi;
            r(i) = mm.gain * pref * s - curve.p_W[i];
            if (jac) {
                (*jac)(i, 0) = pref * s;             // d/dG
                (*jac)(i, 1) = mm.gain * pref;       // d/dT_N
                (*jac)(i, 2) = mm.gain * pref *
                               (bracket_dT(mm.f_signal_GHz, v, mm.t_phys_K) +
                                mm.idler_ratio *
                                    (mm.f_idler_GHz > 0.0
                                         ? bracket_dT(mm.f_idler_GHz, v, mm.t_phys_K)
                                         : 0.0));    // d/dT
                if (np == 4) (*jac)(i, 3) = mm.gain * pref * bi;  // d/dr
            }
        }
    };

    Eigen::VectorXd r(m);
    Eigen::MatrixXd jac(m, np);
    residuals(model, r, &jac);
    double rss = r.squaredNorm();

    double lambda = 1e-3;
    SntjFit fit;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        Eigen::MatrixXd damped = jtj;
        damped.diagonal() += lambda * jtj.diagonal();
        if (jtj.diagonal().minCoeff() <= 0.0)
            throw std::runtime_error("fit_sntj: rank-deficient Jacobian");
        const Eigen::VectorXd step = damped.ldlt().solve(-jtr);

        SntjModel trial = model;
        trial.gain += step(0);
        trial.t_noise_K += step(1);
        trial.t_phys_K += step(2);
        if (np == 4) trial.idler_ratio += step(3);
        if (trial.gain <= 0.0 || trial.t_phys_K <= 1e-6) {
            lambda *= 10.0;
            continue;
        }
        Eigen::VectorXd rt(m);
        residuals(trial, rt, nullptr);
        const double rss_t = rt.squaredNorm();
        if (rss_t < rss) {
            const double improvement = (rss - rss_t) / std::max(rss, 1e-300);
            model = trial;
            residuals(model, r, &jac);
            rss = rss_t;
            lambda = std::max(lambda / 3.0, 1e-12);
            if (improvement < opts.rel_tol) break;
        } else {
            lambda *= 4.0;
            if (lambda > 1e12)
                throw std::runtime_error("fit_sntj: no convergence (damping diverged)");
        }
    }
    if (it >= opts.max_iterations) throw std::runtime_error("fit_sntj: max iterations reached");

    fit.model = model;
    fit.rss = rss;
    fit.iterations = it + 1;
    fit.identifiable = identifiable;

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const double dof = std::max<double>(1.0, double(m) - np);
    const Eigen::MatrixXd cov = (rss / dof) * jtj.inverse();
    fit.covariance.topLeftCorner(np, np) = cov;
    return fit;
}

void write_sntj_csv(const std::string& path, const SntjCurve& curve, const std::string& header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    if (!header.empty()) out << "# " << header << "\n";
    out << "V_uV,P_W\n";
    out.precision(12);
    for (std::size_t i = 0; i < curve.v_uV.size(); ++i)
        out << curve.v_uV[i] << "," << curve.p_W[i] << "\n";
}

SntjCurve read_sntj_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    SntjCurve c;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("V_uV", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        c.v_uV.push_back(std::stod(line.substr(0, comma)));
        c.p_W.push_back(std::stod(line.substr(comma + 1)));
    }
    return c;
}

}  // namespace triphoton
