#include "triphoton/mcwf.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace triphoton {

namespace {

using Eigen::VectorXcd;
using Complex = std::complex<double>;

// y += c * (m * x), no temporaries.
void add_spmv(const RowSparse& m, Complex c, const VectorXcd& x, VectorXcd& y) {
    const auto* outer = m.outerIndexPtr();
    const auto* inner = m.innerIndexPtr();
    const auto* vals = m.valuePtr();
    const Complex* xp = x.data();
    Complex* yp = y.data();
    const Eigen::Index rows = m.rows();
    for (Eigen::Index r = 0; r < rows; ++r) {
        Complex acc(0.0, 0.0);
        for (auto k = outer[r]; k < outer[r + 1]; ++k) acc += vals[k] * xp[inner[k]];
        yp[r] += c * acc;
    }
}

}  // namespace

void McwfGenerators::apply_drift(double t, const VectorXcd& psi, VectorXcd& out) const {
    out.setZero();
    add_spmv(drift_static, 1.0, psi, out);
    for (std::size_t j = 0; j < coeff.size(); ++j) {
        const double c = coeff[j](t);
        if (c != 0.0) {
            add_spmv(drift_linear[j], c, psi, out);
            const double c2 = c * c;
            const Eigen::VectorXd& d = drift_quadratic[j];
            for (Eigen::Index i = 0; i < dim; ++i) out[i] += c2 * d[i] * psi[i];
        }
    }
}

void McwfGenerators::apply_jump(std::size_t channel, double t, const VectorXcd& psi,
                                VectorXcd& out) const {
    const JumpChannel& ch = jumps.at(channel);
    out.setZero();
    for (std::size_t p = 0; p < ch.parts.size(); ++p) {
        const double c = ch.part_coeff[p] ? ch.part_coeff[p](t) : 1.0;
        if (c != 0.0) add_spmv(ch.parts[p], c, psi, out);
    }
}

namespace {

// Dormand-Prince 5(4) with FSAL.
struct Dp45Workspace {
    VectorXcd k1, k2, k3, k4, k5, k6, k7, ytmp, yerr;
    explicit Dp45Workspace(Eigen::Index n)
        : k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), yerr(n) {}
};

constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = B1 - 5179.0 / 57600, E3 = B3 - 7571.0 / 16695, E4 = B4 - 393.0 / 640,
                 E5 = B5 + 92097.0 / 339200, E6 = B6 - 187.0 / 2100, E7 = -1.0 / 40;

// One accepted/rejected DP45 trial step. Returns the scaled error estimate;
// on acceptance ynew/k7 are valid and k7 is the FSAL derivative at t+h.
double dp45_step(const McwfGenerators& gen, double t, double h, const VectorXcd& y,
                 const VectorXcd& k1, VectorXcd& ynew, Dp45Workspace& w,
                 const IntegratorOptions& opts) {
    w.ytmp = y + h * A21 * k1;
    gen.apply_drift(t + h / 5.0, w.ytmp, w.k2);
    w.ytmp = y + h * (A31 * k1 + A32 * w.k2);
    gen.apply_drift(t + 3.0 * h / 10.0, w.ytmp, w.k3);
    w.ytmp = y + h * (A41 * k1 + A42 * w.k2 + A43 * w.k3);
    gen.apply_drift(t + 4.0 * h / 5.0, w.ytmp, w.k4);
    w.ytmp = y + h * (A51 * k1 + A52 * w.k2 + A53 * w.k3 + A54 * w.k4);
    gen.apply_drift(t + 8.0 * h / 9.0, w.ytmp, w.k5);
    w.ytmp = y + h * (A61 * k1 + A62 * w.k2 + A63 * w.k3 + A64 * w.k4 + A65 * w.k5);
    gen.apply_drift(t + h, w.ytmp, w.k6);
    ynew = y + h * (B1 * k1 + B3 * w.k3 + B4 * w.k4 + B5 * w.k5 + B6 * w.k6);
    gen.apply_drift(t + h, ynew, w.k7);
    w.yerr = h * (E1 * k1 + E3 * w.k3 + E4 * w.k4 + E5 * w.k5 + E6 * w.k6 + E7 * w.k7);

    double err2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double scale =
            opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        const double e = std::abs(w.yerr[i]) / scale;
        err2 += e * e;
    }
    return std::sqrt(err2 / double(y.size()));
}

// Integrate from (t0, y) to t1 without storing the path; y and k1 updated in
// place (k1 must hold the drift at t0 on entry if fsal_valid).
void advance(const McwfGenerators& gen, double& t, double t1, VectorXcd& y, VectorXcd& k1,
             bool& fsal_valid, double& h, Dp45Workspace& w, const IntegratorOptions& opts,
             const std::function<bool(double, const VectorXcd&)>& on_step = {}) {
    if (!fsal_valid) {
        gen.apply_drift(t, y, k1);
        fsal_valid = true;
    }
    VectorXcd ynew(y.size());
    while (t < t1 - 1e-15) {
        h = std::min(h, t1 - t);
        const double err = dp45_step(gen, t, h, y, k1, ynew, w, opts);
        if (err <= 1.0) {
            t += h;
            y.swap(ynew);
            k1.swap(w.k7);
            if (on_step && !on_step(t, y)) return;
        }
        const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
        h = std::clamp(h * fac, opts.h_min, opts.h_max);
        if (h <= opts.h_min && err > 1.0)
            throw std::runtime_error("mcwf: step size underflow");
    }
}

std::vector<double> segment_breaks(double t0, double t1, const std::vector<double>& breaks) {
    std::vector<double> pts{t0};
    for (double b : breaks)
        if (b > t0 + 1e-12 && b < t1 - 1e-12) pts.push_back(b);
    pts.push_back(t1);
    std::sort(pts.begin(), pts.end());
    return pts;
}

}  // namespace

NoJumpPath integrate_no_jump(const McwfGenerators& gen, const VectorXcd& psi0, double t0,
                             double t1, const IntegratorOptions& opts,
                             const std::vector<double>& break_times) {
    NoJumpPath path;
    path.t.push_back(t0);
    path.norm2.push_back(psi0.squaredNorm());
    path.psi.push_back(psi0);
    path.psi_index.push_back(0);

    Dp45Workspace w(gen.dim);
    VectorXcd y = psi0, k1(gen.dim);
    double h = opts.h_init;
    int step = 0;
    auto record = [&](double t, const VectorXcd& state) {
        ++step;
        path.t.push_back(t);
        path.norm2.push_back(state.squaredNorm());
        if (step % opts.psi_stride == 0) {
            path.psi.push_back(state);
            path.psi_index.push_back(step);
        }
        return true;
    };
    for (const auto pts = segment_breaks(t0, t1, break_times); const double seg_end : pts) {
        if (seg_end <= t0) continue;
        double t = path.t.back();
        bool fsal = false;  // coefficients may be discontinuous at the break
        advance(gen, t, seg_end, y, k1, fsal, h, w, opts, record);
    }
    if (path.psi_index.back() != step) {  // always checkpoint the endpoint
        path.psi.push_back(y);
        path.psi_index.push_back(step);
    }
    return path;
}

namespace {

// Continue integration from (t_cur, psi) until norm^2 <= threshold or t1.
// Returns true when the threshold was crossed; leaves (t_lo, psi_lo) at the
// last state above the threshold and t_hi just below it.
struct CrossSearch {
    double t_lo, t_hi;
    VectorXcd psi_lo, psi_hi;
    bool crossed = false;
};

CrossSearch find_crossing(const McwfGenerators& gen, double t_cur, double t1, const VectorXcd& psi,
                          double threshold, const IntegratorOptions& opts,
                          const std::vector<double>& break_times) {
    CrossSearch cs{t_cur, t_cur, psi, psi, false};
    Dp45Workspace w(gen.dim);
    VectorXcd y = psi, k1(gen.dim);
    double h = opts.h_init;
    for (const auto pts = segment_breaks(t_cur, t1, break_times); const double seg_end : pts) {
        if (seg_end <= t_cur || cs.crossed) continue;
        double t = cs.t_lo;
        bool fsal = false;
        advance(gen, t, seg_end, y, k1, fsal, h, w, opts, [&](double tt, const VectorXcd& state) {
            if (state.squaredNorm() <= threshold) {
                cs.t_hi = tt;
                cs.psi_hi = state;
                cs.crossed = true;
                return false;
            }
            cs.t_lo = tt;
            cs.psi_lo = state;
            return true;
        });
        if (!cs.crossed) {
            cs.t_lo = seg_end;
            cs.psi_lo = y;
        }
    }
    return cs;
}

// Norm-threshold bisection to 1e-8 in the jump time within [t_lo, t_hi].
std::pair<double, VectorXcd> bisect_jump(const McwfGenerators& gen, double t_lo, double t_hi,
                                         const VectorXcd& psi_lo, double threshold,
                                         const IntegratorOptions& opts) {
    constexpr double kTimeTol = 1e-8;
    Dp45Workspace w(gen.dim);
    VectorXcd base = psi_lo, probe;
    double base_t = t_lo;
    while (t_hi - base_t > kTimeTol) {
        const double mid = 0.5 * (base_t + t_hi);
        probe = base;
        VectorXcd k1(gen.dim);
        double t = base_t, h = std::max((mid - base_t) / 4.0, opts.h_min * 10);
        bool fsal = false;
        advance(gen, t, mid, probe, k1, fsal, h, w, opts);
        if (probe.squaredNorm() <= threshold) {
            t_hi = mid;
        } else {
            base_t = mid;
            base = probe;
        }
    }
    return {base_t, base};
}

std::size_t pick_channel(const McwfGenerators& gen, double t, const VectorXcd& psi, double u) {
    std::vector<double> w(gen.jumps.size());
    VectorXcd tmp(gen.dim);
    double total = 0.0;
    for (std::size_t c = 0; c < gen.jumps.size(); ++c) {
        gen.apply_jump(c, t, psi, tmp);
        w[c] = tmp.squaredNorm();
        total += w[c];
    }
    double acc = 0.0;
    for (std::size_t c = 0; c < gen.jumps.size(); ++c) {
        acc += w[c];
        if (u * total <= acc) return c;
    }
    return gen.jumps.size() - 1;
}

}  // namespace

TrajectoryOutcome sample_trajectory(const McwfGenerators& gen, const NoJumpPath& root, double t0,
                                    double t1, std::mt19937_64& rng, const IntegratorOptions& opts,
                                    const std::vector<double>& break_times) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    TrajectoryOutcome out;

    double r = unif(rng);
    if (r > root.norm2.back()) {
        // First jump: inverse-CDF lookup on the cached root norm curve.
        const auto it = std::upper_bound(root.norm2.begin(), root.norm2.end(), r,
                                         [](double rv, double n2) { return rv > n2; });
        const std::size_t hi = std::distance(root.norm2.begin(), it);
        // Checkpoint at or before the crossing step.
        std::size_t cp = 0;
        while (cp + 1 < root.psi_index.size() &&
               root.psi_index[cp + 1] < static_cast<int>(hi))
            ++cp;
        double t_lo = root.t[root.psi_index[cp]];
        VectorXcd psi = root.psi[cp];
        // Walk forward to the bracketing step, then bisect.
        CrossSearch cs = find_crossing(gen, t_lo, t1, psi, r, opts, break_times);
        if (!cs.crossed) {  // numerical edge: treat as survivor
            out.psi_end = root.final_state().normalized();
            return out;
        }
        auto [tj, psij] = bisect_jump(gen, cs.t_lo, cs.t_hi, cs.psi_lo, r, opts);
        VectorXcd jumped(gen.dim);
        gen.apply_jump(pick_channel(gen, tj, psij, unif(rng)), tj, psij, jumped);
        const double nj = jumped.norm();
        if (nj < 1e-150) {
            std::cerr << "mcwf: norm underflow at jump, resampling\n";
            return sample_trajectory(gen, root, t0, t1, rng, opts, break_times);
        }
        psi = jumped / nj;
        out.n_jumps = 1;
        double t_cur = tj;
        // Subsequent jumps on the private branch.
        while (true) {
            r = unif(rng);
            CrossSearch next = find_crossing(gen, t_cur, t1, psi, r, opts, break_times);
            if (!next.crossed) {
                out.psi_end = next.psi_lo.normalized();
                return out;
            }
            auto [tj2, psij2] = bisect_jump(gen, next.t_lo, next.t_hi, next.psi_lo, r, opts);
            gen.apply_jump(pick_channel(gen, tj2, psij2, unif(rng)), tj2, psij2, jumped);
            const double nj2 = jumped.norm();
            if (nj2 < 1e-150) {
                std::cerr << "mcwf: norm underflow at jump, resampling\n";
                return sample_trajectory(gen, root, t0, t1, rng, opts, break_times);
            }
            psi = jumped / nj2;
            ++out.n_jumps;
            t_cur = tj2;
        }
    }
    out.psi_end = root.final_state().normalized();
    return out;
}

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 of (seed, index) gives independent, schedule-free streams.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    auto mix = [](std::uint64_t v) {
        v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ULL;
        v = (v ^ (v >> 27)) * 0x94D049BB133111EBULL;
        return v ^ (v >> 31);
    };
    return std::mt19937_64(mix(mix(z)));
}

Eigen::MatrixXcd integrate_master_equation(const McwfGenerators& gen,
                                           const Eigen::MatrixXcd& rho0, double t0, double t1,
                                           int n_steps) {
    const Eigen::Index n = gen.dim;
    Eigen::MatrixXcd rho = rho0;
    VectorXcd col(n), out(n);

    // drho/dt = D rho + rho D† + sum_c L_c rho L_c†, assembled column-wise.
    auto rhs = [&](double t, const Eigen::MatrixXcd& r) {
        Eigen::MatrixXcd drho(n, n), tmp(n, n);
        for (Eigen::Index c = 0; c < n; ++c) {
            col = r.col(c);
            gen.apply_drift(t, col, out);
            drho.col(c) = out;
        }
        Eigen::MatrixXcd radj = r.adjoint();
        for (Eigen::Index c = 0; c < n; ++c) {
            col = radj.col(c);
            gen.apply_drift(t, col, out);
            tmp.col(c) = out;
        }
        drho += tmp.adjoint();
        for (std::size_t ch = 0; ch < gen.jumps.size(); ++ch) {
            Eigen::MatrixXcd lr(n, n);
            for (Eigen::Index c = 0; c < n; ++c) {
                col = r.col(c);
                gen.apply_jump(ch, t, col, out);
                lr.col(c) = out;
            }
            Eigen::MatrixXcd lradj = lr.adjoint();
            for (Eigen::Index c = 0; c < n; ++c) {
                col = lradj.col(c);
                gen.apply_jump(ch, t, col, out);
                tmp.col(c) = out;
            }
            drho += tmp.adjoint();
        }
        return drho;
    };

    const double h = (t1 - t0) / n_steps;
    for (int s = 0; s < n_steps; ++s) {
        const double t = t0 + s * h;
        const Eigen::MatrixXcd k1 = rhs(t, rho);
        const Eigen::MatrixXcd k2 = rhs(t + h / 2, rho + (h / 2) * k1);
        const Eigen::MatrixXcd k3 = rhs(t + h / 2, rho + (h / 2) * k2);
        const Eigen::MatrixXcd k4 = rhs(t + h, rho + h * k3);
        rho += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return rho;
}

}  // namespace triphoton
