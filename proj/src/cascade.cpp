#include "triphoton/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace triphoton {

namespace {

RowSparse to_row_sparse(const SparseMat& m) { return RowSparse(m); }

double support_end(const std::array<TemporalMode, 3>& wp) {
    double end = 0.0;
    for (const auto& w : wp) end = std::max(end, w.t_end);
    return end;
}

}  // namespace

CascadeSystem make_cascade(const DeviceModel& model, const std::vector<int>& phys_dims,
                           const std::vector<int>& virt_dims,
                           const std::array<TemporalMode, 3>& wavepackets, double grid_dt) {
    if (phys_dims.size() != 3 || virt_dims.size() != 3)
        throw std::invalid_argument("make_cascade: three physical and three virtual modes");
    std::vector<int> dims = phys_dims;
    dims.insert(dims.end(), virt_dims.begin(), virt_dims.end());

    CascadeSystem sys;
    sys.space = make_space(dims);
    sys.model = model;
    sys.wavepackets = wavepackets;
    sys.t_end = support_end(wavepackets);
    sys.grid_dt = grid_dt;
    return sys;
}

double default_warmup(const DeviceModel& model) {
    const double gmin = std::min({model.gamma(0), model.gamma(1), model.gamma(2)});
    return 10.0 / gmin;
}

CascadeSystem steady_state_windowing(const CascadeSystem& sys, double warmup) {
    if (warmup < 0.0) throw std::invalid_argument("steady_state_windowing: warmup must be >= 0");
    CascadeSystem out = sys;
    for (auto& w : out.wavepackets) w = w.shifted(warmup);
    out.t_end = support_end(out.wavepackets);
    return out;
}

CouplingSeries gv_from_wavepacket(const TemporalMode& v) {
    const double dt = v.dt;
    const auto n = static_cast<std::size_t>(std::round(v.support_length() / dt));
    CouplingSeries s;
    s.t.resize(n + 1);
    s.F.resize(n + 1);
    s.gv.resize(n + 1);

    std::vector<double> v2(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        s.t[k] = v.t_start + double(k) * dt;
        const double val = v.value(s.t[k]);
        v2[k] = val * val;
    }
    s.F[0] = 0.0;
    for (std::size_t k = 1; k <= n; ++k) s.F[k] = s.F[k - 1] + 0.5 * dt * (v2[k - 1] + v2[k]);
    const double f_end = s.F[n];
    // The trapezoid mass differs from the discrete-normalization sum by edge
    // terms (largest for the boxcar); renormalizing both F and v keeps
    // F(t_end) = 1 exact and the coupling self-consistent.
    if (std::abs(f_end - 1.0) > 0.05)
        throw std::invalid_argument("gv_from_wavepacket: wavepacket not normalized");
    for (auto& f : s.F) f /= f_end;
    s.v_norm = std::sqrt(f_end);

    // Clamp at the first strictly positive cell: the divergence of -1/sqrt(F)
    // carries vanishing captured weight.
    for (std::size_t k = 1; k <= n; ++k) {
        if (s.F[k] > 0.0) {
            s.f_min = s.F[k];
            break;
        }
    }
    for (std::size_t k = 0; k <= n; ++k) {
        const double vk = v.value(s.t[k]) / s.v_norm;
        s.gv[k] = (s.F[k] > 0.0 && vk != 0.0) ? -vk / std::sqrt(std::max(s.F[k], s.f_min)) : 0.0;
    }
    return s;
}

namespace {

// Continuous g_v(t): analytic v(t), linearly interpolated (renormalized) F.
class GvFunction {
public:
    GvFunction(TemporalMode mode, CouplingSeries series)
        : mode_(std::move(mode)), s_(std::move(series)) {}

    double operator()(double t) const {
        const double v = mode_.value(t) / s_.v_norm;
        if (v == 0.0) return 0.0;
        const double f = interp_F(t);
        if (f <= 0.0) return 0.0;
        return -v / std::sqrt(std::max(f, s_.f_min));
    }

private:
    double interp_F(double t) const {
        const double dt = s_.t[1] - s_.t[0];
        const double u = (t - s_.t.front()) / dt;
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(u, 0.0)),
                                             s_.F.size() - 2);
        const double frac = u - double(k);
        return s_.F[k] + frac * (s_.F[k + 1] - s_.F[k]);
    }

    TemporalMode mode_;
    CouplingSeries s_;
};

std::array<GvFunction, 3> make_gv(const CascadeSystem& sys) {
    auto build = [&](int j) {
        TemporalMode m = sys.wavepackets[j].resampled(sys.grid_dt);
        return GvFunction(m, gv_from_wavepacket(m));
    };
    return {build(0), build(1), build(2)};
}

}  // namespace

CascadeGenerators build_cascade_generators(const CascadeSystem& sys, double t) {
    const SpacePtr& sp = sys.space;
    const auto gv = make_gv(sys);

    Operator h = [&] {
        // H_r on the physical modes; no coherent dynamics for the fictitious ones.
        const Operator a1 = annihilation(sp, 0), a2 = annihilation(sp, 1),
                       a3 = annihilation(sp, 2);
        Operator triple = a1 * a2 * a3;
        Operator hr = Complex(sys.model.g) * (triple + triple.adjoint());
        const Eigen::Matrix3d chi = sys.model.kerr_sym();
        std::array<Operator, 3> num{number_operator(sp, 0), number_operator(sp, 1),
                                    number_operator(sp, 2)};
        for (int n = 0; n < 3; ++n)
            for (int m = 0; m < 3; ++m) {
                if (chi(n, m) == 0.0) continue;
                Operator term = (n == m) ? num[n] * num[n] - num[n] : num[n] * num[m];
                hr = hr - Complex(chi(n, m)) * term;
            }
        if (sys.model.pump_detuning != 0.0) {
            const double d = sys.model.pump_detuning / 3.0;
            hr = hr - Complex(d) * (num[0] + num[1] + num[2]);
        }
        return hr;
    }();

    CascadeGenerators out{h, {}, {}};
    for (int j = 0; j < 3; ++j) {
        const double ge = sys.model.modes[j].gamma_ext;
        const double gi = sys.model.modes[j].gamma_int;
        const double g = gv[j](t);
        const Operator a = annihilation(sp, j);
        const Operator av = annihilation(sp, 3 + j);
        // Capturing cascade coupling: H_c = (i sqrt(ge)/2)(g a† a_v - g a_v† a)
        // for the real couplings used here; the dark state sqrt(ge) a + g a_v
        // is then decoupled and the wavepacket is absorbed.
        const Complex ipref(0.0, 0.5 * std::sqrt(ge) * g);
        out.h_eff = out.h_eff + ipref * (a.adjoint() * av - av.adjoint() * a);
        out.l_eff.push_back(Complex(std::sqrt(ge)) * a + Complex(g) * av);
        if (gi > 0.0) out.l_int.push_back(Complex(std::sqrt(gi)) * a);
    }
    return out;
}

CascadeEngine build_mcwf(const CascadeSystem& sys) {
    const SpacePtr& sp = sys.space;
    const Eigen::Index dim = sp->total_dim();
    auto gv = make_gv(sys);

    CascadeEngine eng;
    eng.gen.dim = dim;

    // Static drift -iH_r - (1/2) sum_j (gamma_ext + gamma_int) n_j.
    {
        const CascadeGenerators at0 = [&] {
            CascadeSystem frozen = sys;  // g_v = 0 well before any support
            return build_cascade_generators(frozen, sys.wavepackets[0].t_start - 1.0);
        }();
        SparseMat drift = SparseMat(Complex(0, -1) * at0.h_eff.mat);
        for (int j = 0; j < 3; ++j) {
            const double gtot = sys.model.modes[j].gamma_total();
            drift -= SparseMat(Complex(0.5 * gtot) * number_operator(sp, j).mat);
        }
        eng.gen.drift_static = to_row_sparse(drift);
    }

    for (int j = 0; j < 3; ++j) {
        const double ge = sys.model.modes[j].gamma_ext;
        // Linear-in-g_v drift: -sqrt(ge) a_v† a (coupling + cross term of L†L);
        // quadratic: -(1/2) g_v^2 n_v.
        const Operator feed = creation(sp, 3 + j) * annihilation(sp, j);
        eng.gen.drift_linear.push_back(
            to_row_sparse(SparseMat(Complex(-std::sqrt(ge)) * feed.mat)));
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
        const SparseMat nv = number_operator(sp, 3 + j).mat;
        for (int k = 0; k < nv.outerSize(); ++k)
            for (SparseMat::InnerIterator it(nv, k); it; ++it)
                diag[it.row()] = -0.5 * it.value().real();
        eng.gen.drift_quadratic.push_back(std::move(diag));
        eng.gen.coeff.push_back(gv[j]);

        McwfGenerators::JumpChannel ch;
        ch.parts.push_back(
            to_row_sparse(SparseMat(Complex(std::sqrt(ge)) * annihilation(sp, j).mat)));
        ch.part_coeff.emplace_back();  // constant 1
        ch.parts.push_back(to_row_sparse(annihilation(sp, 3 + j).mat));
        ch.part_coeff.emplace_back(gv[j]);
        eng.gen.jumps.push_back(std::move(ch));
    }
    for (int j = 0; j < 3; ++j) {
        const double gi = sys.model.modes[j].gamma_int;
        if (gi <= 0.0) continue;
        McwfGenerators::JumpChannel ch;
        ch.parts.push_back(
            to_row_sparse(SparseMat(Complex(std::sqrt(gi)) * annihilation(sp, j).mat)));
        ch.part_coeff.emplace_back();
        eng.gen.jumps.push_back(std::move(ch));
    }

    for (const auto& w : sys.wavepackets) {
        eng.break_times.push_back(w.t_start);
        eng.break_times.push_back(w.t_end);
    }
    std::sort(eng.break_times.begin(), eng.break_times.end());
    return eng;
}

namespace {

struct Observables {
    RowSparse triple;                       // a_v1 a_v2 a_v3
    std::array<RowSparse, 3> first;         // a_v,i
    std::array<RowSparse, 3> second;        // a_v,j a_v,k (complement i)
    std::array<Eigen::VectorXd, 3> n_diag;  // n_v,i
    std::array<Eigen::VectorXd, 3> nn_diag; // n_v,j n_v,k
    std::array<Eigen::VectorXd, 3> top_phys, top_virt;  // top-Fock-level masks
};

Eigen::VectorXd diag_of(const SparseMat& m, Eigen::Index dim) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMat::InnerIterator it(m, k); it; ++it)
            if (it.row() == it.col()) d[it.row()] = it.value().real();
    return d;
}

Observables build_observables(const SpacePtr& sp) {
    const Eigen::Index dim = sp->total_dim();
    Observables obs;
    const Operator av1 = annihilation(sp, 3), av2 = annihilation(sp, 4),
                   av3 = annihilation(sp, 5);
    obs.triple = RowSparse((av1 * av2 * av3).mat);
    std::array<Operator, 3> av{av1, av2, av3};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        obs.first[i] = RowSparse(av[i].mat);
        obs.second[i] = RowSparse((av[j] * av[k]).mat);
        obs.n_diag[i] = diag_of(number_operator(sp, 3 + i).mat, dim);
        obs.nn_diag[i] = diag_of((number_operator(sp, 3 + j) * number_operator(sp, 3 + k)).mat,
                                 dim);
        // Indicator of the highest Fock level, for the truncation monitor.
        auto mask = [&](int mode) {
            Eigen::VectorXd m = Eigen::VectorXd::Zero(dim);
            const Eigen::Index stride = sp->stride(mode);
            const int d = sp->dim(mode);
            for (Eigen::Index idx = 0; idx < dim; ++idx)
                if (static_cast<int>((idx / stride) % d) == d - 1) m[idx] = 1.0;
            return m;
        };
        obs.top_phys[i] = mask(i);
        obs.top_virt[i] = mask(3 + i);
    }
    return obs;
}

double diag_expect(const Eigen::VectorXd& d, const Eigen::VectorXcd& psi) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) acc += d[i] * std::norm(psi[i]);
    return acc;
}

Complex sparse_expect(const RowSparse& m, const Eigen::VectorXcd& psi) {
    return psi.dot(m * psi);
}

constexpr int kRow = 20;  // flattened per-trajectory statistics

void eval_row(const Observables& obs, const Eigen::VectorXcd& psi, double* row) {
    const Complex z = sparse_expect(obs.triple, psi);
    row[0] = z.real();
    row[1] = z.imag();
    for (int i = 0; i < 3; ++i) {
        row[2 + i] = diag_expect(obs.n_diag[i], psi);
        row[5 + i] = diag_expect(obs.nn_diag[i], psi);
        const Complex f = sparse_expect(obs.first[i], psi);
        const Complex s = sparse_expect(obs.second[i], psi);
        row[8 + 2 * i] = f.real();
        row[9 + 2 * i] = f.imag();
        row[14 + 2 * i] = s.real();
        row[15 + 2 * i] = s.imag();
    }
}

void check_truncation(const Observables& obs, const Eigen::VectorXcd& psi, double norm2,
                      double limit, const char* where) {
    for (int i = 0; i < 3; ++i) {
        const double pp = diag_expect(obs.top_phys[i], psi) / norm2;
        const double pv = diag_expect(obs.top_virt[i], psi) / norm2;
        if (pp > limit || pv > limit) {
            std::ostringstream msg;
            msg << "cascade: top Fock level population " << std::max(pp, pv) << " of mode "
                << i << " (" << where << ") exceeds " << limit
                << "; increase the truncation";
            throw std::runtime_error(msg.str());
        }
    }
}

}  // namespace

TrajectoryResult run_trajectories(const CascadeSystem& sys, std::size_t n_traj,
                                  std::uint64_t seed, const TrajectoryOptions& opts) {
    if (n_traj == 0) throw std::invalid_argument("run_trajectories: n_traj must be > 0");
    const CascadeEngine eng = build_mcwf(sys);
    const Observables obs = build_observables(sys.space);

    IntegratorOptions iopts = opts.integrator;
    iopts.psi_stride = 4;

    Eigen::VectorXcd vacuum = Eigen::VectorXcd::Zero(sys.space->total_dim());
    vacuum[0] = 1.0;

    const NoJumpPath root =
        integrate_no_jump(eng.gen, vacuum, 0.0, sys.t_end, iopts, eng.break_times);
    for (std::size_t c = 0; c < root.psi.size(); ++c)
        check_truncation(obs, root.psi[c], root.norm2[root.psi_index[c]],
                         opts.top_level_abort, "no-jump path");

    // Survivors share the root endpoint; evaluate its row once.
    std::array<double, kRow> root_row{};
    eval_row(obs, root.final_state().normalized(), root_row.data());

    std::vector<double> rows(n_traj * kRow);
    std::vector<int> jumps(n_traj, 0);

    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi; ++t) {
            auto rng = trajectory_rng(seed, t);
            TrajectoryOutcome outcome =
                sample_trajectory(eng.gen, root, 0.0, sys.t_end, rng, iopts, eng.break_times);
            jumps[t] = outcome.n_jumps;
            if (outcome.n_jumps == 0) {
                std::copy(root_row.begin(), root_row.end(), rows.begin() + t * kRow);
            } else {
                check_truncation(obs, outcome.psi_end, 1.0, opts.top_level_abort, "branch");
                eval_row(obs, outcome.psi_end, rows.data() + t * kRow);
            }
        }
    };
    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t n_threads =
        std::max<std::size_t>(1, opts.threads > 0 ? opts.threads : (hw ? hw : 1));
    if (n_threads == 1 || n_traj < 2 * n_threads) {
        work(0, n_traj);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n_traj + n_threads - 1) / n_threads;
        for (std::size_t th = 0; th < n_threads; ++th) {
            const std::size_t lo = th * chunk, hi = std::min(n_traj, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // Fixed-order reduction: plain means first.
    std::array<double, kRow> mean{};
    for (std::size_t t = 0; t < n_traj; ++t)
        for (int c = 0; c < kRow; ++c) mean[c] += rows[t * kRow + c];
    for (auto& v : mean) v /= double(n_traj);

    TrajectoryResult res;
    res.n_traj = n_traj;
    res.seed = seed;
    res.mean_jumps = std::accumulate(jumps.begin(), jumps.end(), 0.0) / double(n_traj);
    res.survival_probability =
        double(std::count(jumps.begin(), jumps.end(), 0)) / double(n_traj);

    MomentSet& m = res.moments;
    m.triple = Complex(mean[0], mean[1]);
    for (int i = 0; i < 3; ++i) {
        m.n[i] = mean[2 + i];
        m.nn[i] = mean[5 + i];
        m.first[i] = Complex(mean[8 + 2 * i], mean[9 + 2 * i]);
        m.second_pair[i] = Complex(mean[14 + 2 * i], mean[15 + 2 * i]);
    }

    // Scalar statistics for the covariance: Z projected on the mean phase.
    const Complex phase =
        std::abs(m.triple) > 0.0 ? m.triple / std::abs(m.triple) : Complex(1.0, 0.0);
    const std::size_t n = n_traj;
    Eigen::MatrixXd stats(n, 7);
    for (std::size_t t = 0; t < n; ++t) {
        const double* r = &rows[t * kRow];
        stats(t, 0) = (Complex(r[0], r[1]) * std::conj(phase)).real();
        for (int i = 0; i < 3; ++i) {
            stats(t, 1 + i) = r[2 + i];
            stats(t, 4 + i) = r[5 + i];
        }
    }
    // Jackknife covariance of the ensemble means over leave-one-out samples.
    const Eigen::RowVectorXd grand = stats.colwise().mean();
    Eigen::MatrixXd loo = (-stats).rowwise() + grand * double(n);
    loo /= double(n - 1);  // leave-one-out means
    const Eigen::RowVectorXd loo_mean = loo.colwise().mean();
    Eigen::MatrixXd centered = loo.rowwise() - loo_mean;
    m.cov = (double(n - 1) / double(n)) * (centered.transpose() * centered);

    res.triple_err = std::sqrt(std::max(m.cov(0, 0), 0.0));
    for (int i = 0; i < 3; ++i) {
        res.n_err[i] = std::sqrt(std::max(m.cov(1 + i, 1 + i), 0.0));
        res.nn_err[i] = std::sqrt(std::max(m.cov(4 + i, 4 + i), 0.0));
        // First/second moment errors from per-trajectory scatter (magnitudes).
        double vf = 0.0, vs = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double* r = &rows[t * kRow];
            vf += std::norm(Complex(r[8 + 2 * i], r[9 + 2 * i]) - m.first[i]);
            vs += std::norm(Complex(r[14 + 2 * i], r[15 + 2 * i]) - m.second_pair[i]);
        }
        m.first_err[i] = std::sqrt(vf / double(n) / double(n - 1));
        m.second_err[i] = std::sqrt(vs / double(n) / double(n - 1));
    }
    return res;
}

DensityMatrix run_master_equation(const CascadeSystem& sys, int n_steps) {
    const CascadeEngine eng = build_mcwf(sys);
    const Eigen::Index dim = sys.space->total_dim();
    Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(dim, dim);
    rho0(0, 0) = 1.0;
    return {sys.space, integrate_master_equation(eng.gen, rho0, 0.0, sys.t_end, n_steps)};
}

MomentSet virtual_mode_moments(const DensityMatrix& rho) {
    const SpacePtr& sp = rho.space;
    MomentSet m;
    const Operator av1 = annihilation(sp, 3), av2 = annihilation(sp, 4),
                   av3 = annihilation(sp, 5);
    m.triple = expectation(av1 * av2 * av3, rho);
    std::array<Operator, 3> av{av1, av2, av3};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        m.n[i] = expectation(number_operator(sp, 3 + i), rho).real();
        m.nn[i] =
            expectation(number_operator(sp, 3 + j) * number_operator(sp, 3 + k), rho).real();
        m.first[i] = expectation(av[i], rho);
        m.second_pair[i] = expectation(av[j] * av[k], rho);
    }
    return m;
}

}  // namespace triphoton
