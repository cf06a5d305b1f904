#include "triphoton/pipeline.hpp"

#include "triphoton/mcwf.hpp"  // trajectory_rng

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace triphoton {

namespace {

using Complex = std::complex<double>;

constexpr double kPlanckOverBoltzmann_K_per_GHz = 0.0479924;  // h/k_B, CODATA to 6 digits

}  // namespace

double bose_einstein(double frequency_GHz, double temperature_mK) {
    if (temperature_mK <= 0.0) throw std::invalid_argument("bose_einstein: temperature must be > 0");
    const double x = kPlanckOverBoltzmann_K_per_GHz * frequency_GHz / (temperature_mK * 1e-3);
    return 1.0 / std::expm1(x);
}

MomentSet extract_moments(const InterleavedRun& run, const std::array<ChannelChain, 3>& chains) {
    const std::size_t ns = run.n_segments, m = run.samples_per_segment;
    if (ns == 0 || m == 0) throw std::invalid_argument("extract_moments: empty run");
    for (int c = 0; c < 3; ++c) {
        if (run.on[c].size() != ns * m || run.off[c].size() != ns * m)
            throw std::invalid_argument("extract_moments: mismatched ON/OFF segment counts");
        if (chains[c].gain <= 0.0) throw std::invalid_argument("extract_moments: zero gain");
    }

    // Per-segment statistics: Z, X_i, Y_i plus first and pair moments.
    std::vector<Complex> z(ns), first[3], pair[3];
    std::vector<double> x[3], y[3];
    for (int c = 0; c < 3; ++c) {
        first[c].resize(ns);
        pair[c].resize(ns);
        x[c].resize(ns);
        y[c].resize(ns);
    }

    const double g1 = chains[0].gain, g2 = chains[1].gain, g3 = chains[2].gain;
    const double sqg[3] = {std::sqrt(g1), std::sqrt(g2), std::sqrt(g3)};

    for (std::size_t s = 0; s < ns; ++s) {
        const std::size_t base = s * m;
        double on2[3] = {}, off2[3] = {}, on4[3] = {}, off4[3] = {};
        Complex zsum{}, fsum[3] = {}, psum[3] = {};
        for (std::size_t k = 0; k < m; ++k) {
            Complex sv[3], ov[3];
            for (int c = 0; c < 3; ++c) {
                sv[c] = run.on[c][base + k];
                ov[c] = run.off[c][base + k];
                on2[c] += std::norm(sv[c]);
                off2[c] += std::norm(ov[c]);
                fsum[c] += sv[c];
            }
            zsum += sv[0] * sv[1] * sv[2];
            for (int i = 0; i < 3; ++i) {
                const int j = (i + 1) % 3, kk = (i + 2) % 3;
                on4[i] += std::norm(sv[j]) * std::norm(sv[kk]);
                off4[i] += std::norm(ov[j]) * std::norm(ov[kk]);
                psum[i] += sv[j] * sv[kk];
            }
        }
        const double inv = 1.0 / double(m);
        double nn_noise[3];  // per-segment operational noise number
        for (int c = 0; c < 3; ++c) {
            on2[c] *= inv;
            off2[c] *= inv;
            nn_noise[c] = off2[c] / chains[c].gain - chains[c].thermal_occupation;
            x[c][s] = (on2[c] - off2[c]) / chains[c].gain + chains[c].thermal_occupation;
            first[c][s] = fsum[c] * inv / sqg[c];
        }
        z[s] = zsum * inv / (sqg[0] * sqg[1] * sqg[2]);
        for (int i = 0; i < 3; ++i) {
            const int j = (i + 1) % 3, kk = (i + 2) % 3;
            const double ntj = chains[j].thermal_occupation, ntk = chains[kk].thermal_occupation;
            y[i][s] = (on4[i] - off4[i]) * inv / (chains[j].gain * chains[kk].gain) + ntj * ntk -
                      nn_noise[kk] * (x[j][s] - ntj) - nn_noise[j] * (x[kk][s] - ntk);
            pair[i][s] = psum[i] * inv / (sqg[j] * sqg[kk]);
        }
    }

    MomentSet out;
    Complex zmean{};
    for (std::size_t s = 0; s < ns; ++s) zmean += z[s];
    zmean /= double(ns);
    out.triple = zmean;
    for (int i = 0; i < 3; ++i) {
        for (std::size_t s = 0; s < ns; ++s) {
            out.n[i] += x[i][s];
            out.nn[i] += y[i][s];
            out.first[i] += first[i][s];
            out.second_pair[i] += pair[i][s];
        }
        out.n[i] /= double(ns);
        out.nn[i] /= double(ns);
        out.first[i] /= double(ns);
        out.second_pair[i] /= double(ns);
    }

    // Sample covariance of the segment means; Z projected on its mean phase.
    const Complex phase = std::abs(zmean) > 0 ? zmean / std::abs(zmean) : Complex(1, 0);
    Eigen::MatrixXd stats(ns, 7);
    for (std::size_t s = 0; s < ns; ++s) {
        stats(s, 0) = (z[s] * std::conj(phase)).real();
        for (int i = 0; i < 3; ++i) {
            stats(s, 1 + i) = x[i][s];
            stats(s, 4 + i) = y[i][s];
        }
    }
    const Eigen::RowVectorXd mean = stats.colwise().mean();
    const Eigen::MatrixXd centered = stats.rowwise() - mean;
    out.cov = centered.transpose() * centered / double(ns - 1) / double(ns);

    for (int i = 0; i < 3; ++i) {
        double vf = 0.0, vs = 0.0;
        for (std::size_t s = 0; s < ns; ++s) {
            vf += std::norm(first[i][s] - out.first[i]);
            vs += std::norm(pair[i][s] - out.second_pair[i]);
        }
        out.first_err[i] = std::sqrt(vf / double(ns) / double(ns - 1));
        out.second_err[i] = std::sqrt(vs / double(ns) / double(ns - 1));
    }
    return out;
}

namespace {

// Two-point scale mixture s in {0, S} with P(S) = p and E[s^2] = 1:
// mu3 = 1/sqrt(p), mu4 = 1/p. Solves T/Q = sqrt(D+1) D^{-3/4} for D = mu4 - 1.
double solve_scale_mixture(double t_over_q) {
    double lo = 1e-12, hi = 1e12;
    auto phi = [](double d) { return std::sqrt(d + 1.0) * std::pow(d, -0.75); };
    if (t_over_q >= phi(lo)) return lo;
    if (t_over_q <= phi(hi)) return hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        (phi(mid) > t_over_q ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

}  // namespace

InterleavedRun synthesize_records(const MomentSet& target,
                                  const std::array<ChannelChain, 3>& chains,
                                  std::size_t n_samples, std::uint64_t seed,
                                  std::size_t n_segments) {
    for (const auto& c : chains) {
        if (c.gain <= 0.0) throw std::invalid_argument("synthesize_records: zero gain");
        if (c.noise_photons < 0.0)
            throw std::invalid_argument("synthesize_records: negative noise");
    }
    if (n_samples < n_segments) n_segments = std::max<std::size_t>(1, n_samples);
    const std::size_t m = n_samples / n_segments;

    // Noise-inclusive ON targets: second moments M_i and fourth-order excess
    // Delta_jk are what the samples must carry so that extraction lands on the
    // requested quantum moments.
    std::array<double, 3> m2{}, nn_noise{};
    for (int i = 0; i < 3; ++i) {
        nn_noise[i] = chains[i].noise_photons;
        m2[i] = target.n[i] + nn_noise[i];
    }
    std::array<Complex, 3> pair_var{};  // pair component variance, complement-indexed
    std::array<double, 3> delta{};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        pair_var[i] = target.second_pair[i] - target.first[j] * target.first[k];
        delta[i] = target.nn[i] - target.n[j] * target.n[k] - std::norm(pair_var[i]);
    }

    // Triplet component after removing the mean/pair contributions to <s1s2s3>.
    Complex t_target = target.triple - target.first[0] * target.first[1] * target.first[2];
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        (void)j;
        (void)k;
        t_target -= target.first[i] * pair_var[i];
    }

    std::array<double, 3> t_amp{};
    double mix_p = 1.0, mix_s = 1.0;
    const double t_abs = std::abs(t_target);
    const bool has_delta = delta[0] > 0.0 && delta[1] > 0.0 && delta[2] > 0.0;
    if (has_delta) {
        const double q = std::pow(delta[0] * delta[1] * delta[2], 0.25);
        const double d = solve_scale_mixture(t_abs / q);
        mix_p = 1.0 / (d + 1.0);
        mix_s = 1.0 / std::sqrt(mix_p);
        for (int i = 0; i < 3; ++i) {
            const int j = (i + 1) % 3, k = (i + 2) % 3;
            t_amp[i] = std::pow(delta[j] * delta[k] / delta[i] / d, 0.25);
        }
    } else if (t_abs > 0.0) {
        // No number-number excess requested: deterministic s = 1 triad.
        for (auto& t : t_amp) t = std::cbrt(t_abs);
    } else {
        for (int i = 0; i < 3; ++i)
            if (delta[i] < -1e-12)
                throw std::invalid_argument(
                    "synthesize_records: anti-bunched nn target not realizable");
    }
    const double theta = std::arg(t_target == Complex{} ? Complex(1, 0) : t_target);

    std::array<double, 3> sigma2{};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        sigma2[i] = m2[i] - std::norm(target.first[i]) - std::abs(pair_var[j]) -
                    std::abs(pair_var[k]) - t_amp[i] * t_amp[i];
        if (sigma2[i] < 0.0)
            throw std::invalid_argument("synthesize_records: negative implied variance");
    }

    InterleavedRun run;
    run.n_segments = n_segments;
    run.samples_per_segment = m;
    for (int c = 0; c < 3; ++c) {
        run.on[c].resize(n_segments * m);
        run.off[c].resize(n_segments * m);
    }

    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    for (std::size_t s = 0; s < n_segments; ++s) {
        auto rng = trajectory_rng(seed, s);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        auto cgauss = [&](double var) {
            const double amp = std::sqrt(var * 0.5);
            return Complex(amp * gauss(rng), amp * gauss(rng));
        };
        Complex pair_u[3];
        for (int i = 0; i < 3; ++i)
            pair_u[i] = std::polar(
                1.0, 0.5 * std::arg(pair_var[i] == Complex{} ? Complex(1, 0) : pair_var[i]));
        for (std::size_t k = 0; k < m; ++k) {
            // Common pair components: pair p couples modes (p+1, p+2) through
            // raw[p]*u[p] and conj(raw[p])*u[p], giving E[s_j s_k] = pair_var[p].
            Complex raw[3];
            for (int i = 0; i < 3; ++i) raw[i] = cgauss(std::abs(pair_var[i]));
            // Triad with constrained phase sum and common amplitude mixture.
            const double phi1 = kTwoPi * unif(rng), phi2 = kTwoPi * unif(rng);
            const double phi[3] = {phi1, phi2, theta - phi1 - phi2};
            const double scale = (mix_p >= 1.0 || unif(rng) < mix_p) ? mix_s : 0.0;

            for (int i = 0; i < 3; ++i) {
                const int j = (i + 1) % 3, kk = (i + 2) % 3;
                Complex v = target.first[i] + cgauss(sigma2[i]) +
                            t_amp[i] * scale * std::polar(1.0, phi[i]);
                // Mode i is the first member of the pair complementary to kk
                // and the second member of the pair complementary to j.
                v += raw[kk] * pair_u[kk] + std::conj(raw[j]) * pair_u[j];
                run.on[i][s * m + k] = std::sqrt(chains[i].gain) * v;
                run.off[i][s * m + k] = std::sqrt(chains[i].gain) *
                                        cgauss(chains[i].thermal_occupation + nn_noise[i]);
            }
        }
    }
    return run;
}

}  // namespace triphoton
