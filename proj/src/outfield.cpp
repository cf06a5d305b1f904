#include "triphoton/outfield.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace triphoton {

namespace {

// Degeneracy threshold for the gamma denominators, relative to gamma_T.
constexpr double kDegenerateRel = 1e-6;

// All kernels are stationary (exponent coefficients sum to zero), so every
// term factors into one-sided decaying exponentials of the time differences.
// The nested cumulative form below integrates them in O(n) per term without
// ever evaluating a growing exponential.
struct OrderedQuad {
    double h = 0.0;
    std::vector<double> f;  // filter samples at the n+1 nodes

    OrderedQuad(const TemporalMode& mode, int panels) {
        const double len = mode.support_length();
        h = len / panels;
        f.resize(panels + 1);
        for (int k = 0; k <= panels; ++k) f[k] = mode.value(mode.t_start + k * h);
    }

    // J[k] = int_0^{t_k} g(s) e^{-b (t_k - s)} ds, trapezoid panels.
    std::vector<double> exp_cum(const std::vector<double>& g, double b) const {
        const double decay = std::exp(-b * h);
        std::vector<double> j(g.size(), 0.0);
        for (std::size_t k = 1; k < g.size(); ++k)
            j[k] = decay * j[k - 1] + 0.5 * h * (g[k - 1] * decay + g[k]);
        return j;
    }

    double trapz(const std::vector<double>& g) const {
        double s = 0.5 * (g.front() + g.back());
        for (std::size_t k = 1; k + 1 < g.size(); ++k) s += g[k];
        return s * h;
    }

    std::vector<double> times(const std::vector<double>& a, const std::vector<double>& b) const {
        std::vector<double> out(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
        return out;
    }

    double ordered2(double b2) const { return trapz(times(f, exp_cum(f, b2))); }

    // int f f (t2 - t1) e^{-b2 (t2 - t1)}: J and its first moment share the
    // recurrence Jt_{k+1} = e^{-bh}(Jt_k + h J_k) + panel term.
    double ordered2_lin(double b2) const {
        const double decay = std::exp(-b2 * h);
        std::vector<double> j(f.size(), 0.0), jt(f.size(), 0.0);
        for (std::size_t k = 1; k < f.size(); ++k) {
            jt[k] = decay * (jt[k - 1] + h * j[k - 1]) + 0.5 * h * (f[k - 1] * h * decay);
            j[k] = decay * j[k - 1] + 0.5 * h * (f[k - 1] * decay + f[k]);
        }
        return trapz(times(f, jt));
    }

    double ordered3(double b2, double b3) const {
        return trapz(times(f, exp_cum(times(f, exp_cum(f, b2)), b3)));
    }

    double ordered4(double b2, double b3, double b4) const {
        return trapz(
            times(f, exp_cum(times(f, exp_cum(times(f, exp_cum(f, b2)), b3)), b4)));
    }
};

// Richardson-controlled evaluation: halve the step until stable, return the
// h^2 extrapolation.
double refine(const TemporalMode& mode, const QuadratureOptions& opts,
              const std::function<double(const OrderedQuad&)>& eval) {
    int panels = opts.initial_panels;
    OrderedQuad grid(mode, panels);
    double coarse = eval(grid);
    for (int r = 0; r < opts.max_refinements; ++r) {
        panels *= 2;
        OrderedQuad fine(mode, panels);
        const double value = eval(fine);
        if (std::abs(value - coarse) <= opts.rel_tol * std::max(std::abs(value), 1e-300))
            return (4.0 * value - coarse) / 3.0;
        coarse = value;
    }
    throw std::runtime_error("outfield quadrature did not converge within refinement cap");
}

struct Rates {
    double g1, g2, g3, gT, beta;
};

Rates rates_of(const DeviceModel& model) {
    Rates r{model.gamma(0), model.gamma(1), model.gamma(2), 0.0, 0.0};
    r.gT = r.g1 + r.g2 + r.g3;
    const double amp = 2.0 * model.g / r.gT;
    r.beta = amp * amp;
    return r;
}

void check_weak_driving(const DeviceModel& model) {
    const double lambda = model.g / gamma_total(model);
    if (std::abs(lambda) > 0.5)
        throw std::invalid_argument("outfield: perturbative result invalid, |g/gamma_T| > 0.5");
}

}  // namespace

std::complex<double> two_time_correlator(const DeviceModel& model, int i, double dt_sep) {
    check_weak_driving(model);
    if (dt_sep < 0.0) throw std::invalid_argument("two_time_correlator: dt_sep must be >= 0");
    const Rates r = rates_of(model);
    const double gi = model.gamma(i);
    const double gjk = r.gT - gi;  // gamma_j + gamma_k
    const double den = gjk - gi;
    const double e_i = std::exp(-0.5 * gi * dt_sep);
    if (std::abs(den) < kDegenerateRel * r.gT) {
        return r.beta * (r.gT / gi * e_i + r.gT * 0.5 * dt_sep * e_i);
    }
    const double e_jk = std::exp(-0.5 * gjk * dt_sep);
    return r.beta * (r.gT / gi * e_i + r.gT / den * (e_i - e_jk));
}

double output_mean_photon(const DeviceModel& model, int mode_index, const TemporalMode& f,
                          const QuadratureOptions& opts) {
    check_weak_driving(model);
    const Rates r = rates_of(model);
    const double gi = model.gamma(mode_index);
    const double gjk = r.gT - gi;
    const double den = gjk - gi;
    const double gamma_ext = model.modes[mode_index].gamma_ext;

    return refine(f, opts, [&](const OrderedQuad& q) {
        double val;
        if (std::abs(den) < kDegenerateRel * r.gT) {
            val = r.gT / gi * q.ordered2(0.5 * gi) + 0.5 * r.gT * q.ordered2_lin(0.5 * gi);
        } else {
            val = (r.gT / gi + r.gT / den) * q.ordered2(0.5 * gi) -
                  r.gT / den * q.ordered2(0.5 * gjk);
        }
        return 2.0 * gamma_ext * r.beta * val;
    });
}

std::complex<double> output_triple(const DeviceModel& model, const TemporalMode& f,
                                   const QuadratureOptions& opts) {
    check_weak_driving(model);
    const Rates r = rates_of(model);
    const double pref =
        std::sqrt(model.modes[0].gamma_ext * model.modes[1].gamma_ext * model.modes[2].gamma_ext);

    const double sum = refine(f, opts, [&](const OrderedQuad& q) {
        // Kernel for assignment (i early, j middle, k late):
        // e^{-(g_j+g_k)(t''-t')/2} e^{-g_k(t'''-t'')/2}, summed over all 6
        // assignments of the mode indices.
        double acc = 0.0;
        const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                 {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        for (const auto& p : perms) {
            const double gj = model.gamma(p[1]), gk = model.gamma(p[2]);
            acc += q.ordered3(0.5 * (gj + gk), 0.5 * gk);
        }
        return acc;
    });
    return std::complex<double>(0.0, -2.0 * model.g / r.gT) * pref * sum;
}

namespace {

struct Term4 {
    double coef, b2, b3, b4;
};

// The three lowest-order four-time kernel sums for the pair (j,k) with
// complementary mode i, already summed over time-index permutations and
// written as products of decaying difference exponentials.
std::vector<Term4> four_time_terms(double gi, double gj, double gk, double gT, double beta) {
    std::vector<Term4> terms;
    const double sjk = 0.5 * (gj + gk);

    // Population-sector kernel (free evolution of the second-order state).
    const double p0 = 4.0 * beta * gT / (gj + gk);
    terms.insert(terms.end(), {
        {p0, gj + 0.5 * gk, gj, 0.5 * gj},
        {p0, gj + 0.5 * gk, sjk, 0.5 * gj},
        {p0, 0.5 * gj + gk, sjk, 0.5 * gj},
        {p0, gj + 0.5 * gk, sjk, 0.5 * gk},
        {p0, 0.5 * gj + gk, sjk, 0.5 * gk},
        {p0, 0.5 * gj + gk, gk, 0.5 * gk},
    });

    // First-order coherence evolved with one perturbation insertion at the
    // earliest interval.
    const double p1 = -2.0 * beta * gT / (gi - gj - gk);
    terms.insert(terms.end(), {
        {+p1, 0.5 * (gi + gj), gj, 0.5 * gj},
        {-p1, gj + 0.5 * gk, gj, 0.5 * gj},
        {-p1, gj + 0.5 * gk, sjk, 0.5 * gj},
        {+p1, 0.5 * (gi + gk), sjk, 0.5 * gj},
        {-p1, 0.5 * gj + gk, sjk, 0.5 * gj},
        {+p1, 0.5 * (gi + gj), sjk, 0.5 * gj},
        {+p1, gj + 0.5 * gk, sjk, 0.5 * gk},
        {+p1, 0.5 * (gi + gk), sjk, 0.5 * gk},
        {-p1, 0.5 * gj + gk, sjk, 0.5 * gk},
        {+p1, 0.5 * (gi + gj), sjk, 0.5 * gk},
        {-p1, 0.5 * gj + gk, gk, 0.5 * gk},
        {+p1, 0.5 * (gi + gk), gk, 0.5 * gk},
    });

    // Insertion at the middle interval: product of two two-option brackets and
    // the (e^{-gT dt/2} - 1) factor, expanded into 8 terms.
    const double p2 = -beta * gT / (gi - gj - gk);
    for (int u = 0; u < 2; ++u) {          // u=0: e^{-gT(t3-t2)/2}, u=1: the "-1"
        const double sign = (u == 0) ? 1.0 : -1.0;
        const double b3 = (u == 0 ? 0.5 * gT : 0.0) + sjk;
        for (double b2 : {0.5 * (gi + gk), 0.5 * (gi + gj)})
            for (double b4 : {0.5 * gj, 0.5 * gk})
                terms.push_back({sign * p2, b2, b3, b4});
    }
    return terms;
}

double number_number_at(const DeviceModel& model, int j, int k, double gi_eff,
                        const TemporalMode& f, const QuadratureOptions& opts) {
    const Rates r = rates_of(model);
    const double gj = model.gamma(j), gk = model.gamma(k);
    const auto terms = four_time_terms(gi_eff, gj, gk, r.gT, r.beta);
    const double pref = model.modes[j].gamma_ext * model.modes[k].gamma_ext;
    return refine(f, opts, [&](const OrderedQuad& q) {
        double acc = 0.0;
        for (const auto& t : terms) acc += t.coef * q.ordered4(t.b2, t.b3, t.b4);
        return pref * acc;
    });
}

}  // namespace

double output_number_number(const DeviceModel& model, int j, int k, const TemporalMode& f,
                            const QuadratureOptions& opts) {
    check_weak_driving(model);
    if (j == k) throw std::invalid_argument("output_number_number: need two distinct modes");
    const int i = 3 - j - k;
    const Rates r = rates_of(model);
    const double gi = model.gamma(i);
    const double den = gi - model.gamma(j) - model.gamma(k);
    if (std::abs(den) < kDegenerateRel * r.gT) {
        const double shift = 1e-4 * r.gT;
        return 0.5 * (number_number_at(model, j, k, gi + shift, f, opts) +
                      number_number_at(model, j, k, gi - shift, f, opts));
    }
    return number_number_at(model, j, k, gi, f, opts);
}

OutputCorrelators output_correlators(const DeviceModel& model, const TemporalMode& f,
                                     const QuadratureOptions& opts) {
    OutputCorrelators out;
    out.triple = output_triple(model, f, opts);
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        out.n_out[i] = output_mean_photon(model, i, f, opts);
        out.nn_out[i] = output_number_number(model, j, k, f, opts);
    }
    return out;
}

}  // namespace triphoton
