#include "triphoton/witness.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <random>
#include <stdexcept>

namespace triphoton {

namespace {

double moment_sigma(const MomentSet& m, int cov_index) {
    if (!m.has_cov()) return 0.0;
    return std::sqrt(std::max(m.cov(cov_index, cov_index), 0.0));
}

// Negative moments within one standard error are measurement noise around
// zero; clip before the square roots. Beyond that the input is inconsistent.
double clipped_moment(double value, double sigma, bool& clipped) {
    if (value >= 0.0) return value;
    if (value >= -sigma) {
        clipped = true;
        return 0.0;
    }
    throw std::invalid_argument("compute_witness: negative moment beyond 1 sigma");
}

}  // namespace

WitnessResult compute_witness(const MomentSet& m) {
    WitnessResult res;
    double subtract = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double ni = clipped_moment(m.n[i], moment_sigma(m, 1 + i), res.clipped);
        const double nni = clipped_moment(m.nn[i], moment_sigma(m, 4 + i), res.clipped);
        subtract += std::sqrt(ni * nni);
        res.n_tot += ni;
    }
    res.w = std::abs(m.triple) - subtract;
    if (m.has_cov()) res.sigma_stat = std::sqrt(std::max(witness_variance(m), 0.0));
    res.delta_w_total = res.sigma_stat;
    return res;
}

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("scaling_fit: need at least 3 points");
    Eigen::MatrixXd design(points.size(), 2);
    Eigen::VectorXd rhs(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto [ntot, w] = points[i];
        if (ntot <= 0.0) throw std::invalid_argument("scaling_fit: n_tot must be > 0");
        design(i, 0) = std::sqrt(ntot);
        design(i, 1) = -ntot;
        rhs(i) = w;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 2) throw std::invalid_argument("scaling_fit: degenerate design matrix");
    const Eigen::Vector2d coef = qr.solve(rhs);

    ScalingFit fit;
    fit.B = coef(0);
    fit.C = coef(1);
    if (fit.C != 0.0) {
        fit.n_peak = (fit.B / (2.0 * fit.C)) * (fit.B / (2.0 * fit.C));
        fit.w_max = fit.B * fit.B / (4.0 * fit.C);
    }
    const Eigen::VectorXd r = rhs - design * coef;
    fit.residuals.assign(r.data(), r.data() + r.size());
    return fit;
}

GaussianCheck gaussian_triple_prediction(const MomentSet& m) {
    GaussianCheck out;
    out.prediction = m.first[0] * m.second_pair[0] + m.first[1] * m.second_pair[1] +
                     m.first[2] * m.second_pair[2] - 2.0 * m.first[0] * m.first[1] * m.first[2];

    // First-order propagation, moments treated as independent.
    double var = 0.0;
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        const std::complex<double> dfirst =
            m.second_pair[i] - 2.0 * m.first[j] * m.first[k];
        var += std::norm(dfirst) * m.first_err[i] * m.first_err[i];
        var += std::norm(m.first[i]) * m.second_err[i] * m.second_err[i];
    }
    out.sigma = std::sqrt(var);

    const double sigma_triple = moment_sigma(m, 0);
    const double gap = std::abs(m.triple) - std::abs(out.prediction);
    const double denom = std::sqrt(out.sigma * out.sigma + sigma_triple * sigma_triple);
    out.z = denom > 0.0 ? std::abs(gap) / denom : 0.0;
    return out;
}

double witness_variance(const MomentSet& m) {
    if (!m.has_cov()) throw std::invalid_argument("witness_variance: covariance required");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.cov);
    if (es.eigenvalues().minCoeff() < -1e-12 * std::abs(es.eigenvalues().maxCoeff()))
        throw std::invalid_argument("witness_variance: covariance not positive semidefinite");

    std::array<double, 3> x{}, y{};
    for (int i = 0; i < 3; ++i) {
        x[i] = m.n[i];
        y[i] = m.nn[i];
        if (x[i] <= 0.0 || y[i] <= 0.0)
            throw std::invalid_argument("witness_variance: zero mean moment");
    }
    auto cov = [&](int a, int b) { return m.cov(a, b); };

    double var = cov(0, 0);
    for (int i = 0; i < 3; ++i) {
        var -= std::sqrt(x[i] / y[i]) * cov(0, 4 + i) + std::sqrt(y[i] / x[i]) * cov(0, 1 + i);
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double s = std::sqrt(x[i] * x[j] * y[i] * y[j]);
            var += s * (cov(1 + i, 1 + j) / (4.0 * x[i] * x[j]) +
                        cov(1 + i, 4 + j) / (4.0 * x[i] * y[j]) +
                        cov(1 + j, 4 + i) / (4.0 * x[j] * y[i]) +
                        cov(4 + i, 4 + j) / (4.0 * y[i] * y[j]));
        }
    }
    return var;
}

double bootstrap_witness_variance(const MomentSet& m, int n_resamples, std::uint64_t seed) {
    if (!m.has_cov())
        throw std::invalid_argument("bootstrap_witness_variance: covariance required");
    Eigen::MatrixXd cov = m.cov;
    cov.diagonal().array() += 1e-18 * std::max(cov.trace(), 1e-300);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("bootstrap_witness_variance: covariance factorization failed");
    const Eigen::MatrixXd l = llt.matrixL();

    Eigen::VectorXd mean(7);
    mean << std::abs(m.triple), m.n[0], m.n[1], m.n[2], m.nn[0], m.nn[1], m.nn[2];

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double sum = 0.0, sum2 = 0.0;
    Eigen::VectorXd z(7);
    for (int s = 0; s < n_resamples; ++s) {
        for (int i = 0; i < 7; ++i) z(i) = gauss(rng);
        const Eigen::VectorXd v = mean + l * z;
        double w = v(0);
        for (int i = 0; i < 3; ++i)
            w -= std::sqrt(std::max(v(1 + i), 0.0) * std::max(v(4 + i), 0.0));
        sum += w;
        sum2 += w * w;
    }
    const double mu = sum / n_resamples;
    return sum2 / n_resamples - mu * mu;
}

WitnessResult systematic_bound(const WitnessResult& w, const MomentSet& m,
                               const std::array<double, 3>& gain_bias,
                               const std::array<double, 3>& gain_drift) {
    for (double b : gain_bias)
        if (b < 0.0) throw std::invalid_argument("systematic_bound: gain_bias must be >= 0");

    // Upper-bound gains rescale the extracted moments: |triple| by
    // prod(1+b)^(-1/2), n_i by (1+b_i)^(-1), nn by the pair product.
    MomentSet biased = m;
    const double gprod = (1 + gain_bias[0]) * (1 + gain_bias[1]) * (1 + gain_bias[2]);
    biased.triple /= std::sqrt(gprod);
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        biased.n[i] /= (1 + gain_bias[i]);
        biased.nn[i] /= (1 + gain_bias[j]) * (1 + gain_bias[k]);
    }
    WitnessResult lower = compute_witness(biased);

    WitnessResult out = w;
    out.sigma_sys_low = w.w - lower.w;
    const double drift = 0.5 * (gain_drift[0] + gain_drift[1] + gain_drift[2]);
    out.delta_w_total = w.sigma_stat + std::abs(w.w) * drift;
    return out;
}

}  // namespace triphoton
