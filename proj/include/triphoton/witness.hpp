#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace triphoton {

/// Moments of the three filtered output modes. nn and second_pair are indexed
/// by the complementary mode: nn[i] = <N_j N_k>, second_pair[i] = <A_j A_k>
/// with {i,j,k} = {0,1,2}, so the witness summand pairs n[i] with nn[i].
/// cov (when present) is the 7x7 sample covariance of the mean estimates over
/// the scalar statistics {Z, X1..3, Y1..3}, Z being the triple correlator
/// projected on its mean phase.
struct MomentSet {
    std::complex<double> triple{};
    std::array<double, 3> n{};
    std::array<double, 3> nn{};
    std::array<std::complex<double>, 3> first{};
    std::array<std::complex<double>, 3> second_pair{};
    Eigen::MatrixXd cov;  // 7x7, or empty when unknown
    std::array<double, 3> first_err{};
    std::array<double, 3> second_err{};

    bool has_cov() const { return cov.rows() == 7 && cov.cols() == 7; }
};

struct WitnessResult {
    double w = 0.0;
    double sigma_stat = 0.0;
    double sigma_sys_low = 0.0;  // downward shift under upper-bound gains
    double n_tot = 0.0;
    double delta_w_total = 0.0;  // sigma_stat + w * (drift-propagated relative error)
    bool clipped = false;        // some moment was clipped to zero within 1 sigma
};

/// W = |<A1A2A3>| - sum_i sqrt(<N_i><N_jN_k>). Small negative moments (within
/// one standard error) are clipped to zero; larger ones are rejected.
WitnessResult compute_witness(const MomentSet& m);

struct ScalingFit {
    double B = 0.0, C = 0.0;
    double n_peak = 0.0;  // (B/2C)^2
    double w_max = 0.0;   // B^2/(4C)
    std::vector<double> residuals;
};

/// Least-squares fit of W = B sqrt(N) - C N over (n_tot, w) points.
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points);

struct GaussianCheck {
    std::complex<double> prediction;  // Gaussian-state value of <A1A2A3>
    double sigma = 0.0;               // first-order propagated error of |prediction|
    double z = 0.0;                   // incompatibility of measured |triple| with it
};

/// <a1><a2a3> + <a2><a1a3> + <a3><a1a2> - 2<a1><a2><a3>: the third moment any
/// Gaussian state with the measured first/second moments would have.
GaussianCheck gaussian_triple_prediction(const MomentSet& m);

/// Second-order delta-method variance of W from the 7x7 moment covariance.
double witness_variance(const MomentSet& m);

/// Monte-Carlo validation oracle for witness_variance: resamples the moment
/// vector from N(mean, cov) and returns the empirical variance of W.
double bootstrap_witness_variance(const MomentSet& m, int n_resamples, std::uint64_t seed);

/// Lower-bounds W under upper-bound gains (relative overestimates gain_bias)
/// and folds slow gain drift into the total uncertainty
/// Delta W = sigma_stat + W * (sum_i drift_i)/2.
WitnessResult systematic_bound(const WitnessResult& w, const MomentSet& m,
                               const std::array<double, 3>& gain_bias,
                               const std::array<double, 3>& gain_drift);

}  // namespace triphoton
