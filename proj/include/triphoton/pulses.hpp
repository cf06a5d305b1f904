#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace triphoton {

enum class ModeShape { boxcar, gaussian, windowed_sinc };

/// Discretized normalized wave-packet f(t) with sum |f|^2 dt = 1. The boxcar
/// is closed on the left edge and open on the right; the gaussian is truncated
/// at +-4 sigma and renormalized; widths are edge-to-edge (boxcar), FWHM
/// (gaussian) or the sinc lobe scale tau.
struct TemporalMode {
    ModeShape shape = ModeShape::boxcar;
    double width = 0.0;    // us
    double t_start = 0.0;  // us
    double t_end = 0.0;    // us
    double dt = 0.0;       // us
    std::vector<double> samples;

    // Shape evaluation at arbitrary t (includes the normalization constant);
    // zero outside [t_start, t_end).
    double value(double t) const;
    double support_length() const { return t_end - t_start; }

    /// Same shape shifted so the support starts at t0.
    TemporalMode shifted(double t0) const;
    /// Same shape resampled on a grid of spacing dt_new.
    TemporalMode resampled(double dt_new) const;

    // Shape parameters fixed by the factories; amplitude_ carries the exact
    // normalization constant so value() matches samples on grid points.
    double amplitude_ = 1.0;
    double sigma_ = 0.0;   // gaussian
    double center_ = 0.0;  // gaussian peak position
    double tc_ = 0.0;      // windowed-sinc truncation window
};

/// Normalized mode of the given shape starting at t = 0. For windowed_sinc,
/// width is the lobe scale tau and the truncation window is t_c = 20 us with
/// sample rate 1/dt (the digitizer defaults); use make_windowed_sinc for
/// explicit control.
TemporalMode make_mode(ModeShape shape, double width, double dt);

/// f(t) = sqrt(fs) R(0,tc) sin^2(pi t / tc) sinc((t - tc/2)/tau), renormalized.
TemporalMode make_windowed_sinc(double t_c, double tau, double sample_rate_MHz);

/// Heterodyne record of one channel; x and p sampled at sample_rate (MHz).
struct QuadratureRecord {
    double sample_rate_MHz = 0.0;
    std::vector<double> x;
    std::vector<double> p;
    int channel = 0;
    int segment_id = 0;
    bool drive_on = true;
};

/// Discrete correlation-convention filtering X_out[k] = sum_j X[k+j] f[j] dt,
/// "valid" region only (output length = input - filter + 1). For the real
/// symmetric filters used here this coincides with convolution.
struct FilteredRecord {
    std::vector<double> x;
    std::vector<double> p;
};
FilteredRecord filter_record(const QuadratureRecord& rec, const TemporalMode& mode);

/// Per-channel filters; identical modes reduce bit-exactly to the shared path.
std::vector<FilteredRecord> filter_records(const std::vector<QuadratureRecord>& recs,
                                           const std::vector<TemporalMode>& modes);

/// r[l] = sum_k f[k] f[k+l] for l = 0..len-1 (peak r[0] = 1/dt for a
/// normalized mode).
std::vector<double> mode_autocorrelation(const TemporalMode& mode);

/// CSV I/O: header line "# channel=.. sample_rate_MHz=.. segment_id=.. on_off=.."
/// followed by x,p rows.
void write_record_csv(const std::string& path, const QuadratureRecord& rec);
QuadratureRecord read_record_csv(const std::string& path);

}  // namespace triphoton
