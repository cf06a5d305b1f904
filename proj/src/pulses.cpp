#include "triphoton/pulses.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace triphoton {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x); }

}  // namespace

double TemporalMode::value(double t) const {
    if (t < t_start || t >= t_end) return 0.0;
    switch (shape) {
        case ModeShape::boxcar:
            return amplitude_;
        case ModeShape::gaussian: {
            const double u = (t - center_) / sigma_;
            return amplitude_ * std::exp(-0.5 * u * u);
        }
        case ModeShape::windowed_sinc: {
            const double tl = t - t_start;
            const double hann = std::sin(kPi * tl / tc_);
            return amplitude_ * hann * hann * sinc((tl - tc_ / 2.0) / width);
        }
    }
    return 0.0;
}

TemporalMode TemporalMode::shifted(double t0) const {
    TemporalMode m = *this;
    const double shift = t0 - t_start;
    m.t_start += shift;
    m.t_end += shift;
    m.center_ += shift;
    return m;
}

TemporalMode TemporalMode::resampled(double dt_new) const {
    TemporalMode m = *this;
    m.dt = dt_new;
    const auto n = static_cast<std::size_t>(std::round((t_end - t_start) / dt_new));
    m.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) m.samples[k] = m.value(t_start + double(k) * dt_new);
    return m;
}

namespace {

TemporalMode finalize(TemporalMode m) {
    // Discrete normalization sum |f|^2 dt = 1, made exact by rescaling.
    const auto n = static_cast<std::size_t>(std::round((m.t_end - m.t_start) / m.dt));
    m.samples.resize(n);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        m.samples[k] = m.value(m.t_start + double(k) * m.dt);
        norm2 += m.samples[k] * m.samples[k];
    }
    norm2 *= m.dt;
    if (norm2 <= 0.0) throw std::invalid_argument("temporal mode has zero norm");
    const double rescale = 1.0 / std::sqrt(norm2);
    m.amplitude_ *= rescale;
    for (auto& s : m.samples) s *= rescale;
    return m;
}

}  // namespace

TemporalMode make_mode(ModeShape shape, double width, double dt) {
    if (width <= 0.0) throw std::invalid_argument("make_mode: width must be > 0");
    if (dt > width / 8.0)
        throw std::invalid_argument("make_mode: dt too coarse (need dt <= width/8)");

    TemporalMode m;
    m.shape = shape;
    m.width = width;
    m.dt = dt;
    m.t_start = 0.0;
    switch (shape) {
        case ModeShape::boxcar:
            m.t_end = width;
            m.amplitude_ = 1.0 / std::sqrt(width);
            break;
        case ModeShape::gaussian: {
            m.sigma_ = width / (2.0 * std::sqrt(2.0 * std::log(2.0)));
            m.t_end = 8.0 * m.sigma_;  // +-4 sigma support
            m.center_ = 4.0 * m.sigma_;
            m.amplitude_ = 1.0;
            break;
        }
        case ModeShape::windowed_sinc:
            return make_windowed_sinc(20.0, width, 1.0 / dt);
    }
    return finalize(std::move(m));
}

TemporalMode make_windowed_sinc(double t_c, double tau, double sample_rate_MHz) {
    if (t_c <= 0.0 || tau <= 0.0 || sample_rate_MHz <= 0.0)
        throw std::invalid_argument("make_windowed_sinc: nonpositive parameter");
    TemporalMode m;
    m.shape = ModeShape::windowed_sinc;
    m.width = tau;
    m.dt = 1.0 / sample_rate_MHz;
    m.t_start = 0.0;
    m.t_end = t_c;
    m.tc_ = t_c;
    m.amplitude_ = std::sqrt(sample_rate_MHz);
    return finalize(std::move(m));
}

FilteredRecord filter_record(const QuadratureRecord& rec, const TemporalMode& mode) {
    if (rec.x.size() != rec.p.size())
        throw std::invalid_argument("filter_record: x and p length mismatch");
    if (std::abs(rec.sample_rate_MHz * mode.dt - 1.0) > 1e-9)
        throw std::invalid_argument("filter_record: record sample rate inconsistent with mode grid");
    const std::size_t len = rec.x.size(), flen = mode.samples.size();
    if (len < flen) throw std::invalid_argument("filter_record: record shorter than filter");

    FilteredRecord out;
    out.x.resize(len - flen + 1);
    out.p.resize(len - flen + 1);
    for (std::size_t k = 0; k + flen <= len; ++k) {
        double sx = 0.0, sp = 0.0;
        for (std::size_t j = 0; j < flen; ++j) {
            sx += rec.x[k + j] * mode.samples[j];
            sp += rec.p[k + j] * mode.samples[j];
        }
        out.x[k] = sx * mode.dt;
        out.p[k] = sp * mode.dt;
    }
    return out;
}

std::vector<FilteredRecord> filter_records(const std::vector<QuadratureRecord>& recs,
                                           const std::vector<TemporalMode>& modes) {
    if (recs.size() != modes.size())
        throw std::invalid_argument("filter_records: one mode per record required");
    std::vector<FilteredRecord> out;
    out.reserve(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) out.push_back(filter_record(recs[i], modes[i]));
    return out;
}

std::vector<double> mode_autocorrelation(const TemporalMode& mode) {
    const std::size_t n = mode.samples.size();
    std::vector<double> r(n, 0.0);
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t k = 0; k + l < n; ++k) r[l] += mode.samples[k] * mode.samples[k + l];
    return r;
}

void write_record_csv(const std::string& path, const QuadratureRecord& rec) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# channel=" << rec.channel << " sample_rate_MHz=" << rec.sample_rate_MHz
        << " segment_id=" << rec.segment_id << " on_off=" << (rec.drive_on ? 1 : 0) << "\n";
    out << "x,p\n";
    out.precision(12);
    for (std::size_t i = 0; i < rec.x.size(); ++i) out << rec.x[i] << "," << rec.p[i] << "\n";
}

QuadratureRecord read_record_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    QuadratureRecord rec;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
        throw std::runtime_error("record csv: missing header");
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "channel") rec.channel = std::stoi(val);
        else if (key == "sample_rate_MHz") rec.sample_rate_MHz = std::stod(val);
        else if (key == "segment_id") rec.segment_id = std::stoi(val);
        else if (key == "on_off") rec.drive_on = (val != "0");
    }
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        rec.x.push_back(std::stod(line.substr(0, comma)));
        rec.p.push_back(std::stod(line.substr(comma + 1)));
    }
    return rec;
}

}  // namespace triphoton
