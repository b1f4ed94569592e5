#include "sblab/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "sblab/dsp.hpp"

namespace sblab {

double t60(const ImpulseResponse& ir) {
    require(ir.rate > 0.0, errc::bad_argument, "impulse response needs a sample rate");
    const size_t n = ir.samples.size();
    require(static_cast<double>(n) / ir.rate >= 0.1, errc::bad_argument,
            "impulse response shorter than 0.1 s");
    for (double s : ir.samples)
        require(std::isfinite(s), errc::bad_argument, "impulse response has non-finite samples");

    // Schroeder backward integration of the squared signal.
    std::vector<double> energy(n);
    double acc = 0.0;
    for (size_t k = n; k-- > 0;) {
        acc += ir.samples[k] * ir.samples[k];
        energy[k] = acc;
    }
    require(energy[0] > 0.0, errc::insufficient_decay, "signal carries no energy");

    // The backward integral of any finite record plunges at the very end, so
    // the -35 dB point must arrive before the last tenth of the signal.
    size_t at5 = n, at35 = n;
    const size_t usable = static_cast<size_t>(0.9 * static_cast<double>(n));
    for (size_t k = 0; k < usable; ++k) {
        double db = 10.0 * std::log10(energy[k] / energy[0]);
        if (at5 == n && db <= -5.0) at5 = k;
        if (db <= -35.0) {
            at35 = k;
            break;
        }
    }
    require(at35 < n && at5 < at35, errc::insufficient_decay,
            "decay curve never reaches -35 dB");

    // Least-squares line over the [-5, -35] dB span.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    double count = 0.0;
    for (size_t k = at5; k <= at35; ++k) {
        double t = static_cast<double>(k) / ir.rate;
        double db = 10.0 * std::log10(energy[k] / energy[0]);
        sx += t;
        sy += db;
        sxx += t * t;
        sxy += t * db;
        count += 1.0;
    }
    double denom = count * sxx - sx * sx;
    require(denom > 0.0, errc::insufficient_decay, "decay span too short to fit");
    double slope = (count * sxy - sx * sy) / denom; // dB per second, negative
    require(slope < 0.0, errc::insufficient_decay, "decay curve is not decaying");
    return -60.0 / slope;
}

double spectral_centroid(const ImpulseResponse& ir, double f_max) {
    require(ir.rate > 0.0, errc::bad_argument, "impulse response needs a sample rate");
    require(f_max > 0.0 && f_max <= 0.5 * ir.rate, errc::bad_argument,
            "f_max must lie in (0, Nyquist]");
    for (double s : ir.samples)
        require(std::isfinite(s), errc::bad_argument, "impulse response has non-finite samples");

    std::size_t fft_len = 0;
    std::vector<double> mag = magnitude_spectrum(ir.samples, &fft_len);
    double df = ir.rate / static_cast<double>(fft_len);

    double num = 0.0, den = 0.0;
    for (size_t k = 1; k < mag.size(); ++k) {
        double f = df * static_cast<double>(k);
        if (f > f_max) break;
        num += f * mag[k];
        den += mag[k];
    }
    require(den > 0.0, errc::undefined_centroid, "centroid undefined for an all-zero signal");
    return num / den;
}

std::vector<DeltaCentroidRow> centroid_difference_curve(
    const std::vector<MetricsRow>& metrics_high_damping,
    const std::vector<MetricsRow>& metrics_low_damping) {
    std::vector<DeltaCentroidRow> rows;
    for (const MetricsRow& hi : metrics_high_damping) {
        if (!hi.ok) continue;
        for (const MetricsRow& lo : metrics_low_damping) {
            if (!lo.ok || lo.bridge != hi.bridge || lo.key != hi.key) continue;
            rows.push_back({hi.bridge, hi.key, hi.centroid_hz - lo.centroid_hz});
            break;
        }
    }
    require(!rows.empty(), errc::disjoint_stations,
            "damping cases share no usable stations");
    std::sort(rows.begin(), rows.end(), [](const DeltaCentroidRow& a, const DeltaCentroidRow& b) {
        if (a.bridge != b.bridge) return a.bridge == BridgeId::eight_foot;
        return a.key < b.key;
    });
    return rows;
}

double helmholtz_frequency(const HelmholtzSpec& spec) {
    require(spec.speed_of_sound > 0.0, errc::bad_argument, "speed of sound must be positive");
    require(spec.hole_radius >= 0.0, errc::bad_argument, "hole radius must be non-negative");
    require(spec.cavity_volume > 0.0, errc::bad_argument, "cavity volume must be positive");
    require(spec.neck_length >= 0.0 && spec.end_correction_factor >= 0.0, errc::bad_argument,
            "neck length and end correction must be non-negative");
    double l_eff = spec.effective_length();
    require(l_eff > 0.0, errc::bad_argument, "effective neck length must be positive");
    double area = M_PI * spec.hole_radius * spec.hole_radius;
    return spec.speed_of_sound / (2.0 * M_PI) *
           std::sqrt(area / (spec.cavity_volume * l_eff));
}

} // namespace sblab
