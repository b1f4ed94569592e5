#include "sblab/dsp.hpp"

#include <cmath>

#include "sblab/error.hpp"

namespace sblab {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft(std::vector<std::complex<double>>& data, bool inverse) {
    const std::size_t n = data.size();
    require(n > 0 && (n & (n - 1)) == 0, errc::bad_argument, "fft length must be a power of two");

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = data[i + k];
                std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (std::complex<double>& c : data) c /= static_cast<double>(n);
    }
}

std::vector<double> magnitude_spectrum(const std::vector<double>& signal, std::size_t* fft_len) {
    const std::size_t n = next_pow2(signal.size());
    std::vector<std::complex<double>> buf(n);
    for (std::size_t k = 0; k < signal.size(); ++k) buf[k] = signal[k];
    fft(buf, false);
    std::vector<double> mag(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) mag[k] = std::abs(buf[k]);
    if (fft_len) *fft_len = n;
    return mag;
}

std::vector<double> decimate(const std::vector<double>& signal, double in_rate,
                             double out_rate) {
    require(in_rate > 0.0 && out_rate > 0.0, errc::bad_argument, "rates must be positive");
    double ratio = in_rate / out_rate;
    std::size_t m = static_cast<std::size_t>(std::llround(ratio));
    require(std::fabs(ratio - static_cast<double>(m)) < 1e-9 && m >= 1, errc::bad_argument,
            "output rate must divide the simulation rate");
    if (m == 1) return signal;

    const std::size_t n = next_pow2(signal.size());
    std::vector<std::complex<double>> buf(n);
    for (std::size_t k = 0; k < signal.size(); ++k) buf[k] = signal[k];
    fft(buf, false);

    double df = in_rate / static_cast<double>(n);
    double f_pass = 0.45 * out_rate;
    double f_stop = 0.50 * out_rate;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        double f = df * static_cast<double>(k);
        double g;
        if (f <= f_pass) {
            g = 1.0;
        } else if (f >= f_stop) {
            g = 0.0;
        } else {
            g = 0.5 * (1.0 + std::cos(M_PI * (f - f_pass) / (f_stop - f_pass)));
        }
        buf[k] *= g;
        buf[n - k] *= g;
    }
    fft(buf, true);

    std::vector<double> out(signal.size() / m);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = buf[k * m].real();
    return out;
}

double peak_bin(const std::vector<double>& mag, std::size_t lo_bin, std::size_t hi_bin) {
    if (hi_bin >= mag.size()) hi_bin = mag.size() - 1;
    if (lo_bin < 1) lo_bin = 1;
    double best = -1.0;
    std::size_t at = 0;
    for (std::size_t k = lo_bin; k <= hi_bin && k + 1 < mag.size(); ++k) {
        if (mag[k] >= mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] > best) {
            best = mag[k];
            at = k;
        }
    }
    if (at == 0) return -1.0;
    double a = mag[at - 1], b = mag[at], c = mag[at + 1];
    double denom = a - 2.0 * b + c;
    double delta = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
    return static_cast<double>(at) + delta;
}

} // namespace sblab
