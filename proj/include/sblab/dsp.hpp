#ifndef SBLAB_DSP_HPP
#define SBLAB_DSP_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace sblab {

std::size_t next_pow2(std::size_t n);

/// In-place radix-2 FFT. data.size() must be a power of two.
void fft(std::vector<std::complex<double>>& data, bool inverse);

/// Magnitude spectrum of a real signal zero-padded to the next power of two.
/// Returns bins 0..N/2 (inclusive); bin spacing = rate / N.
std::vector<double> magnitude_spectrum(const std::vector<double>& signal, std::size_t* fft_len);

/// Zero-phase anti-alias low-pass (spectral, cutoff at 0.45 * out_rate with a
/// cosine rolloff to 0.5 * out_rate) followed by subsampling. in_rate must be
/// an integer multiple of out_rate.
std::vector<double> decimate(const std::vector<double>& signal, double in_rate,
                             double out_rate);

/// Parabolic-interpolated position of the largest local maximum of `mag`
/// inside [lo_bin, hi_bin]. Returns a fractional bin index, or -1 if no
/// interior peak exists in the window.
double peak_bin(const std::vector<double>& mag, std::size_t lo_bin, std::size_t hi_bin);

} // namespace sblab

#endif
