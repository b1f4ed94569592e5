#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sblab/dsp.hpp"
#include "sblab/error.hpp"
#include "sblab/wav_io.hpp"

using namespace sblab;

TEST_CASE("fft resolves a bin-aligned tone") {
    const size_t n = 4096;
    const double rate = 4096.0;
    std::vector<std::complex<double>> buf(n);
    for (size_t k = 0; k < n; ++k)
        buf[k] = std::sin(2.0 * M_PI * 100.0 * static_cast<double>(k) / rate);
    fft(buf, false);
    size_t peak = 0;
    double best = 0.0;
    for (size_t k = 1; k < n / 2; ++k) {
        if (std::abs(buf[k]) > best) {
            best = std::abs(buf[k]);
            peak = k;
        }
    }
    CHECK(peak == 100);
}

TEST_CASE("fft inverse round trip") {
    std::vector<std::complex<double>> buf(256);
    for (size_t k = 0; k < buf.size(); ++k) buf[k] = std::cos(0.1 * static_cast<double>(k));
    auto orig = buf;
    fft(buf, false);
    fft(buf, true);
    for (size_t k = 0; k < buf.size(); ++k)
        CHECK(std::abs(buf[k] - orig[k]) < 1e-12);
}

TEST_CASE("decimation keeps passband tones and removes aliases") {
    const double in_rate = 48000.0, out_rate = 12000.0;
    const size_t n = 48000;
    std::vector<double> x(n);
    for (size_t k = 0; k < n; ++k) {
        double t = static_cast<double>(k) / in_rate;
        x[k] = std::sin(2.0 * M_PI * 1000.0 * t) + std::sin(2.0 * M_PI * 9000.0 * t);
    }
    std::vector<double> y = decimate(x, in_rate, out_rate);
    CHECK(y.size() == n / 4);

    std::size_t len = 0;
    std::vector<double> mag = magnitude_spectrum(y, &len);
    double df = out_rate / static_cast<double>(len);
    auto level_at = [&](double f) {
        size_t bin = static_cast<size_t>(f / df + 0.5);
        double peak = 0.0;
        for (size_t k = bin > 2 ? bin - 2 : 1; k <= bin + 2 && k < mag.size(); ++k)
            peak = std::max(peak, mag[k]);
        return peak;
    };
    // 9 kHz would alias to 3 kHz after subsampling; the filter removes it.
    CHECK(level_at(1000.0) > 100.0 * level_at(3000.0));
}

TEST_CASE("decimation rejects non-integer ratios") {
    std::vector<double> x(1000, 0.0);
    CHECK_THROWS_AS(decimate(x, 48000.0, 9000.0), error);
}

TEST_CASE("wav round trip") {
    std::vector<double> samples(1234, 0.0);
    for (size_t k = 0; k < samples.size(); ++k)
        samples[k] = std::sin(0.01 * static_cast<double>(k)) * 0.5;
    std::string path =
        (std::filesystem::temp_directory_path() / "sblab_wav_roundtrip.wav").string();
    write_wav(path, samples, 96000.0);
    WavData wav = read_wav(path);
    CHECK(wav.rate == doctest::Approx(96000.0));
    REQUIRE(wav.samples.size() == samples.size());
    for (size_t k = 0; k < samples.size(); ++k)
        CHECK(wav.samples[k] == doctest::Approx(samples[k]).epsilon(1e-6));
    std::remove(path.c_str());
}
