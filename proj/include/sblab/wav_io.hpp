#ifndef SBLAB_WAV_IO_HPP
#define SBLAB_WAV_IO_HPP

#include <string>
#include <vector>

namespace sblab {

/// Mono 32-bit float WAV.
void write_wav(const std::string& path, const std::vector<double>& samples, double rate);

struct WavData {
    std::vector<double> samples;
    double rate = 0.0;
};

WavData read_wav(const std::string& path);

} // namespace sblab

#endif
