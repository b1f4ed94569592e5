#include "sblab/wav_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "sblab/error.hpp"

namespace sblab {

namespace {

void put_u32(std::ofstream& f, std::uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 24)};
    f.write(b, 4);
}

void put_u16(std::ofstream& f, std::uint16_t v) {
    char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
    f.write(b, 2);
}

std::uint32_t get_u32(std::ifstream& f) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t get_u16(std::ifstream& f) {
    unsigned char b[2];
    f.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

} // namespace

void write_wav(const std::string& path, const std::vector<double>& samples, double rate) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), errc::io_error, "cannot open wav file for writing: " + path);

    const std::uint32_t n = static_cast<std::uint32_t>(samples.size());
    const std::uint32_t data_bytes = n * 4;
    const std::uint32_t sr = static_cast<std::uint32_t>(rate + 0.5);

    f.write("RIFF", 4);
    put_u32(f, 36 + data_bytes);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    put_u32(f, 16);
    put_u16(f, 3); // IEEE float
    put_u16(f, 1); // mono
    put_u32(f, sr);
    put_u32(f, sr * 4);
    put_u16(f, 4);
    put_u16(f, 32);
    f.write("data", 4);
    put_u32(f, data_bytes);
    for (double s : samples) {
        float v = static_cast<float>(s);
        char b[4];
        std::memcpy(b, &v, 4);
        f.write(b, 4);
    }
    require(f.good(), errc::io_error, "failed writing wav file: " + path);
}

WavData read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), errc::io_error, "cannot open wav file: " + path);

    char tag[5] = {0};
    f.read(tag, 4);
    require(std::strncmp(tag, "RIFF", 4) == 0, errc::io_error, "not a RIFF file: " + path);
    get_u32(f);
    f.read(tag, 4);
    require(std::strncmp(tag, "WAVE", 4) == 0, errc::io_error, "not a WAVE file: " + path);

    WavData out;
    std::uint16_t format = 0, channels = 0, bits = 0;
    while (f.good()) {
        f.read(tag, 4);
        if (!f.good()) break;
        std::uint32_t size = get_u32(f);
        if (std::strncmp(tag, "fmt ", 4) == 0) {
            format = get_u16(f);
            channels = get_u16(f);
            out.rate = static_cast<double>(get_u32(f));
            get_u32(f);
            get_u16(f);
            bits = get_u16(f);
            if (size > 16) f.seekg(size - 16, std::ios::cur);
        } else if (std::strncmp(tag, "data", 4) == 0) {
            require(format == 3 && channels == 1 && bits == 32, errc::io_error,
                    "expected mono 32-bit float wav: " + path);
            std::uint32_t n = size / 4;
            out.samples.resize(n);
            for (std::uint32_t k = 0; k < n; ++k) {
                char b[4];
                f.read(b, 4);
                float v;
                std::memcpy(&v, b, 4);
                out.samples[k] = static_cast<double>(v);
            }
            return out;
        } else {
            f.seekg(size, std::ios::cur);
        }
    }
    fail(errc::io_error, "wav file has no data chunk: " + path);
}

} // namespace sblab
