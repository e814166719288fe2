#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sbmri/complex_image.hpp"
#include "sbmri/errors.hpp"

namespace sbmri::io {

// All artifact files are little-endian; this codebase targets LE hosts.

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw FileFormatError("unexpected end of file");
    return v;
}

inline void write_magic(std::ostream& os, const char magic[4]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char magic[4], const std::string& what) {
    char buf[4];
    is.read(buf, 4);
    if (!is || std::memcmp(buf, magic, 4) != 0)
        throw FileFormatError(what + ": bad magic bytes");
}

inline void expect_version(std::istream& is, std::uint32_t want, const std::string& what) {
    const auto got = read_pod<std::uint32_t>(is);
    if (got != want)
        throw FileFormatError(what + ": unsupported version " + std::to_string(got) +
                              " (expected " + std::to_string(want) + ")");
}

inline void write_complex_f32(std::ostream& os, const ComplexImage& x) {
    std::vector<float> buf(x.size() * 2);
    for (std::size_t i = 0; i < x.size(); ++i) {
        buf[2 * i] = static_cast<float>(x[i].real());
        buf[2 * i + 1] = static_cast<float>(x[i].imag());
    }
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

inline ComplexImage read_complex_f32(std::istream& is, std::size_t h, std::size_t w) {
    std::vector<float> buf(h * w * 2);
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!is) throw FileFormatError("unexpected end of file in complex payload");
    ComplexImage x(h, w);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = {static_cast<double>(buf[2 * i]), static_cast<double>(buf[2 * i + 1])};
    return x;
}

inline void write_f32(std::ostream& os, const std::vector<double>& v) {
    std::vector<float> buf(v.begin(), v.end());
    os.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

inline std::vector<double> read_f32(std::istream& is, std::size_t n) {
    std::vector<float> buf(n);
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(n * sizeof(float)));
    if (!is) throw FileFormatError("unexpected end of file in float payload");
    return {buf.begin(), buf.end()};
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FileFormatError("cannot open for writing: " + path);
    return os;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FileFormatError("cannot open for reading: " + path);
    return is;
}

} // namespace sbmri::io
