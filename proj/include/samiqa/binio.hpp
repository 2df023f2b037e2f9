#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

// Little-endian binary file helpers shared by the SIQF/SIQI/SIQC formats.
namespace samiqa::binio {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), std::streamsize(n));
}

template <typename T>
void write_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    write_bytes(os, buf, sizeof(T));
}

inline void write_f64(std::ostream& os, const double* p, std::size_t n) {
    write_bytes(os, p, n * sizeof(double));
}

template <typename T>
T read_le(std::istream& is, const std::string& what) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) throw std::runtime_error("truncated file while reading " + what);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

inline void read_f64(std::istream& is, double* p, std::size_t n, const std::string& what) {
    is.read(reinterpret_cast<char*>(p), std::streamsize(n * sizeof(double)));
    if (!is) throw std::runtime_error("truncated file while reading " + what);
}

inline void expect_magic(std::istream& is, const char* magic, const std::string& path) {
    char buf[4];
    is.read(buf, 4);
    if (!is || std::memcmp(buf, magic, 4) != 0) {
        throw std::runtime_error("bad magic in " + path + " (expected " +
                                 std::string(magic, 4) + ")");
    }
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    return os;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return is;
}

}  // namespace samiqa::binio
