#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include "gzsb/error.hpp"

// Little-endian field readers/writers. Encoding is byte-wise so bundle and
// checkpoint files are identical regardless of host endianness.

namespace gzsb::detail {

inline void put_bytes(std::ostream& os, std::uint64_t v, int nbytes) {
    char buf[8];
    for (int i = 0; i < nbytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, nbytes);
}

inline void put_u16(std::ostream& os, std::uint16_t v) { put_bytes(os, v, 2); }
inline void put_u32(std::ostream& os, std::uint32_t v) { put_bytes(os, v, 4); }
inline void put_u64(std::ostream& os, std::uint64_t v) { put_bytes(os, v, 8); }
inline void put_f32(std::ostream& os, float v) { put_bytes(os, std::bit_cast<std::uint32_t>(v), 4); }
inline void put_f64(std::ostream& os, double v) { put_bytes(os, std::bit_cast<std::uint64_t>(v), 8); }

inline std::uint64_t get_bytes(std::istream& is, int nbytes, const std::string& file,
                               const std::string& field) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), nbytes);
    if (is.gcount() != nbytes) {
        throw DataError(file + ": truncated while reading " + field);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < nbytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

inline std::uint16_t get_u16(std::istream& is, const std::string& file, const std::string& field) {
    return static_cast<std::uint16_t>(get_bytes(is, 2, file, field));
}
inline std::uint32_t get_u32(std::istream& is, const std::string& file, const std::string& field) {
    return static_cast<std::uint32_t>(get_bytes(is, 4, file, field));
}
inline std::uint64_t get_u64(std::istream& is, const std::string& file, const std::string& field) {
    return get_bytes(is, 8, file, field);
}
inline float get_f32(std::istream& is, const std::string& file, const std::string& field) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(get_bytes(is, 4, file, field)));
}
inline double get_f64(std::istream& is, const std::string& file, const std::string& field) {
    return std::bit_cast<double>(get_bytes(is, 8, file, field));
}

inline void put_magic(std::ostream& os, const char magic[5]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char magic[5], const std::string& file) {
    char buf[4];
    is.read(buf, 4);
    if (is.gcount() != 4 || buf[0] != magic[0] || buf[1] != magic[1] || buf[2] != magic[2] ||
        buf[3] != magic[3]) {
        throw DataError(file + ": bad magic (expected \"" + magic + "\")");
    }
}

}  // namespace gzsb::detail
