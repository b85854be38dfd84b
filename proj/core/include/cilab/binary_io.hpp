#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cilab/errors.hpp"

// Little-endian primitives for the .cip dataset and .ckpt checkpoint
// containers. Serialization is explicit per byte so the formats stay
// bit-identical on any host.

namespace cilab::io {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f64(std::ostream& os, double v) {
    put_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline void put_f32(std::ostream& os, float v) {
    put_u32(os, std::bit_cast<std::uint32_t>(v));
}

/// Bulk f32 write; fast path on little-endian hosts.
inline void put_f32_array(std::ostream& os, std::span<const float> vs) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(vs.data()),
                 static_cast<std::streamsize>(vs.size() * sizeof(float)));
    } else {
        for (float v : vs) put_f32(os, v);
    }
}

inline std::uint32_t get_u32(std::istream& is, const std::string& what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) {
        throw FormatError("truncated while reading " + what + " at byte offset " +
                          std::to_string(static_cast<long long>(is.tellg())));
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t get_u64(std::istream& is, const std::string& what) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) {
        throw FormatError("truncated while reading " + what + " at byte offset " +
                          std::to_string(static_cast<long long>(is.tellg())));
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f64(std::istream& is, const std::string& what) {
    return std::bit_cast<double>(get_u64(is, what));
}

inline void get_f32_array(std::istream& is, std::span<float> out, const std::string& what) {
    if constexpr (std::endian::native == std::endian::little) {
        if (!is.read(reinterpret_cast<char*>(out.data()),
                     static_cast<std::streamsize>(out.size() * sizeof(float)))) {
            throw FormatError("truncated while reading " + what);
        }
    } else {
        for (float& v : out) v = std::bit_cast<float>(get_u32(is, what));
    }
}

} // namespace cilab::io
