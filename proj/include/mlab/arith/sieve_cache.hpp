#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <zlib.h>

#include "mlab/arith/mult_table.hpp"
#include "mlab/error.hpp"

namespace mlab::arith {

/// On-disk layout, little-endian:
///   "MLAB" | u16 version | u64 n_max | u8 kind | u64 words[ceil((n_max+1)/32)] | u32 crc32
/// The CRC covers every byte before the trailer.
inline constexpr std::uint16_t kSieveCacheVersion = 1;

namespace detail {

inline void put_le(std::vector<unsigned char>& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i)
        out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline std::uint64_t get_le(const unsigned char* p, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
        v |= std::uint64_t{p[i]} << (8 * i);
    return v;
}

inline std::uint32_t crc32_of(const unsigned char* data, std::size_t len) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    while (len > 0) {
        uInt piece = static_cast<uInt>(std::min<std::size_t>(len, 1u << 30));
        crc = ::crc32(crc, data, piece);
        data += piece;
        len -= piece;
    }
    return static_cast<std::uint32_t>(crc);
}

} // namespace detail

inline std::vector<unsigned char> encode_sieve_cache(const MultTable& table) {
    if (!table.is_ternary())
        throw ArgumentError("sieve cache stores ternary tables only");
    const auto& packed = std::get<PackedTernary>(table.storage());
    std::vector<unsigned char> out{'M', 'L', 'A', 'B'};
    out.reserve(4 + 2 + 8 + 1 + packed.words().size() * 8 + 4);
    detail::put_le(out, kSieveCacheVersion, 2);
    detail::put_le(out, table.n_max(), 8);
    out.push_back(static_cast<unsigned char>(table.kind()));
    for (std::uint64_t w : packed.words())
        detail::put_le(out, w, 8);
    detail::put_le(out, detail::crc32_of(out.data(), out.size()), 4);
    return out;
}

inline MultTable decode_sieve_cache(const std::vector<unsigned char>& bytes) {
    constexpr std::size_t header = 4 + 2 + 8 + 1;
    if (bytes.size() < header + 4 || std::memcmp(bytes.data(), "MLAB", 4) != 0)
        throw ConsistencyError("sieve cache: bad magic or truncated header");
    std::uint32_t stored = static_cast<std::uint32_t>(detail::get_le(bytes.data() + bytes.size() - 4, 4));
    if (stored != detail::crc32_of(bytes.data(), bytes.size() - 4))
        throw ConsistencyError("sieve cache: CRC32 mismatch");
    auto version = detail::get_le(bytes.data() + 4, 2);
    if (version != kSieveCacheVersion)
        throw ConsistencyError("sieve cache: unsupported version " + std::to_string(version));
    std::uint64_t n_max = detail::get_le(bytes.data() + 6, 8);
    auto kind = bytes[14];
    if (kind > static_cast<unsigned char>(MultKind::custom))
        throw ConsistencyError("sieve cache: unknown kind tag " + std::to_string(kind));
    PackedTernary packed(n_max + 1);
    std::size_t words = packed.words().size();
    if (bytes.size() != header + words * 8 + 4)
        throw ConsistencyError("sieve cache: payload size does not match n_max");
    for (std::size_t i = 0; i < words; ++i)
        packed.words()[i] = detail::get_le(bytes.data() + header + 8 * i, 8);
    return MultTable(static_cast<MultKind>(kind), n_max, std::move(packed));
}

inline void save_sieve_cache(const MultTable& table, const std::filesystem::path& path) {
    auto bytes = encode_sieve_cache(table);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw ResourceError("cannot write sieve cache " + tmp.string());
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!f)
            throw ResourceError("short write to sieve cache " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline MultTable load_sieve_cache(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ResourceError("cannot read sieve cache " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_sieve_cache(bytes);
}

} // namespace mlab::arith
