#pragma once

#include <cstdint>
#include <string>

#include "mlab/error.hpp"

namespace mlab {

using i128 = __int128;
using u128 = unsigned __int128;

inline i128 checked_mul(i128 a, i128 b) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r))
        throw PrecisionError("128-bit overflow in multiplication; use FIXED127 mode");
    return r;
}

inline i128 checked_add(i128 a, i128 b) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r))
        throw PrecisionError("128-bit overflow in addition; use FIXED127 mode");
    return r;
}

inline i128 checked_sub(i128 a, i128 b) {
    i128 r;
    if (__builtin_sub_overflow(a, b, &r))
        throw PrecisionError("128-bit overflow in subtraction; use FIXED127 mode");
    return r;
}

inline i128 abs128(i128 a) { return a < 0 ? -a : a; }

inline i128 gcd128(i128 a, i128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

/// Floor division for a signed numerator and positive denominator.
inline i128 floor_div(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

/// Non-negative residue of a modulo m (m > 0).
inline i128 mod_floor(i128 a, i128 m) {
    i128 r = a % m;
    return r < 0 ? r + m : r;
}

inline std::string to_string(u128 v) {
    if (v == 0)
        return "0";
    std::string s;
    while (v != 0) {
        s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return s;
}

inline std::string to_string(i128 v) {
    if (v < 0)
        return "-" + to_string(static_cast<u128>(-v));
    return to_string(static_cast<u128>(v));
}

inline i128 parse_i128(const std::string& text) {
    if (text.empty())
        throw ArgumentError("empty integer literal");
    std::size_t i = 0;
    bool neg = false;
    if (text[0] == '-' || text[0] == '+') {
        neg = text[0] == '-';
        i = 1;
    }
    if (i == text.size())
        throw ArgumentError("malformed integer literal '" + text + "'");
    i128 v = 0;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c < '0' || c > '9')
            throw ArgumentError("malformed integer literal '" + text + "'");
        v = checked_add(checked_mul(v, 10), c - '0');
    }
    return neg ? -v : v;
}

} // namespace mlab
