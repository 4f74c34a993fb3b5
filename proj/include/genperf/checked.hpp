#pragma once

#include <cstdint>
#include <string_view>

#include "genperf/error.hpp"

namespace genperf {

/// FLOP counts, byte counts and token counts all live in this type.
using Count = std::uint64_t;

namespace checked {

inline Count mul(Count a, Count b, std::string_view what = "product") {
    Count out = 0;
    if (__builtin_mul_overflow(a, b, &out)) {
        throw OverflowError(std::string(what) + " exceeds 64-bit range");
    }
    return out;
}

inline Count add(Count a, Count b, std::string_view what = "sum") {
    Count out = 0;
    if (__builtin_add_overflow(a, b, &out)) {
        throw OverflowError(std::string(what) + " exceeds 64-bit range");
    }
    return out;
}

template <typename... Rest>
Count mul(Count a, Count b, Count c, Rest... rest) {
    return mul(mul(a, b), c, rest...);
}

/// base^exp with overflow detection.
inline Count pow(Count base, unsigned exp) {
    Count out = 1;
    for (unsigned i = 0; i < exp; ++i) {
        out = mul(out, base, "power");
    }
    return out;
}

}  // namespace checked
}  // namespace genperf
