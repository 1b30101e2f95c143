#pragma once

#include <cstdint>

namespace duality_lab {

/// n(n-1)...(n-k+1). Exact in 64-bit integer arithmetic while the product fits,
/// which covers every n <= 20; larger products fall back to floating point.
inline double falling_factorial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0.0;
    std::uint64_t exact = 1;
    std::uint64_t m = n;
    std::uint64_t done = 0;
    for (; done < k; ++done, --m) {
        std::uint64_t next = 0;
        if (__builtin_mul_overflow(exact, m, &next)) break;
        exact = next;
    }
    if (done == k) return static_cast<double>(exact);
    long double rest = static_cast<long double>(exact);
    for (; done < k; ++done, --m) rest *= static_cast<long double>(m);
    return static_cast<double>(rest);
}

inline double binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0.0;
    if (k > n - k) k = n - k;
    long double result = 1.0L;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result = result * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    }
    return static_cast<double>(result);
}

}  // namespace duality_lab
