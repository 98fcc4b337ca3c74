#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <vector>

namespace frozen_er {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

inline BigInt big_binomial(long n, long k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt r = 1;
    for (long i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

inline BigInt big_factorial(long n) {
    BigInt r = 1;
    for (long i = 2; i <= n; ++i) r *= i;
    return r;
}

// Number of labeled trees on k fixed vertices: k^(k-2) (1 for k = 1).
inline BigInt cayley_count(long k) {
    if (k < 1) throw std::invalid_argument("cayley_count: k must be positive");
    if (k == 1) return 1;
    BigInt base = k;
    return boost::multiprecision::pow(base, static_cast<unsigned>(k - 2));
}

inline double big_log(const BigInt& v) {
    if (v <= 0) throw std::domain_error("big_log: nonpositive value");
    const auto bits = boost::multiprecision::msb(v);
    if (bits <= 900) return std::log(v.convert_to<double>());
    const unsigned shift = static_cast<unsigned>(bits - 900);
    const BigInt top = v >> shift;
    return std::log(top.convert_to<double>()) + shift * 0.6931471805599453;
}

}  // namespace frozen_er
