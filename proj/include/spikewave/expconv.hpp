#pragma once

// Convolutions of decaying exponentials on [0, h]:
//
//   conv1(h; a, b)    = int_0^h exp(-a (h - s)) exp(-b s) ds
//   conv2(h; a, b, c) = int_0^h conv1(h - s; a, b) exp(-c s) ds
//
// Both are symmetric in their rates and equal (up to sign) the divided
// differences of x -> exp(-x h). Coinciding rates are removable
// singularities; close rates switch to a Taylor expansion about the mean
// rate so results stay at full precision through the coincidence. Rates may
// be complex.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace spikewave::expconv {

namespace detail {

inline double abs_(double x) { return std::abs(x); }
inline double abs_(const std::complex<double>& x) { return std::abs(x); }
inline double re_(double x) { return x; }
inline double re_(const std::complex<double>& x) { return x.real(); }

// Below this value of h * (rate spread) the series is used.
constexpr double kSeriesSwitch = 1.0;

// exp(-mean h) h^N sum_k h_k(e) / (k + N)!, e_i = -h (x_i - mean), where
// h_k is the complete homogeneous symmetric polynomial of degree k.
template <class T, std::size_t P>
T series(double h, const std::array<T, P>& x) {
    constexpr std::size_t N = P - 1;
    T mean{};
    for (const auto& v : x) mean += v;
    mean /= static_cast<double>(P);
    std::array<T, P> e;
    for (std::size_t i = 0; i < P; ++i) e[i] = -h * (x[i] - mean);

    constexpr int kTerms = 40;
    // hk[j][k]: complete homogeneous polynomial of degree k in e_0..e_j.
    std::array<T, kTerms> hk{};
    T pw{1.0};
    for (int k = 0; k < kTerms; ++k) {
        hk[k] = pw;
        pw *= e[0];
    }
    for (std::size_t j = 1; j < P; ++j)
        for (int k = 1; k < kTerms; ++k) hk[k] += e[j] * hk[k - 1];

    double fact = 1.0;  // (k + N)!
    for (std::size_t i = 2; i <= N; ++i) fact *= static_cast<double>(i);
    T sum{};
    for (int k = 0; k < kTerms; ++k) {
        if (k > 0) fact *= static_cast<double>(k + N);
        sum += hk[k] / fact;
    }
    return std::exp(-mean * h) * std::pow(h, static_cast<double>(N)) * sum;
}

}  // namespace detail

template <class T>
T conv1(double h, T a, T b) {
    if (h <= 0.0) return T{0.0};
    if (detail::re_(b) < detail::re_(a)) std::swap(a, b);
    const T d = b - a;
    if (detail::abs_(d) * h < detail::kSeriesSwitch) return detail::series<T, 2>(h, {a, b});
    return std::exp(-a * h) * (T{1.0} - std::exp(-d * h)) / d;
}

template <class T>
T conv2(double h, T a, T b, T c) {
    if (h <= 0.0) return T{0.0};
    // Put the widest pair in (a, c) so the outer difference quotient has
    // the largest denominator available.
    const double dab = detail::abs_(a - b), dbc = detail::abs_(b - c), dac = detail::abs_(a - c);
    if (dab >= dbc && dab >= dac) std::swap(b, c);       // widest pair (a, b)
    else if (dbc >= dab && dbc >= dac) std::swap(a, b);  // widest pair (b, c)
    const T d = c - a;
    if (detail::abs_(d) * h < detail::kSeriesSwitch) return detail::series<T, 3>(h, {a, b, c});
    return (conv1(h, a, b) - conv1(h, b, c)) / d;
}

// (exp(d x) - 1) / d with the removable point d = 0.
inline double exprel_scaled(double x, double d) {
    const double t = d * x;
    if (std::abs(t) < 1e-8) return x * (1.0 + 0.5 * t);
    return std::expm1(t) / d;
}

}  // namespace spikewave::expconv
