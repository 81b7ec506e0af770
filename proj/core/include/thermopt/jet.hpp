#pragma once

// Forward-mode dual numbers carrying a fixed-size gradient. Phase space
// formulas are written once as templates and instantiated with double
// (values) or Jet<4> (values + exact gradients).

#include <array>
#include <cmath>
#include <cstddef>

namespace thermopt {

template <std::size_t N>
struct Jet {
    double v = 0.0;
    std::array<double, N> d{};

    constexpr Jet() = default;
    constexpr Jet(double value) : v(value) {} // NOLINT: implicit constants

    static Jet variable(double value, std::size_t index)
    {
        Jet j(value);
        j.d[index] = 1.0;
        return j;
    }
};

template <std::size_t N>
Jet<N> operator+(const Jet<N>& a, const Jet<N>& b)
{
    Jet<N> r(a.v + b.v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}

template <std::size_t N>
Jet<N> operator-(const Jet<N>& a, const Jet<N>& b)
{
    Jet<N> r(a.v - b.v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}

template <std::size_t N>
Jet<N> operator-(const Jet<N>& a)
{
    Jet<N> r(-a.v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
}

template <std::size_t N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b)
{
    Jet<N> r(a.v * b.v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}

template <std::size_t N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b)
{
    const double inv = 1.0 / b.v;
    Jet<N> r(a.v * inv);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
}

template <std::size_t N> Jet<N> operator+(const Jet<N>& a, double b) { return a + Jet<N>(b); }
template <std::size_t N> Jet<N> operator+(double a, const Jet<N>& b) { return Jet<N>(a) + b; }
template <std::size_t N> Jet<N> operator-(const Jet<N>& a, double b) { return a - Jet<N>(b); }
template <std::size_t N> Jet<N> operator-(double a, const Jet<N>& b) { return Jet<N>(a) - b; }
template <std::size_t N> Jet<N> operator*(const Jet<N>& a, double b) { return a * Jet<N>(b); }
template <std::size_t N> Jet<N> operator*(double a, const Jet<N>& b) { return Jet<N>(a) * b; }
template <std::size_t N> Jet<N> operator/(const Jet<N>& a, double b) { return a / Jet<N>(b); }
template <std::size_t N> Jet<N> operator/(double a, const Jet<N>& b) { return Jet<N>(a) / b; }

template <std::size_t N>
Jet<N> sqrt(const Jet<N>& a)
{
    const double s = std::sqrt(a.v);
    Jet<N> r(s);
    const double k = 0.5 / s;
    for (std::size_t i = 0; i < N; ++i) r.d[i] = k * a.d[i];
    return r;
}

template <std::size_t N>
Jet<N> exp(const Jet<N>& a)
{
    const double e = std::exp(a.v);
    Jet<N> r(e);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = e * a.d[i];
    return r;
}

template <std::size_t N>
Jet<N> log(const Jet<N>& a)
{
    Jet<N> r(std::log(a.v));
    for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] / a.v;
    return r;
}

inline double value_of(double x) { return x; }
template <std::size_t N> double value_of(const Jet<N>& x) { return x.v; }

} // namespace thermopt
