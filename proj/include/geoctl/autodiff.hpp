#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<double>> yields exact second
// derivatives, which is how analytic metrics and scalar fields obtain their
// partials without hand-written derivative code.

#include <cmath>
#include <type_traits>

namespace geoctl::ad {

template <class T> struct Dual {
    T v{};
    T d{};

    constexpr Dual() = default;
    constexpr Dual(double value) : v(value), d(0.0) {}
    constexpr Dual(T value, T deriv) : v(value), d(deriv) {}
    template <class U>
        requires(!std::is_same_v<U, T> && std::is_convertible_v<U, T> && !std::is_arithmetic_v<U>)
    constexpr Dual(U value) : v(T(value)), d(0.0) {}

    Dual &operator+=(const Dual &o) { v += o.v; d += o.d; return *this; }
    Dual &operator-=(const Dual &o) { v -= o.v; d -= o.d; return *this; }
    Dual &operator*=(const Dual &o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
    Dual &operator/=(const Dual &o) { *this = *this / o; return *this; }
};

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};
template <class T> inline constexpr bool is_dual_v = is_dual<T>::value;

template <class T> Dual<T> operator-(const Dual<T> &a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator+(const Dual<T> &a) { return a; }

template <class T> Dual<T> operator+(const Dual<T> &a, const Dual<T> &b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T> &a, const Dual<T> &b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator*(const Dual<T> &a, const Dual<T> &b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> Dual<T> operator/(const Dual<T> &a, const Dual<T> &b) {
    T inv = T(1.0) / b.v;
    return {a.v * inv, (a.d * b.v - a.v * b.d) * inv * inv};
}

template <class T> Dual<T> operator+(const Dual<T> &a, double s) { return {a.v + s, a.d}; }
template <class T> Dual<T> operator+(double s, const Dual<T> &a) { return {s + a.v, a.d}; }
template <class T> Dual<T> operator-(const Dual<T> &a, double s) { return {a.v - s, a.d}; }
template <class T> Dual<T> operator-(double s, const Dual<T> &a) { return {s - a.v, -a.d}; }
template <class T> Dual<T> operator*(const Dual<T> &a, double s) { return {a.v * s, a.d * s}; }
template <class T> Dual<T> operator*(double s, const Dual<T> &a) { return {s * a.v, s * a.d}; }
template <class T> Dual<T> operator/(const Dual<T> &a, double s) { return {a.v / s, a.d / s}; }
template <class T> Dual<T> operator/(double s, const Dual<T> &a) { return Dual<T>(s) / a; }

template <class T> bool operator<(const Dual<T> &a, const Dual<T> &b) { return a.v < b.v; }
template <class T> bool operator>(const Dual<T> &a, const Dual<T> &b) { return a.v > b.v; }
template <class T> bool operator<(const Dual<T> &a, double b) { return a.v < b; }
template <class T> bool operator>(const Dual<T> &a, double b) { return a.v > b; }

/// Innermost double value of a (possibly nested) dual.
inline double primal(double x) { return x; }
template <class T> double primal(const Dual<T> &x) { return primal(x.v); }

// Elementary functions. Each uses the chain rule on the value part, so nesting works.
using std::abs;
using std::asin;
using std::atan;
using std::atanh;
using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sinh;
using std::sqrt;
using std::tan;
using std::tanh;

template <class T> Dual<T> sin(const Dual<T> &a) { return {sin(a.v), cos(a.v) * a.d}; }
template <class T> Dual<T> cos(const Dual<T> &a) { return {cos(a.v), -(sin(a.v) * a.d)}; }
template <class T> Dual<T> tan(const Dual<T> &a) {
    T t = tan(a.v);
    return {t, (T(1.0) + t * t) * a.d};
}
template <class T> Dual<T> exp(const Dual<T> &a) {
    T e = exp(a.v);
    return {e, e * a.d};
}
template <class T> Dual<T> log(const Dual<T> &a) { return {log(a.v), a.d / a.v}; }
template <class T> Dual<T> sqrt(const Dual<T> &a) {
    T r = sqrt(a.v);
    return {r, a.d / (2.0 * r)};
}
template <class T> Dual<T> pow(const Dual<T> &a, double p) {
    return {pow(a.v, p), p * pow(a.v, p - 1.0) * a.d};
}
template <class T> Dual<T> asin(const Dual<T> &a) {
    return {asin(a.v), a.d / sqrt(T(1.0) - a.v * a.v)};
}
template <class T> Dual<T> atan(const Dual<T> &a) {
    return {atan(a.v), a.d / (T(1.0) + a.v * a.v)};
}
template <class T> Dual<T> atanh(const Dual<T> &a) {
    return {atanh(a.v), a.d / (T(1.0) - a.v * a.v)};
}
template <class T> Dual<T> sinh(const Dual<T> &a) { return {sinh(a.v), cosh(a.v) * a.d}; }
template <class T> Dual<T> cosh(const Dual<T> &a) { return {cosh(a.v), sinh(a.v) * a.d}; }
template <class T> Dual<T> tanh(const Dual<T> &a) {
    T t = tanh(a.v);
    return {t, (T(1.0) - t * t) * a.d};
}
template <class T> Dual<T> abs(const Dual<T> &a) { return primal(a) < 0.0 ? -a : a; }

/// Integer power by repeated multiplication; keeps derivatives exact at 0.
template <class T> T ipow(const T &x, int n) {
    T r(1.0);
    for (int i = 0; i < n; ++i) r = r * x;
    return r;
}

template <class T> T square(const T &x) { return x * x; }

} // namespace geoctl::ad
