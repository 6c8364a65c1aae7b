#pragma once

// Exact and floating scalar types: rationals, complex numbers over any
// ordered field, and the quadratic extension R(sqrt 2).

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <ostream>
#include <string>
#include <string_view>

#include "cmw/errors.hpp"

namespace cmw {

using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::cpp_int;

inline Rational parse_rational(std::string_view text) {
    std::string s(text);
    auto trim = [](std::string& t) {
        const auto b = t.find_first_not_of(" \t");
        const auto e = t.find_last_not_of(" \t");
        t = (b == std::string::npos) ? std::string{} : t.substr(b, e - b + 1);
    };
    trim(s);
    if (s.empty()) throw ParseError("empty rational");
    auto parse_int = [&](std::string t) -> BigInt {
        trim(t);
        std::size_t start = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
        if (start == t.size()) throw ParseError("malformed rational '" + s + "'");
        for (std::size_t i = start; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9') throw ParseError("malformed rational '" + s + "'");
        if (t[0] == '+') t = t.substr(1);
        return BigInt(t);
    };
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(parse_int(s));
    const BigInt num = parse_int(s.substr(0, slash));
    const BigInt den = parse_int(s.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in '" + s + "'");
    return Rational(num, den);
}

inline std::string to_string(const Rational& r) {
    const BigInt n = boost::multiprecision::numerator(r);
    const BigInt d = boost::multiprecision::denominator(r);
    if (d == 1) return n.str();
    return n.str() + "/" + d.str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double x) { return x; }

inline bool is_zero(const Rational& r) { return r == 0; }
inline bool is_zero(double x) { return x == 0.0; }

// Complex numbers over an arbitrary field R (Rational, double, Sqrt2Ext<...>).
template <class R>
struct Complex {
    R re{};
    R im{};

    Complex() = default;
    Complex(R r) : re(std::move(r)), im(0) {}  // NOLINT: implicit embedding
    Complex(R r, R i) : re(std::move(r)), im(std::move(i)) {}
    template <class T, class = std::enable_if_t<std::is_integral_v<T>>>
    Complex(T r) : re(r), im(0) {}  // NOLINT

    static Complex I() { return Complex(R(0), R(1)); }

    Complex conj() const { return Complex(re, -im); }
    R norm2() const { return re * re + im * im; }

    Complex& operator+=(const Complex& o) { re += o.re; im += o.im; return *this; }
    Complex& operator-=(const Complex& o) { re -= o.re; im -= o.im; return *this; }
    Complex& operator*=(const Complex& o) { return *this = *this * o; }
    Complex& operator/=(const Complex& o) { return *this = *this / o; }

    friend Complex operator+(Complex a, const Complex& b) { return a += b; }
    friend Complex operator-(Complex a, const Complex& b) { return a -= b; }
    friend Complex operator-(const Complex& a) { return Complex(-a.re, -a.im); }
    friend Complex operator*(const Complex& a, const Complex& b) {
        return Complex(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
    }
    friend Complex operator/(const Complex& a, const Complex& b) {
        const R n = b.norm2();
        if (is_zero(n)) throw std::domain_error("complex division by zero");
        return Complex((a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n);
    }
    friend bool operator==(const Complex& a, const Complex& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const Complex& a, const Complex& b) { return !(a == b); }
};

template <class R>
bool is_zero(const Complex<R>& z) { return is_zero(z.re) && is_zero(z.im); }

using ExactComplex = Complex<Rational>;
using DComplex = Complex<double>;

// a + b*sqrt(2) with a, b in R.
template <class R>
struct Sqrt2Ext {
    R a{};
    R b{};

    Sqrt2Ext() = default;
    Sqrt2Ext(R x) : a(std::move(x)), b(0) {}  // NOLINT
    Sqrt2Ext(R x, R y) : a(std::move(x)), b(std::move(y)) {}
    template <class T, class = std::enable_if_t<std::is_integral_v<T>>>
    Sqrt2Ext(T x) : a(x), b(0) {}  // NOLINT

    static Sqrt2Ext sqrt2() { return Sqrt2Ext(R(0), R(1)); }

    Sqrt2Ext& operator+=(const Sqrt2Ext& o) { a += o.a; b += o.b; return *this; }
    Sqrt2Ext& operator-=(const Sqrt2Ext& o) { a -= o.a; b -= o.b; return *this; }
    Sqrt2Ext& operator*=(const Sqrt2Ext& o) { return *this = *this * o; }
    Sqrt2Ext& operator/=(const Sqrt2Ext& o) { return *this = *this / o; }

    friend Sqrt2Ext operator+(Sqrt2Ext x, const Sqrt2Ext& y) { return x += y; }
    friend Sqrt2Ext operator-(Sqrt2Ext x, const Sqrt2Ext& y) { return x -= y; }
    friend Sqrt2Ext operator-(const Sqrt2Ext& x) { return Sqrt2Ext(-x.a, -x.b); }
    friend Sqrt2Ext operator*(const Sqrt2Ext& x, const Sqrt2Ext& y) {
        return Sqrt2Ext(x.a * y.a + R(2) * x.b * y.b, x.a * y.b + x.b * y.a);
    }
    friend Sqrt2Ext operator/(const Sqrt2Ext& x, const Sqrt2Ext& y) {
        const R n = y.a * y.a - R(2) * y.b * y.b;
        if (is_zero(n)) throw std::domain_error("division by zero in Q(sqrt 2)");
        const Sqrt2Ext conj(y.a, -y.b);
        const Sqrt2Ext num = x * conj;
        return Sqrt2Ext(num.a / n, num.b / n);
    }
    friend bool operator==(const Sqrt2Ext& x, const Sqrt2Ext& y) { return x.a == y.a && x.b == y.b; }
    friend bool operator!=(const Sqrt2Ext& x, const Sqrt2Ext& y) { return !(x == y); }
};

template <class R>
bool is_zero(const Sqrt2Ext<R>& x) { return is_zero(x.a) && is_zero(x.b); }

template <class R>
double to_double(const Sqrt2Ext<R>& x) { return to_double(x.a) + std::sqrt(2.0) * to_double(x.b); }

// Q(i, sqrt 2): the coefficient field of the spinor matrices.
using SpinorScalar = Complex<Sqrt2Ext<Rational>>;

inline SpinorScalar lift_spinor(const ExactComplex& z) {
    return SpinorScalar(Sqrt2Ext<Rational>(z.re), Sqrt2Ext<Rational>(z.im));
}
inline SpinorScalar sqrt2_spinor() { return SpinorScalar(Sqrt2Ext<Rational>::sqrt2()); }

template <class R>
std::complex<double> to_std(const Complex<R>& z) { return {to_double(z.re), to_double(z.im)}; }

inline std::ostream& operator<<(std::ostream& os, const ExactComplex& z) {
    return os << "(" << to_string(z.re) << ", " << to_string(z.im) << ")";
}
inline std::ostream& operator<<(std::ostream& os, const Sqrt2Ext<Rational>& x) {
    return os << to_string(x.a) << "+" << to_string(x.b) << "r2";
}
inline std::ostream& operator<<(std::ostream& os, const SpinorScalar& z) {
    return os << "(" << z.re << ", " << z.im << ")";
}
inline std::ostream& operator<<(std::ostream& os, const DComplex& z) {
    return os << "(" << z.re << ", " << z.im << ")";
}

}  // namespace cmw
