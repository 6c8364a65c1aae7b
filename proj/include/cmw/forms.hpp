#pragma once

// Invariant exterior algebra on a 3-dimensional coframe e0, e1, e2.
// A monomial is a bitmask: bit k set means e^k is a factor, factors in
// increasing index order.

#include <array>
#include <bit>
#include <string>
#include <utility>

#include "cmw/errors.hpp"
#include "cmw/scalar.hpp"

namespace cmw {

inline constexpr int kMonomials = 8;

constexpr int mask_degree(int mask) { return std::popcount(static_cast<unsigned>(mask)); }

// Sign of e^{m1} ^ e^{m2} relative to e^{m1|m2}; zero if they share a factor.
constexpr int wedge_sign(int m1, int m2) {
    if (m1 & m2) return 0;
    int inversions = 0;
    for (int i = 0; i < 3; ++i)
        if (m1 & (1 << i))
            for (int j = 0; j < i; ++j)
                if (m2 & (1 << j)) ++inversions;
    return (inversions % 2) ? -1 : 1;
}

inline std::string monomial_name(int mask) {
    if (mask == 0) return "1";
    std::string out;
    for (int i = 0; i < 3; ++i)
        if (mask & (1 << i)) out += "e" + std::to_string(i);
    return out;
}

template <class S>
class InvariantForm {
public:
    InvariantForm() : InvariantForm(0) {}
    explicit InvariantForm(int degree) : degree_(degree) {
        if (degree < 0 || degree > 3) throw DegreeError("degree " + std::to_string(degree) + " out of range");
        coeffs_.fill(S(0));
    }

    static InvariantForm zero(int degree) { return InvariantForm(degree); }
    static InvariantForm constant(S value) {
        InvariantForm f(0);
        f.coeffs_[0] = std::move(value);
        return f;
    }
    static InvariantForm monomial(int mask, S value = S(1)) {
        InvariantForm f(mask_degree(mask));
        f.coeffs_[mask] = std::move(value);
        return f;
    }
    // e^i
    static InvariantForm e(int i) { return monomial(1 << i); }
    // e^i ^ e^j (any order, sign applied)
    static InvariantForm e(int i, int j) {
        const int s = wedge_sign(1 << i, 1 << j);
        if (s == 0) return zero(2);
        return monomial((1 << i) | (1 << j), S(s));
    }
    static InvariantForm volume() { return monomial(7); }

    int degree() const { return degree_; }
    const S& coeff(int mask) const { return coeffs_.at(mask); }
    const S& operator[](int mask) const { return coeffs_.at(mask); }

    void set(int mask, S value) {
        if (mask_degree(mask) != degree_) throw DegreeError("monomial " + monomial_name(mask) + " not of degree " + std::to_string(degree_));
        coeffs_.at(mask) = std::move(value);
    }

    bool is_zero() const {
        for (const auto& c : coeffs_)
            if (!cmw::is_zero(c)) return false;
        return true;
    }

    template <class T, class F>
    InvariantForm<T> mapped(F&& f) const {
        InvariantForm<T> out(degree_);
        for (int m = 0; m < kMonomials; ++m)
            if (mask_degree(m) == degree_) out.set(m, f(coeffs_[m]));
        return out;
    }

    InvariantForm& operator+=(const InvariantForm& o) {
        require_same_degree(o);
        for (int m = 0; m < kMonomials; ++m) coeffs_[m] += o.coeffs_[m];
        return *this;
    }
    InvariantForm& operator-=(const InvariantForm& o) {
        require_same_degree(o);
        for (int m = 0; m < kMonomials; ++m) coeffs_[m] -= o.coeffs_[m];
        return *this;
    }
    InvariantForm& operator*=(const S& s) {
        for (auto& c : coeffs_) c = c * s;
        return *this;
    }

    friend InvariantForm operator+(InvariantForm a, const InvariantForm& b) { return a += b; }
    friend InvariantForm operator-(InvariantForm a, const InvariantForm& b) { return a -= b; }
    friend InvariantForm operator-(InvariantForm a) { return a *= S(-1); }
    friend InvariantForm operator*(const S& s, InvariantForm a) { return a *= s; }
    friend InvariantForm operator*(InvariantForm a, const S& s) { return a *= s; }

    friend bool operator==(const InvariantForm& a, const InvariantForm& b) {
        if (a.degree_ != b.degree_) return a.is_zero() && b.is_zero();
        return a.coeffs_ == b.coeffs_;
    }
    friend bool operator!=(const InvariantForm& a, const InvariantForm& b) { return !(a == b); }

private:
    void require_same_degree(const InvariantForm& o) const {
        if (degree_ != o.degree_) throw DegreeError("cannot add forms of degree " + std::to_string(degree_) + " and " + std::to_string(o.degree_));
    }

    int degree_;
    std::array<S, kMonomials> coeffs_;
};

template <class S>
InvariantForm<S> wedge(const InvariantForm<S>& a, const InvariantForm<S>& b) {
    const int deg = a.degree() + b.degree();
    if (deg > 3) throw DegreeError("wedge of degrees " + std::to_string(a.degree()) + " and " + std::to_string(b.degree()) + " exceeds 3");
    InvariantForm<S> out(deg);
    for (int m1 = 0; m1 < kMonomials; ++m1) {
        if (mask_degree(m1) != a.degree() || is_zero(a[m1])) continue;
        for (int m2 = 0; m2 < kMonomials; ++m2) {
            if (mask_degree(m2) != b.degree() || is_zero(b[m2])) continue;
            const int s = wedge_sign(m1, m2);
            if (s == 0) continue;
            out.set(m1 | m2, out[m1 | m2] + S(s) * a[m1] * b[m2]);
        }
    }
    return out;
}

// Contraction with the dual frame vector e_idx.
template <class S>
InvariantForm<S> interior(int idx, const InvariantForm<S>& a) {
    if (a.degree() == 0) throw DegreeError("interior product of a 0-form");
    if (idx < 0 || idx > 2) throw DegreeError("frame index out of range");
    InvariantForm<S> out(a.degree() - 1);
    const int bit = 1 << idx;
    for (int m = 0; m < kMonomials; ++m) {
        if (mask_degree(m) != a.degree() || !(m & bit)) continue;
        const int before = mask_degree(m & (bit - 1));
        const S sign((before % 2) ? -1 : 1);
        out.set(m & ~bit, out[m & ~bit] + sign * a[m]);
    }
    return out;
}

// Evaluation on frame components: v = sum v_j e_j.
template <class S>
S evaluate(const InvariantForm<S>& a, const std::array<S, 3>& v) {
    if (a.degree() != 1) throw DegreeError("evaluate(form, v) needs a 1-form");
    return a[1] * v[0] + a[2] * v[1] + a[4] * v[2];
}

template <class S>
S evaluate(const InvariantForm<S>& a, const std::array<S, 3>& v, const std::array<S, 3>& w) {
    if (a.degree() != 2) throw DegreeError("evaluate(form, v, w) needs a 2-form");
    auto minor = [&](int j, int k) { return v[j] * w[k] - v[k] * w[j]; };
    return a[3] * minor(0, 1) + a[5] * minor(0, 2) + a[6] * minor(1, 2);
}

// Coefficient a(e_j, e_k) for a 2-form, j != k.
template <class S>
S component(const InvariantForm<S>& a, int j, int k) {
    if (a.degree() != 2) throw DegreeError("component(form, j, k) needs a 2-form");
    const int s = wedge_sign(1 << j, 1 << k);
    if (s == 0) return S(0);
    return S(s) * a[(1 << j) | (1 << k)];
}

// Hodge star of h_eps = (eps e0)^2 + (e1)^2 + (e2)^2, orientation e0^e1^e2.
template <class S>
InvariantForm<S> hodge_star_eps(const InvariantForm<S>& a, const S& eps) {
    if (is_zero(eps)) throw std::domain_error("hodge star needs eps > 0");
    InvariantForm<S> out(3 - a.degree());
    const S inv = S(1) / eps;
    // star acts on orthonormal monomials f^I -> sign * f^{complement}; e0 = f0 / eps.
    for (int m = 0; m < kMonomials; ++m) {
        if (mask_degree(m) != a.degree() || is_zero(a[m])) continue;
        const int comp = 7 & ~m;
        const int s = wedge_sign(m, comp);
        S factor(s);
        if (m & 1) factor = factor * inv;      // e0 = f0 / eps
        if (comp & 1) factor = factor * eps;   // f0 = eps e0
        out.set(comp, out[comp] + factor * a[m]);
    }
    return out;
}

// Bilinear h_eps pairing: a ^ star(b) = <a,b> vol_eps with vol_eps = eps e0^e1^e2.
template <class S>
S inner_eps(const InvariantForm<S>& a, const InvariantForm<S>& b, const S& eps) {
    if (a.degree() != b.degree()) return S(0);
    const InvariantForm<S> top = wedge(a, hodge_star_eps(b, eps));
    return top[7] / eps;
}

template <class R>
InvariantForm<Complex<R>> theta1() {
    auto f = InvariantForm<Complex<R>>::e(1);
    f.set(4, Complex<R>::I());
    return f;
}

template <class R>
InvariantForm<Complex<R>> theta1bar() {
    auto f = InvariantForm<Complex<R>>::e(1);
    f.set(4, -Complex<R>::I());
    return f;
}

template <class R>
InvariantForm<Complex<R>> conj(const InvariantForm<Complex<R>>& a) {
    return a.template mapped<Complex<R>>([](const Complex<R>& z) { return z.conj(); });
}

template <class R>
bool has_real_coefficients(const InvariantForm<Complex<R>>& a) {
    for (int m = 0; m < kMonomials; ++m)
        if (!is_zero(a[m].im)) return false;
    return true;
}

using ExactForm = InvariantForm<ExactComplex>;
using SpinorForm = InvariantForm<SpinorScalar>;

inline SpinorForm lift_spinor(const ExactForm& a) {
    return a.mapped<SpinorScalar>([](const ExactComplex& z) { return lift_spinor(z); });
}

}  // namespace cmw
