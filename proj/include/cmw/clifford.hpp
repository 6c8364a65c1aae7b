#pragma once

// The canonical spin^c bundle W = C + Lambda^{0,1} in the basis
// {Phi0 = 1, Phi1 = theta^{1bar}/sqrt2}, its two Clifford representations
// and the compatible connections.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmw/errors.hpp"
#include "cmw/forms.hpp"
#include "cmw/model.hpp"
#include "cmw/pseudohermitian.hpp"
#include "cmw/scalar.hpp"

namespace cmw {

template <class S>
struct Mat2 {
    std::array<S, 4> m{S(0), S(0), S(0), S(0)};  // row-major

    Mat2() = default;
    Mat2(S a, S b, S c, S d) : m{std::move(a), std::move(b), std::move(c), std::move(d)} {}

    static Mat2 identity() { return Mat2(S(1), S(0), S(0), S(1)); }
    static Mat2 diag(S a, S d) { return Mat2(std::move(a), S(0), S(0), std::move(d)); }

    S& operator()(int r, int c) { return m[2 * r + c]; }
    const S& operator()(int r, int c) const { return m[2 * r + c]; }

    Mat2 adjoint() const { return Mat2(m[0].conj(), m[2].conj(), m[1].conj(), m[3].conj()); }
    S trace() const { return m[0] + m[3]; }

    friend Mat2 operator+(const Mat2& a, const Mat2& b) {
        return Mat2(a.m[0] + b.m[0], a.m[1] + b.m[1], a.m[2] + b.m[2], a.m[3] + b.m[3]);
    }
    friend Mat2 operator-(const Mat2& a, const Mat2& b) {
        return Mat2(a.m[0] - b.m[0], a.m[1] - b.m[1], a.m[2] - b.m[2], a.m[3] - b.m[3]);
    }
    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return Mat2(a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
                    a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]);
    }
    friend Mat2 operator*(const S& s, const Mat2& a) { return Mat2(s * a.m[0], s * a.m[1], s * a.m[2], s * a.m[3]); }
    friend bool operator==(const Mat2& a, const Mat2& b) { return a.m == b.m; }
    friend bool operator!=(const Mat2& a, const Mat2& b) { return !(a == b); }

    std::array<S, 2> apply(const std::array<S, 2>& v) const {
        return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
    }
};

using SpinMat = Mat2<SpinorScalar>;
using Spinor2 = std::array<SpinorScalar, 2>;

inline SpinorScalar sp(long long n, long long d = 1) { return SpinorScalar(Sqrt2Ext<Rational>(Rational(n, d))); }
inline SpinorScalar sp_i() { return SpinorScalar::I(); }

inline SpinMat commutator(const SpinMat& a, const SpinMat& b) { return a * b - b * a; }

// An element of W as differential forms: degree-0 part plus a degree-1 part
// proportional to theta^{1bar}.
struct CanonicalSpinor {
    SpinorForm scalar = SpinorForm::zero(0);
    SpinorForm form = SpinorForm::zero(1);
};

inline CanonicalSpinor canonical_from_components(const Spinor2& v) {
    CanonicalSpinor s;
    s.scalar = SpinorForm::constant(v[0]);
    const SpinorForm phi1 = (SpinorScalar(1) / sqrt2_spinor()) * lift_spinor(theta1bar<Rational>());
    s.form = v[1] * phi1;
    return s;
}

inline Spinor2 components_of(const CanonicalSpinor& s) {
    // form = beta theta^{1bar}/sqrt2 = (beta/sqrt2)(e1 - i e2)
    const SpinorScalar beta = s.form[2] * sqrt2_spinor();
    if (!is_zero(s.form[1]) || s.form[4] != -sp_i() * s.form[2])
        throw DegreeError("form part is not proportional to theta^{1bar}");
    return {s.scalar[0], beta};
}

enum class CliffordKind { GammaCan, RhoEps };

struct CliffordRep {
    CliffordKind kind = CliffordKind::GammaCan;
    std::optional<Rational> eps;
    std::map<int, SpinMat> mats;  // 0 (rho only: the unit covector eps e0), 1, 2

    const SpinMat& operator[](int j) const { return mats.at(j); }
};

// Gamma(e^j) tau = (c_j / sqrt2) theta^{1bar} ^ tau - sqrt2 iota(e_j) tau, c_1 = 1, c_2 = i.
inline CanonicalSpinor gamma_can_action(int j, const CanonicalSpinor& tau) {
    if (j != 1 && j != 2) throw DegreeError("Gamma_can acts by horizontal covectors e1, e2 only");
    const SpinorScalar r2 = sqrt2_spinor();
    const SpinorScalar cj = (j == 1) ? sp(1) : sp_i();
    const SpinorForm tb = lift_spinor(theta1bar<Rational>());
    CanonicalSpinor out;
    out.scalar = (SpinorScalar(-1) * r2) * interior(j, tau.form);
    out.form = (cj / r2) * wedge(tb, tau.scalar);
    const SpinorForm top = wedge(tb, tau.form);  // Lambda^{0,2} = 0 in rank one
    if (!top.is_zero()) throw DegreeError("Gamma_can produced a (0,2)-component");
    return out;
}

inline SpinMat matrix_from_action(int j) {
    SpinMat out;
    for (int col = 0; col < 2; ++col) {
        Spinor2 basis{sp(col == 0 ? 1 : 0), sp(col == 1 ? 1 : 0)};
        const Spinor2 image = components_of(gamma_can_action(j, canonical_from_components(basis)));
        out(0, col) = image[0];
        out(1, col) = image[1];
    }
    return out;
}

// Matrices computed from the form-level definition.
inline CliffordRep gamma_can() {
    CliffordRep rep;
    rep.kind = CliffordKind::GammaCan;
    rep.mats[1] = matrix_from_action(1);
    rep.mats[2] = matrix_from_action(2);
    return rep;
}

inline CliffordRep rho_eps(const Rational& eps) {
    if (eps <= 0) throw std::domain_error("eps must be positive");
    CliffordRep rep;
    rep.kind = CliffordKind::RhoEps;
    rep.eps = eps;
    rep.mats[0] = SpinMat::diag(-sp_i(), sp_i());
    rep.mats[1] = SpinMat(sp(0), sp(1), sp(-1), sp(0));
    rep.mats[2] = SpinMat(sp(0), -sp_i(), -sp_i(), sp(0));
    return rep;
}

struct CliffordAxiomReport {
    std::vector<std::string> failures;
    bool passed() const { return failures.empty(); }
};

inline CliffordAxiomReport clifford_axiom_check(const CliffordRep& rep) {
    CliffordAxiomReport r;
    const SpinMat id = SpinMat::identity();
    for (const auto& [j, mj] : rep.mats) {
        const std::string name = "e" + std::to_string(j);
        if (mj.adjoint() + mj != SpinMat()) r.failures.push_back("skew-adjointness " + name);
        if (mj.adjoint() * mj != id) r.failures.push_back("unit norm " + name);
        for (const auto& [k, mk] : rep.mats) {
            if (k <= j) continue;
            if (mj * mk + mk * mj != SpinMat()) r.failures.push_back("anticommutation e" + std::to_string(j) + " e" + std::to_string(k));
        }
        if (mj * mj != sp(-1) * id) r.failures.push_back("square " + name);
    }
    return r;
}

// Clifford multiplication by an invariant form; f^I monomials map to ordered
// products of generators, with e0 = f0 / eps.
inline SpinMat rho_apply(const SpinorForm& a, const CliffordRep& rep) {
    if (rep.kind != CliffordKind::RhoEps) throw std::invalid_argument("rho_apply needs a rho-eps representation");
    const SpinorScalar inv_eps = lift_spinor(ExactComplex(Rational(1) / *rep.eps));
    SpinMat out;
    for (int m = 0; m < kMonomials; ++m) {
        if (mask_degree(m) != a.degree() || is_zero(a[m])) continue;
        SpinMat prod = SpinMat::identity();
        SpinorScalar scale = a[m];
        for (int i = 0; i < 3; ++i)
            if (m & (1 << i)) prod = prod * rep[i];
        if (m & 1) scale = scale * inv_eps;
        out = out + scale * prod;
    }
    return out;
}

// Gamma of a horizontal covector c1 e1 + c2 e2.
inline SpinMat gamma_apply(const SpinorForm& a, const CliffordRep& rep) {
    if (a.degree() != 1 || !is_zero(a[1])) throw DegreeError("Gamma acts on horizontal 1-forms");
    return a[2] * rep[1] + a[4] * rep[2];
}

// Grading element Gamma(e2) Gamma(e1): +i on Phi0, -i on Phi1.
inline SpinMat grading_element(const CliffordRep& rep) { return rep[2] * rep[1]; }

enum class ConnectionFlavor { Pseudohermitian, LeviCivita, LeviCivitaSolved };

inline std::string to_string(ConnectionFlavor f) {
    switch (f) {
        case ConnectionFlavor::Pseudohermitian: return "pseudohermitian";
        case ConnectionFlavor::LeviCivita: return "levi-civita";
        case ConnectionFlavor::LeviCivitaSolved: return "levi-civita-solved";
    }
    return "?";
}

using FormMat = Mat2<SpinorForm>;

struct ConnCoeffs {
    ConnectionFlavor flavor = ConnectionFlavor::Pseudohermitian;
    Rational eps = 1;
    FormMat base;          // connection form before the twist
    ExactForm twist;       // real 1-form a, entering as +i a I
    ExactForm trace_half;  // b = (1/2) tr(base + i a I)

    // (base + i a I)(e_j)
    SpinMat at(int j) const {
        SpinMat out;
        for (int k = 0; k < 4; ++k) out.m[k] = base.m[k][1 << j];
        const SpinorScalar ia = sp_i() * lift_spinor(twist[1 << j]);
        return out + ia * SpinMat::identity();
    }
};

namespace detail {

inline FormMat zero_form_mat() {
    FormMat f;
    for (auto& e : f.m) e = SpinorForm::zero(1);
    return f;
}

inline void require_real_one_form(const ExactForm& a) {
    if (a.degree() != 1) throw DegreeError("twist must be a 1-form");
    if (!has_real_coefficients(a)) throw NotRealError("twist 1-form has nonreal coefficients");
}

inline ExactForm half_trace(const FormMat& base, const ExactForm& twist) {
    SpinorForm t = base.m[0] + base.m[3];
    ExactForm out(1);
    for (int j = 0; j < 3; ++j) {
        const SpinorScalar v = t[1 << j] * SpinorScalar(Sqrt2Ext<Rational>(Rational(1, 2)));
        if (!is_zero(v.re.b) || !is_zero(v.im.b)) throw SolveError("half trace leaves Q(i)");
        out.set(1 << j, ExactComplex(v.re.a, v.im.a) + ExactComplex::I() * twist[1 << j]);
    }
    return out;
}

}  // namespace detail

// Solved spin lift of the Levi-Civita connection of h_eps:
// A(v) = 1/4 sum_{y,z} omega^z_y(v) rho_y rho_z, in the orthonormal coframe.
inline FormMat levi_civita_spin_lift(const ModelStructure& m, const Rational& eps) {
    const auto w = riemannian_connection_forms(m, eps);
    const CliffordRep rho = rho_eps(eps);
    FormMat out = detail::zero_form_mat();
    for (int y = 0; y < 3; ++y)
        for (int z = 0; z < 3; ++z) {
            if (y == z) continue;
            const SpinMat prod = sp(1, 4) * (rho[y] * rho[z]);
            const SpinorForm wz = lift_spinor(w[z][y]);
            for (int k = 0; k < 4; ++k) out.m[k] += prod.m[k] * wz;
        }
    return out;
}

inline ConnCoeffs conn_coeffs(const PhInvariants& ph, const Rational& eps, const ExactForm& a, ConnectionFlavor flavor,
                              const ModelStructure* model = nullptr) {
    detail::require_real_one_form(a);
    if (eps <= 0) throw std::domain_error("eps must be positive");
    ConnCoeffs cc;
    cc.flavor = flavor;
    cc.eps = eps;
    cc.twist = a;
    cc.base = detail::zero_form_mat();
    const SpinorScalar i = sp_i();
    const SpinorForm omega = lift_spinor(ph.omega);
    const SpinorForm theta = SpinorForm::e(0);
    const SpinorScalar e = lift_spinor(ExactComplex(eps));
    const SpinorScalar inv_e = SpinorScalar(1) / e;
    switch (flavor) {
        case ConnectionFlavor::Pseudohermitian:
            cc.base.m[3] = i * omega;
            break;
        case ConnectionFlavor::LeviCivita: {
            const SpinorForm t1 = lift_spinor(theta1<Rational>());
            cc.base.m[1] = (i * sp(1, 4) * inv_e * lift_spinor(ph.torsion_conj())) * t1;
            cc.base.m[2] = (i / sqrt2_spinor() * inv_e * lift_spinor(ph.torsion)) * t1;
            cc.base.m[3] = i * (omega + e * theta);
            break;
        }
        case ConnectionFlavor::LeviCivitaSolved: {
            if (!model) throw std::invalid_argument("solved Levi-Civita flavor needs the model");
            cc.base = levi_civita_spin_lift(*model, eps);
            const SpinorForm shift = (sp(1, 2) * i) * (omega + e * theta);
            cc.base.m[0] += shift;
            cc.base.m[3] += shift;
            break;
        }
    }
    cc.trace_half = detail::half_trace(cc.base, a);
    return cc;
}

// b = (1/2) i (omega + eps theta) + i a
inline ExactForm trace_connection(const PhInvariants& ph, const Rational& eps, const ExactForm& a) {
    const ExactComplex i = ExactComplex::I();
    return ExactComplex(0, Rational(1, 2)) * (ph.omega + ExactComplex(eps) * ExactForm::e(0)) + i * a;
}

struct CurvatureTrace {
    ExactForm f_b;        // d(trace_half)
    Rational f12;         // f_b = i F12 e1^e2 + i F01 e0^e1 + i F02 e0^e2
    Rational f01;
    Rational f02;
    ExactComplex f0;      // F01 + i F02
    ExactComplex pi_xi_trace;  // (1/2)(tr F)(e1, e2)
    ExactComplex pi_xi_twist;  // i da(e1, e2)
};

inline CurvatureTrace curvature_trace(const ConnCoeffs& cc, const ModelStructure& m) {
    CurvatureTrace t;
    t.f_b = exterior_d(cc.trace_half, m);
    const ExactComplex minus_i(0, -1);
    auto real_part = [&](int mask) {
        const ExactComplex v = minus_i * t.f_b[mask];
        if (v.im != 0) throw NotRealError("curvature of the trace connection is not imaginary");
        return v.re;
    };
    t.f12 = real_part(6);
    t.f01 = real_part(3);
    t.f02 = real_part(5);
    t.f0 = ExactComplex(t.f01, t.f02);
    t.pi_xi_trace = component(t.f_b, 1, 2);
    t.pi_xi_twist = ExactComplex::I() * component(exterior_d(cc.twist, m), 1, 2);
    return t;
}

// Display layout [[F12, eps^-1 conj(F0)], [eps^-1 F0, -F12]].
inline SpinMat curvature_layout(const CurvatureTrace& t, const Rational& eps) {
    const SpinorScalar inv = lift_spinor(ExactComplex(Rational(1) / eps));
    const SpinorScalar f12 = lift_spinor(ExactComplex(t.f12));
    return SpinMat(f12, inv * lift_spinor(t.f0.conj()), inv * lift_spinor(t.f0), -f12);
}

// --- compatibility suites ---

// [A(e_v), Gamma(w)] = Gamma(nabla_v w) with nabla e1 = omega e2, nabla e2 = -omega e1.
inline bool pseudohermitian_compatible(const ConnCoeffs& cc, const PhInvariants& ph) {
    const CliffordRep g = gamma_can();
    for (int v = 0; v < 3; ++v) {
        const SpinMat a = cc.at(v);
        const SpinorScalar wv = lift_spinor(ph.omega[1 << v]);
        if (commutator(a, g[1]) != wv * g[2]) return false;
        if (commutator(a, g[2]) != (SpinorScalar(-1) * wv) * g[1]) return false;
    }
    return true;
}

// [A(e_v), rho(f^k)] = rho(nabla_v f^k) with nabla f^k = -omega^k_j f^j.
inline bool levi_civita_compatible(const ConnCoeffs& cc, const ModelStructure& m) {
    const auto w = riemannian_connection_forms(m, cc.eps);
    const CliffordRep rho = rho_eps(cc.eps);
    for (int v = 0; v < 3; ++v) {
        const SpinMat a = cc.at(v);
        for (int k = 0; k < 3; ++k) {
            SpinMat rhs;
            for (int j = 0; j < 3; ++j) rhs = rhs + lift_spinor(-w[k][j][1 << v]) * rho[j];
            if (commutator(a, rho[k]) != rhs) return false;
        }
    }
    return true;
}

// base + base* = 0 on every frame vector (twist excluded).
inline bool base_is_skew_hermitian(const ConnCoeffs& cc) {
    for (int v = 0; v < 3; ++v) {
        SpinMat b;
        for (int k = 0; k < 4; ++k) b.m[k] = cc.base.m[k][1 << v];
        if (b + b.adjoint() != SpinMat()) return false;
    }
    return true;
}

inline bool base_block_diagonal(const ConnCoeffs& cc) { return cc.base.m[1].is_zero() && cc.base.m[2].is_zero(); }

// Dirac operator of a connection on a constant spinor:
// sum_j rho(f^j)(A(f_j)) with f_0 = e_0 / eps.
inline SpinMat dirac_on_constants(const ConnCoeffs& cc) {
    const CliffordRep rho = rho_eps(cc.eps);
    const SpinorScalar inv = lift_spinor(ExactComplex(Rational(1) / cc.eps));
    return rho[0] * (inv * cc.at(0)) + rho[1] * cc.at(1) + rho[2] * cc.at(2);
}

// --- Clifford identities used in the eigen-identity derivation ---

struct CliffordIdentityReport {
    bool rho_eta_phi0 = false;       // rho(2 e1^e2) Phi0 = -2i Phi0
    bool rho_eta_phi1 = false;       // rho(2 e1^e2) Phi1 = 2i Phi1
    bool codifferential_eta = false; // star d star (2 e1^e2) = 4 eps^2 e0
    bool theta1_phi0 = false;        // rho(theta^1) Phi0 = 0
    bool theta1bar_phi0 = false;     // rho(theta^{1bar}) Phi0 = -2 Phi1
    bool theta_theta1_phi0 = false;  // rho(theta ^ theta^1) Phi0 = 0
    bool theta_theta1bar_phi0 = false;  // rho(theta ^ theta^{1bar}) Phi0 = -2i eps^-1 Phi1
    bool star_theta1bar = false;     // star theta^{1bar} = i theta^{1bar} ^ (eps e0)
    SpinorScalar eigenvalue;         // D Phi0 = eigenvalue Phi0 via the Clifford route
    bool all() const {
        return rho_eta_phi0 && rho_eta_phi1 && codifferential_eta && theta1_phi0 && theta1bar_phi0 &&
               theta_theta1_phi0 && theta_theta1bar_phi0 && star_theta1bar;
    }
};

inline CliffordIdentityReport clifford_identities(const ModelStructure& m, const Rational& eps) {
    CliffordIdentityReport r;
    const CliffordRep rho = rho_eps(eps);
    const Spinor2 phi0{sp(1), sp(0)}, phi1{sp(0), sp(1)};
    auto scaled = [](const SpinorScalar& s, const Spinor2& v) { return Spinor2{s * v[0], s * v[1]}; };
    const ExactForm eta = m.d_basis(0);
    const SpinMat rho_eta = rho_apply(lift_spinor(eta), rho);
    r.rho_eta_phi0 = rho_eta.apply(phi0) == scaled(sp(0) - sp_i() * sp(2), phi0);
    r.rho_eta_phi1 = rho_eta.apply(phi1) == scaled(sp_i() * sp(2), phi1);

    const ExactComplex e(eps);
    const ExactForm codiff = hodge_star_eps(exterior_d(hodge_star_eps(eta, e), m), e);
    r.codifferential_eta = codiff == ExactComplex(4 * eps * eps) * ExactForm::e(0);

    const ExactForm t1 = theta1<Rational>(), tb = theta1bar<Rational>(), th = ExactForm::e(0);
    r.theta1_phi0 = rho_apply(lift_spinor(t1), rho).apply(phi0) == Spinor2{sp(0), sp(0)};
    r.theta1bar_phi0 = rho_apply(lift_spinor(tb), rho).apply(phi0) == scaled(sp(-2), phi1);
    r.theta_theta1_phi0 = rho_apply(lift_spinor(wedge(th, t1)), rho).apply(phi0) == Spinor2{sp(0), sp(0)};
    const SpinorScalar inv = lift_spinor(ExactComplex(Rational(1) / eps));
    r.theta_theta1bar_phi0 = rho_apply(lift_spinor(wedge(th, tb)), rho).apply(phi0) == scaled(sp(-2) * sp_i() * inv, phi1);
    r.star_theta1bar = hodge_star_eps(tb, e) == ExactComplex::I() * wedge(tb, e * th);

    // -2i x = c + 2i x with rho((d + d*) eta) Phi0 = c Phi0 and d eta = 0.
    const ExactForm d_eta = exterior_d(eta, m);
    if (!d_eta.is_zero()) throw JacobiError("d eta != 0");
    const SpinorScalar c = rho_apply(lift_spinor(codiff), rho).apply(phi0)[0];
    r.eigenvalue = sp_i() * c / sp(4);
    return r;
}

}  // namespace cmw
