#pragma once

// Pseudohermitian connection, torsion and Tanaka-Webster curvature of a
// model, plus the Riemannian data of the adapted metric h_eps.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cmw/errors.hpp"
#include "cmw/forms.hpp"
#include "cmw/linsolve.hpp"
#include "cmw/model.hpp"
#include "cmw/scalar.hpp"

namespace cmw {

struct PhInvariants {
    ExactForm omega = ExactForm::zero(1);  // real 1-form, omega_1^1 = i omega
    ExactComplex torsion;                  // A^1_{1bar} = A_{1bar 1bar}
    ExactComplex tw_curv;                  // Tanaka-Webster curvature, real

    ExactComplex torsion_conj() const { return torsion.conj(); }  // A_{11}
    bool torsion_free() const { return is_zero(torsion); }
    ExactForm omega11() const { return ExactComplex::I() * omega; }
};

namespace detail {

inline std::vector<ExactComplex> two_form_entries(const ExactForm& f) { return {f[3], f[5], f[6]}; }

// Right-hand side theta^1 ^ (i omega) + A theta ^ theta^{1bar} for unknowns (w0, w1, w2, lambda, mu).
inline ExactForm structure_rhs(const std::array<Rational, 5>& x) {
    ExactForm omega(1);
    for (int k = 0; k < 3; ++k) omega.set(1 << k, ExactComplex(x[k]));
    const ExactComplex a(x[3], x[4]);
    return wedge(theta1<Rational>(), ExactComplex::I() * omega) + a * wedge(ExactForm::e(0), theta1bar<Rational>());
}

}  // namespace detail

// Tanaka-Webster curvature read from the e1^e2 coefficient of d omega.
inline ExactComplex tw_curv_from_domega(const ExactForm& omega, const ModelStructure& m) {
    return ExactComplex(Rational(-1, 2)) * component(exterior_d(omega, m), 1, 2);
}

// Same quantity read as the theta^1 ^ theta^{1bar} coefficient of d omega_1^1,
// after expanding in the complex basis {theta^theta^1, theta^theta^{1bar}, theta^1^theta^{1bar}}.
inline ExactComplex tw_curv_from_complex_basis(const ExactForm& omega, const ModelStructure& m) {
    const ExactForm target = exterior_d(ExactComplex::I() * omega, m);
    const std::array<ExactForm, 3> basis{wedge(ExactForm::e(0), theta1<Rational>()),
                                         wedge(ExactForm::e(0), theta1bar<Rational>()),
                                         wedge(theta1<Rational>(), theta1bar<Rational>())};
    std::vector<std::vector<ExactComplex>> a(3, std::vector<ExactComplex>(3));
    std::vector<ExactComplex> b = detail::two_form_entries(target);
    for (int col = 0; col < 3; ++col) {
        const auto e = detail::two_form_entries(basis[col]);
        for (int row = 0; row < 3; ++row) a[row][col] = e[row];
    }
    const auto sol = solve_exact(a, b);
    if (!sol || !sol->unique()) throw SolveError("complex 2-form basis expansion failed");
    return sol->x[2];
}

inline PhInvariants derive_ph_invariants(const ModelStructure& m) {
    const ExactForm dtheta1 = exterior_d(theta1<Rational>(), m);
    // Real linear system: 3 two-form coefficients x (re, im) against 5 real unknowns.
    std::vector<std::vector<Rational>> a(6, std::vector<Rational>(5));
    std::vector<Rational> b(6);
    const auto rhs_entries = detail::two_form_entries(dtheta1);
    for (int row = 0; row < 3; ++row) {
        b[2 * row] = rhs_entries[row].re;
        b[2 * row + 1] = rhs_entries[row].im;
    }
    for (int col = 0; col < 5; ++col) {
        std::array<Rational, 5> unit{};
        unit[col] = 1;
        const auto e = detail::two_form_entries(detail::structure_rhs(unit));
        for (int row = 0; row < 3; ++row) {
            a[2 * row][col] = e[row].re;
            a[2 * row + 1][col] = e[row].im;
        }
    }
    const auto sol = solve_exact(a, b);
    if (!sol) throw SolveError("model '" + m.name() + "': no real connection form solves the structure equation");
    if (!sol->unique()) throw SolveError("model '" + m.name() + "': connection form not unique");
    PhInvariants ph;
    ph.omega = ExactForm(1);
    for (int k = 0; k < 3; ++k) ph.omega.set(1 << k, ExactComplex(sol->x[k]));
    ph.torsion = ExactComplex(sol->x[3], sol->x[4]);
    ph.tw_curv = tw_curv_from_domega(ph.omega, m);
    return ph;
}

struct StructureEquationReport {
    bool first_equation = false;     // d theta^1 = theta^1 ^ omega_1^1 + A theta ^ theta^{1bar}
    bool curvature_equation = false; // d omega(e1, e2) = -2 W
    bool complex_curvature = false;  // d omega_1^1 = W theta^1 ^ theta^{1bar} + torsion terms
    bool omega_real = false;
    bool all() const { return first_equation && curvature_equation && complex_curvature && omega_real; }
};

inline StructureEquationReport check_structure_equations(const ModelStructure& m, const PhInvariants& ph) {
    StructureEquationReport r;
    const ExactForm lhs = exterior_d(theta1<Rational>(), m);
    const ExactForm rhs = wedge(theta1<Rational>(), ph.omega11()) + ph.torsion * wedge(ExactForm::e(0), theta1bar<Rational>());
    r.first_equation = (lhs == rhs);
    r.curvature_equation = (component(exterior_d(ph.omega, m), 1, 2) == ExactComplex(-2) * ph.tw_curv);
    // d omega_1^1 - W theta^1^theta^{1bar} may only carry theta ^ theta^1, theta ^ theta^{1bar} terms.
    const ExactForm rem = exterior_d(ph.omega11(), m) - ph.tw_curv * wedge(theta1<Rational>(), theta1bar<Rational>());
    r.complex_curvature = is_zero(rem[6]);
    r.omega_real = has_real_coefficients(ph.omega);
    return r;
}

// Riemannian connection of h_eps in the orthonormal coframe f = (eps e0, e1, e2),
// stored in terms of the e-monomials: conn[i][j] = omega^i_j with
// d f^i = f^j ^ omega^i_j and omega^i_j = -omega^j_i.
struct RiemannData {
    std::array<std::array<ExactForm, 3>, 3> conn;
    ExactComplex scalar;
    Rational eps;

    const ExactForm& omega(int upper, int lower) const { return conn[upper][lower]; }
};

inline std::array<Rational, 3> orthonormal_scales(const Rational& eps) { return {eps, Rational(1), Rational(1)}; }

inline std::array<std::array<ExactForm, 3>, 3> riemannian_connection_forms(const ModelStructure& m, const Rational& eps) {
    if (eps <= 0) throw std::domain_error("eps must be positive");
    const auto s = orthonormal_scales(eps);
    auto f = [&](int i) { return ExactComplex(s[i]) * ExactForm::e(i); };
    auto build = [&](const std::array<Rational, 9>& x) {
        std::array<std::array<ExactForm, 3>, 3> w;
        for (auto& row : w) row.fill(ExactForm::zero(1));
        for (int p = 0; p < 3; ++p) {
            const auto [i, j] = kPairs[p];
            ExactForm form(1);
            for (int k = 0; k < 3; ++k) form.set(1 << k, ExactComplex(x[3 * p + k]));
            w[i][j] = form;
            w[j][i] = -form;
        }
        return w;
    };
    // rows: (i, two-form index), unknowns: 3 pairs x 3 coefficients
    auto residual_lhs = [&](const std::array<std::array<ExactForm, 3>, 3>& w, int i) {
        ExactForm out(2);
        for (int j = 0; j < 3; ++j) out += wedge(f(j), w[i][j]);
        return out;
    };
    std::vector<std::vector<Rational>> a(9, std::vector<Rational>(9));
    std::vector<Rational> b(9);
    for (int i = 0; i < 3; ++i) {
        const ExactForm df = ExactComplex(s[i]) * m.d_basis(i);
        const auto e = detail::two_form_entries(df);
        for (int r = 0; r < 3; ++r) b[3 * i + r] = e[r].re;
    }
    for (int col = 0; col < 9; ++col) {
        std::array<Rational, 9> unit{};
        unit[col] = 1;
        const auto w = build(unit);
        for (int i = 0; i < 3; ++i) {
            const auto e = detail::two_form_entries(residual_lhs(w, i));
            for (int r = 0; r < 3; ++r) a[3 * i + r][col] = e[r].re;
        }
    }
    const auto sol = solve_exact(a, b);
    if (!sol || !sol->unique()) throw SolveError("Levi-Civita connection solve failed for '" + m.name() + "'");
    std::array<Rational, 9> x{};
    for (int k = 0; k < 9; ++k) x[k] = sol->x[k];
    return build(x);
}

// Curvature 2-forms Omega^i_j = d omega^i_j + omega^i_k ^ omega^k_j.
inline std::array<std::array<ExactForm, 3>, 3> riemann_curvature_forms(const std::array<std::array<ExactForm, 3>, 3>& w,
                                                                      const ModelStructure& m) {
    std::array<std::array<ExactForm, 3>, 3> omega;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            ExactForm o = exterior_d(w[i][j], m);
            for (int k = 0; k < 3; ++k) o += wedge(w[i][k], w[k][j]);
            omega[i][j] = o;
        }
    return omega;
}

inline Rational scalar_curvature(const ModelStructure& m, const Rational& eps) {
    const auto w = riemannian_connection_forms(m, eps);
    const auto curv = riemann_curvature_forms(w, m);
    const auto s = orthonormal_scales(eps);
    Rational r = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) r += component(curv[i][j], i, j).re / (s[i] * s[j]);
    return r;
}

inline RiemannData riemannian_connection(const ModelStructure& m, const Rational& eps) {
    RiemannData d;
    d.conn = riemannian_connection_forms(m, eps);
    d.scalar = ExactComplex(scalar_curvature(m, eps));
    d.eps = eps;
    return d;
}

struct StructureCheck {
    bool antisymmetric = false;
    bool first_structure_equation = false;
    bool all() const { return antisymmetric && first_structure_equation; }
};

inline StructureCheck check_riemann_data(const RiemannData& d, const ModelStructure& m) {
    StructureCheck c;
    c.antisymmetric = true;
    c.first_structure_equation = true;
    const auto s = orthonormal_scales(d.eps);
    for (int i = 0; i < 3; ++i) {
        ExactForm rhs(2);
        for (int j = 0; j < 3; ++j) {
            if (d.conn[i][j] + d.conn[j][i] != ExactForm::zero(1)) c.antisymmetric = false;
            rhs += wedge(ExactComplex(s[j]) * ExactForm::e(j), d.conn[i][j]);
        }
        if (ExactComplex(s[i]) * m.d_basis(i) != rhs) c.first_structure_equation = false;
    }
    return c;
}

// Closed form 4W - eps^2 - eps^-2 |A|^2 against the curvature computed above.
struct CurvatureComparison {
    Rational closed_form_value;
    Rational oracle_value;
    Rational gap;
};

inline Rational curvature_closed_form(const PhInvariants& ph, const Rational& eps) {
    return 4 * ph.tw_curv.re - eps * eps - ph.torsion.norm2() / (eps * eps);
}

inline CurvatureComparison curvature_comparison(const ModelStructure& m, const Rational& eps) {
    const PhInvariants ph = derive_ph_invariants(m);
    CurvatureComparison c;
    c.closed_form_value = curvature_closed_form(ph, eps);
    c.oracle_value = scalar_curvature(m, eps);
    c.gap = c.closed_form_value - c.oracle_value;
    return c;
}

// Exact fit R(eps) = L - c1 eps^2 - c2 eps^-2 |A|^2 from three values of eps,
// confirmed at a fourth.
struct CurvatureFit {
    Rational leading;
    Rational c1;
    std::optional<Rational> c2;  // undetermined when A = 0
    bool poly_fits = false;      // fourth sample reproduced exactly
    bool leading_is_4w = false;
};

inline CurvatureFit fit_curvature_constants(const ModelStructure& m) {
    const PhInvariants ph = derive_ph_invariants(m);
    const std::array<Rational, 4> samples{Rational(1), Rational(1, 2), Rational(1, 3), Rational(2, 5)};
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    for (int k = 0; k < 3; ++k) {
        const Rational e2 = samples[k] * samples[k];
        a.push_back({Rational(1), e2, Rational(1) / e2});
        b.push_back(scalar_curvature(m, samples[k]));
    }
    const auto sol = solve_exact(a, b);
    if (!sol || !sol->unique()) throw SolveError("curvature fit is singular");
    CurvatureFit fit;
    fit.leading = sol->x[0];
    fit.c1 = -sol->x[1];
    const Rational a2 = ph.torsion.norm2();
    if (a2 != 0) fit.c2 = -sol->x[2] / a2;
    const Rational e2 = samples[3] * samples[3];
    const Rational predicted = sol->x[0] + sol->x[1] * e2 + sol->x[2] / e2;
    fit.poly_fits = (predicted == scalar_curvature(m, samples[3])) && (a2 != 0 || sol->x[2] == 0);
    fit.leading_is_4w = (fit.leading == 4 * ph.tw_curv.re);
    return fit;
}

// Frame vectors as components on (T = e0, e1, e2).
using ComplexVector = std::array<ExactComplex, 3>;

inline ComplexVector z1_vector() { return {ExactComplex(0), ExactComplex(Rational(1, 2)), ExactComplex(0, Rational(-1, 2))}; }
inline ComplexVector z1bar_vector() { return {ExactComplex(0), ExactComplex(Rational(1, 2)), ExactComplex(0, Rational(1, 2))}; }
inline ComplexVector t_vector() { return {ExactComplex(1), ExactComplex(0), ExactComplex(0)}; }

inline ComplexVector bracket(const ModelStructure& m, const ComplexVector& x, const ComplexVector& y) {
    ComplexVector out{};
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
            if (j == k) continue;
            const auto br = m.bracket(j, k);
            for (int i = 0; i < 3; ++i) out[i] += x[j] * y[k] * ExactComplex(br[i]);
        }
    return out;
}

inline ComplexVector combine(const ExactComplex& a, const ComplexVector& x, const ExactComplex& b, const ComplexVector& y) {
    ComplexVector out{};
    for (int i = 0; i < 3; ++i) out[i] = a * x[i] + b * y[i];
    return out;
}

inline ExactComplex pair(const ExactForm& f, const ComplexVector& v) { return evaluate(f, v); }

struct CommutatorReport {
    bool holo_antiholo = false;  // [Z1bar, Z1] = iT + omega_1^1(Z1bar) Z1 - omega_1bar^1bar(Z1) Z1bar
    bool antiholo_reeb = false;  // [Z1bar, T] = A^1_{1bar} Z1 - omega_1bar^1bar(T) Z1bar
    ComplexVector holo_antiholo_lhs{}, holo_antiholo_rhs{};
    ComplexVector antiholo_reeb_lhs{}, antiholo_reeb_rhs{};
    bool all() const { return holo_antiholo && antiholo_reeb; }
};

inline CommutatorReport commutator_check(const ModelStructure& m, const PhInvariants& ph) {
    const ExactForm w11 = ph.omega11();
    const ExactForm w1b1b = -w11;
    CommutatorReport r;
    r.holo_antiholo_lhs = bracket(m, z1bar_vector(), z1_vector());
    ComplexVector rhs = combine(pair(w11, z1bar_vector()), z1_vector(), -pair(w1b1b, z1_vector()), z1bar_vector());
    rhs[0] += ExactComplex::I();
    r.holo_antiholo_rhs = rhs;
    r.holo_antiholo = (r.holo_antiholo_lhs == r.holo_antiholo_rhs);
    r.antiholo_reeb_lhs = bracket(m, z1bar_vector(), t_vector());
    r.antiholo_reeb_rhs = combine(ph.torsion, z1_vector(), -pair(w1b1b, t_vector()), z1bar_vector());
    r.antiholo_reeb = (r.antiholo_reeb_lhs == r.antiholo_reeb_rhs);
    return r;
}

inline CommutatorReport commutator_check(const ModelStructure& m) { return commutator_check(m, derive_ph_invariants(m)); }

}  // namespace cmw
