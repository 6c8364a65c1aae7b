#include <gtest/gtest.h>

#include "cmw/pseudohermitian.hpp"
#include "support.hpp"

using namespace cmw;
using cmw::testing::catalog;
using cmw::testing::random_pq;

namespace {

ExactComplex q(long long n, long long d = 1) { return ExactComplex(Rational(n, d)); }

// Scalar curvature of a unimodular 3-dimensional metric Lie algebra with
// orthonormal frame brackets [f2,f3] = l1 f1, [f3,f1] = l2 f2, [f1,f2] = l3 f3.
Rational milnor_scalar(const Rational& l1, const Rational& l2, const Rational& l3) {
    const Rational s = (l1 + l2 + l3) / 2;
    const Rational m1 = s - l1, m2 = s - l2, m3 = s - l3;
    return 2 * (m1 * m2 + m2 * m3 + m3 * m1);
}

// For gen(p,q) with f = (eps e0, e1, e2): [f1,f2] = -2 eps f0, [f2,f0] = -2p/eps f1 ... (cyclic in (1,2,0)).
Rational milnor_gen(const Rational& p, const Rational& qq, const Rational& eps) {
    return milnor_scalar(-2 * p / eps, -2 * qq / eps, -2 * eps);
}

ExactForm theta() { return ExactForm::e(0); }

}  // namespace

TEST(DerivePh, CatalogExamples) {
    const auto h = derive_ph_invariants(heisenberg());
    EXPECT_TRUE(h.omega.is_zero());
    EXPECT_EQ(h.torsion, q(0));
    EXPECT_EQ(h.tw_curv, q(0));

    const auto s = derive_ph_invariants(round_s3());
    EXPECT_EQ(s.omega, q(-2) * theta());
    EXPECT_EQ(s.torsion, q(0));
    EXPECT_EQ(s.tw_curv, q(2));

    const auto t = derive_ph_invariants(torsion_model());
    EXPECT_TRUE(t.omega.is_zero());
    EXPECT_EQ(t.torsion, ExactComplex(0, -2));
    EXPECT_EQ(t.tw_curv, q(0));
}

TEST(DerivePh, ClosedFormOverGenFamily) {
    for (const auto& [p, qq] : random_pq(21, 100)) {
        const auto m = make_gen(p, qq);
        const auto ph = derive_ph_invariants(m);
        EXPECT_EQ(ph.omega, ExactComplex(-(p + qq)) * theta());
        EXPECT_EQ(ph.torsion, ExactComplex(0, qq - p));
        EXPECT_EQ(ph.tw_curv, ExactComplex(p + qq));
        EXPECT_TRUE(check_structure_equations(m, ph).all());
    }
}

TEST(DerivePh, ExtractionRoutesAgree) {
    for (const auto& [p, qq] : random_pq(3, 30)) {
        const auto m = make_gen(p, qq);
        const auto ph = derive_ph_invariants(m);
        EXPECT_EQ(tw_curv_from_domega(ph.omega, m), tw_curv_from_complex_basis(ph.omega, m));
    }
}

TEST(DerivePh, NonGenModel) {
    auto c = gen_table(0, 0);
    c[1][pair_index(0, 1)] = 3;
    c[2][pair_index(0, 2)] = -3;
    const auto m = make_model(c, "solvable");
    const auto ph = derive_ph_invariants(m);
    EXPECT_TRUE(check_structure_equations(m, ph).all());
    EXPECT_EQ(tw_curv_from_domega(ph.omega, m), tw_curv_from_complex_basis(ph.omega, m));
}

TEST(Riemann, ConnectionExamples) {
    const auto s3 = riemannian_connection(round_s3(), 1);
    EXPECT_EQ(s3.omega(2, 1), -theta());

    const auto h = riemannian_connection(heisenberg(), 1);
    EXPECT_EQ(h.omega(1, 0), -ExactForm::e(2));
    EXPECT_EQ(h.omega(2, 0), ExactForm::e(1));

    const auto t = riemannian_connection(torsion_model(), 1);
    EXPECT_EQ(t.omega(1, 0), q(-3) * ExactForm::e(2));
    EXPECT_EQ(t.omega(2, 0), -ExactForm::e(1));
}

TEST(Riemann, TorsionParametrizationAtUnitEps) {
    for (const auto& [p, qq] : random_pq(8, 30)) {
        const auto m = make_gen(p, qq);
        const auto ph = derive_ph_invariants(m);
        const auto rd = riemannian_connection(m, 1);
        const ExactComplex lambda(ph.torsion.re), mu(ph.torsion.im);
        EXPECT_EQ(rd.omega(2, 1), ph.omega + theta());
        EXPECT_EQ(rd.omega(1, 0), lambda * ExactForm::e(1) + (mu - q(1)) * ExactForm::e(2));
    }
}

TEST(Riemann, StructureEquationsForCatalogAndEps) {
    for (const auto& m : catalog())
        for (const Rational& eps : {Rational(1), Rational(1, 2), Rational(1, 4)})
            EXPECT_TRUE(check_riemann_data(riemannian_connection(m, eps), m).all()) << m.name();
}

TEST(ScalarCurvature, Examples) {
    EXPECT_EQ(scalar_curvature(round_s3(), 1), Rational(6));
    EXPECT_EQ(scalar_curvature(torsion_model(), 1), Rational(-10));
    for (const Rational& eps : {Rational(1), Rational(1, 3), Rational(5, 2)})
        EXPECT_EQ(scalar_curvature(heisenberg(), eps), -2 * eps * eps);
}

TEST(ScalarCurvature, MatchesUnimodularOracle) {
    for (const auto& [p, qq] : random_pq(13, 40))
        for (const Rational& eps : {Rational(1), Rational(2, 3), Rational(1, 4)})
            EXPECT_EQ(scalar_curvature(make_gen(p, qq), eps), milnor_gen(p, qq, eps));
}

TEST(CurvatureComparison, CompareExamples) {
    const auto s3 = curvature_comparison(round_s3(), 1);
    EXPECT_EQ(s3.closed_form_value, Rational(7));
    EXPECT_EQ(s3.oracle_value, Rational(6));
    EXPECT_EQ(s3.gap, Rational(1));
    const auto h = curvature_comparison(heisenberg(), 1);
    EXPECT_EQ(h.closed_form_value, Rational(-1));
    EXPECT_EQ(h.oracle_value, Rational(-2));
    EXPECT_EQ(h.gap, Rational(1));
}

TEST(CurvatureComparison, GapIsEpsSquaredPlusTorsionTerm) {
    for (const auto& [p, qq] : random_pq(17, 30)) {
        const auto m = make_gen(p, qq);
        const Rational a2 = (qq - p) * (qq - p);
        for (const Rational& eps : {Rational(1), Rational(1, 2), Rational(3, 4)})
            EXPECT_EQ(curvature_comparison(m, eps).gap, eps * eps + a2 / (eps * eps));
    }
}

TEST(CurvatureComparison, FitIsModelIndependent) {
    for (const auto& [p, qq] : random_pq(19, 30)) {
        const auto fit = fit_curvature_constants(make_gen(p, qq));
        EXPECT_TRUE(fit.poly_fits);
        EXPECT_TRUE(fit.leading_is_4w);
        EXPECT_EQ(fit.c1, Rational(2));
        if (p != qq) {
            ASSERT_TRUE(fit.c2.has_value());
            EXPECT_EQ(*fit.c2, Rational(2));
        }
    }
}

TEST(Commutators, CatalogExamples) {
    const auto h = commutator_check(heisenberg());
    EXPECT_TRUE(h.all());
    const auto br = heisenberg().bracket(1, 2);
    EXPECT_EQ(br[0], Rational(-2));
    EXPECT_EQ(br[1], Rational(0));

    const auto s = commutator_check(round_s3());
    EXPECT_TRUE(s.all());
    const ComplexVector expected = combine(ExactComplex(0, -2), z1bar_vector(), q(0), z1_vector());
    EXPECT_EQ(s.antiholo_reeb_lhs, expected);

    const auto t = commutator_check(torsion_model());
    EXPECT_TRUE(t.all());
    EXPECT_EQ(t.antiholo_reeb_lhs, combine(ExactComplex(0, -2), z1_vector(), q(0), z1_vector()));
}

TEST(Commutators, GenFamily) {
    for (const auto& [p, qq] : random_pq(23, 50)) EXPECT_TRUE(commutator_check(make_gen(p, qq)).all());
}

TEST(Commutators, DetectsWrongInvariants) {
    auto ph = derive_ph_invariants(torsion_model());
    ph.torsion = ExactComplex(0, 2);
    EXPECT_FALSE(commutator_check(torsion_model(), ph).antiholo_reeb);
}
