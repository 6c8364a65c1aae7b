#include <gtest/gtest.h>

#include <memory>
#include <random>

#include "cmw/clifford.hpp"
#include "cmw/fields.hpp"
#include "support.hpp"

using namespace cmw;
using cmw::testing::catalog;
using cmw::testing::random_pq;
using cmw::testing::random_rational;

namespace {

using Backend = InvariantBackend<Rational>;
using Field = SpinorField<Backend>;
using Gauge = GaugeField<Backend>;

std::shared_ptr<const Backend> backend_for(const ModelStructure& m) { return std::make_shared<const Backend>(m); }

Field constant_spinor(const std::shared_ptr<const Backend>& b, const ExactComplex& alpha, const ExactComplex& beta) {
    return Field{b, {alpha}, {beta}};
}

ExactForm real_one_form(const std::array<Rational, 3>& a) {
    ExactForm f(1);
    for (int j = 0; j < 3; ++j) f.set(1 << j, ExactComplex(a[j]));
    return f;
}

std::vector<ModelStructure> test_models() {
    auto models = catalog();
    for (const auto& [p, q] : random_pq(41, 6)) models.push_back(make_gen(p, q));
    return models;
}

}  // namespace

TEST(InvariantBackend, CovariantReebDerivativeOnRoundSphere) {
    const auto b = backend_for(make_gen(1, 1));
    const auto g = make_geometry<Rational>(b->model());
    const Field phi = constant_spinor(b, ExactComplex(0), ExactComplex(1));
    const auto d = cov_deriv(phi, Direction::T, Gauge::zero(b), g);
    EXPECT_EQ(d.beta[0], ExactComplex(0, -2));
    EXPECT_EQ(d.alpha[0], ExactComplex(0));
}

TEST(InvariantBackend, CovariantDerivativeWithPhInvariantsOverload) {
    const auto b = backend_for(round_s3());
    const Field phi = constant_spinor(b, ExactComplex(0), ExactComplex(1));
    const auto d = cov_deriv(phi, Direction::T, Gauge::zero(b), derive_ph_invariants(b->model()));
    EXPECT_EQ(d.beta[0], ExactComplex(0, -2));
}

TEST(InvariantBackend, GaugeTwistEntersBothComponents) {
    const auto b = backend_for(heisenberg());
    const auto g = make_geometry<Rational>(b->model());
    const Field phi = constant_spinor(b, ExactComplex(3), ExactComplex(5));
    const auto a = Gauge::constant(b, {Rational(1, 2), Rational(2), Rational(-1)});
    const auto d0 = cov_deriv(phi, Direction::T, a, g);
    EXPECT_EQ(d0.alpha[0], ExactComplex(0, Rational(3, 2)));
    EXPECT_EQ(d0.beta[0], ExactComplex(0, Rational(5, 2)));
    const auto d1 = cov_deriv(phi, Direction::Z1, a, g);
    // a(Z1) = (2 + i)/2
    EXPECT_EQ(d1.alpha[0], ExactComplex(0, 1) * ExactComplex(1, Rational(1, 2)) * ExactComplex(3));
}

TEST(InvariantBackend, DiracEpsOnPhi0IsEpsTimesPhi0) {
    for (const auto& m : {heisenberg(), round_s3(), make_gen(Rational(2, 3), Rational(2, 3))}) {
        const auto b = backend_for(m);
        const auto g = make_geometry<Rational>(m);
        for (const Rational& eps : {Rational(1), Rational(1, 3), Rational(7, 2)}) {
            const auto out = dirac_eps(constant_spinor(b, ExactComplex(1), ExactComplex(0)), Gauge::zero(b), g, eps);
            EXPECT_EQ(out.alpha[0], ExactComplex(eps)) << m.name();
            EXPECT_EQ(out.beta[0], ExactComplex(0)) << m.name();
        }
    }
}

TEST(InvariantBackend, DiracEpsOnPhi1RoundSphere) {
    const auto b = backend_for(round_s3());
    const auto g = make_geometry<Rational>(b->model());
    const auto out = dirac_eps(constant_spinor(b, ExactComplex(0), ExactComplex(1)), Gauge::zero(b), g, Rational(1));
    EXPECT_EQ(out.alpha[0], ExactComplex(0));
    EXPECT_EQ(out.beta[0], ExactComplex(2));
}

TEST(InvariantBackend, DiracEpsOnConstantsMatchesCliffordRoute) {
    // Independent route: Clifford multiplication by the solved spin connection on constant spinors.
    for (const auto& m : {heisenberg(), round_s3(), make_gen(Rational(-3, 2), Rational(-3, 2))}) {
        const auto b = backend_for(m);
        const auto g = make_geometry<Rational>(m);
        const auto out = dirac_eps(constant_spinor(b, ExactComplex(1), ExactComplex(0)), Gauge::zero(b), g, Rational(1));
        const auto rep = clifford_identities(m, Rational(1));
        EXPECT_EQ(lift_spinor(out.alpha[0]), rep.eigenvalue) << m.name();
    }
}

TEST(InvariantBackend, DiracEpsRejectsTorsion) {
    const auto b = backend_for(torsion_model());
    const auto g = make_geometry<Rational>(b->model());
    EXPECT_THROW(dirac_eps(constant_spinor(b, ExactComplex(1), ExactComplex(0)), Gauge::zero(b), g, Rational(1)),
                 TorsionError);
}

TEST(InvariantBackend, DiracEpsRejectsNonPositiveEps) {
    const auto b = backend_for(heisenberg());
    const auto g = make_geometry<Rational>(b->model());
    EXPECT_THROW(dirac_eps(constant_spinor(b, ExactComplex(1), ExactComplex(0)), Gauge::zero(b), g, Rational(0)),
                 std::domain_error);
}

TEST(InvariantBackend, DiracXiVanishesOnConstantsWithoutGauge) {
    for (const auto& m : test_models()) {
        if (!m.gen_parameters()) continue;
        const auto b = backend_for(m);
        const auto g = make_geometry<Rational>(m);
        const auto out = dirac_xi(constant_spinor(b, ExactComplex(2, 1), ExactComplex(-1, 3)), Gauge::zero(b), g);
        EXPECT_EQ(out.alpha[0], ExactComplex(0)) << m.name();
        EXPECT_EQ(out.beta[0], ExactComplex(0)) << m.name();
    }
}

TEST(InvariantBackend, L2InnerProduct) {
    const auto b = backend_for(heisenberg());
    const Field phi0 = constant_spinor(b, ExactComplex(1), ExactComplex(0));
    const Field mixed = constant_spinor(b, ExactComplex(1, 2), ExactComplex(0, -1));
    EXPECT_EQ(l2_inner(phi0, phi0), ExactComplex(2));
    EXPECT_EQ(l2_inner(mixed, phi0), ExactComplex(2, 4));
    EXPECT_EQ(l2_inner(phi0, mixed), ExactComplex(2, -4));
    EXPECT_EQ(l2_norm_sq(mixed), Rational(12));
}

TEST(InvariantBackend, DivergenceIsExactlyZero) {
    const Backend b(heisenberg());
    for (int d = 0; d < 3; ++d) EXPECT_EQ(divergence_check(d, b), Rational(0));
}

TEST(InvariantBackend, MismatchedBackendsThrow) {
    const auto a = backend_for(heisenberg());
    const auto b = backend_for(round_s3());
    const Field phi = constant_spinor(a, ExactComplex(1), ExactComplex(0));
    const Field psi = constant_spinor(b, ExactComplex(1), ExactComplex(0));
    EXPECT_THROW(l2_inner(phi, psi), BackendMismatch);
    EXPECT_THROW(cov_deriv(phi, Direction::T, Gauge::zero(b), make_geometry<Rational>(a->model())), BackendMismatch);
}

TEST(InvariantBackend, TraceCurvatureMatchesExteriorDerivative) {
    std::mt19937_64 rng(5);
    for (const auto& m : test_models()) {
        const auto ph = derive_ph_invariants(m);
        const auto b = backend_for(m);
        const auto g = make_geometry<Rational>(m, ph);
        for (int t = 0; t < 3; ++t) {
            const std::array<Rational, 3> av{random_rational(rng), random_rational(rng), random_rational(rng)};
            const Rational eps = Rational(1 + t, 2);
            const auto a = Gauge::constant(b, av);
            const ExactForm fb = exterior_d(trace_connection(ph, eps, real_one_form(av)), m);
            const ExactComplex minus_i(0, -1);
            EXPECT_EQ(ExactComplex(trace_curvature(a, 0, 1, g, eps)[0]), minus_i * fb[3]) << m.name();
            EXPECT_EQ(ExactComplex(trace_curvature(a, 0, 2, g, eps)[0]), minus_i * fb[5]) << m.name();
            EXPECT_EQ(ExactComplex(trace_curvature(a, 1, 2, g, eps)[0]), minus_i * fb[6]) << m.name();
        }
    }
}

TEST(InvariantBackend, GaugeCurvatureOfConstantFieldUsesStructureConstants) {
    const auto m = make_gen(Rational(1, 3), Rational(-2));
    const auto b = backend_for(m);
    const auto g = make_geometry<Rational>(m);
    const auto a = Gauge::constant(b, {Rational(1), Rational(2), Rational(3)});
    // c^0_12 = 2, c^1_02 = -2p, c^2_01 = 2q
    EXPECT_EQ(gauge_curvature(a, 1, 2, g)[0], Rational(2));
    EXPECT_EQ(gauge_curvature(a, 0, 2, g)[0], Rational(-4, 3));
    EXPECT_EQ(gauge_curvature(a, 0, 1, g)[0], Rational(-12));
    EXPECT_EQ(gauge_curvature(a, 2, 1, g)[0], Rational(-2));
}

TEST(InvariantBackend, GaugeCovarianceIsExact) {
    // Constant gauge transforms u = e^{i chi} with d chi = 0 only change a by zero; phase
    // rotation of a constant spinor commutes with every operator.
    const auto m = round_s3();
    const auto b = backend_for(m);
    const auto g = make_geometry<Rational>(m);
    const auto a = Gauge::constant(b, {Rational(1, 2), Rational(1, 3), Rational(-1)});
    const Field phi = constant_spinor(b, ExactComplex(2, -1), ExactComplex(1, 1));
    const ExactComplex u(Rational(3, 5), Rational(4, 5));
    const Field rotated = constant_spinor(b, u * phi.alpha[0], u * phi.beta[0]);
    const auto lhs = dirac_eps(rotated, a, g, Rational(1));
    const auto rhs = dirac_eps(phi, a, g, Rational(1));
    EXPECT_EQ(lhs.alpha[0], u * rhs.alpha[0]);
    EXPECT_EQ(lhs.beta[0], u * rhs.beta[0]);
}

TEST(InvariantBackend, AnticommutatorRoutesAgree) {
    std::mt19937_64 rng(17);
    for (const auto& m : test_models()) {
        const auto b = backend_for(m);
        const auto g = make_geometry<Rational>(m);
        for (int t = 0; t < 3; ++t) {
            const auto a = Gauge::constant(b, {random_rational(rng), random_rational(rng), random_rational(rng)});
            const Field phi = constant_spinor(b, ExactComplex(random_rational(rng), random_rational(rng)),
                                              ExactComplex(random_rational(rng), random_rational(rng)));
            const auto r = anticommutator_op(phi, a, g, Rational(1, 2));
            EXPECT_EQ(r.direct.alpha[0], r.closed_form.alpha[0]) << m.name();
            EXPECT_EQ(r.direct.beta[0], r.closed_form.beta[0]) << m.name();
        }
    }
}

TEST(InvariantBackend, DiracEpsSplitsIntoBlocks) {
    std::mt19937_64 rng(23);
    for (const auto& m : {heisenberg(), round_s3(), make_gen(Rational(5, 3), Rational(5, 3))}) {
        const auto b = backend_for(m);
        const auto g = make_geometry<Rational>(m);
        const auto a = Gauge::constant(b, {random_rational(rng), random_rational(rng), random_rational(rng)});
        const Field phi = constant_spinor(b, ExactComplex(random_rational(rng), random_rational(rng)),
                                          ExactComplex(random_rational(rng), random_rational(rng)));
        const Rational eps(2, 3);
        const auto full = dirac_eps(phi, a, g, eps);
        const auto reeb = nabla_reeb_block(phi, a, g);
        const auto hor = nabla_horizontal_block(phi, a, g);
        const auto sum = combine(ExactComplex(1) / ExactComplex(eps), reeb, ExactComplex(1), hor);
        EXPECT_EQ(full.alpha[0], sum.alpha[0] + ExactComplex(eps) * phi.alpha[0]);
        EXPECT_EQ(full.beta[0], sum.beta[0]);
    }
}

TEST(InvariantBackend, SupNorm) {
    const auto b = backend_for(heisenberg());
    EXPECT_EQ(sup_norm_sq(constant_spinor(b, ExactComplex(1, 1), ExactComplex(0, 3))), Rational(11));
}
