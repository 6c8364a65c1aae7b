#include <gtest/gtest.h>

#include "cmw/catalog_json.hpp"
#include "cmw/forms.hpp"
#include "cmw/model.hpp"
#include "support.hpp"

using namespace cmw;
using cmw::testing::catalog;
using cmw::testing::random_pq;

namespace {

ExactComplex q(long long n, long long d = 1) { return ExactComplex(Rational(n, d)); }
const ExactComplex I = ExactComplex::I();

// Sign of a permutation of distinct indices, computed by bubble sort.
int sort_sign(std::vector<int> v) {
    int sign = 1;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j + 1 < v.size() - i; ++j)
            if (v[j] > v[j + 1]) {
                std::swap(v[j], v[j + 1]);
                sign = -sign;
            }
    return sign;
}

std::vector<int> indices(int mask) {
    std::vector<int> out;
    for (int i = 0; i < 3; ++i)
        if (mask & (1 << i)) out.push_back(i);
    return out;
}

ExactForm generic_form(int degree, int salt) {
    ExactForm f(degree);
    for (int m = 0; m < kMonomials; ++m)
        if (mask_degree(m) == degree) f.set(m, ExactComplex(Rational(m + salt, 3), Rational(salt - 2 * m, 5)));
    return f;
}

// d e^i computed from the table by hand: c scaled monomials.
ExactForm hand_d_basis(const ModelStructure& m, int i) {
    return ExactComplex(m.c(i, 0, 1)) * ExactForm::e(0, 1) + ExactComplex(m.c(i, 0, 2)) * ExactForm::e(0, 2) +
           ExactComplex(m.c(i, 1, 2)) * ExactForm::e(1, 2);
}

}  // namespace

TEST(MakeModel, GenFamilyIsValidForRandomRationals) {
    for (const auto& [p, qq] : random_pq(11, 100)) EXPECT_NO_THROW(make_gen(p, qq));
}

TEST(MakeModel, CatalogStructureConstants) {
    const auto s3 = round_s3();
    EXPECT_EQ(s3.c(0, 1, 2), Rational(2));
    EXPECT_EQ(s3.c(1, 2, 0), Rational(2));   // de1 = 2p e2^e0, p = 1
    EXPECT_EQ(s3.c(2, 0, 1), Rational(2));   // de2 = 2q e0^e1, q = 1
    EXPECT_EQ(torsion_model().c(2, 0, 1), Rational(-2));
    EXPECT_EQ(heisenberg().c(1, 0, 2), Rational(0));
}

TEST(MakeModel, WrongNormalizationIsInadmissible) {
    auto c = gen_table(0, 0);
    c[0][pair_index(1, 2)] = 1;
    EXPECT_THROW(make_model(c, "bad"), AdmissibilityError);
    auto c2 = gen_table(0, 0);
    c2[0][pair_index(0, 1)] = 1;
    EXPECT_THROW(make_model(c2, "bad"), AdmissibilityError);
}

TEST(MakeModel, JacobiViolationIsRejected) {
    // de1 = e0^e1 alone: d(de0) = 2(de1^e2 - e1^de2) = 2 e0^e1^e2 != 0
    auto c = gen_table(0, 0);
    c[1][pair_index(0, 1)] = 1;
    EXPECT_THROW(make_model(c, "non-unimodular"), JacobiError);
    // balancing trace c^1_01 + c^2_02 = 0 restores integrability
    c[2][pair_index(0, 2)] = -1;
    EXPECT_NO_THROW(make_model(c, "balanced"));
}

TEST(Wedge, BasisProducts) {
    EXPECT_EQ(wedge(ExactForm::e(1), ExactForm::e(2)), ExactForm::monomial(6));
    EXPECT_TRUE(wedge(ExactForm::e(1), ExactForm::e(1)).is_zero());
    EXPECT_EQ(wedge(theta1<Rational>(), theta1bar<Rational>()), ExactComplex(0, -2) * ExactForm::e(1, 2));
    EXPECT_THROW(wedge(ExactForm::e(0, 1), ExactForm::e(0, 2)), DegreeError);
}

TEST(Wedge, AgreesWithPermutationSignsOnAllBasisPairs) {
    for (int a = 0; a < kMonomials; ++a)
        for (int b = 0; b < kMonomials; ++b) {
            if (mask_degree(a) + mask_degree(b) > 3) continue;
            const ExactForm w = wedge(ExactForm::monomial(a), ExactForm::monomial(b));
            if (a & b) {
                EXPECT_TRUE(w.is_zero());
                continue;
            }
            std::vector<int> seq = indices(a);
            const auto ib = indices(b);
            seq.insert(seq.end(), ib.begin(), ib.end());
            EXPECT_EQ(w, ExactForm::monomial(a | b, q(sort_sign(seq))));
        }
}

TEST(Wedge, AssociativeAndGradedCommutative) {
    for (int a = 0; a < kMonomials; ++a)
        for (int b = 0; b < kMonomials; ++b) {
            const int da = mask_degree(a), db = mask_degree(b);
            if (da + db > 3) continue;
            const ExactForm fa = ExactForm::monomial(a), fb = ExactForm::monomial(b);
            const ExactComplex sign = ((da * db) % 2) ? q(-1) : q(1);
            EXPECT_EQ(wedge(fa, fb), sign * wedge(fb, fa));
            for (int c = 0; c < kMonomials; ++c) {
                if (da + db + mask_degree(c) > 3) continue;
                const ExactForm fc = ExactForm::monomial(c);
                EXPECT_EQ(wedge(wedge(fa, fb), fc), wedge(fa, wedge(fb, fc)));
            }
        }
}

TEST(ExteriorD, BasisFormsReproduceStructureConstants) {
    for (const auto& [p, qq] : random_pq(5, 20)) {
        const auto m = make_gen(p, qq);
        for (int i = 0; i < 3; ++i) EXPECT_EQ(exterior_d(ExactForm::e(i), m), hand_d_basis(m, i));
    }
}

TEST(ExteriorD, Examples) {
    for (const auto& m : catalog()) EXPECT_EQ(exterior_d(ExactForm::e(0), m), q(2) * ExactForm::e(1, 2));
    const auto s3 = round_s3();
    EXPECT_EQ(exterior_d(theta1<Rational>(), s3), ExactComplex(0, 2) * wedge(ExactForm::e(0), theta1<Rational>()));
    EXPECT_TRUE(exterior_d(ExactForm::constant(q(5)), s3).is_zero());
    EXPECT_TRUE(exterior_d(ExactForm::volume(), s3).is_zero());
}

TEST(ExteriorD, SquaresToZeroOnValidatedModels) {
    auto models = catalog();
    for (const auto& [p, qq] : random_pq(7, 30)) models.push_back(make_gen(p, qq));
    auto c = gen_table(0, 0);
    c[1][pair_index(0, 1)] = 3;
    c[2][pair_index(0, 2)] = -3;
    models.push_back(make_model(c, "non-gen"));
    for (const auto& m : models)
        for (int deg = 0; deg <= 2; ++deg)
            for (int salt = 0; salt < 3; ++salt)
                EXPECT_TRUE(exterior_d(exterior_d(generic_form(deg, salt), m), m).is_zero()) << m.name();
}

TEST(ExteriorD, LeibnizOnAllBasisPairs) {
    std::vector<ModelStructure> models = catalog();
    models.push_back(make_gen(Rational(2, 3), Rational(-5, 2)));
    for (const auto& m : models)
        for (int a = 0; a < kMonomials; ++a)
            for (int b = 0; b < kMonomials; ++b) {
                const int da = mask_degree(a);
                if (da + mask_degree(b) > 3) continue;
                const ExactForm fa = ExactForm::monomial(a), fb = ExactForm::monomial(b);
                const ExactForm lhs = exterior_d(wedge(fa, fb), m);
                if (da + mask_degree(b) == 3) continue;  // no 4-forms
                const ExactComplex sign = (da % 2) ? q(-1) : q(1);
                ExactForm rhs = wedge(exterior_d(fa, m), fb) + sign * wedge(fa, exterior_d(fb, m));
                EXPECT_EQ(lhs, rhs);
            }
}

TEST(Interior, Examples) {
    EXPECT_EQ(interior(1, ExactForm::e(1, 2)), ExactForm::e(2));
    EXPECT_EQ(interior(2, ExactForm::e(1, 2)), -ExactForm::e(1));
    EXPECT_EQ(interior(1, theta1bar<Rational>()), ExactForm::constant(q(1)));
    EXPECT_TRUE(interior(0, ExactForm::e(1, 2)).is_zero());
    EXPECT_THROW(interior(0, ExactForm::constant(q(1))), DegreeError);
}

TEST(Interior, IsAnAntiderivation) {
    for (int j = 0; j < 3; ++j)
        for (int a = 1; a < kMonomials; ++a)
            for (int b = 1; b < kMonomials; ++b) {
                const int da = mask_degree(a);
                if (da + mask_degree(b) > 3) continue;
                const ExactForm fa = ExactForm::monomial(a), fb = ExactForm::monomial(b);
                const ExactComplex sign = (da % 2) ? q(-1) : q(1);
                EXPECT_EQ(interior(j, wedge(fa, fb)), wedge(interior(j, fa), fb) + sign * wedge(fa, interior(j, fb)));
            }
}

TEST(HodgeStar, Examples) {
    const ExactComplex eps = q(1, 3);
    EXPECT_EQ(hodge_star_eps(ExactForm::e(1, 2), eps), eps * ExactForm::e(0));
    EXPECT_EQ(hodge_star_eps(theta1bar<Rational>(), eps), I * wedge(theta1bar<Rational>(), eps * ExactForm::e(0)));
    EXPECT_EQ(hodge_star_eps(ExactForm::constant(q(1)), q(1)), ExactForm::volume());
}

TEST(HodgeStar, InvolutionAndPositivity) {
    for (const auto& eps : {q(1), q(1, 2), q(3, 7), q(5)})
        for (int m = 0; m < kMonomials; ++m) {
            const ExactForm f = ExactForm::monomial(m);
            EXPECT_EQ(hodge_star_eps(hodge_star_eps(f, eps), eps), f);
            // orthonormal monomials f^I have unit norm; e0 = f0 / eps
            const ExactComplex expected = (m & 1) ? q(1) / (eps * eps) : q(1);
            EXPECT_EQ(inner_eps(f, f, eps), expected);
            for (int n = 0; n < kMonomials; ++n) {
                if (n != m && mask_degree(n) == mask_degree(m)) {
                    EXPECT_EQ(inner_eps(f, ExactForm::monomial(n), eps), q(0));
                }
            }
        }
    const ExactForm g = generic_form(2, 1).mapped<ExactComplex>([](const ExactComplex& z) { return ExactComplex(z.re); });
    EXPECT_GT(inner_eps(g, g, q(1, 2)).re, 0);
}

TEST(ComplexBasis, ThetaFormsRoundTrip) {
    const ExactForm t = theta1<Rational>(), tb = theta1bar<Rational>();
    EXPECT_EQ(q(1, 2) * (t + tb), ExactForm::e(1));
    EXPECT_EQ(ExactComplex(0, Rational(-1, 2)) * (t - tb), ExactForm::e(2));
    EXPECT_EQ(conj(t), tb);
}

TEST(CatalogJson, LoadsNamesParametersAndTables) {
    EXPECT_TRUE(model_from_json(nlohmann::json("round-s3")).same_structure(round_s3()));
    const auto m = model_from_json(nlohmann::json::parse(R"({"name":"x","p":"1/2","q":"-1"})"));
    EXPECT_TRUE(m.same_structure(make_gen(Rational(1, 2), -1)));
    EXPECT_EQ(m.name(), "x");
    const auto t = model_from_json(nlohmann::json::parse(R"({"name":"t","c_0_12":"2","c_1_02":"-2","c_2_01":"-2"})"));
    EXPECT_TRUE(t.same_structure(torsion_model()));
    EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"c_0_12":"1"})")), AdmissibilityError);
    EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"c_9_12":"1"})")), ParseError);
    const auto back = model_from_json(model_to_json(torsion_model()));
    EXPECT_TRUE(back.same_structure(torsion_model()));
}

TEST(CatalogNames, GenSyntax) {
    EXPECT_TRUE(catalog_model("gen(1,-1)").same_structure(torsion_model()));
    EXPECT_TRUE(catalog_model("gen(1/3,2)").gen_parameters().has_value());
    EXPECT_THROW(catalog_model("sphere"), ParseError);
}
