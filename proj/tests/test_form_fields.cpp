#include <gtest/gtest.h>

#include "currentkit/harness.hpp"
#include "oracles.hpp"

using namespace currentkit;

namespace {

Box unit_square() { return Box::cube(2, 0.0, 1.0); }

Vec point(std::initializer_list<double> v)
{
    Vec x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double c : v) x[i++] = c;
    return x;
}

// x dy in the plane.
FormField x_dy()
{
    auto p = PolyForm<double>::basis(MultiIndex({1}, 2), Polynomial<double>::variable(2, 0));
    return FormField::polynomial(p);
}

} // namespace

TEST(FormFieldTest, DomainIsEnforced)
{
    auto phi = x_dy().with_domain(unit_square());
    EXPECT_NO_THROW(phi(point({0.5, 0.5})));
    EXPECT_THROW(phi(point({1.5, 0.5})), DomainError);
    EXPECT_THROW(phi(point({0.5, 0.5, 0.5})), DegreeError);
    EXPECT_NO_THROW(phi.raw(point({1.5, 0.5})));
}

TEST(FormFieldTest, SampledDerivativeMatchesAnalyticDerivative)
{
    std::mt19937_64 rng(42);
    for (int r = 0; r < 3; ++r) {
        auto tf = sampling::random_trig_form(r, 3, rng);
        auto d = exterior_derivative(tf.form);
        for (int k = 0; k < 10; ++k) {
            Vec x = Vec::Random(3);
            EXPECT_LE(euclidean_norm(d(x) - tf.derivative(x)), 1e-8) << "r=" << r;
        }
    }
}

TEST(FormFieldTest, SampledLieDerivativeMatchesPolynomialLie)
{
    std::mt19937_64 rng(3);
    for (int r = 0; r <= 2; ++r) {
        auto p = sampling::random_polyform(r, 2, 3, rng);
        auto vp = sampling::random_polymap(2, 2, rng);
        auto exact = FormField::polynomial(lie_derivative(p, vp));
        auto sampled = FormField::sampled(r, 2, [p](const Vec& x) { return p(x); });
        auto v = VectorField(2, [vp](const Vec& x) { return VectorField::polynomial(vp)(x); });
        auto approx = lie_derivative(sampled, v);
        for (int k = 0; k < 10; ++k) {
            Vec x = Vec::Random(2);
            EXPECT_LE(euclidean_norm(approx(x) - exact(x)), 1e-7) << "r=" << r;
        }
    }
}

TEST(FormFieldTest, PolynomialAndSampledContractionAgree)
{
    std::mt19937_64 rng(9);
    auto p = sampling::random_polyform(2, 3, 2, rng);
    auto vp = sampling::random_polymap(3, 1, rng);
    auto exact = contract(FormField::polynomial(p), VectorField::polynomial(vp));
    auto sampled = contract(FormField::sampled(2, 3, [p](const Vec& x) { return p(x); }), VectorField::polynomial(vp));
    EXPECT_FALSE(sampled.is_polynomial());
    for (int k = 0; k < 10; ++k) {
        Vec x = Vec::Random(3);
        EXPECT_LE(euclidean_norm(exact(x) - sampled(x)), 1e-13);
    }
}

TEST(FormFieldTest, MollifiedContractionRecoversSmoothFields)
{
    auto phi = FormField::constant(MultiIndex({0, 1}, 2));
    VectorField v(2, [](const Vec& x) { return Vec(point({std::sin(x[0]), x[1] * x[1]})); });
    auto c = contract_mollified(phi, v, 1e-2);
    auto exact = contract(phi, v);
    for (int k = 0; k < 5; ++k) {
        Vec x = Vec::Random(2);
        EXPECT_LE(euclidean_norm(c(x) - exact(x)), 1e-8);
    }
}

TEST(SeminormTest, KnownValuesForXDy)
{
    // |x dy| = x, d(x dy) = dx^dy, Lip = 1 on the unit square.
    auto phi = x_dy();
    EXPECT_NEAR(seminorm_comass(phi, unit_square()).value, 1.0, 1e-14);
    EXPECT_NEAR(seminorm_flat(phi, unit_square()).value, 1.0, 1e-14);
    EXPECT_NEAR(lipschitz_form(phi, unit_square()).value, 1.0, 1e-12);
    EXPECT_NEAR(seminorm_sharp(phi, unit_square()).value, 2.0, 1e-12);
}

TEST(SeminormTest, ComassSeminormIsNotEuclidean)
{
    auto w = FormField::constant(MultiIndex({0, 1}, 4)) + FormField::constant(MultiIndex({2, 3}, 4));
    SeminormOptions so;
    so.resolution = 3;
    EXPECT_NEAR(seminorm_comass(w, Box::cube(4, 0, 1), so).value, 1.0, 1e-8);
}

TEST(SeminormTest, SharpDominatesFlatDominatesComass)
{
    std::mt19937_64 rng(42);
    SeminormOptions so;
    so.resolution = 9;
    for (int trial = 0; trial < 10; ++trial) {
        const int r = static_cast<int>(rng() % 2);
        auto phi = FormField::polynomial(sampling::random_polyform(r, 2, 3, rng));
        const double m = seminorm_comass(phi, unit_square(), so).value;
        const double f = seminorm_flat(phi, unit_square(), so).value;
        const double s = seminorm_sharp(phi, unit_square(), so).value;
        EXPECT_LE(m, f);
        EXPECT_LE(f, s + 1e-12);
    }
}

TEST(SeminormTest, LinearFieldLipschitzIsSpectralNorm)
{
    Mat a(2, 2);
    a << 1, 2, -0.5, 0.3;
    Vec b = point({0.1, -0.2});
    VectorField v = VectorField::polynomial(affine_map(a, b));
    Eigen::JacobiSVD<Mat> svd(a);
    EXPECT_NEAR(lipschitz_field(v, unit_square(), 9).value, svd.singularValues()(0), 1e-12);
    double sup = 0;
    for (const auto& x : grid_points(unit_square(), 2)) sup = std::max(sup, (a * x + b).norm());
    EXPECT_NEAR(sup_norm(v, unit_square(), 9).value, sup, 1e-12);
}

TEST(SeminormTest, GridRefinementIsMonotoneOnNestedGrids)
{
    std::mt19937_64 rng(5);
    auto tf = sampling::random_trig_form(1, 2, rng, 4.0);
    double prev = 0;
    for (int res : {3, 5, 9, 17}) {
        SeminormOptions so;
        so.resolution = res;
        double m = seminorm_comass(tf.form, unit_square(), so).value;
        EXPECT_GE(m, prev - 1e-15);
        prev = m;
    }
}
