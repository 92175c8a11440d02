#include <gtest/gtest.h>

#include "currentkit/harness.hpp"
#include "oracles.hpp"

using namespace currentkit;

namespace {

Vec point(std::initializer_list<double> v)
{
    Vec x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double c : v) x[i++] = c;
    return x;
}

double spectral_norm(const Mat& a)
{
    return Eigen::JacobiSVD<Mat>(a).singularValues()(0);
}

Chain random_chain(int r, int n, int count, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    Chain c(r, n);
    for (int k = 0; k < count; ++k) {
        std::vector<Vec> pts;
        for (int i = 0; i <= r; ++i) {
            Vec p(n);
            for (int j = 0; j < n; ++j) p[j] = u(rng);
            pts.push_back(p);
        }
        c.add_simplex_points(pts, u(rng));
    }
    return c;
}

} // namespace

TEST(LipschitzTest, AffineMapsHaveSpectralNormConstant)
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        auto f = sampling::random_affine(3, rng);
        const double lip = lipschitz_constant(f, Box::cube(3, -1, 1)).value;
        EXPECT_NEAR(lip, spectral_norm(f.jacobian(Vec::Zero(3))), 1e-12);
    }
}

TEST(LipschitzTest, RotationIsAnIsometry)
{
    auto f = rotation_map(0.7, point({0.3, -0.2}));
    EXPECT_NEAR(lipschitz_constant(f, Box::cube(2, -1, 1)).value, 1.0, 1e-12);
    auto bl = bi_lipschitz_constants(f, Box::cube(2, -1, 1));
    EXPECT_NEAR(bl.lower, 1.0, 1e-12);
    EXPECT_TRUE(bl.injective);
}

TEST(LipschitzTest, TentConstantMatchesPiecewiseJacobians)
{
    const Vec c = point({0.5, 0.5}), d = point({1.0, 0.5});
    const double w = 0.6, a = 0.5;
    auto f = tent_map(c, w, a, d);
    // On each linear piece the Jacobian is I +- (a / w) d e_k^T.
    double expected = 1.0;
    for (int k = 0; k < 2; ++k)
        for (double s : {-1.0, 1.0}) {
            Mat j = Mat::Identity(2, 2);
            j.col(k) += s * (a / w) * d;
            expected = std::max(expected, spectral_norm(j));
        }
    const double lip = lipschitz_constant(f, Box::cube(2, -0.5, 1.5)).value;
    EXPECT_NEAR(lip, expected, 1e-9);
    EXPECT_TRUE(bi_lipschitz_constants(f, Box::cube(2, -0.5, 1.5)).injective);
    EXPECT_EQ(f(point({2.0, 2.0})), point({2.0, 2.0}));
}

TEST(LipschitzTest, FoldIsNotInjective)
{
    auto bl = bi_lipschitz_constants(fold_map(2), Box::cube(2, -1, 1));
    EXPECT_FALSE(bl.injective);
    EXPECT_NEAR(bl.upper, 1.0, 1e-12);
}

TEST(LipschitzTest, StrongDistanceOfTranslations)
{
    auto f = translation_map(point({0.1, 0.0}));
    auto g = translation_map(point({0.0, 0.3}));
    EXPECT_NEAR(strong_lip_distance(f, g, Box::cube(2, 0, 1)), std::hypot(0.1, 0.3), 1e-12);
}

TEST(PushforwardTest, AffineMassBoundOnRandomChains)
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 2);
        const int r = 1 + static_cast<int>(rng() % n);
        auto t = random_chain(r, n, 4, rng);
        auto f = sampling::random_affine(n, rng);
        const double lip = lipschitz_constant(f, t.bounding_box(0.1)).value;
        auto ft = pushforward_chain(f, t).chain;
        EXPECT_LE(mass(ft), std::pow(lip, r) * mass(t) + 1e-6);
    }
}

TEST(PushforwardTest, BoundaryCommutesExactly)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 2);
        const int r = 1 + static_cast<int>(rng() % n);
        auto t = random_chain(r, n, 3, rng);
        auto f = sampling::random_affine(n, rng);
        auto lhs = boundary(pushforward_chain(f, t).chain);
        auto rhs = pushforward_chain(f, boundary(t)).chain;
        EXPECT_TRUE((lhs + (-1.0) * rhs).empty());
    }
}

TEST(PushforwardTest, GeometricAndFunctionalPushforwardsAgree)
{
    std::mt19937_64 rng(9);
    auto t = box_chain(Box::cube(2, 0, 1), 2);
    auto f = sampling::random_affine(2, rng);
    auto phi = FormField::polynomial(sampling::random_polyform(2, 2, 2, rng));
    const double geometric = evaluate(pushforward_chain(f, t).chain, phi);
    const double functional = evaluate(pushforward_current(f, Current::leaf(t)), phi);
    EXPECT_NEAR(geometric, functional, 1e-12);
}

TEST(PushforwardTest, NonlinearMapConvergesUnderSubdivision)
{
    auto f = radial_stretch_map(point({0.0, 0.0}), 0.2);
    auto t = boundary(box_chain(Box::cube(2, 0.2, 0.8), 1));
    auto phi = FormField::polynomial(PolyForm<double>::basis(MultiIndex({1}, 2), Polynomial<double>::variable(2, 0)));
    const double exact = evaluate(pushforward_current(f, Current::leaf(t)), phi, {4});
    std::vector<double> h, err;
    for (int level = 1; level <= 4; ++level) {
        h.push_back(std::ldexp(1.0, -level));
        err.push_back(std::abs(evaluate(pushforward_chain(f, t, level).chain, phi) - exact));
    }
    EXPECT_GE(oracle::loglog_slope(h, err), 1.9);
}

TEST(PushforwardTest, TentPushforwardIsExactAfterSplitting)
{
    auto m = motions::tent(point({0.5, 0.5}), 0.6, 0.5, point({1.0, 0.5}));
    auto f = m.map_at(0.3);
    Chain poly(1, 2);
    poly.add_simplex_points({point({0.0, 0.2}), point({1.0, 0.7})}, 1.0);
    auto split = split_chain(poly, m.kinks());
    std::mt19937_64 rng(1);
    auto phi = FormField::polynomial(sampling::random_polyform(1, 2, 2, rng));
    const double a = evaluate(pushforward_chain(f, split).chain, phi);
    const double b = evaluate(pushforward_chain(f, split, 3).chain, phi);
    EXPECT_NEAR(a, b, 1e-12);
}

TEST(PushforwardTest, CompositionChainRule)
{
    auto f = rotation_map(0.3, point({0.0, 0.0}));
    auto g = shear_map(2, 0.5);
    auto h = compose(g, f);
    Vec x = point({0.2, 0.7});
    EXPECT_LE((h.jacobian(x) - g.jacobian(f(x)) * f.jacobian(x)).norm(), 1e-15);
    EXPECT_LE((h(x) - g(f(x))).norm(), 1e-15);
}
