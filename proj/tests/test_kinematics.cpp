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

Chain polyline()
{
    Chain c(1, 2);
    c.add_simplex_points({point({0.1, 0.2}), point({0.5, 0.3})}, 1.0);
    c.add_simplex_points({point({0.5, 0.3}), point({0.8, 0.7})}, 1.0);
    c.add_simplex_points({point({0.8, 0.7}), point({0.6, 0.95})}, 1.0);
    return c;
}

Chain unit_square() { return box_chain(Box::cube(2, 0, 1), 1); }

Cutoff plateau() { return Cutoff{Box::cube(2, -0.5, 1.5), 1.0}; }

// psi(t) = (1 + x y) dx + t (x^2 - y) dy + t^2 dy.
Cochain time_polynomial_cochain()
{
    using P = Polynomial<double>;
    auto x = P::variable(2, 0), y = P::variable(2, 1), one = P::constant(2, 1.0);
    const MultiIndex dx({0}, 2), dy({1}, 2);
    PolyForm<double> p0 = PolyForm<double>::basis(dx, one + x * y);
    PolyForm<double> p1 = PolyForm<double>::basis(dy, x * x - y);
    PolyForm<double> p2 = PolyForm<double>::basis(dy, one);
    return Cochain::polynomial_in_time(std::vector<PolyForm<double>>{p0, p1, p2});
}

std::vector<Vec> sample_points()
{
    return {point({0.2, 0.3}), point({0.55, 0.45}), point({0.9, 0.1}), point({0.4, 0.8})};
}

} // namespace

TEST(FlowTest, LinearRotationFieldMatchesMatrixExponential)
{
    TimeVectorField v = [](double, const Vec& y) { return Vec(point({-y[1], y[0]})); };
    Vec x = point({1.0, 0.5});
    for (double s : {0.3, 1.0, -0.7}) {
        Vec got = flow(v, s, 0.0, x);
        Vec want = point({std::cos(s) * x[0] - std::sin(s) * x[1], std::sin(s) * x[0] + std::cos(s) * x[1]});
        EXPECT_LE((got - want).norm(), 1e-9) << "s=" << s;
    }
}

TEST(FlowTest, TimeDependentScalarField)
{
    // y' = t y  ->  y(s) = y(t) exp((s^2 - t^2) / 2).
    TimeVectorField v = [](double t, const Vec& y) { return Vec(t * y); };
    Vec x = point({2.0});
    EXPECT_NEAR(flow(v, 1.0, 0.5, x)[0], 2.0 * std::exp((1.0 - 0.25) / 2), 1e-9);
}

TEST(FlowTest, FlowOfEulerianVelocityReproducesTheMotion)
{
    auto m = motions::twist(point({0.3, 0.2}), 2.0, 0.8, 1.4);
    auto v = velocity_field(m);
    for (const auto& x : sample_points()) {
        Vec y = flow(v, 0.4, 0.1, m.position(0.1, x));
        EXPECT_LE((y - m.position(0.4, x)).norm(), 1e-8);
    }
}

TEST(MotionTest, InverseAndEmbeddingChecks)
{
    auto m = motions::shear(2, 0.5, plateau(), -0.2, 0.2);
    for (const auto& x : sample_points()) EXPECT_LE((m.inverse(0.15, m.position(0.15, x)) - x).norm(), 1e-11);
    EXPECT_THROW(m.position(0.5, point({0.0, 0.0})), DomainError);
    EXPECT_THROW(motions::translation(point({5.0, 0.0}), Cutoff{Box::cube(2, 0, 1), 0.1}), DomainError);
    EXPECT_THROW(motions::tent(point({0.5, 0.5}), 0.1, 1.0, point({1.0, 0.0})), DomainError);
}

TEST(MotionTest, ContractionWithTimeDirection)
{
    auto m = motions::twist(point({0.3, 0.2}), 2.0, 0.8, 1.4);
    std::mt19937_64 rng(3);
    auto omega = FormField::polynomial(sampling::random_polyform(2, 2, 2, rng));
    EXPECT_LE(et_contraction_residual(m, omega, 0.2, sample_points()), 1e-12);
    auto phi = FormField::polynomial(sampling::random_polyform(1, 2, 2, rng));
    EXPECT_LE(pullback_derivative_residual(m, phi, 0.2, 1e-4, sample_points()), 1e-5);
}

TEST(DeformationTest, TranslatedSegmentSweepsAParallelogram)
{
    const Vec c = point({0.3, 0.1});
    auto m = motions::translation(c, plateau(), -0.5, 0.5);
    const Vec p = point({0.1, 0.2}), q = point({0.7, 0.5});
    auto d = deformation_chain(m, 0.0, 0.4, simplex_chain({p, q}));
    Mat e(2, 2);
    e.col(0) = c;
    e.col(1) = q - p;
    const double area = 0.4 * e.determinant();
    EXPECT_NEAR(evaluate(d, FormField::constant(MultiIndex({0, 1}, 2))), area, 1e-12);
}

TEST(DeformationTest, HomotopyFormulaForAllSmoothMotions)
{
    std::mt19937_64 rng(42);
    std::vector<Motion> motions{motions::translation(point({0.3, 0.1}), plateau()),
                                motions::twist(point({0.3, 0.2}), 1.0, 1.2, 1.8),
                                motions::shear(2, 0.5, plateau(), -0.2, 0.2)};
    for (const auto& m : motions) {
        for (int r : {1, 2}) {
            Chain t = r == 2 ? unit_square() : boundary(unit_square());
            auto phi = FormField::polynomial(sampling::random_polyform(r, 2, 2, rng));
            auto h = homotopy_residual(m, 0.0, 0.15, t, phi);
            EXPECT_LE(h.residual, 1e-6) << m.name() << " r=" << r;
            EXPECT_GT(std::abs(h.endpoint_difference), 1e-6) << m.name() << " r=" << r;
        }
    }
}

TEST(DeformationTest, HomotopyResidualConvergesUnderTimeRefinement)
{
    auto m = motions::twist(point({0.3, 0.2}), 1.0, 1.2, 1.8);
    std::mt19937_64 rng(5);
    auto phi = FormField::polynomial(sampling::random_polyform(1, 2, 2, rng));
    std::vector<double> h, res;
    for (int panels : {1, 2, 4}) {
        TimeQuadrature q;
        q.panels = panels;
        q.points = 2;
        q.adaptive = false;
        h.push_back(1.0 / panels);
        res.push_back(homotopy_residual(m, 0.0, 0.6, boundary(unit_square()), phi, {}, q).residual);
    }
    EXPECT_GE(oracle::loglog_slope(h, res), 2.0);
}

TEST(TransportTest, SecondOrderAgreementForRotation)
{
    auto m = motions::twist(point({0.5, 0.4}), 2.0, 0.8, 1.4);
    auto rows = transport_fd_ladder(m, polyline(), time_polynomial_cochain(), 0.25, {1e-2, 1e-3, 1e-4},
                                    DifferenceScheme::Central);
    std::vector<double> eps, err;
    for (const auto& r : rows) {
        eps.push_back(r.eps);
        err.push_back(r.abs_error);
    }
    EXPECT_GE(oracle::loglog_slope(eps, err), 1.9);
    EXPECT_LE(rows.back().abs_error, 1e-5);
}

TEST(TransportTest, TermsDecomposeTheDerivative)
{
    auto m = motions::twist(point({0.5, 0.4}), 2.0, 0.8, 1.4);
    auto tt = transport_derivative(m, polyline(), time_polynomial_cochain(), 0.25);
    EXPECT_NEAR(tt.total, tt.rate_term + tt.deformation_term + tt.boundary_term, 1e-15);
    EXPECT_NE(tt.boundary_term, 0.0);
    const double lag = transport_fd_lagrangian(m, polyline(), time_polynomial_cochain(), 0.25, 1e-4);
    EXPECT_NEAR(lag, tt.total, 1e-6);
    const double spatial = transport_betounes(m, polyline(), time_polynomial_cochain(), 0.25);
    EXPECT_NEAR(spatial, tt.total, 1e-5);
}

TEST(TransportTest, FirstOrderAgreementForTent)
{
    auto m = motions::tent(point({0.5, 0.5}), 0.6, 0.5, point({1.0, 0.5}));
    auto psi = time_polynomial_cochain();
    const double exact = transport_derivative(m, polyline(), psi, 0.1).total;
    std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4}, err;
    for (double e : eps) err.push_back(std::abs(transport_fd_lagrangian(m, polyline(), psi, 0.1, e, DifferenceScheme::Forward) - exact));
    EXPECT_GE(oracle::loglog_slope(eps, err), 0.9);
    // First order: the error constant err / eps settles.
    EXPECT_NEAR(err[3] / eps[3], err[2] / eps[2], 0.05 * err[2] / eps[2]);
    // Vertex-mapped image chains agree after splitting along the kinks.
    EXPECT_NEAR(transport_fd_eulerian(m, polyline(), psi, 0.1, 1e-4, DifferenceScheme::Forward),
                transport_fd_lagrangian(m, polyline(), psi, 0.1, 1e-4, DifferenceScheme::Forward), 1e-9);
}

TEST(TransportTest, StaticChainAndConstantCochainHaveZeroDerivative)
{
    auto m = motions::identity(2, Box::cube(2, -1, 2));
    auto psi = Cochain::constant(FormField::constant(MultiIndex({0}, 2)));
    EXPECT_EQ(transport_derivative(m, polyline(), psi, 0.0).total, 0.0);
}

TEST(ReynoldsTest, ExpandingBoxAreaGrowsAtRateTwo)
{
    auto m = motions::expansion(2, Cutoff{Box::cube(2, -0.25, 1.25), 1.0});
    Density one = [](double, const Vec&) { return 1.0; };
    Density zero = [](double, const Vec&) { return 0.0; };
    auto rep = classical_reynolds(m, unit_square(), one, zero, 0.0);
    EXPECT_NEAR(rep.lhs, 2.0, 1e-6);
    EXPECT_NEAR(rep.rhs(), rep.lhs, 1e-6);
    EXPECT_NEAR(rep.volume_term, 0.0, 1e-15);
}

TEST(ReynoldsTest, FluxFormWithVaryingDensity)
{
    auto m = motions::twist(point({0.3, 0.2}), 1.0, 1.2, 1.8);
    Density rho = [](double t, const Vec& x) { return 1.0 + t * x[0] + x[1] * x[1]; };
    Density rho_dot = [](double, const Vec& x) { return x[0]; };
    auto rep = classical_reynolds(m, unit_square(), rho, rho_dot, 0.2, 0, {2});
    EXPECT_NEAR(rep.rhs(), rep.lhs, 1e-6);
}

TEST(ReynoldsTest, ManufacturedBalanceLaw)
{
    // psi = t x dy and xi = t^2 y satisfy psi_dot + d xi = x dy + t^2 dy.
    using P = Polynomial<double>;
    auto x = P::variable(2, 0), y = P::variable(2, 1);
    const MultiIndex dy({1}, 2), none(std::vector<int>{}, 2);
    PolyForm<double> zero1(1, 2), zero0(0, 2);
    auto psi = Cochain::polynomial_in_time({zero1, PolyForm<double>::basis(dy, x)});
    auto xi = Cochain::polynomial_in_time({zero0, zero0, PolyForm<double>::basis(none, y)});
    auto phi = Cochain::polynomial_in_time({PolyForm<double>::basis(dy, x), zero1, PolyForm<double>::basis(dy, P::constant(2, 1.0))});
    auto m = motions::twist(point({0.5, 0.4}), 2.0, 0.8, 1.4);
    auto rep = balance_transport(m, polyline(), psi, xi, phi, 0.25, Box::cube(2, 0, 1));
    EXPECT_LE(rep.balance_residual, 1e-12);
    EXPECT_LE(rep.difference, 1e-10);

    Cochain wrong(1, 2, [=](double) { return FormField::polynomial(zero1); }, [=](double) { return FormField::polynomial(zero1); });
    EXPECT_THROW(balance_transport(m, polyline(), psi, xi, wrong, 0.25, Box::cube(2, 0, 1)), DomainError);
}

TEST(ContinuityTest, TranslationModulusIsLinear)
{
    auto m = motions::translation(point({0.3, 0.1}), plateau());
    const Box k = Box::cube(2, -0.5, 1.5);
    auto family = polynomial_test_family(2, 2, k, 2);
    SeminormOptions so;
    so.resolution = 9;
    std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
    auto mod = continuity_modulus(m, unit_square(), 0.0, eps, family, k, so);
    EXPECT_NEAR(oracle::loglog_slope(eps, mod), 1.0, 0.1);
}

TEST(ContinuityTest, TentModulusDecays)
{
    auto m = motions::tent(point({0.5, 0.5}), 0.6, 0.5, point({1.0, 0.5}));
    const Box k = Box::cube(2, -0.2, 1.2);
    auto family = polynomial_test_family(1, 2, k, 2);
    SeminormOptions so;
    so.resolution = 9;
    auto mod = continuity_modulus(m, polyline(), 0.1, {1e-1, 1e-2, 1e-3}, family, k, so);
    EXPECT_GT(mod[0], mod[1]);
    EXPECT_GT(mod[1], mod[2]);
}

TEST(SharpDerivativeTest, DefectShrinksWithStep)
{
    auto m = motions::twist(point({0.5, 0.4}), 2.0, 0.8, 1.4);
    const Box k = Box::cube(2, 0, 1);
    auto family = polynomial_test_family(1, 2, k, 1);
    SeminormOptions so;
    so.resolution = 9;
    const double coarse = sharp_derivative_defect(m, polyline(), 0.25, 1e-2, family, k, so);
    const double fine = sharp_derivative_defect(m, polyline(), 0.25, 1e-3, family, k, so);
    EXPECT_LT(fine, coarse);
}
