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

double brute_force(const Chain& t, const SimplicialComplex& x, int range)
{
    const int r = t.degree();
    return oracle::flat_norm_bruteforce(x.coefficients(t), x.boundary_matrix(r), x.volumes(r), x.volumes(r + 1), range);
}

} // namespace

TEST(LinearProgramTest, SmallProblemWithKnownOptimum)
{
    // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0  ->  (8/5, 6/5).
    LPProblem p;
    p.cost = point({-1, -1});
    p.a_ub = Mat(2, 2);
    p.a_ub << 1, 2, 3, 1;
    p.b_ub = point({4, 6});
    auto s = lp_solve(p);
    ASSERT_EQ(s.status, LPStatus::Optimal);
    EXPECT_NEAR(s.objective, -2.8, 1e-12);
    EXPECT_NEAR(s.x[0], 1.6, 1e-12);
    EXPECT_NEAR(s.x[1], 1.2, 1e-12);
}

TEST(LinearProgramTest, DetectsInfeasibleAndUnbounded)
{
    LPProblem inf;
    inf.cost = point({1});
    inf.a_eq = Mat::Constant(1, 1, 1.0);
    inf.b_eq = point({-1});
    EXPECT_EQ(lp_solve(inf).status, LPStatus::Infeasible);

    LPProblem unb;
    unb.cost = point({-1, 0});
    unb.a_ub = Mat(1, 2);
    unb.a_ub << -1, 1;
    unb.b_ub = point({1});
    EXPECT_EQ(lp_solve(unb).status, LPStatus::Unbounded);
}

TEST(LinearProgramTest, BoxBoundsAreHonoured)
{
    LPProblem p;
    p.cost = point({1, -1});
    p.lower = point({-2, -1});
    p.upper = point({3, 0.5});
    auto s = lp_solve(p);
    ASSERT_EQ(s.status, LPStatus::Optimal);
    EXPECT_NEAR(s.objective, -2.5, 1e-12);
}

TEST(FlatNormTest, UnitSquareBoundaryIsOne)
{
    for (int res : {1, 2, 4, 6}) {
        auto x = SimplicialComplex::freudenthal(Box::cube(2, 0, 1), res);
        auto t = boundary(box_chain(Box::cube(2, 0, 1), res));
        auto f = flat_norm_lp(t, x);
        EXPECT_NEAR(f.value, 1.0, 1e-8) << "res=" << res;
        EXPECT_NEAR(f.mass_r, 0.0, 1e-8);
        EXPECT_NEAR(f.mass_s, 1.0, 1e-8);
        if (res <= 2) {
            EXPECT_NEAR(brute_force(t, x, 1), 1.0, 1e-12);
        }
    }
}

TEST(FlatNormTest, DecompositionIsConsistent)
{
    auto x = SimplicialComplex::freudenthal(Box::cube(2, 0, 1), 4);
    Chain t(1, 2);
    t.add_simplex_points({point({0, 0}), point({0.25, 0})}, 1.0);
    t.add_simplex_points({point({0.25, 0}), point({0.25, 0.25})}, 1.0);
    auto f = flat_norm_lp(t, x);
    // T = R + dS as vectors of coefficients.
    Vec lhs = x.coefficients(t);
    Vec rhs = x.coefficients(f.r) + x.coefficients(boundary(f.s));
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(f.value, f.mass_r + f.mass_s, 1e-12);
    // Cheaper to fill the L-shaped path with half a cell than to keep it.
    EXPECT_NEAR(f.value, 0.25 * std::sqrt(2.0) + 0.03125, 1e-9);
}

TEST(FlatNormTest, PointMassesOnTheLine)
{
    auto x = SimplicialComplex::freudenthal(Box::cube(1, 0, 1), 4);
    Chain t = point_chain(point({0.0})) + (-1.0) * point_chain(point({0.25}));
    EXPECT_NEAR(flat_norm_lp(t, x).value, 0.25, 1e-12);
    Chain far = point_chain(point({0.0})) + (-1.0) * point_chain(point({1.0}));
    EXPECT_NEAR(flat_norm_lp(far, x).value, 1.0, 1e-12);
    Chain single = point_chain(point({0.5}), 3.0);
    EXPECT_NEAR(flat_norm_lp(single, x).value, 3.0, 1e-12);
}

TEST(FlatNormTest, MatchesBruteForceOnSmallComplexes)
{
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> coin(-1, 1);
    auto x = SimplicialComplex::freudenthal(Box::cube(2, 0, 1), 2);
    const auto& faces = x.simplices(1);
    for (int trial = 0; trial < 10; ++trial) {
        Vec c = Vec::Zero(static_cast<Eigen::Index>(faces.size()));
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = coin(rng) * (i % 3 == 0);
        Vec s = Vec::Zero(static_cast<Eigen::Index>(x.simplices(2).size()));
        for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = coin(rng);
        c += x.boundary_matrix(1) * s;
        Chain t = x.chain_from(1, c);
        if (t.empty()) continue;
        const double lp = flat_norm_lp(t, x).value;
        EXPECT_NEAR(lp, brute_force(t, x, 2), 1e-9) << "trial " << trial;
    }
}

TEST(FlatNormTest, NormInequalitiesOnRandomChains)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    auto x = SimplicialComplex::freudenthal(Box::cube(2, 0, 1), 3);
    for (int trial = 0; trial < 10; ++trial) {
        Vec c(static_cast<Eigen::Index>(x.simplices(2).size()));
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = u(rng);
        Chain t = x.chain_from(2, c);
        const double ft = flat_norm_lp(t, x).value;
        const double fbt = flat_norm_lp(boundary(t), x).value;
        EXPECT_LE(ft, mass(t) + 1e-9);
        EXPECT_LE(fbt, ft + 1e-9);
        // Homogeneity.
        EXPECT_NEAR(flat_norm_lp(2.0 * t, x).value, 2.0 * ft, 1e-9);
    }
}

TEST(FlatNormTest, LowerBoundLadderOnSquareBoundary)
{
    const Box k = Box::cube(2, 0, 1);
    auto x = SimplicialComplex::freudenthal(k, 4);
    auto t = boundary(box_chain(k, 4));
    SeminormOptions so;
    so.resolution = 9;
    auto family = polynomial_test_family(1, 2, k, 3);
    const double sharp = sharp_lower_bound(Current::leaf(t), family, k, so).value;
    const double dual = dual_flat_lower_bound(Current::leaf(t), family, k, so).value;
    const double f = flat_norm_lp(t, x).value;
    EXPECT_GT(sharp, 0.0);
    EXPECT_LE(sharp, dual + 1e-6);
    EXPECT_LE(dual, f + 1e-6);
    EXPECT_LE(f, mass(t) + 1e-6);
    // (2x - 1) dy attains the enclosed area.
    EXPECT_NEAR(dual, 1.0, 1e-9);
}

TEST(FlatNormTest, RejectsChainsOffTheComplex)
{
    auto x = SimplicialComplex::freudenthal(Box::cube(2, 0, 1), 2);
    auto t = simplex_chain({point({0.1, 0.1}), point({0.6, 0.1})});
    EXPECT_THROW(flat_norm_lp(t, x), DomainError);
}

TEST(FlatNormTest, ExportedProgramListsEveryVariable)
{
    auto x = SimplicialComplex::freudenthal(Box::cube(2, 0, 1), 1);
    auto t = boundary(box_chain(Box::cube(2, 0, 1), 1));
    auto p = flat_norm_problem(x.coefficients(t), x.boundary_matrix(1), x.volumes(1), x.volumes(2));
    std::ostringstream os;
    write_lp(os, p);
    const std::string s = os.str();
    EXPECT_NE(s.find("Minimize"), std::string::npos);
    EXPECT_NE(s.find("x" + std::to_string(p.num_vars())), std::string::npos);
}
