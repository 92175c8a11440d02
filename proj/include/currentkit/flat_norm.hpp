#pragma once

// Simplicial flat norm by linear programming, and certified lower bounds for
// the flat and sharp norms of arbitrary currents by duality.

#include "complex.hpp"
#include "current.hpp"
#include "seminorms.hpp"

namespace currentkit {

struct FlatNormResult {
    double value = 0.0;
    double mass_r = 0.0;
    double mass_s = 0.0;
    Chain r; // T - dS
    Chain s; // the (r+1)-chain
    LPStatus status = LPStatus::Optimal;
    int iterations = 0;
};

/// Assembles min sum vol_i |t_i - (B s)_i| + sum vol_j |s_j| with the split
/// r = r+ - r-, s = s+ - s-. Variable order: r+, r-, s+, s-.
inline LPProblem flat_norm_problem(const Vec& t, const Mat& b, const Vec& face_vol, const Vec& cell_vol)
{
    const Eigen::Index nf = t.size(), nc = cell_vol.size();
    LPProblem p;
    p.cost.resize(2 * nf + 2 * nc);
    p.cost << face_vol, face_vol, cell_vol, cell_vol;
    p.a_eq = Mat::Zero(nf, 2 * nf + 2 * nc);
    p.a_eq.block(0, 0, nf, nf).setIdentity();
    p.a_eq.block(0, nf, nf, nf) = -Mat::Identity(nf, nf);
    if (nc) {
        p.a_eq.block(0, 2 * nf, nf, nc) = b;
        p.a_eq.block(0, 2 * nf + nc, nf, nc) = -b;
    }
    p.b_eq = t;
    return p;
}

/// F(T) on the complex: inf M(T - dS) + M(S) over (r+1)-chains S of X.
inline FlatNormResult flat_norm_lp(const Chain& t, const SimplicialComplex& x, const LPOptions& opts = {})
{
    const int r = t.degree();
    FlatNormResult res;
    Vec tc = x.coefficients(t);
    Vec fv = x.volumes(r);
    const auto& cells = x.simplices(r + 1);
    Vec cv = cells.empty() ? Vec() : x.volumes(r + 1);
    Mat b = cells.empty() ? Mat() : x.boundary_matrix(r);
    const Eigen::Index nf = tc.size(), nc = cv.size();
    if (tc.cwiseAbs().maxCoeff() == 0.0 || nf == 0) {
        res.r = Chain(r, x.ambient());
        res.s = Chain(std::min(r + 1, x.ambient()), x.ambient());
        return res;
    }
    LPSolution sol = lp_solve(flat_norm_problem(tc, b, fv, cv), opts);
    res.status = sol.status;
    res.iterations = sol.iterations;
    if (sol.status != LPStatus::Optimal) throw NumericalError(std::string("flat norm LP failed: ") + to_string(sol.status));
    Vec rc = sol.x.segment(0, nf) - sol.x.segment(nf, nf);
    Vec sc = nc ? Vec(sol.x.segment(2 * nf, nc) - sol.x.segment(2 * nf + nc, nc)) : Vec();
    res.value = sol.objective;
    res.mass_r = fv.dot(rc.cwiseAbs());
    res.mass_s = nc ? cv.dot(sc.cwiseAbs()) : 0.0;
    res.r = x.chain_from(r, rc, 1e-12);
    res.s = nc ? x.chain_from(r + 1, sc, 1e-12) : Chain(std::min(r + 1, x.ambient()), x.ambient());
    return res;
}

/// Centered, scaled monomials times basis covectors up to the given degree:
/// ((x - c) / h)^alpha dx^lambda on the box K.
inline std::vector<FormField> polynomial_test_family(int r, int n, const Box& k, int max_degree = 3)
{
    std::vector<FormField> out;
    const Vec c = k.center();
    const Vec h = 0.5 * (k.upper - k.lower);
    PolyMap<double> u;
    for (int i = 0; i < n; ++i)
        u.push_back((Polynomial<double>::variable(n, i) - Polynomial<double>::constant(n, c[i])) * (1.0 / h[i]));
    std::vector<Exponent> exps;
    Exponent e(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int var, int left) {
        if (var == n) {
            exps.push_back(e);
            return;
        }
        for (int p = 0; p <= left; ++p) {
            e[static_cast<std::size_t>(var)] = p;
            rec(var + 1, left - p);
        }
        e[static_cast<std::size_t>(var)] = 0;
    };
    rec(0, max_degree);
    for (const auto& ex : exps) {
        auto mono = Polynomial<double>::monomial(n, ex, 1.0).compose(u);
        for (const auto& idx : MultiIndex::all(r, n)) out.push_back(FormField::polynomial(PolyForm<double>::basis(idx, mono)));
    }
    return out;
}

struct DualBound {
    double value = 0.0;
    std::size_t best = 0;
};

namespace detail {

template <class Norm>
DualBound dual_bound(const Current& t, const std::vector<FormField>& family, Norm norm, const EvalOptions& eo)
{
    if (family.empty()) throw Error("dual bound needs a nonempty test family");
    DualBound b;
    for (std::size_t i = 0; i < family.size(); ++i) {
        double d = norm(family[i]);
        if (!(d > 0.0)) continue;
        double v = std::abs(evaluate(t, family[i], eo)) / d;
        if (v > b.value) {
            b.value = v;
            b.best = i;
        }
    }
    return b;
}

} // namespace detail

/// max |T(phi)| / F_K(phi) over the family: a lower bound for F_K(T).
inline DualBound dual_flat_lower_bound(const Current& t, const std::vector<FormField>& family, const Box& k,
                                       const SeminormOptions& so = {}, const EvalOptions& eo = {})
{
    return detail::dual_bound(t, family, [&](const FormField& f) { return seminorm_flat(f, k, so).value; }, eo);
}

/// max |T(phi)| / S_K(phi) over the family: a lower bound for the sharp norm.
inline DualBound sharp_lower_bound(const Current& t, const std::vector<FormField>& family, const Box& k,
                                   const SeminormOptions& so = {}, const EvalOptions& eo = {})
{
    return detail::dual_bound(t, family, [&](const FormField& f) { return seminorm_sharp(f, k, so).value; }, eo);
}

} // namespace currentkit
