// Walkthrough of the main objects: chains, currents, flat norm, pushforward
// and the transport derivative of a moving current.

#include "currentkit/harness.hpp"

#include <cstdio>

using namespace currentkit;

int main()
{
    // A 0-current on the line that is not a chain: T(f) = f(x0) + f'(x0).
    // The derivative part is the boundary of the 1-vector e1 wedged with a Dirac mass.
    const int n = 1;
    Vec x0 = Vec::Constant(n, 0.5);
    Current dirac = Current::leaf(point_chain(x0));
    VectorField e1 = VectorField::constant(Vec::Ones(n));
    Current t = dirac + boundary(v_wedge(e1, dirac));

    // f(x) = x^3, so T(f) = 0.125 + 0.75.
    using P = Polynomial<double>;
    auto x = P::variable(n, 0);
    PolyForm<double> f = PolyForm<double>::basis(MultiIndex(std::vector<int>{}, n), x * x * x);
    std::printf("T(x^3)                 = %.12g (expected 0.875)\n", evaluate(t, FormField::polynomial(f)));

    // Translate with speed c. d/dt (kappa_t # T)(f) at t = 0 is T(L_v f) = c (f'(x0) + f''(x0)).
    const double c = 0.4;
    VectorField v = VectorField::constant(Vec::Constant(n, c));
    const double analytic = c * (3 * 0.25 + 6 * 0.5);
    const double reynolds = evaluate(reynolds_operator(v, t), FormField::polynomial(f));
    const double h = 1e-4;
    auto moved = [&](double s) {
        return evaluate(pushforward_current(translation_map(Vec::Constant(n, c * s)), t), FormField::polynomial(f));
    };
    const double fd = (moved(h) - moved(-h)) / (2 * h);
    std::printf("transport derivative   = %.12g (Reynolds operator), %.12g (central FD), expected %.12g\n", reynolds, fd,
                analytic);

    // Flat norm of the boundary of the unit square: filling it costs area 1 < perimeter 4.
    const Box unit = Box::cube(2, 0, 1);
    auto complex = SimplicialComplex::freudenthal(unit, 4);
    Chain loop = boundary(box_chain(unit, 4));
    FlatNormResult fl = flat_norm_lp(loop, complex);
    std::printf("mass(dQ) = %.12g, flat(dQ) = %.12g = M(R) %.3g + M(S) %.12g\n", mass(loop), fl.value, fl.mass_r, fl.mass_s);

    // A rotating polyline carrying a time-dependent 1-form.
    Chain poly(1, 2);
    auto pt = [](double a, double b) {
        Vec p(2);
        p << a, b;
        return p;
    };
    poly.add_simplex_points({pt(0.25, 0.25), pt(0.75, 0.5)}, 1.0);
    poly.add_simplex_points({pt(0.75, 0.5), pt(0.5, 0.75)}, 1.0);
    auto m = motions::twist(pt(0.5, 0.4), 2.0, 0.8, 1.4);
    auto X = P::variable(2, 0), Y = P::variable(2, 1);
    auto psi = Cochain::polynomial_in_time(std::vector<PolyForm<double>>{
        PolyForm<double>::basis(MultiIndex({0}, 2), X * Y), PolyForm<double>::basis(MultiIndex({1}, 2), X * X)});
    TransportTerms td = transport_derivative(m, poly, psi, 0.25);
    std::printf("rotating polyline: d/dt X_psi = %.12g\n", td.total);
    for (const auto& row : transport_fd_ladder(m, poly, psi, 0.25, {1e-2, 1e-3, 1e-4}, DifferenceScheme::Central))
        std::printf("  eps %-8g fd %.12g  error %.3e  order %.3g\n", row.eps, row.oracle, row.abs_error, row.order);
    return 0;
}
